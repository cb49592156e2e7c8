#ifndef FBSDE_CONFIG_HPP
#define FBSDE_CONFIG_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include "fbsde/model.hpp"

namespace fbsde {

// Config file schema (all coefficient choices go through the preset
// registry so a config reproduces the run exactly):
//
// {
//   "preset_id": "cole_hopf",
//   "params":    { "sigma": 1.0, "x0": 0.0 },
//   "constants": { "K_a": ..., "L_a": ..., "M_g": ..., "K_g": ..., "K_q": ...,
//                  "K_f": ..., "L_fz": ..., "K_t": ..., "lambda_max": ..., "m_y": ... },
//   "jump_model": { "variant": "cox", "lambda0": 0.5 }
//                 or { "variant": "uniform_density", "a": 0.0, "b": 2.0 },
//   "horizon": 1.0
// }
//
// "constants" entries are optional overrides of the preset defaults.

inline nlohmann::json to_json(const ProblemSpec& spec) {
    nlohmann::json j;
    j["preset_id"] = spec.coeffs.preset_id;
    j["params"] = spec.coeffs.params;
    const AssumptionConstants& a = spec.consts;
    j["constants"] = {{"K_a", a.K_a},   {"L_a", a.L_a},   {"M_g", a.M_g},
                      {"K_g", a.K_g},   {"K_q", a.K_q},   {"K_f", a.K_f},
                      {"L_fz", a.L_fz}, {"K_t", a.K_t},   {"lambda_max", a.lambda_max},
                      {"m_y", a.m_y}};
    if (auto* d = std::get_if<IndependentDensity>(&spec.jump.variant)) {
        j["jump_model"] = {{"variant", "uniform_density"}, {"a", d->a}, {"b", d->b}};
    } else {
        j["jump_model"] = {{"variant", "cox"},
                           {"lambda0", std::get<CoxConstantIntensity>(spec.jump.variant).lambda0}};
    }
    j["horizon"] = a.T;
    return j;
}

inline ProblemSpec spec_from_json(const nlohmann::json& j) {
    std::map<std::string, double> params;
    if (j.contains("params"))
        for (auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();

    ProblemSpec spec = make_preset(j.at("preset_id").get<std::string>(), params);

    if (j.contains("horizon")) spec.consts.T = j.at("horizon").get<double>();
    if (j.contains("constants")) {
        const auto& c = j.at("constants");
        auto set = [&c](const char* k, double& field) {
            if (c.contains(k)) field = c.at(k).get<double>();
        };
        set("K_a", spec.consts.K_a);
        set("L_a", spec.consts.L_a);
        set("M_g", spec.consts.M_g);
        set("K_g", spec.consts.K_g);
        set("K_q", spec.consts.K_q);
        set("K_f", spec.consts.K_f);
        set("L_fz", spec.consts.L_fz);
        set("K_t", spec.consts.K_t);
        set("lambda_max", spec.consts.lambda_max);
        set("m_y", spec.consts.m_y);
    }
    if (j.contains("jump_model")) {
        const auto& jm = j.at("jump_model");
        std::string variant = jm.at("variant").get<std::string>();
        if (variant == "cox") {
            spec.jump = JumpModel(CoxConstantIntensity{jm.at("lambda0").get<double>()});
        } else if (variant == "uniform_density") {
            spec.jump = JumpModel(
                IndependentDensity{jm.at("a").get<double>(), jm.at("b").get<double>()});
        } else {
            throw Error("unknown jump_model variant: " + variant);
        }
    }
    spec.consts.validate();
    spec.jump.validate(spec.consts.lambda_max);
    return spec;
}

inline ProblemSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return spec_from_json(j);
}

}  // namespace fbsde

#endif
