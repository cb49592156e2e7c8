#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbsde/fbsde.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    if (out.empty()) throw fbsde::Error("empty n list");
    return out;
}

void print_validation(const fbsde::ValidationReport& report) {
    for (const auto& c : report.checks) {
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name
                  << "  worst_ratio=" << c.worst_ratio << '\n';
        if (!c.pass && c.witness) {
            const auto& w = *c.witness;
            std::cout << "      witness: t=" << w.t << " x=" << w.x << " y=" << w.y
                      << " z=" << w.z << " u=" << w.u << " / t'=" << w.t2 << " x'=" << w.x2
                      << " y'=" << w.y2 << " z'=" << w.z2 << " u'=" << w.u2 << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decomposition solver for jump-coupled quadratic FBSDEs"};
    app.require_subcommand(1);

    std::string config_path, preset_name, backend_str = "lsmc", out_path = "report.csv";
    std::string n_list = "8,16,32,64,128";
    std::string dump_paths, dump_solution;
    int n_single = 64, n_ref = 1024;
    long n_paths = 100000;
    std::uint64_t seed = 42;

    auto* validate = app.add_subcommand("validate", "probe the standing assumptions");
    validate->add_option("--config", config_path, "JSON config")->required();

    auto* bounds = app.add_subcommand("bounds", "print the closed-form gradient and Z bounds");
    bounds->add_option("--config", config_path, "JSON config")->required();

    auto* oracle = app.add_subcommand("oracle", "print the reference value for a preset");
    oracle->add_option("--preset", preset_name, "preset id")->required();

    auto* run = app.add_subcommand("run", "single-grid solve");
    run->add_option("--config", config_path, "JSON config")->required();
    run->add_option("--n", n_single, "time steps");
    run->add_option("--paths", n_paths, "simulated paths");
    run->add_option("--seed", seed, "RNG seed");
    run->add_option("--backend", backend_str, "quadrature or lsmc");
    run->add_option("--dump-paths", dump_paths, "CSV dump of simulated forward paths");
    run->add_option("--dump-solution", dump_solution, "CSV dump of the recombined solution");

    auto* conv = app.add_subcommand("convergence", "mesh-refinement study");
    conv->add_option("--config", config_path, "JSON config")->required();
    conv->add_option("--n", n_list, "comma-separated step counts");
    conv->add_option("--paths", n_paths, "simulated paths");
    conv->add_option("--seed", seed, "RNG seed");
    conv->add_option("--backend", backend_str, "quadrature or lsmc");
    conv->add_option("--n-ref", n_ref, "reference grid steps");
    conv->add_option("--out", out_path, "report CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            fbsde::ProblemSpec spec = fbsde::load_spec(config_path);
            fbsde::ProbePlan plan;
            plan.t_hi = spec.consts.T;
            auto report = fbsde::validate_assumptions(spec.coeffs, spec.consts, plan);
            print_validation(report);
            return report.all_pass() ? 0 : 1;
        }

        if (*bounds) {
            fbsde::ProblemSpec spec = fbsde::load_spec(config_path);
            auto b = fbsde::gradient_bound_catalog(spec.consts);
            std::cout << "grad_x0        " << b.grad_x0 << '\n'
                      << "grad_x1_theta  " << b.grad_x1_theta << '\n'
                      << "grad_x1_x      " << b.grad_x1_x << '\n'
                      << "grad_y1_theta  " << b.grad_y1_theta << '\n'
                      << "grad_y1_diag   " << b.grad_y1_diag << '\n'
                      << "grad_y0        " << b.grad_y0 << '\n'
                      << "z1_bound       " << b.z1_bound << '\n'
                      << "z0_bound       " << b.z0_bound << '\n'
                      << "radius         " << fbsde::truncation_radius(spec.consts) << '\n';
            return 0;
        }

        if (*oracle) {
            fbsde::OracleResult r = fbsde::oracle_for_preset(preset_name);
            std::cout << "preset " << preset_name << ": " << r.description << '\n'
                      << "y0 = " << fbsde::detail::fmt(r.y0) << '\n';
            if (r.has_z) std::cout << "z0 = " << fbsde::detail::fmt(r.z0) << '\n';
            return 0;
        }

        if (*run) {
            fbsde::ProblemSpec spec = fbsde::load_spec(config_path);
            fbsde::Backend backend = fbsde::backend_from_string(backend_str);
            fbsde::TimeGrid grid = fbsde::TimeGrid::uniform(spec.consts.T, n_single);
            double radius = fbsde::truncation_radius(spec.consts);
            fbsde::CoefficientSet tc = fbsde::with_truncated_generator(spec.coeffs, radius);

            double y0;
            fbsde::PathBundle paths =
                fbsde::PathBundle::build(tc, spec.jump, grid, spec.x0, static_cast<int>(n_paths),
                                         seed);
            std::vector<fbsde::SchemeTrajectory> trs;
            bool want_dump = !dump_solution.empty();

            if (backend == fbsde::Backend::Quadrature) {
                fbsde::TableSolverConfig cfg;
                cfg.kq = spec.consts.K_q;
                fbsde::SpatialDomain dom = fbsde::make_domain(tc, grid, spec.x0, cfg.domain_c);
                fbsde::TableScheme scheme = fbsde::solve_tables(tc, grid, dom, cfg);
                y0 = scheme.y0[0](spec.x0);
                if (want_dump)
                    for (int p = 0; p < paths.n_paths(); ++p)
                        trs.push_back(fbsde::trajectory_from_tables(scheme, tc, paths, p));
            } else {
                fbsde::RegressionBasis basis;
                fbsde::LsmcCondExp estimator(basis);
                fbsde::PathSolverOptions po;
                po.kq = spec.consts.K_q;
                po.record_post_jump = want_dump;
                fbsde::PathScheme scheme =
                    fbsde::solve_paths(tc, grid, paths.dW, paths.tau, spec.x0, estimator, po);
                std::vector<double> y0s(scheme.y0.size());
                for (std::size_t p = 0; p < scheme.y0.size(); ++p) y0s[p] = scheme.y0[p][0];
                y0 = fbsde::stable_sum(std::move(y0s)) / static_cast<double>(scheme.y0.size());
                if (want_dump)
                    for (int p = 0; p < paths.n_paths(); ++p)
                        trs.push_back(
                            fbsde::trajectory_from_paths(scheme, grid, paths.tau[p], p));
            }

            std::cout << "y0 = " << fbsde::detail::fmt(y0) << '\n';
            if (!dump_paths.empty()) fbsde::write_path_dump(paths, dump_paths);
            if (want_dump) fbsde::write_solution_dump(trs, grid, dump_solution);
            return 0;
        }

        if (*conv) {
            fbsde::ProblemSpec spec = fbsde::load_spec(config_path);
            fbsde::Backend backend = fbsde::backend_from_string(backend_str);
            fbsde::HarnessOptions opt;
            opt.n_ref = n_ref;
            fbsde::StudyResult study = fbsde::run_convergence_study(
                spec, parse_int_list(n_list), n_paths, seed, backend, opt);
            fbsde::emit_report(study.reports, study.has_rate ? &study.rate : nullptr,
                               fbsde::to_json(spec), out_path);
            for (const auto& r : study.reports)
                std::cout << "n=" << r.n << "  total=" << r.total << "  runtime_s=" << r.runtime_s
                          << '\n';
            if (study.has_rate)
                std::cout << "rate slope = " << study.rate.slope
                          << (study.rate.monotone ? "" : "  (totals not monotone)") << '\n';
            return fbsde::report_gates_pass(study) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
