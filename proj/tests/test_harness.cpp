#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fbsde/harness.hpp"
#include "fbsde/oracles.hpp"

using namespace fbsde;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("trivial preset has exactly zero errors") {
    // frozen state: everything agrees bitwise across grids
    ProblemSpec spec = make_preset("zero", {{"sigma", 0.0}});
    HarnessOptions opt;
    opt.n_ref = 64;
    opt.table.m_nodes = 51;
    FineReference ref = build_reference(spec, opt);
    ErrorReport r = run_experiment(spec, 8, 200, 7, Backend::Quadrature, ref, opt);
    REQUIRE(r.err_x == 0.0);
    REQUIRE(r.err_y == 0.0);
    REQUIRE(r.err_z == 0.0);
    REQUIRE(r.err_u == 0.0);
    REQUIRE(r.total == 0.0);

    // with a diffusing state the value-side errors are still exactly zero;
    // err_x picks up real Brownian oscillation inside the coarse cells
    // (the coarse path is held at its left node) and shrinks under refinement
    ProblemSpec diff = make_preset("zero");
    FineReference ref2 = build_reference(diff, opt);
    ErrorReport r2 = run_experiment(diff, 8, 200, 7, Backend::Quadrature, ref2, opt);
    REQUIRE(r2.err_y == 0.0);
    REQUIRE(r2.err_z == 0.0);
    REQUIRE(r2.err_u == 0.0);
    REQUIRE(r2.err_x > 0.0);
    ErrorReport r3 = run_experiment(diff, 32, 200, 7, Backend::Quadrature, ref2, opt);
    REQUIRE(r3.err_x < r2.err_x);
}

TEST_CASE("self-reference has exactly zero errors") {
    ProblemSpec spec = make_preset("cole_hopf");
    HarnessOptions opt;
    opt.n_ref = 32;
    opt.table.m_nodes = 101;
    FineReference ref = build_reference(spec, opt);
    ErrorReport r = run_experiment(spec, 32, 300, 11, Backend::Quadrature, ref, opt);
    REQUIRE(r.total == 0.0);
}

TEST_CASE("errors decrease as the grid refines") {
    ProblemSpec spec = make_preset("linear_jump");
    HarnessOptions opt;
    opt.n_ref = 256;
    opt.table.m_nodes = 101;
    FineReference ref = build_reference(spec, opt);
    ErrorReport c16 = run_experiment(spec, 16, 2000, 42, Backend::Quadrature, ref, opt);
    ErrorReport c64 = run_experiment(spec, 64, 2000, 42, Backend::Quadrature, ref, opt);
    REQUIRE(c16.total > 0.0);
    REQUIRE(c64.total < c16.total);
    REQUIRE(c64.total == c64.err_x + c64.err_y + c64.err_z + c64.err_u);
}

TEST_CASE("experiments are deterministic given the seed") {
    ProblemSpec spec = make_preset("linear_jump");
    HarnessOptions opt;
    opt.n_ref = 64;
    opt.table.m_nodes = 101;
    FineReference ref = build_reference(spec, opt);
    ErrorReport a = run_experiment(spec, 16, 500, 9, Backend::Quadrature, ref, opt);
    ErrorReport b = run_experiment(spec, 16, 500, 9, Backend::Quadrature, ref, opt);
    REQUIRE(a.err_x == b.err_x);
    REQUIRE(a.err_y == b.err_y);
    REQUIRE(a.err_z == b.err_z);
    REQUIRE(a.err_u == b.err_u);
}

TEST_CASE("rate fit nails exact power laws") {
    std::vector<ErrorReport> reports;
    for (int n : {8, 16, 32, 64, 128}) {
        ErrorReport r;
        r.n = n;
        r.mesh = 1.0 / n;
        r.total = 3.0 * r.mesh;  // K |pi| exactly
        reports.push_back(r);
    }
    RateFit fit = estimate_rate(reports);
    REQUIRE(fit.slope == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(fit.monotone);
    for (double res : fit.residuals) REQUIRE(std::abs(res) < 1e-12);

    for (auto& r : reports) r.total = 3.0 * r.mesh * r.mesh;
    REQUIRE(estimate_rate(reports).slope == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("rate fit needs four points and flags non-monotone totals") {
    std::vector<ErrorReport> reports(3);
    REQUIRE_THROWS_AS(estimate_rate(reports), Error);

    std::vector<ErrorReport> bad;
    for (int n : {8, 16, 32, 64}) {
        ErrorReport r;
        r.n = n;
        r.mesh = 1.0 / n;
        r.total = 1.0 / n;
        bad.push_back(r);
    }
    bad[2].total = 1.0;  // spike
    REQUIRE_FALSE(estimate_rate(bad).monotone);
}

TEST_CASE("report emission: header, row count, byte stability") {
    std::vector<ErrorReport> reports;
    ErrorReport r;
    r.n = 8;
    r.mesh = 0.125;
    r.err_x = 1e-3;
    r.err_y = 2e-3;
    r.err_z = 3e-3;
    r.err_u = 4e-4;
    r.total = r.err_x + r.err_y + r.err_z + r.err_u;
    r.n_paths = 100;
    r.seed = 42;
    r.runtime_s = 1.5;
    reports.push_back(r);

    std::string path = "test_report_tmp.csv";
    emit_report({}, nullptr, nlohmann::json::object(), path);
    REQUIRE(slurp(path) == "n,mesh,err_x,err_y,err_z,err_u,total,n_paths,seed,runtime_s\n");

    emit_report(reports, nullptr, nlohmann::json::object(), path);
    std::string first = slurp(path);
    REQUIRE(first.find("\n8,0.125,") != std::string::npos);
    REQUIRE(first.find(",100,42,") != std::string::npos);
    emit_report(reports, nullptr, nlohmann::json::object(), path);
    REQUIRE(slurp(path) == first);

    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}

TEST_CASE("pipeline reruns produce byte-identical reports modulo runtime") {
    ProblemSpec spec = make_preset("linear_jump");
    HarnessOptions opt;
    opt.n_ref = 64;
    opt.table.m_nodes = 101;
    auto run_once = [&](const std::string& path) {
        StudyResult study =
            run_convergence_study(spec, {8, 16, 32, 64}, 300, 42, Backend::Quadrature, opt);
        emit_report(with_zero_runtime(study.reports), study.has_rate ? &study.rate : nullptr,
                    to_json(spec), path);
    };
    run_once("rep_a.csv");
    run_once("rep_b.csv");
    REQUIRE(slurp("rep_a.csv") == slurp("rep_b.csv"));
    REQUIRE(slurp("rep_a.csv.json") == slurp("rep_b.csv.json"));
    for (const char* f : {"rep_a.csv", "rep_b.csv", "rep_a.csv.json", "rep_b.csv.json"})
        std::remove(f);
}

TEST_CASE("study gates and sidecar rate") {
    ProblemSpec spec = make_preset("cole_hopf");
    HarnessOptions opt;
    opt.n_ref = 128;
    opt.table.m_nodes = 101;
    StudyResult study =
        run_convergence_study(spec, {8, 16, 32, 64}, 1000, 42, Backend::Quadrature, opt);
    REQUIRE(study.has_rate);
    REQUIRE(report_gates_pass(study));
    REQUIRE(study.rate.slope > 0.5);
}

TEST_CASE("budget violations raise") {
    ProblemSpec spec = make_preset("cole_hopf");
    HarnessOptions opt;
    opt.n_ref = 64;
    opt.table.m_nodes = 101;
    opt.budget_s = 1e-9;
    REQUIRE_THROWS_AS(
        run_convergence_study(spec, {8, 16}, 100, 1, Backend::Quadrature, opt), Error);
}

TEST_CASE("lsmc backend runs the linear jump preset sensibly") {
    ProblemSpec spec = make_preset("linear_jump");
    HarnessOptions opt;
    opt.n_ref = 64;
    opt.table.m_nodes = 101;
    FineReference ref = build_reference(spec, opt);
    ErrorReport r = run_experiment(spec, 16, 2000, 42, Backend::Lsmc, ref, opt);
    REQUIRE(std::isfinite(r.total));
    REQUIRE(r.total >= 0.0);
    REQUIRE(r.err_u > 0.0);  // the jump coupling is active pre-jump
}

TEST_CASE("path and solution dumps have the fixed column layout") {
    ProblemSpec spec = make_preset("linear_jump");
    TimeGrid grid = TimeGrid::uniform(1.0, 4);
    PathBundle paths = PathBundle::build(spec.coeffs, spec.jump, grid, 0.0, 3, 5);
    write_path_dump(paths, "dump_paths_tmp.csv");
    std::string pd = slurp("dump_paths_tmp.csv");
    REQUIRE(pd.rfind("path_id,t_i,x0,tau\n", 0) == 0);
    REQUIRE(std::count(pd.begin(), pd.end(), '\n') == 1 + 3 * 5);

    CoefficientSet tc = with_truncated_generator(spec.coeffs, truncation_radius(spec.consts));
    SpatialDomain dom = make_domain(tc, grid, 0.0, 6.0);
    TableSolverConfig cfg;
    cfg.kq = spec.consts.K_q;
    TableScheme scheme = solve_tables(tc, grid, dom, cfg);
    std::vector<SchemeTrajectory> trs;
    for (int p = 0; p < 3; ++p) trs.push_back(trajectory_from_tables(scheme, tc, paths, p));
    write_solution_dump(trs, grid, "dump_sol_tmp.csv");
    std::string sd = slurp("dump_sol_tmp.csv");
    REQUIRE(sd.rfind("path_id,t_i,y,z,u,jumped\n", 0) == 0);
    REQUIRE(std::count(sd.begin(), sd.end(), '\n') == 1 + 3 * 5);
    std::remove("dump_paths_tmp.csv");
    std::remove("dump_sol_tmp.csv");
}
