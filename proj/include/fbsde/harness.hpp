#ifndef FBSDE_HARNESS_HPP
#define FBSDE_HARNESS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbsde/backward.hpp"
#include "fbsde/bounds.hpp"
#include "fbsde/condexp.hpp"
#include "fbsde/config.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/model.hpp"

namespace fbsde {

// Squared-error decomposition of one coarse grid against the coupled fine
// reference: err_x = E sup_t |dX|^2, err_y = sup_t E |dY|^2, err_z and
// err_u are left-endpoint time integrals on the fine grid, err_u carries
// the intensity weight and the pre-jump cut.
struct ErrorReport {
    int n = 0;
    double mesh = 0;
    double err_x = 0, err_y = 0, err_z = 0, err_u = 0, total = 0;
    long n_paths = 0;
    std::uint64_t seed = 0;
    double runtime_s = 0;
};

struct RateFit {
    double slope = 0;      // of log(total) against log(mesh); 1 is the target
    double intercept = 0;
    std::vector<double> residuals;
    bool monotone = true;  // totals non-increasing in n
};

enum class Backend { Quadrature, Lsmc };

inline Backend backend_from_string(const std::string& s) {
    if (s == "quadrature") return Backend::Quadrature;
    if (s == "lsmc") return Backend::Lsmc;
    throw Error("unknown backend: " + s + " (expected quadrature or lsmc)");
}

struct HarnessOptions {
    int n_ref = 1024;
    TableSolverConfig table;
    RegressionBasis basis;
    double radius_override = -1.0;  // < 0 means: use the closed-form radius
    double budget_s = 0.0;          // 0 disables the per-study budget
};

inline double effective_radius(const ProblemSpec& spec, const HarnessOptions& opt) {
    return opt.radius_override >= 0.0 ? opt.radius_override : truncation_radius(spec.consts);
}

// Fine-grid solution shared by every coarse run of a study.
struct FineReference {
    TimeGrid grid;
    SpatialDomain domain;
    TableScheme scheme;
    CoefficientSet coeffs;  // generator already clipped
};

inline FineReference build_reference(const ProblemSpec& spec, const HarnessOptions& opt) {
    TimeGrid grid = TimeGrid::uniform(spec.consts.T, opt.n_ref);
    CoefficientSet tc = with_truncated_generator(spec.coeffs, effective_radius(spec, opt));
    SpatialDomain dom = make_domain(tc, grid, spec.x0, opt.table.domain_c);
    TableSolverConfig cfg = opt.table;
    cfg.kq = spec.consts.K_q;
    TableScheme scheme = solve_tables(tc, grid, dom, cfg);
    return FineReference{grid, dom, std::move(scheme), std::move(tc)};
}

namespace detail {

// Fine Brownian increments for one path, regenerated from the counters.
inline std::vector<double> fine_increments(const TimeGrid& fine, int path, std::uint64_t seed) {
    int nf = fine.steps();
    std::vector<double> dW(nf);
    for (int s = 1; s <= nf; ++s)
        dW[s - 1] = std::sqrt(fine.dt(s)) * rng::normal(seed, rng::kBrownianStream, path, s);
    return dW;
}

// Coarse increments as block sums of the fine ones (common-noise coupling).
inline std::vector<double> block_sums(const std::vector<double>& fine_dw, int ratio) {
    int n = static_cast<int>(fine_dw.size()) / ratio;
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < ratio; ++j) out[i] += fine_dw[i * ratio + j];
    return out;
}

}  // namespace detail

// One coarse-versus-reference experiment. All randomness is a pure function
// of (seed, path, counter); tau is shared across grids.
inline ErrorReport run_experiment(const ProblemSpec& spec, int n, long n_paths,
                                  std::uint64_t seed, Backend backend, const FineReference& ref,
                                  const HarnessOptions& opt) {
    auto t_start = std::chrono::steady_clock::now();
    require(n >= 1 && n_paths >= 1, "need positive n and path count");
    int nf = ref.grid.steps();
    require(nf % n == 0, "reference grid must refine the coarse grid");
    int ratio = nf / n;
    TimeGrid grid_c = TimeGrid::uniform(spec.consts.T, n);
    if (spec.consts.K_q * grid_c.mesh() >= 1.0)
        throw MeshTooCoarseError("K_q * mesh >= 1 on the coarse grid");

    const CoefficientSet& tc = ref.coeffs;
    int np = static_cast<int>(n_paths);

    // jump times, one per path, shared with the reference
    std::vector<double> tau(np);
    for (int p = 0; p < np; ++p)
        tau[p] = spec.jump.sample(rng::uniform(seed, rng::kJumpStream, p, 0));

    // coarse-side solve
    TableScheme coarse_tables;
    PathScheme coarse_paths;
    Matrix dWc;
    if (backend == Backend::Quadrature) {
        TableSolverConfig cfg = opt.table;
        cfg.kq = spec.consts.K_q;
        coarse_tables = solve_tables(tc, grid_c, ref.domain, cfg);
    } else {
        dWc.resize(np);
        for (int p = 0; p < np; ++p)
            dWc[p] = detail::block_sums(detail::fine_increments(ref.grid, p, seed), ratio);
        LsmcCondExp estimator(opt.basis);
        PathSolverOptions po;
        po.kq = spec.consts.K_q;
        coarse_paths = solve_paths(tc, grid_c, dWc, tau, spec.x0, estimator, po);
    }

    // pathwise error accumulation on the fine nodes
    std::vector<double> cx(np), cz(np), cu(np);
    std::vector<KahanAccumulator> acc_y(nf + 1);
    for (int p = 0; p < np; ++p) {
        std::vector<double> dWf = detail::fine_increments(ref.grid, p, seed);
        std::vector<double> dWcp =
            backend == Backend::Quadrature ? detail::block_sums(dWf, ratio) : dWc[p];
        std::vector<double> x0f = euler_x0_path(tc, ref.grid, dWf, spec.x0);
        std::vector<double> x0c = euler_x0_path(tc, grid_c, dWcp, spec.x0);

        SchemeTrajectory trf =
            trajectory_from_tables(ref.scheme, tc, ref.grid, dWf, x0f, spec.x0, tau[p]);
        SchemeTrajectory trc =
            backend == Backend::Quadrature
                ? trajectory_from_tables(coarse_tables, tc, grid_c, dWcp, x0c, spec.x0, tau[p])
                : trajectory_from_paths(coarse_paths, grid_c, tau[p], p);

        std::vector<double> x1f, x1c;
        if (trf.k >= 0) x1f = euler_x1_path(tc, ref.grid, dWf, spec.x0, trf.k);
        if (trc.k >= 0) x1c = euler_x1_path(tc, grid_c, dWcp, spec.x0, trc.k);

        double max_dx2 = 0.0;
        KahanAccumulator sz, su;
        for (int s = 0; s <= nf; ++s) {
            double t = ref.grid.node(s);
            int ic = s / ratio;
            double xf = (t < tau[p] || trf.k < 0) ? x0f[s] : x1f[s];
            double xc = (t < tau[p] || trc.k < 0) ? x0c[ic] : x1c[ic];
            double dx = xc - xf;
            max_dx2 = std::max(max_dx2, dx * dx);

            double dy = trc.Y(grid_c, t) - trf.Y(ref.grid, t);
            acc_y[s].add(dy * dy);

            if (s < nf) {
                double dtf = ref.grid.dt(s + 1);
                double dz = trc.Z(grid_c, t) - trf.Z(ref.grid, t);
                sz.add(dz * dz * dtf);
                if (t <= tau[p]) {
                    double lam = spec.jump.intensity(t, true);
                    double du = trc.U(grid_c, t) - trf.U(ref.grid, t);
                    su.add(lam * du * du * dtf);
                }
            }
        }
        cx[p] = max_dx2;
        cz[p] = sz.value();
        cu[p] = su.value();
    }

    ErrorReport r;
    r.n = n;
    r.mesh = grid_c.mesh();
    r.n_paths = n_paths;
    r.seed = seed;
    r.err_x = stable_sum(std::move(cx)) / np;
    double ymax = 0.0;
    for (auto& a : acc_y) ymax = std::max(ymax, a.value());
    r.err_y = ymax / np;
    r.err_z = stable_sum(std::move(cz)) / np;
    r.err_u = stable_sum(std::move(cu)) / np;
    r.total = r.err_x + r.err_y + r.err_z + r.err_u;
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return r;
}

// Least-squares fit of log(total) against log(mesh).
inline RateFit estimate_rate(const std::vector<ErrorReport>& reports) {
    require(reports.size() >= 4, "rate fit needs at least 4 mesh sizes");
    std::size_t m = reports.size();
    std::vector<double> lx(m), ly(m);
    for (std::size_t i = 0; i < m; ++i) {
        require(reports[i].total > 0, "rate fit needs positive totals");
        lx[i] = std::log(reports[i].mesh);
        ly[i] = std::log(reports[i].total);
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residuals.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    for (std::size_t i = 1; i < m; ++i)
        if (reports[i].n > reports[i - 1].n && reports[i].total > reports[i - 1].total)
            fit.monotone = false;
    return fit;
}

struct StudyResult {
    std::vector<ErrorReport> reports;
    RateFit rate;
    bool has_rate = false;
};

inline StudyResult run_convergence_study(const ProblemSpec& spec, const std::vector<int>& ns,
                                         long n_paths, std::uint64_t seed, Backend backend,
                                         const HarnessOptions& opt) {
    auto t_start = std::chrono::steady_clock::now();
    FineReference ref = build_reference(spec, opt);
    StudyResult out;
    for (int n : ns) {
        out.reports.push_back(run_experiment(spec, n, n_paths, seed, backend, ref, opt));
        if (opt.budget_s > 0) {
            double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
            if (elapsed > opt.budget_s) throw Error("study exceeded its runtime budget");
        }
    }
    bool fit_ok = out.reports.size() >= 4;
    for (const auto& r : out.reports)
        if (!(r.total > 0)) fit_ok = false;  // exact agreement leaves nothing to fit
    if (fit_ok) {
        out.rate = estimate_rate(out.reports);
        out.has_rate = true;
    }
    return out;
}

// All structural gates a finished study must clear.
inline bool report_gates_pass(const StudyResult& study) {
    for (const auto& r : study.reports) {
        if (!(r.err_x >= 0 && r.err_y >= 0 && r.err_z >= 0 && r.err_u >= 0)) return false;
        if (r.total != r.err_x + r.err_y + r.err_z + r.err_u) return false;
        if (!std::isfinite(r.total)) return false;
    }
    if (study.has_rate && !(study.rate.slope > 0)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Report emission. All doubles use max_digits10 so rewrites round-trip.

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

}  // namespace detail

inline void emit_report(const std::vector<ErrorReport>& reports, const RateFit* rate,
                        const nlohmann::json& config_echo, const std::string& path) {
    std::ofstream csv(path);
    if (!csv) throw Error("cannot write report: " + path);
    csv << "n,mesh,err_x,err_y,err_z,err_u,total,n_paths,seed,runtime_s\n";
    for (const auto& r : reports)
        csv << r.n << ',' << detail::fmt(r.mesh) << ',' << detail::fmt(r.err_x) << ','
            << detail::fmt(r.err_y) << ',' << detail::fmt(r.err_z) << ',' << detail::fmt(r.err_u)
            << ',' << detail::fmt(r.total) << ',' << r.n_paths << ',' << r.seed << ','
            << detail::fmt(r.runtime_s) << '\n';
    csv.close();

    nlohmann::json side;
    side["config"] = config_echo;
    if (rate) {
        side["rate"] = {{"slope", rate->slope},
                        {"intercept", rate->intercept},
                        {"residuals", rate->residuals},
                        {"monotone", rate->monotone}};
    }
    std::ofstream js(path + ".json");
    if (!js) throw Error("cannot write report sidecar: " + path + ".json");
    js << side.dump(2) << '\n';
}

// Runtime is wall-clock and never reproducible; zero it when byte-stable
// artifacts are required.
inline std::vector<ErrorReport> with_zero_runtime(std::vector<ErrorReport> reports) {
    for (auto& r : reports) r.runtime_s = 0.0;
    return reports;
}

// ---------------------------------------------------------------------------
// Columnar dumps for external tooling.

inline void write_path_dump(const PathBundle& paths, const std::string& out) {
    std::ofstream f(out);
    if (!f) throw Error("cannot write path dump: " + out);
    f << "path_id,t_i,x0,tau\n";
    for (int p = 0; p < paths.n_paths(); ++p)
        for (int i = 0; i <= paths.grid.steps(); ++i)
            f << p << ',' << detail::fmt(paths.grid.node(i)) << ','
              << detail::fmt(paths.x0_paths[p][i]) << ',' << detail::fmt(paths.tau[p]) << '\n';
}

inline void write_solution_dump(const std::vector<SchemeTrajectory>& trs, const TimeGrid& grid,
                                const std::string& out) {
    std::ofstream f(out);
    if (!f) throw Error("cannot write solution dump: " + out);
    f << "path_id,t_i,y,z,u,jumped\n";
    int n = grid.steps();
    for (std::size_t p = 0; p < trs.size(); ++p)
        for (int i = 0; i <= n; ++i) {
            double t = grid.node(i);
            double z = i < n ? trs[p].Z(grid, t) : 0.0;
            f << p << ',' << detail::fmt(t) << ',' << detail::fmt(trs[p].Y(grid, t)) << ','
              << detail::fmt(z) << ',' << detail::fmt(trs[p].U(grid, t)) << ','
              << (t >= trs[p].tau ? 1 : 0) << '\n';
        }
}

}  // namespace fbsde

#endif
