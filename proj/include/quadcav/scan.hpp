#pragma once

// Phase classification of a parameter point and threaded 2-D sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "quadcav/core.hpp"
#include "quadcav/dynamics.hpp"
#include "quadcav/error.hpp"
#include "quadcav/stability.hpp"

namespace quadcav {

struct ClassifyConfig {
    double order_tol = 1e-3;
    double dw_purity_tol = 1e-3;
    double jump_tol = 0.05;
    RelaxSettings relax{0.01, 1e-9, 500000};
    double seed_eps = 0.01;
    double evolve_time = 500.0;       // real-time confirmation of non-converged cells
    double transient_fraction = 0.4;
    double stability_tol = kStabilityTol;

    void validate() const {
        if (!(order_tol > 0.0 && dw_purity_tol > 0.0 && jump_tol > 0.0))
            throw DomainError("classification tolerances must be positive");
        if (!(order_tol <= dw_purity_tol && dw_purity_tol <= jump_tol))
            throw DomainError("classification tolerances must satisfy order_tol <= dw_purity_tol <= jump_tol");
        if (!(relax.d_tau > 0.0 && relax.tol > 0.0 && relax.max_iter > 0))
            throw DomainError("relaxation settings must be positive");
        if (!(evolve_time > 0.0) || !(transient_fraction >= 0.0 && transient_fraction < 1.0))
            throw DomainError("real-time confirmation settings out of range");
    }
};

struct CellRecord {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double theta = 0.0;
    PhaseLabel label = PhaseLabel::NP;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double alpha_abs = 0.0;
    double mu = 0.0;
    bool converged = false;
    double growth = 0.0;        // worst adiabatic growth rate of the uniform state
    bool by_criterion = false;  // labeled UST by Eq. (10) without relaxation
    bool limit_cycle = false;   // real-time confirmation ran and found oscillation
    long iterations = 0;
    bool diagnostic = false;
    std::string note;
};

inline PhaseLabel label_from_order(double t1, double t2, const ClassifyConfig& cfg) {
    const double a = std::abs(t1), b = std::abs(t2);
    const bool e1 = a > cfg.order_tol, e2 = b > cfg.order_tol;
    if (!e1 && !e2) return PhaseLabel::NP;
    if (e1 && e2) {
        if (b < cfg.dw_purity_tol) return PhaseLabel::DW1;
        if (a < cfg.dw_purity_tol) return PhaseLabel::DW2;
        return PhaseLabel::MDW;
    }
    return e1 ? PhaseLabel::DW1 : PhaseLabel::DW2;
}

inline CellRecord classify_point(const ModelParams& params, const Grid& grid, const ClassifyConfig& cfg = {}) {
    CellRecord r;
    r.lambda1 = params.lambda1;
    r.lambda2 = params.lambda2;
    r.theta = params.theta;
    try {
        params.validate();
        r.growth = classify_stability(adiabatic_spectrum(params), cfg.stability_tol).worst_growth;
        if (params.lambda1 + params.lambda2 > 0.0 && instability_criterion(params)) {
            r.label = PhaseLabel::UST;
            r.by_criterion = true;
            return r;
        }
        const auto ss = find_steady_state(params, grid, cfg.relax, cfg.seed_eps);
        r.theta1 = ss.order.theta1;
        r.theta2 = ss.order.theta2;
        r.alpha_abs = std::abs(ss.alpha0);
        r.mu = ss.mu;
        r.converged = ss.converged;
        r.iterations = ss.iterations;
        if (!ss.converged && params.kappa == 0.0) {
            // undamped dynamics never settle, so an oscillation says nothing about stability
            r.note = "relaxation not converged; closed system, no real-time confirmation";
        } else if (!ss.converged) {
            // start from the last iterate: from the uniform seed the weakly damped atomic motion
            // would read as a limit cycle wherever relaxation is merely slow
            const double dt = default_time_step(params);
            const long steps = static_cast<long>(std::ceil(cfg.evolve_time / dt));
            const long stride = std::max(1L, static_cast<long>(0.1 / dt));
            const auto traj = evolve_real_time(ss.psi0, ss.alpha0, params, grid, dt, steps, stride);
            const auto lc = detect_limit_cycle(traj, cfg.transient_fraction);
            if (lc.oscillatory) {
                r.label = PhaseLabel::UST;
                r.limit_cycle = true;
                return r;
            }
            r.note = "relaxation not converged; no limit cycle detected";
        }
        r.label = label_from_order(r.theta1, r.theta2, cfg);
    } catch (const std::exception& e) {
        r.diagnostic = true;
        r.note = e.what();
    }
    return r;
}

struct Axis {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 1;

    [[nodiscard]] double value(std::size_t i) const {
        if (count <= 1) return lo;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    /// Spacing between neighbouring samples.
    [[nodiscard]] double step() const { return count <= 1 ? 0.0 : (hi - lo) / static_cast<double>(count - 1); }
};

/// Cells stored row-major: index = i * second.count + j.
struct PhaseTable {
    Axis first;
    Axis second;
    std::vector<CellRecord> cells;

    [[nodiscard]] const CellRecord& at(std::size_t i, std::size_t j) const { return cells[i * second.count + j]; }
    [[nodiscard]] std::size_t size() const { return cells.size(); }
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
/// Results must be written to per-index slots, which keeps the output order fixed.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body, const ProgressFn& progress = {}) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n)));
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex mtx;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            body(i);
            if (progress) {
                std::lock_guard<std::mutex> lock(mtx);
                progress(++done, n);
            }
        }
    };
    if (threads == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

/// Classifies every point; output order matches input order.
inline std::vector<CellRecord> classify_points(const std::vector<ModelParams>& points, const Grid& grid,
                                               const ClassifyConfig& cfg, unsigned threads = 0,
                                               const ProgressFn& progress = {}) {
    cfg.validate();
    std::vector<CellRecord> out(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) { out[i] = classify_point(points[i], grid, cfg); },
                 progress);
    return out;
}

inline PhaseTable sweep_eta(const ModelParams& base, std::pair<double, double> lambda1_range,
                            std::pair<double, double> lambda2_range, std::size_t n1, std::size_t n2,
                            const Grid& grid, const ClassifyConfig& cfg = {}, unsigned threads = 0,
                            const ProgressFn& progress = {}) {
    if (n1 == 0 || n2 == 0) throw DomainError("sweep needs at least one cell per axis");
    if (lambda1_range.first < 0.0 || lambda1_range.second < 0.0 || lambda2_range.first < 0.0 ||
        lambda2_range.second < 0.0)
        throw DomainError("pump ranges must be non-negative");
    PhaseTable t{{"lambda1", lambda1_range.first, lambda1_range.second, n1},
                 {"lambda2", lambda2_range.first, lambda2_range.second, n2},
                 {}};
    std::vector<ModelParams> pts;
    pts.reserve(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            ModelParams p = base;
            p.lambda1 = t.first.value(i);
            p.lambda2 = t.second.value(j);
            pts.push_back(p);
        }
    t.cells = classify_points(pts, grid, cfg, threads, progress);
    return t;
}

/// (theta, phi) plane at fixed total pump: lambda1 = eta cos(phi/2), lambda2 = eta sin(phi/2).
inline PhaseTable sweep_theta_phi(const ModelParams& base, double eta_total, std::pair<double, double> theta_range,
                                  std::pair<double, double> phi_range, std::size_t n1, std::size_t n2,
                                  const Grid& grid, const ClassifyConfig& cfg = {}, unsigned threads = 0,
                                  const ProgressFn& progress = {}) {
    if (!(eta_total > 0.0)) throw DomainError("sweep_theta_phi needs eta_total > 0");
    if (n1 == 0 || n2 == 0) throw DomainError("sweep needs at least one cell per axis");
    PhaseTable t{{"theta", theta_range.first, theta_range.second, n1}, {"phi", phi_range.first, phi_range.second, n2}, {}};
    std::vector<ModelParams> pts;
    pts.reserve(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            ModelParams p = base.with_pump(eta_total, t.second.value(j));
            p.theta = t.first.value(i);
            pts.push_back(p);
        }
    t.cells = classify_points(pts, grid, cfg, threads, progress);
    return t;
}

struct Crossing {
    std::size_t index = 0;  // boundary lies between path[index] and path[index + 1]
    PhaseLabel from = PhaseLabel::NP;
    PhaseLabel to = PhaseLabel::NP;
    double jump = 0.0;
    bool first_order = false;
};

/// Every label change along an ordered path of cells. The jump of a crossing is the
/// largest step of (|Theta1|, |Theta2|) among the steps adjacent to the boundary.
inline std::vector<Crossing> transition_order(const std::vector<CellRecord>& path, double jump_tol) {
    std::vector<Crossing> out;
    auto step = [&](std::size_t k) {
        return std::hypot(std::abs(path[k + 1].theta1) - std::abs(path[k].theta1),
                          std::abs(path[k + 1].theta2) - std::abs(path[k].theta2));
    };
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        if (path[k].label == path[k + 1].label) continue;
        Crossing c;
        c.index = k;
        c.from = path[k].label;
        c.to = path[k + 1].label;
        c.jump = step(k);
        if (k > 0) c.jump = std::max(c.jump, step(k - 1));
        if (k + 2 < path.size()) c.jump = std::max(c.jump, step(k + 1));
        c.first_order = c.jump > jump_tol;
        out.push_back(c);
    }
    return out;
}

/// Cells of a table along a list of (i, j) index pairs.
inline std::vector<CellRecord> table_path(const PhaseTable& t, const std::vector<std::pair<std::size_t, std::size_t>>& ij) {
    std::vector<CellRecord> out;
    out.reserve(ij.size());
    for (const auto& [i, j] : ij) {
        if (i >= t.first.count || j >= t.second.count) throw DomainError("path leaves the table");
        out.push_back(t.at(i, j));
    }
    return out;
}

}  // namespace quadcav
