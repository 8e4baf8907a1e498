#pragma once

// Real-time evolution of the coupled condensate/cavity equations and
// imaginary-time relaxation with the cavity adiabatically eliminated.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "quadcav/core.hpp"
#include "quadcav/error.hpp"
#include "quadcav/spectral.hpp"

namespace quadcav {

struct RelaxSettings {
    double d_tau = 1e-3;
    double tol = 1e-9;
    long max_iter = 500000;
};

struct SteadyState {
    CondensateField psi0;
    CavityAmplitude alpha0{};
    double mu = 0.0;
    OrderParameters order;
    bool converged = false;
    long iterations = 0;
    double residual = 0.0;
};

/// psi ~ 1/sqrt(2pi) + eps1 cos x/sqrt(pi) + eps2 sin x/sqrt(pi), normalized.
inline CondensateField seed_state(double eps1, double eps2, const Grid& grid) {
    if (std::abs(eps1) > 0.1 || std::abs(eps2) > 0.1)
        std::cerr << "quadcav: seed amplitudes above 0.1 leave the perturbative regime\n";
    CondensateField psi{std::vector<cplx>(grid.num_points())};
    const double a0 = 1.0 / std::sqrt(2.0 * kPi);
    const double a1 = 1.0 / std::sqrt(kPi);
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double x = grid.position(j);
        psi[j] = a0 + eps1 * a1 * std::cos(x) + eps2 * a1 * std::sin(x);
    }
    return normalized(std::move(psi), grid);
}

namespace detail {

inline void normalize_modes(spectral::Modes& c) {
    const double n = spectral::norm_squared(c);
    if (!(n > 0.0) || !std::isfinite(n)) throw SolverError("imaginary-time step produced a degenerate field");
    const double s = 1.0 / std::sqrt(n);
    for (auto& v : c) v *= s;
}

inline OrderParameters moments(const spectral::Modes& c) {
    const auto s = spectral::density_moment(c);
    return {s.real(), s.imag()};
}

// One preconditioned gradient step c <- c - d_tau (H - mu) c / (1 + d_tau k^2).
// Writes mu of the input state.
inline void relax_step(spectral::Modes& c, spectral::Modes& work, const std::vector<double>& k2,
                       const ModelParams& p, double d_tau, double& mu) {
    const std::size_t n = c.size();
    const auto op = moments(c);
    const auto alpha = cavity_steady(op, p);
    spectral::apply_potential(potential_coefficients(alpha, p), c, work);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        work[i] += kRecoil * k2[i] * c[i];
        e += (std::conj(c[i]) * work[i]).real();
    }
    mu = e;
    for (std::size_t i = 0; i < n; ++i) c[i] -= d_tau * (work[i] - e * c[i]) / (1.0 + d_tau * kRecoil * k2[i]);
    normalize_modes(c);
}

}  // namespace detail

/// Single imaginary-time step, exposed for linearization checks.
inline CondensateField imaginary_time_step(const CondensateField& psi, const ModelParams& p, const Grid& grid,
                                           double d_tau) {
    check_shape(psi, grid);
    auto c = spectral::to_modes(psi.amplitudes);
    detail::normalize_modes(c);
    spectral::Modes work(c.size());
    const auto k2 = spectral::kinetic_diagonal(c.size());
    double mu = 0.0;
    detail::relax_step(c, work, k2, p, d_tau, mu);
    return {spectral::to_samples(c)};
}

inline SteadyState relax_imaginary_time(const ModelParams& params, const Grid& grid, const CondensateField& init,
                                        const RelaxSettings& settings = {}) {
    params.validate();
    check_shape(init, grid);
    if (params.delta_c == 0.0 && params.kappa == 0.0) throw DomainError("relaxation needs delta_c^2 + kappa^2 > 0");
    if (std::abs(field_norm(init, grid) - 1.0) > 1e-6) throw DomainError("initial field is not normalized");
    if (!(settings.d_tau > 0.0) || !(settings.tol > 0.0)) throw DomainError("relaxation settings must be positive");

    auto c = spectral::to_modes(init.amplitudes);
    detail::normalize_modes(c);
    const std::size_t n = c.size();
    const auto k2 = spectral::kinetic_diagonal(n);
    spectral::Modes work(n), prev(n);

    SteadyState out;
    double mu = 0.0;
    double change = std::numeric_limits<double>::infinity();
    long it = 0;
    while (it < settings.max_iter) {
        prev = c;
        detail::relax_step(c, work, k2, params, settings.d_tau, mu);
        ++it;
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += std::norm(c[i] - prev[i]);
        change = std::sqrt(d) / settings.d_tau;
        if (!std::isfinite(change)) throw SolverError("relaxation diverged at iteration " + std::to_string(it));
        if (change < settings.tol) {
            out.converged = true;
            break;
        }
    }
    // final chemical potential and cavity field of the returned state
    const auto op = detail::moments(c);
    out.order = op;
    out.alpha0 = cavity_steady(op, params);
    spectral::apply_potential(potential_coefficients(out.alpha0, params), c, work);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += (std::conj(c[i]) * (work[i] + kRecoil * k2[i] * c[i])).real();
    out.mu = e;
    out.psi0 = {spectral::to_samples(c)};
    out.iterations = it;
    out.residual = change;
    return out;
}

/// Relaxes from the (0.01, 0.01) and (0.01, -0.01) seeds; lower mu wins, ties go to smaller |Theta2|.
inline SteadyState find_steady_state(const ModelParams& params, const Grid& grid, const RelaxSettings& settings = {},
                                     double eps = 0.01) {
    auto a = relax_imaginary_time(params, grid, seed_state(eps, eps, grid), settings);
    auto b = relax_imaginary_time(params, grid, seed_state(eps, -eps, grid), settings);
    if (a.converged != b.converged) return a.converged ? a : b;
    const double tie = 1e-9 * std::max(1.0, std::abs(a.mu));
    if (std::abs(a.mu - b.mu) > tie) return a.mu < b.mu ? a : b;
    return std::abs(b.order.theta2) < std::abs(a.order.theta2) ? b : a;
}

// ---------------------------------------------------------------------------
// real time

struct TrajectorySample {
    double t = 0.0;
    CavityAmplitude alpha{};
    double theta1 = 0.0;
    double theta2 = 0.0;
    double norm = 1.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<CondensateField> fields;  // only when requested

    [[nodiscard]] std::size_t size() const { return samples.size(); }
};

/// dt = 0.1 / max(|delta_c| + kappa, 10); the kinetic term is integrated exactly.
inline double default_time_step(const ModelParams& p) {
    return 0.1 / std::max(std::abs(p.delta_c) + p.kappa, 10.0);
}

namespace detail {

struct RtState {
    spectral::Modes c;
    cplx alpha;
};

class LawsonRk4 {
public:
    LawsonRk4(const ModelParams& p, std::size_t n, double dt) : p_(p), dt_(dt), k2_(spectral::kinetic_diagonal(n)) {
        full_.resize(n);
        half_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            full_[i] = std::polar(1.0, -kRecoil * k2_[i] * dt);
            half_[i] = std::polar(1.0, -kRecoil * k2_[i] * dt / 2);
        }
        const cplx lc{-p.kappa, p.delta_c};
        cav_full_ = std::exp(lc * dt);
        cav_half_ = std::exp(lc * (dt / 2));
        for (auto* s : {&k1_, &k2v_, &k3_, &k4_, &tmp_}) s->c.resize(n);
        pot_.resize(n);
    }

    void step(RtState& y) {
        const double h = dt_;
        rhs(y, k1_);
        // k2 at E(h/2)(y + h/2 k1)
        combine_half(y, k1_, h / 2, tmp_);
        rhs(tmp_, k2v_);
        // k3 at E(h/2) y + h/2 k2
        propagate_half(y, tmp_);
        axpy(tmp_, k2v_, h / 2);
        rhs(tmp_, k3_);
        // k4 at E(h) y + h E(h/2) k3
        const std::size_t n = y.c.size();
        for (std::size_t i = 0; i < n; ++i) tmp_.c[i] = full_[i] * y.c[i] + h * half_[i] * k3_.c[i];
        tmp_.alpha = cav_full_ * y.alpha + h * cav_half_ * k3_.alpha;
        rhs(tmp_, k4_);
        for (std::size_t i = 0; i < n; ++i) {
            y.c[i] = full_[i] * (y.c[i] + h / 6 * k1_.c[i]) + h / 6 * (2.0 * half_[i] * (k2v_.c[i] + k3_.c[i]) + k4_.c[i]);
        }
        y.alpha = cav_full_ * (y.alpha + h / 6 * k1_.alpha) +
                  h / 6 * (2.0 * cav_half_ * (k2v_.alpha + k3_.alpha) + k4_.alpha);
    }

private:
    // nonlinear part: dc/dt = -i V c, dalpha/dt = -i (l1 T1 + l2 e^{-i theta} T2)
    void rhs(const RtState& y, RtState& out) {
        spectral::apply_potential(potential_coefficients(y.alpha, p_), y.c, pot_);
        const cplx mi{0.0, -1.0};
        for (std::size_t i = 0; i < y.c.size(); ++i) out.c[i] = mi * pot_[i];
        const auto s = spectral::density_moment(y.c);
        out.alpha = mi * (p_.lambda1 * s.real() + p_.lambda2 * std::polar(1.0, -p_.theta) * s.imag());
    }

    void propagate_half(const RtState& y, RtState& out) const {
        for (std::size_t i = 0; i < y.c.size(); ++i) out.c[i] = half_[i] * y.c[i];
        out.alpha = cav_half_ * y.alpha;
    }

    void combine_half(const RtState& y, const RtState& k, double s, RtState& out) const {
        for (std::size_t i = 0; i < y.c.size(); ++i) out.c[i] = half_[i] * (y.c[i] + s * k.c[i]);
        out.alpha = cav_half_ * (y.alpha + s * k.alpha);
    }

    static void axpy(RtState& y, const RtState& k, double s) {
        for (std::size_t i = 0; i < y.c.size(); ++i) y.c[i] += s * k.c[i];
        y.alpha += s * k.alpha;
    }

    ModelParams p_;
    double dt_;
    std::vector<double> k2_;
    std::vector<cplx> full_, half_;
    cplx cav_full_, cav_half_;
    RtState k1_, k2v_, k3_, k4_, tmp_;
    spectral::Modes pot_;
};

inline TrajectorySample sample_of(const RtState& y, double t) {
    const auto s = spectral::density_moment(y.c);
    return {t, y.alpha, s.real(), s.imag(), spectral::norm_squared(y.c)};
}

}  // namespace detail

/// Integrates i dalpha/dt = (-delta_c - i kappa) alpha + l1 T1 + l2 e^{-i theta} T2 and
/// i dpsi/dt = (-d^2 + V) psi with a Lawson (integrating factor) RK4 scheme.
/// Sample 0 is the initial state; then every `stride` steps.
inline Trajectory evolve_real_time(const CondensateField& psi, CavityAmplitude alpha, const ModelParams& params,
                                   const Grid& grid, double dt, long n_steps, long stride = 1,
                                   bool keep_fields = false) {
    params.validate();
    check_shape(psi, grid);
    if (!(dt > 0.0) || n_steps < 0 || stride < 1) throw DomainError("evolve_real_time: bad step settings");
    if (std::abs(field_norm(psi, grid) - 1.0) > 1e-6) throw DomainError("evolve_real_time: field is not normalized");

    detail::RtState y{spectral::to_modes(psi.amplitudes), alpha};
    detail::LawsonRk4 rk(params, y.c.size(), dt);
    Trajectory traj;
    traj.samples.reserve(static_cast<std::size_t>(n_steps / stride + 1));
    traj.samples.push_back(detail::sample_of(y, 0.0));
    if (keep_fields) traj.fields.push_back(psi);
    for (long s = 1; s <= n_steps; ++s) {
        rk.step(y);
        if (!std::isfinite(y.alpha.real()) || !std::isfinite(y.alpha.imag()))
            throw SolverError("evolve_real_time: non-finite cavity amplitude at step " + std::to_string(s));
        if (s % stride == 0) {
            auto smp = detail::sample_of(y, dt * static_cast<double>(s));
            if (!std::isfinite(smp.norm))
                throw SolverError("evolve_real_time: non-finite field at step " + std::to_string(s));
            traj.samples.push_back(smp);
            if (keep_fields) traj.fields.push_back({spectral::to_samples(y.c)});
        }
    }
    return traj;
}

/// Energy of the closed (kappa = 0) system.
inline double closed_system_energy(const CondensateField& psi, CavityAmplitude alpha, const ModelParams& p,
                                   const Grid& grid) {
    check_shape(psi, grid);
    const auto c = spectral::to_modes(psi.amplitudes);
    const auto k2 = spectral::kinetic_diagonal(c.size());
    double kin = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) kin += kRecoil * k2[i] * std::norm(c[i]);
    const auto s = spectral::density_moment(c);
    const double lattice = 0.5 * (p.v1 + p.v2) * spectral::norm_squared(c) +
                           0.5 * (p.v1 - p.v2) * spectral::second_harmonic_moment(c);
    return -p.delta_c * std::norm(alpha) + kin + 2.0 * p.lambda1 * s.real() * alpha.real() +
           2.0 * p.lambda2 * s.imag() * (alpha * std::polar(1.0, p.theta)).real() + lattice;
}

// ---------------------------------------------------------------------------
// limit cycles

struct LimitCycle {
    bool oscillatory = false;
    double period = 0.0;
    double amplitude = 0.0;  // std(|alpha|) over the analysis window
};

inline LimitCycle detect_limit_cycle(const Trajectory& traj, double transient_fraction = 0.4) {
    if (traj.size() < 16) throw DomainError("detect_limit_cycle: trajectory too short");
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
        throw DomainError("detect_limit_cycle: transient fraction must be in [0, 1)");
    const auto& s = traj.samples;
    const double t_end = s.back().t;
    const double t_start = s.front().t + transient_fraction * (t_end - s.front().t);
    if (t_end - t_start < 200.0 - 1e-9)
        throw DomainError("detect_limit_cycle: analysis window shorter than 200 recoil times");
    std::vector<double> a;
    std::size_t first = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].t < t_start) continue;
        if (a.empty()) first = i;
        a.push_back(std::abs(s[i].alpha));
    }
    const std::size_t m = a.size();
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(m);
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(m));

    LimitCycle out;
    out.amplitude = sd;
    if (!(mean > 0.0)) return out;
    const std::size_t h = m / 2;
    const double lead = std::accumulate(a.begin(), a.begin() + static_cast<long>(h), 0.0) / static_cast<double>(h);
    const double trail = std::accumulate(a.begin() + static_cast<long>(h), a.end(), 0.0) / static_cast<double>(m - h);
    out.oscillatory = sd / mean > 0.01 && trail >= 0.9 * lead;

    // dominant peak of the Hann-windowed spectrum, refined by a parabola through log magnitudes
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(m - 1));
        w[i] = (a[i] - mean) * hann;
    }
    std::vector<cplx> spec;
    Eigen::FFT<double> fft;
    fft.fwd(spec, w);
    std::size_t best = 1;
    double peak = -1.0;
    for (std::size_t k = 1; k < m / 2; ++k) {
        if (std::abs(spec[k]) > peak) {
            peak = std::abs(spec[k]);
            best = k;
        }
    }
    double shift = 0.0;
    if (best > 1 && best + 1 < m / 2) {
        const double l = std::log(std::abs(spec[best - 1]) + 1e-300);
        const double c = std::log(std::abs(spec[best]) + 1e-300);
        const double r = std::log(std::abs(spec[best + 1]) + 1e-300);
        const double den = l - 2.0 * c + r;
        if (den != 0.0) shift = std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
    }
    const double sample_dt = (s.back().t - s[first].t) / static_cast<double>(m - 1);
    if (peak > 0.0) out.period = static_cast<double>(m) * sample_dt / (static_cast<double>(best) + shift);
    return out;
}

}  // namespace quadcav
