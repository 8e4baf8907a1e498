#pragma once

// Linear stability of the uniform condensate: adiabatic 4x4 problem,
// beyond-adiabatic sextic, imaginary-time iteration matrix and the
// semiclassical self-consistency picture.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "quadcav/core.hpp"
#include "quadcav/error.hpp"
#include "quadcav/poly.hpp"

namespace quadcav {

struct AdiabaticEntries {
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    double zeta1 = 0.0;
    double zeta2 = 0.0;
    double omega0 = kRecoil;
};

enum class SpectrumSource { Analytic4, Sextic6, ThreeMode6 };

inline std::string_view to_string(SpectrumSource s) {
    switch (s) {
        case SpectrumSource::Analytic4: return "analytic-4";
        case SpectrumSource::Sextic6: return "sextic-6";
        case SpectrumSource::ThreeMode6: return "threemode-6";
    }
    return "?";
}

struct Spectrum {
    std::vector<cplx> roots;
    SpectrumSource source = SpectrumSource::Analytic4;
};

struct StabilityVerdict {
    bool stable = true;
    double worst_growth = 0.0;
};

inline constexpr double kStabilityTol = 1e-9;

inline AdiabaticEntries adiabatic_entries(const ModelParams& p) {
    const auto [chi, R] = dissipative_phase_shift(p.delta_c, p.kappa);
    AdiabaticEntries e;
    const double l12 = 2.0 * p.lambda1 * p.lambda2 * R;
    e.omega_plus = l12 * std::cos(p.theta + chi);
    e.omega_minus = l12 * std::cos(p.theta - chi);
    // R cos(chi) == delta_c R^2 exactly
    const double rc = p.delta_c * R * R;
    e.zeta1 = 2.0 * p.lambda1 * p.lambda1 * rc;
    e.zeta2 = 2.0 * p.lambda2 * p.lambda2 * rc;
    e.omega0 = kRecoil + 0.5 * (e.zeta1 + e.zeta2);
    return e;
}

/// Explicit 4x4 dynamical matrix on (dpsi+^1, dpsi-^1, dpsi+^2, dpsi-^2).
inline Eigen::Matrix4d adiabatic_matrix(const ModelParams& p) {
    const auto e = adiabatic_entries(p);
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m(0, 1) = kRecoil;
    m(1, 0) = kRecoil + e.zeta1;
    m(1, 2) = e.omega_plus;
    m(2, 3) = kRecoil;
    m(3, 0) = e.omega_minus;
    m(3, 2) = kRecoil + e.zeta2;
    return m;
}

inline Spectrum adiabatic_spectrum(const ModelParams& p) {
    const auto e = adiabatic_entries(p);
    const cplx disc = std::sqrt(cplx{4.0 * e.omega_plus * e.omega_minus + (e.zeta1 - e.zeta2) * (e.zeta1 - e.zeta2), 0.0});
    Spectrum s;
    s.source = SpectrumSource::Analytic4;
    for (double sign : {1.0, -1.0}) {
        const cplx w = std::sqrt(e.omega0 * kRecoil + sign * 0.5 * kRecoil * disc);
        s.roots.push_back(w);
        s.roots.push_back(-w);
    }
    return s;
}

/// sin^2(phi) sin^2(theta) > cos^2(chi), the multiplied form of Eq. (10).
/// A margin of 1e-12 keeps the critical angle itself (equality up to rounding) stable.
inline bool instability_criterion(const ModelParams& p) {
    if (!(p.lambda1 + p.lambda2 > 0.0)) throw DomainError("instability_criterion needs lambda1 + lambda2 > 0");
    const auto [chi, R] = dissipative_phase_shift(p.delta_c, p.kappa);
    (void)chi;
    const double c2 = p.delta_c * p.delta_c * R * R;
    const double sphi = std::sin(p.mixing_angle());
    const double sth = std::sin(p.theta);
    return sphi * sphi * sth * sth > c2 + 1e-12;
}

inline StabilityVerdict classify_stability(const Spectrum& spec, double tol = kStabilityTol) {
    StabilityVerdict v;
    bool any = false;
    for (const auto& w : spec.roots) {
        if (std::abs(w.real()) <= tol) continue;
        v.worst_growth = any ? std::max(v.worst_growth, w.imag()) : w.imag();
        any = true;
    }
    v.stable = !(any && v.worst_growth > tol);
    return v;
}

/// Largest imaginary part over all modes, including purely imaginary ones.
inline double max_growth(const Spectrum& spec) {
    double g = -std::numeric_limits<double>::infinity();
    for (const auto& w : spec.roots) g = std::max(g, w.imag());
    return g;
}

struct Threshold {
    double lambda = 0.0;
    bool bounded = true;
};

/// Smallest total pump along the ray phi at which the uniform state stops being
/// a stable fixed point: zero immediately when Eq. (10) holds, otherwise the first
/// pump where some adiabatic mode has Im > tol, by bisection on [0, cap].
inline Threshold np_threshold(const ModelParams& base, double phi, double cap = 100.0, int iterations = 60,
                              double tol = kStabilityTol) {
    if (instability_criterion(base.with_pump(1.0, phi))) return {0.0, true};
    auto soft = [&](double eta) { return max_growth(adiabatic_spectrum(base.with_pump(eta, phi))) > tol; };
    if (!soft(cap)) return {cap, false};
    double lo = 0.0, hi = cap;
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        (soft(mid) ? hi : lo) = mid;
    }
    return {0.5 * (lo + hi), true};
}

/// Sextic of the 6x6 linearization around the uniform state (ascending in omega):
/// (omega + i kappa)^2 (1 - omega^2)^2 + 4 l1^2 l2^2 cos^2 theta
///   - [(delta_c + 2 l1^2) - delta_c omega^2][(delta_c + 2 l2^2) - delta_c omega^2].
inline Poly beyond_adiabatic_polynomial(const ModelParams& p) {
    const double wr = kRecoil;
    const double d = p.delta_c;
    const double l1s = p.lambda1 * p.lambda1, l2s = p.lambda2 * p.lambda2;
    const Poly cav = poly_mul(Poly{{0.0, p.kappa}, 1.0}, Poly{{0.0, p.kappa}, 1.0});
    const Poly rec{wr * wr, 0.0, -1.0};
    Poly rhs = poly_mul(cav, poly_mul(rec, rec));
    const double ct = std::cos(p.theta);
    rhs[0] += 4.0 * wr * wr * l1s * l2s * ct * ct;
    const Poly f1{(d * wr + 2.0 * l1s) * wr, 0.0, -d};
    const Poly f2{(d * wr + 2.0 * l2s) * wr, 0.0, -d};
    return poly_add(rhs, poly_mul(f1, f2), -1.0);
}

inline Spectrum beyond_adiabatic_roots(const ModelParams& p) {
    return {poly_roots(beyond_adiabatic_polynomial(p)), SpectrumSource::Sextic6};
}

/// The n roots of smallest modulus (the atomic branches).
inline std::vector<cplx> soft_branch(const Spectrum& s, std::size_t n = 4) {
    auto r = s.roots;
    std::sort(r.begin(), r.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    r.resize(std::min(n, r.size()));
    return r;
}

/// max |omega_sextic - omega_adiabatic| / max |omega_adiabatic| under the best pairing
/// of the four soft sextic roots with the four adiabatic roots.
inline double soft_branch_deviation(const ModelParams& p) {
    const auto soft = soft_branch(beyond_adiabatic_roots(p), 4);
    const auto ad = adiabatic_spectrum(p).roots;
    std::array<int, 4> perm{0, 1, 2, 3};
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(soft[static_cast<std::size_t>(perm[i])] - ad[static_cast<std::size_t>(i)]));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    double scale = 0.0;
    for (const auto& w : ad) scale = std::max(scale, std::abs(w));
    return best / scale;
}

/// Gamma = [[1 - D1 dt, N- dt], [N+ dt, 1 - D2 dt]].
inline Eigen::Matrix2d iteration_matrix(const ModelParams& p, double d_tau) {
    if (!(d_tau > 0.0)) throw DomainError("iteration_matrix: d_tau must be positive");
    const auto [chi, R] = dissipative_phase_shift(p.delta_c, p.kappa);
    const double d1 = 2.0 * p.lambda1 * p.lambda1 * R * std::cos(chi) + kRecoil;
    const double d2 = 2.0 * p.lambda2 * p.lambda2 * R * std::cos(chi) + kRecoil;
    const double np = -2.0 * R * std::cos(chi + p.theta) * p.lambda1 * p.lambda2;
    const double nm = -2.0 * R * std::cos(chi - p.theta) * p.lambda1 * p.lambda2;
    Eigen::Matrix2d g;
    g << 1.0 - d1 * d_tau, nm * d_tau, np * d_tau, 1.0 - d2 * d_tau;
    return g;
}

struct ModeForecast {
    PhaseLabel label = PhaseLabel::NP;
    bool degenerate = false;
    double omega1 = 1.0;  // multiplier of the pure cos mode
    double omega2 = 1.0;  // multiplier of the mixed mode
    Eigen::Vector2d mixed_eigenvector{0.0, 1.0};
    Eigen::Vector2d amplitudes{0.0, 0.0};  // (eps1, eps2) after n steps
};

/// Mode evolution of Eq. (17) at the critical angle theta = -chi + pi/2.
inline ModeForecast iteration_mode_forecast(const ModelParams& p, double eps1, double eps2, long n, double d_tau) {
    const auto [chi, R] = dissipative_phase_shift(p.delta_c, p.kappa);
    (void)R;
    const double off = normalize_angle(p.theta - (-chi + kPi / 2));
    if (std::abs(off) > 1e-6) throw DomainError("iteration_mode_forecast applies only at theta = -chi + pi/2");
    const auto g = iteration_matrix(p, d_tau);
    ModeForecast f;
    f.omega1 = g(0, 0);
    f.omega2 = g(1, 1);
    if (f.omega2 > 1.0) f.label = PhaseLabel::MDW;
    else if (f.omega1 > 1.0) f.label = PhaseLabel::DW1;
    else f.label = PhaseLabel::NP;
    const double l1s = p.lambda1 * p.lambda1, l2s = p.lambda2 * p.lambda2;
    if (std::abs(l1s - l2s) <= 1e-12 * std::max(1.0, l1s + l2s)) {
        f.degenerate = true;
        return f;
    }
    f.mixed_eigenvector = {-2.0 * p.lambda1 * p.lambda2 * std::sin(chi) / (l1s - l2s), 1.0};
    // eps = a1 (1, 0) + a2 v2
    const double a2 = eps2;
    const double a1 = eps1 - a2 * f.mixed_eigenvector(0);
    const double nn = static_cast<double>(n);
    f.amplitudes = a1 * std::pow(f.omega1, nn) * Eigen::Vector2d{1.0, 0.0} +
                   a2 * std::pow(f.omega2, nn) * f.mixed_eigenvector;
    return f;
}

struct SemiclassicalPoint {
    bool exists = false;
    double kx_star = 0.0;
    double phi_star = 0.0;   // cavity phase
    double residual = 0.0;   // |Eq. (13)| at the returned point
};

/// Solves tan(kx) = -tan(phi/2) tan(phi_cav) together with Eq. (13) at theta = pi/2.
/// After eliminating kx, Eq. (13) becomes G(phi_cav) = 0 with
/// G = c (1 - t^2) sin cos - s (cos^2 + t^2 sin^2); G is scanned on (-pi/2, pi/2]
/// and every sign change is refined by bisection.
inline SemiclassicalPoint semiclassical_fixed_point(const ModelParams& p, int samples = 4096) {
    if (std::abs(normalize_angle(p.theta) - kPi / 2) > 1e-9)
        throw DomainError("semiclassical_fixed_point is derived for theta = pi/2");
    if (!(p.lambda1 * p.lambda2 > 0.0)) throw DomainError("semiclassical_fixed_point needs lambda1 lambda2 > 0");
    const auto [chi, R] = dissipative_phase_shift(p.delta_c, p.kappa);
    (void)R;
    const double c = std::cos(chi), s = std::sin(chi);
    const double t = std::tan(p.mixing_angle() / 2);
    auto g = [&](double a) {
        const double sa = std::sin(a), ca = std::cos(a);
        return c * (1.0 - t * t) * sa * ca - s * (ca * ca + t * t * sa * sa);
    };
    auto eq13 = [&](double a, double kx) {
        const double u = t * std::tan(kx);
        return std::tan(a) - (s - c * u) / (c + s * u);
    };
    SemiclassicalPoint out;
    const double lo0 = -kPi / 2, hi0 = kPi / 2;
    double prev_a = lo0, prev_g = g(lo0);
    for (int i = 1; i <= samples; ++i) {
        const double a = lo0 + (hi0 - lo0) * i / samples;
        const double ga = g(a);
        if (ga == 0.0 || (prev_g < 0.0) != (ga < 0.0)) {
            double lo = prev_a, hi = a, glo = prev_g;
            for (int k = 0; k < 100 && ga != 0.0; ++k) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g(mid);
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            const double root = ga == 0.0 ? a : 0.5 * (lo + hi);
            if (std::abs(std::cos(root)) < 1e-12) {  // tan(phi_cav) unbounded
                prev_a = a;
                prev_g = ga;
                continue;
            }
            out.exists = true;
            out.phi_star = root;
            out.kx_star = std::atan(-t * std::tan(root));
            out.residual = std::abs(eq13(root, out.kx_star));
            return out;
        }
        prev_a = a;
        prev_g = ga;
    }
    return out;
}

}  // namespace quadcav
