#pragma once

// Dimensionless model for a condensate in a lossy cavity with two pumped
// density-wave quadratures. Units: hbar = k = omega_R = 1, domain [0, 2pi).

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quadcav/error.hpp"
#include "quadcav/spectral.hpp"

namespace quadcav {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kRecoil = 1.0;

/// Maps an angle into (-pi, pi].
inline double normalize_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

struct ModelParams {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double theta = kPi / 2;
    double delta_c = -300.0;
    double kappa = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;

    void validate() const {
        if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw DomainError("pump strengths must be >= 0");
        if (!(kappa >= 0.0)) throw DomainError("kappa must be >= 0");
        if (!std::isfinite(theta) || !std::isfinite(delta_c) || !std::isfinite(v1) || !std::isfinite(v2))
            throw DomainError("non-finite model parameter");
    }

    [[nodiscard]] ModelParams normalized() const {
        ModelParams p = *this;
        p.theta = normalize_angle(theta);
        return p;
    }

    [[nodiscard]] double total_pump() const { return std::hypot(lambda1, lambda2); }

    /// phi = 2 atan(lambda2 / lambda1), in [0, pi].
    [[nodiscard]] double mixing_angle() const { return 2.0 * std::atan2(lambda2, lambda1); }

    /// Same detunings, pumps placed on the ray (eta cos(phi/2), eta sin(phi/2)).
    [[nodiscard]] ModelParams with_pump(double eta, double phi) const {
        ModelParams p = *this;
        p.lambda1 = eta * std::cos(phi / 2);
        p.lambda2 = eta * std::sin(phi / 2);
        if (std::abs(p.lambda1) < 1e-15 * eta) p.lambda1 = 0.0;
        if (std::abs(p.lambda2) < 1e-15 * eta) p.lambda2 = 0.0;
        return p;
    }
};

class Grid {
public:
    explicit Grid(std::size_t num_points = 128) : n_(num_points) {
        if (n_ < 8) throw DomainError("grid needs at least 8 points");
    }
    [[nodiscard]] std::size_t num_points() const { return n_; }
    [[nodiscard]] double spacing() const { return 2.0 * kPi / static_cast<double>(n_); }
    [[nodiscard]] double position(std::size_t j) const { return spacing() * static_cast<double>(j); }

private:
    std::size_t n_;
};

/// psi(x_j) samples; normalized so that dx * sum |psi|^2 = 1.
struct CondensateField {
    std::vector<cplx> amplitudes;

    [[nodiscard]] std::size_t size() const { return amplitudes.size(); }
    cplx& operator[](std::size_t j) { return amplitudes[j]; }
    const cplx& operator[](std::size_t j) const { return amplitudes[j]; }
};

using CavityAmplitude = cplx;

struct OrderParameters {
    double theta1 = 0.0;
    double theta2 = 0.0;
};

enum class PhaseLabel { NP, DW1, DW2, MDW, UST };

inline std::string_view to_string(PhaseLabel l) {
    switch (l) {
        case PhaseLabel::NP: return "NP";
        case PhaseLabel::DW1: return "DW1";
        case PhaseLabel::DW2: return "DW2";
        case PhaseLabel::MDW: return "MDW";
        case PhaseLabel::UST: return "UST";
    }
    return "?";
}

inline std::optional<PhaseLabel> parse_label(std::string_view s) {
    for (auto l : {PhaseLabel::NP, PhaseLabel::DW1, PhaseLabel::DW2, PhaseLabel::MDW, PhaseLabel::UST})
        if (to_string(l) == s) return l;
    return std::nullopt;
}

inline double field_norm(const CondensateField& psi, const Grid& grid) {
    double s = 0.0;
    for (const auto& v : psi.amplitudes) s += std::norm(v);
    return s * grid.spacing();
}

inline CondensateField normalized(CondensateField psi, const Grid& grid) {
    const double n = field_norm(psi, grid);
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero or non-finite field");
    const double s = 1.0 / std::sqrt(n);
    for (auto& v : psi.amplitudes) v *= s;
    return psi;
}

inline CondensateField uniform_field(const Grid& grid) {
    return {std::vector<cplx>(grid.num_points(), cplx{1.0 / std::sqrt(2.0 * kPi), 0.0})};
}

inline void check_shape(const CondensateField& psi, const Grid& grid) {
    if (psi.size() != grid.num_points()) throw DomainError("field size does not match grid");
}

inline OrderParameters order_parameters(const CondensateField& psi, const Grid& grid) {
    check_shape(psi, grid);
    const double norm = field_norm(psi, grid);
    if (std::abs(norm - 1.0) > 1e-6) throw DomainError("order_parameters: field is not normalized");
    OrderParameters op;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double n = std::norm(psi[j]);
        const double x = grid.position(j);
        op.theta1 += n * std::cos(x);
        op.theta2 += n * std::sin(x);
    }
    op.theta1 *= grid.spacing();
    op.theta2 *= grid.spacing();
    return op;
}

struct PhaseShift {
    double chi;
    double R;
};

/// exp(i chi) * R == 1 / (delta_c + i kappa).
inline PhaseShift dissipative_phase_shift(double delta_c, double kappa) {
    if (delta_c == 0.0 && kappa == 0.0) throw DomainError("dissipative_phase_shift: delta_c = kappa = 0");
    // kappa = 0 must land on +pi, not the -0.0 side of the cut
    return {std::atan2(kappa == 0.0 ? 0.0 : -kappa, delta_c), 1.0 / std::hypot(delta_c, kappa)};
}

/// Critical coupling angle -chi + pi/2, left unnormalized (4.1244 for (-300, 200)).
inline double critical_angle(double delta_c, double kappa) {
    return -dissipative_phase_shift(delta_c, kappa).chi + kPi / 2;
}

inline cplx cavity_response(const ModelParams& p) {
    if (p.delta_c == 0.0 && p.kappa == 0.0) throw DomainError("cavity response undefined at delta_c = kappa = 0");
    return 1.0 / cplx{p.delta_c, p.kappa};
}

inline CavityAmplitude cavity_steady(const OrderParameters& op, const ModelParams& p) {
    const cplx source = p.lambda1 * op.theta1 + p.lambda2 * std::polar(1.0, -p.theta) * op.theta2;
    return source * cavity_response(p);
}

/// Fourier coefficients of the light-shift potential for a given cavity field.
inline spectral::Potential potential_coefficients(CavityAmplitude alpha, const ModelParams& p) {
    return {2.0 * p.lambda1 * alpha.real(), 2.0 * p.lambda2 * (alpha * std::polar(1.0, p.theta)).real(), p.v1, p.v2};
}

inline std::vector<double> effective_potential(CavityAmplitude alpha, const ModelParams& p, const Grid& grid) {
    const auto c = potential_coefficients(alpha, p);
    std::vector<double> v(grid.num_points());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double x = grid.position(j);
        const double cx = std::cos(x), sx = std::sin(x);
        v[j] = c.a_cos * cx + c.b_sin * sx + c.v_cos2 * cx * cx + c.v_sin2 * sx * sx;
    }
    return v;
}

/// psi(x - shift) for a shift of `samples` grid points.
inline CondensateField shift_samples(const CondensateField& psi, std::size_t samples) {
    const std::size_t n = psi.size();
    CondensateField out{std::vector<cplx>(n)};
    for (std::size_t j = 0; j < n; ++j) out[(j + samples) % n] = psi[j];
    return out;
}

/// psi(x - s) for arbitrary s, by a phase ramp on the plane-wave coefficients.
inline CondensateField shift_field(const CondensateField& psi, double s) {
    auto c = spectral::to_modes(psi.amplitudes);
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) c[i] *= std::polar(1.0, -spectral::wavenumber(i, n) * s);
    return {spectral::to_samples(c)};
}

struct FieldState {
    CavityAmplitude alpha{};
    CondensateField psi;
};

/// (alpha, psi(x)) -> (-alpha, psi(x - pi)).
inline FieldState apply_z2(const FieldState& s) {
    if (s.psi.size() % 2 != 0) throw DomainError("apply_z2 needs an even number of grid points");
    return {-s.alpha, shift_samples(s.psi, s.psi.size() / 2)};
}

/// Maps a state of (theta = pi/2, lambda cos(phi/2), lambda sin(phi/2)) onto the
/// equal-pump gauge (theta = phi, lambda/sqrt2, lambda/sqrt2):
/// alpha -> alpha exp(-i phi/2), psi(x) -> psi(x - pi/4).
inline std::pair<ModelParams, FieldState> to_equal_pump_gauge(const ModelParams& p, const FieldState& s) {
    if (std::abs(normalize_angle(p.theta) - kPi / 2) > 1e-12)
        throw DomainError("to_equal_pump_gauge expects theta = pi/2");
    const double eta = p.total_pump();
    const double phi = p.mixing_angle();
    ModelParams q = p;
    q.theta = normalize_angle(phi);
    q.lambda1 = q.lambda2 = eta / std::sqrt(2.0);
    FieldState out;
    out.alpha = s.alpha * std::polar(1.0, -phi / 2);
    const std::size_t n = s.psi.size();
    out.psi = n % 8 == 0 ? shift_samples(s.psi, n / 8) : shift_field(s.psi, kPi / 4);
    return {q, out};
}

struct Residual {
    double cavity = 0.0;  // |alpha - cavity_steady(Theta)|
    double atomic = 0.0;  // ||(H - mu) psi|| with mu = <H>
    double mu = 0.0;
    [[nodiscard]] double total() const { return std::hypot(cavity, atomic); }
};

/// Residual of the adiabatically eliminated steady-state equations at (alpha, psi).
inline Residual steady_state_residual(const FieldState& s, const ModelParams& p, const Grid& grid) {
    check_shape(s.psi, grid);
    const auto c = spectral::to_modes(s.psi.amplitudes);
    const std::size_t n = c.size();
    std::vector<cplx> hc(n);
    spectral::apply_potential(potential_coefficients(s.alpha, p), c, hc);
    const auto k2 = spectral::kinetic_diagonal(n);
    for (std::size_t i = 0; i < n; ++i) hc[i] += kRecoil * k2[i] * c[i];
    cplx num{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) num += std::conj(c[i]) * hc[i];
    const double norm = spectral::norm_squared(c);
    Residual r;
    r.mu = num.real() / norm;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(hc[i] - r.mu * c[i]);
    r.atomic = std::sqrt(acc);
    const auto m = spectral::density_moment(c);
    r.cavity = std::abs(s.alpha - cavity_steady({m.real() / norm, m.imag() / norm}, p));
    return r;
}

}  // namespace quadcav
