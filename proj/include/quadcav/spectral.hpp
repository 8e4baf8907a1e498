#pragma once

// Plane-wave representation of fields on the periodic one-wavelength grid.
//
// A field sampled at x_j = j*2pi/N is stored as coefficients c_k with
//   psi(x_j) = sum_k c_k exp(i k x_j) / sqrt(2pi),
// k in FFT order (0, 1, ..., N/2-1, -N/2, ..., -1). With this scaling the grid
// quadrature dx*sum|psi_j|^2 equals sum|c_k|^2, and multiplying by cos x or
// sin x on the grid is an exact circular shift of the coefficients. The hot
// loops of the solvers never leave this representation.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace quadcav::spectral {

using cplx = std::complex<double>;
using Modes = std::vector<cplx>;

inline int wavenumber(std::size_t index, std::size_t n) {
    const auto i = static_cast<long>(index);
    const auto half = static_cast<long>(n / 2);
    return static_cast<int>(i < half ? i : i - static_cast<long>(n));
}

inline Modes to_modes(std::span<const cplx> samples) {
    const std::size_t n = samples.size();
    std::vector<cplx> in(samples.begin(), samples.end());
    Modes out(n);
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    const double scale = std::sqrt(2.0 * std::numbers::pi) / static_cast<double>(n);
    for (auto& c : out) c *= scale;
    return out;
}

inline std::vector<cplx> to_samples(std::span<const cplx> modes) {
    const std::size_t n = modes.size();
    std::vector<cplx> in(modes.begin(), modes.end());
    std::vector<cplx> out(n);
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    fft.inv(out, in);
    const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (auto& v : out) v *= scale;
    return out;
}

/// V(x) = a_cos cos x + b_sin sin x + v_cos2 cos^2 x + v_sin2 sin^2 x.
struct Potential {
    double a_cos = 0.0;
    double b_sin = 0.0;
    double v_cos2 = 0.0;
    double v_sin2 = 0.0;
};

/// out = V * in, computed as neighbour couplings in k-space.
inline void apply_potential(const Potential& v, std::span<const cplx> in, std::span<cplx> out) {
    const std::size_t n = in.size();
    const cplx from_below{0.5 * v.a_cos, -0.5 * v.b_sin};  // multiplies c_{k-1}
    const cplx from_above{0.5 * v.a_cos, 0.5 * v.b_sin};   // multiplies c_{k+1}
    const double diag = 0.5 * (v.v_cos2 + v.v_sin2);
    const double second = 0.25 * (v.v_cos2 - v.v_sin2);  // multiplies c_{k+-2}
    const bool lattice = second != 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t km1 = k == 0 ? n - 1 : k - 1;
        const std::size_t kp1 = k + 1 == n ? 0 : k + 1;
        cplx acc = from_below * in[km1] + from_above * in[kp1] + diag * in[k];
        if (lattice) acc += second * (in[(k + n - 2) % n] + in[(k + 2) % n]);
        out[k] = acc;
    }
}

/// sum_k conj(c_k) c_{k-1}; its real and imaginary parts are <cos x> and <sin x>.
inline cplx density_moment(std::span<const cplx> c) {
    const std::size_t n = c.size();
    cplx s{0.0, 0.0};
    s += std::conj(c[0]) * c[n - 1];
    for (std::size_t k = 1; k < n; ++k) s += std::conj(c[k]) * c[k - 1];
    return s;
}

/// <cos 2x> for the v1/v2 lattice terms.
inline double second_harmonic_moment(std::span<const cplx> c) {
    const std::size_t n = c.size();
    cplx s{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) s += std::conj(c[k]) * c[(k + n - 2) % n];
    return s.real();
}

inline double norm_squared(std::span<const cplx> c) {
    double s = 0.0;
    for (const auto& v : c) s += std::norm(v);
    return s;
}

inline std::vector<double> kinetic_diagonal(std::size_t n) {
    std::vector<double> k2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k = wavenumber(i, n);
        k2[i] = k * k;
    }
    return k2;
}

}  // namespace quadcav::spectral
