#pragma once

// Three-level (uniform + two recoil modes) reduction in the Holstein-Primakoff
// mean-field picture. Energy per atom:
//   E = -delta_c |alpha|^2 + w (|b1|^2 + |b2|^2) + sqrt(q) (mu1 X1 A1 + mu2 X2 A2),
// q = 1 - |b1|^2 - |b2|^2, X_s = 2 Re b_s, A1 = 2 Re alpha, A2 = 2 Re(alpha e^{i theta}),
// with i db/dt = dE/db* and i dalpha/dt = dE/dalpha* - i kappa alpha.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "quadcav/core.hpp"
#include "quadcav/dynamics.hpp"
#include "quadcav/error.hpp"
#include "quadcav/poly.hpp"
#include "quadcav/scan.hpp"
#include "quadcav/stability.hpp"

namespace quadcav {

struct TMParams {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double theta = kPi / 2;
    double delta_c = -300.0;
    double kappa = 0.0;

    static TMParams from_model(const ModelParams& p) {
        return {p.lambda1 / std::sqrt(2.0), p.lambda2 / std::sqrt(2.0), p.theta, p.delta_c, p.kappa};
    }
    [[nodiscard]] ModelParams to_model() const {
        ModelParams p;
        p.lambda1 = mu1 * std::sqrt(2.0);
        p.lambda2 = mu2 * std::sqrt(2.0);
        p.theta = theta;
        p.delta_c = delta_c;
        p.kappa = kappa;
        return p;
    }
    void validate() const {
        if (!(mu1 >= 0.0) || !(mu2 >= 0.0)) throw DomainError("three-mode couplings must be >= 0");
        if (!(kappa >= 0.0)) throw DomainError("kappa must be >= 0");
        if (delta_c == 0.0 && kappa == 0.0) throw DomainError("three-mode model needs delta_c^2 + kappa^2 > 0");
    }
};

/// mu_c = sqrt(-delta_c w_R) / 2 for the closed system.
inline double tm_critical_coupling(double delta_c) {
    if (!(delta_c < 0.0)) throw DomainError("tm_critical_coupling needs delta_c < 0");
    return std::sqrt(-delta_c * kRecoil) / 2.0;
}

struct TMState {
    cplx beta1{};
    cplx beta2{};
    cplx alpha{};

    [[nodiscard]] double p1() const { return std::norm(beta1); }
    [[nodiscard]] double p2() const { return std::norm(beta2); }
    [[nodiscard]] double q() const { return 1.0 - p1() - p2(); }
};

struct TMDerivative {
    cplx dbeta1{};
    cplx dbeta2{};
    cplx dalpha{};
};

namespace detail {

// Forward-mode dual number with six tangent directions.
struct Dual6 {
    double v = 0.0;
    std::array<double, 6> d{};

    Dual6() = default;
    Dual6(double x) : v(x) {}  // NOLINT(google-explicit-constructor)
    static Dual6 variable(double x, int i) {
        Dual6 r(x);
        r.d[static_cast<std::size_t>(i)] = 1.0;
        return r;
    }
};

inline Dual6 operator+(Dual6 a, const Dual6& b) {
    a.v += b.v;
    for (std::size_t i = 0; i < 6; ++i) a.d[i] += b.d[i];
    return a;
}
inline Dual6 operator-(Dual6 a, const Dual6& b) {
    a.v -= b.v;
    for (std::size_t i = 0; i < 6; ++i) a.d[i] -= b.d[i];
    return a;
}
inline Dual6 operator-(Dual6 a) {
    a.v = -a.v;
    for (auto& x : a.d) x = -x;
    return a;
}
inline Dual6 operator*(const Dual6& a, const Dual6& b) {
    Dual6 r(a.v * b.v);
    for (std::size_t i = 0; i < 6; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
inline Dual6 operator/(const Dual6& a, const Dual6& b) {
    Dual6 r(a.v / b.v);
    for (std::size_t i = 0; i < 6; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
    return r;
}
inline Dual6 sqrt(const Dual6& a) {
    Dual6 r(std::sqrt(a.v));
    for (std::size_t i = 0; i < 6; ++i) r.d[i] = a.d[i] / (2.0 * r.v);
    return r;
}
inline double value(double x) { return x; }
inline double value(const Dual6& x) { return x.v; }

// F = (Re F1, Im F1, Re F2, Im F2, Re Fa, Im Fa) for variables
// z = (Re b1, Im b1, Re b2, Im b2, Re alpha, Im alpha); i dz/dt = F.
template <class T>
std::array<T, 6> tm_forces(const std::array<T, 6>& z, const TMParams& p) {
    using std::sqrt;
    const T& br1 = z[0];
    const T& bi1 = z[1];
    const T& br2 = z[2];
    const T& bi2 = z[3];
    const T& ar = z[4];
    const T& ai = z[5];
    const T q = T(1.0) - br1 * br1 - bi1 * bi1 - br2 * br2 - bi2 * bi2;
    if (!(value(q) > 0.0)) throw DomainError("three-mode state left the Holstein-Primakoff domain (p1 + p2 >= 1)");
    const T sq = sqrt(q);
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    const T x1 = T(2.0) * br1;
    const T x2 = T(2.0) * br2;
    const T a1 = T(2.0) * ar;
    const T a2 = T(2.0) * (ar * T(ct) - ai * T(st));
    const T g = T(p.mu1) * x1 * a1 + T(p.mu2) * x2 * a2;
    const T h = g / (T(2.0) * sq);
    const double w = kRecoil;
    return {T(w) * br1 + T(p.mu1) * sq * a1 - br1 * h,
            T(w) * bi1 - bi1 * h,
            T(w) * br2 + T(p.mu2) * sq * a2 - br2 * h,
            T(w) * bi2 - bi2 * h,
            T(-p.delta_c) * ar + T(p.kappa) * ai + sq * (T(p.mu1) * x1 + T(p.mu2) * x2 * T(ct)),
            T(-p.delta_c) * ai - T(p.kappa) * ar - sq * T(p.mu2) * x2 * T(st)};
}

inline std::array<double, 6> pack(const TMState& s) {
    return {s.beta1.real(), s.beta1.imag(), s.beta2.real(), s.beta2.imag(), s.alpha.real(), s.alpha.imag()};
}

inline TMState unpack(const std::array<double, 6>& z) {
    return {{z[0], z[1]}, {z[2], z[3]}, {z[4], z[5]}};
}

// Real Jacobian dF/dz.
inline Eigen::Matrix<double, 6, 6> force_jacobian(const TMState& s, const TMParams& p) {
    const auto z = pack(s);
    std::array<Dual6, 6> zd;
    for (int i = 0; i < 6; ++i) zd[static_cast<std::size_t>(i)] = Dual6::variable(z[static_cast<std::size_t>(i)], i);
    const auto f = tm_forces(zd, p);
    Eigen::Matrix<double, 6, 6> j;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) j(r, c) = f[static_cast<std::size_t>(r)].d[static_cast<std::size_t>(c)];
    return j;
}

inline double force_norm(const TMState& s, const TMParams& p) {
    const auto f = tm_forces(pack(s), p);
    double acc = 0.0;
    for (double v : f) acc += v * v;
    return std::sqrt(acc);
}

}  // namespace detail

inline TMDerivative tm_rhs(const TMState& s, const TMParams& p) {
    const auto f = detail::tm_forces(detail::pack(s), p);
    const cplx mi{0.0, -1.0};
    return {mi * cplx{f[0], f[1]}, mi * cplx{f[2], f[3]}, mi * cplx{f[4], f[5]}};
}

inline double tm_residual(const TMState& s, const TMParams& p) { return detail::force_norm(s, p); }

/// |alpha|^2 - i (b1* b2 - b2* b1) = |alpha|^2 + 2 Im(b1* b2).
inline double tm_conserved_quantity(const TMState& s) {
    return std::norm(s.alpha) + 2.0 * (std::conj(s.beta1) * s.beta2).imag();
}

/// Theta_s = sqrt2 sqrt(q) Re b_s.
inline OrderParameters tm_order_parameters(const TMState& s) {
    const double sq = std::sqrt(std::max(0.0, s.q()));
    return {std::sqrt(2.0) * sq * s.beta1.real(), std::sqrt(2.0) * sq * s.beta2.real()};
}

struct TMSteady {
    TMState state;
    bool converged = false;
    double residual = 0.0;
    double mu = 0.0;  // eigenvalue of the three-level mean-field Hamiltonian
    long iterations = 0;
};

struct TMSteadySettings {
    double d_tau = 0.05;
    double relax_tol = 1e-12;
    long max_iter = 200000;
    double tol = 1e-10;  // Newton residual target
    int newton_iter = 50;
};

/// Relaxes the three-level amplitudes (c0, c1, c2) in imaginary time with the cavity
/// slaved to them, then polishes (b1, b2, alpha) by Newton on tm_rhs = 0.
/// Amplitudes are kept real (gauge c0 > 0); init supplies the seed b1, b2.
inline TMSteady tm_steady(const TMParams& p, const TMState& init, const TMSteadySettings& st = {}) {
    p.validate();
    if (!(init.q() > 0.0)) throw DomainError("tm_steady: initial state is not physical");
    const cplx resp = 1.0 / cplx{p.delta_c, p.kappa};
    const cplx rot = std::polar(1.0, p.theta);
    Eigen::Vector3d c(std::sqrt(init.q()), init.beta1.real(), init.beta2.real());
    c.normalize();
    auto cavity = [&](const Eigen::Vector3d& v) {
        return 2.0 * v(0) * (p.mu1 * v(1) + p.mu2 * v(2) * std::conj(rot)) * resp;
    };
    TMSteady out;
    double mu = 0.0;
    long it = 0;
    for (; it < st.max_iter; ++it) {
        const cplx a = cavity(c);
        const double a1 = 2.0 * a.real();
        const double a2 = 2.0 * (a * rot).real();
        Eigen::Matrix3d h;
        h << 0.0, p.mu1 * a1, p.mu2 * a2, p.mu1 * a1, kRecoil, 0.0, p.mu2 * a2, 0.0, kRecoil;
        const Eigen::Vector3d hc = h * c;
        mu = c.dot(hc);
        Eigen::Vector3d next = c - st.d_tau * (hc - mu * c);
        next.normalize();
        const double change = (next - c).norm() / st.d_tau;
        c = next;
        if (change < st.relax_tol) break;
    }
    out.iterations = it;
    out.mu = mu;
    if (c(0) < 0.0) c = -c;
    TMState s{{c(1), 0.0}, {c(2), 0.0}, cavity(c)};

    // Newton polish, minimum-norm steps for the rank-deficient U(1) families
    for (int k = 0; k < st.newton_iter && detail::force_norm(s, p) > st.tol; ++k) {
        const auto f = detail::tm_forces(detail::pack(s), p);
        const auto j = detail::force_jacobian(s, p);
        Eigen::Matrix<double, 6, 1> rhs;
        for (int i = 0; i < 6; ++i) rhs(i) = -f[static_cast<std::size_t>(i)];
        const Eigen::Matrix<double, 6, 1> dz = j.completeOrthogonalDecomposition().solve(rhs);
        auto z = detail::pack(s);
        for (int i = 0; i < 6; ++i) z[static_cast<std::size_t>(i)] += dz(i);
        const TMState cand = detail::unpack(z);
        if (!(cand.q() > 0.0)) break;
        s = cand;
    }
    out.state = s;
    out.residual = detail::force_norm(s, p);
    out.converged = out.residual < st.tol;
    return out;
}

enum class TMBranch { NP, DW1, DW2, MDW };

struct TMAnalytic {
    TMBranch branch = TMBranch::NP;
    double p1 = 0.0;
    double p2 = 0.0;
    bool family = false;  // MDW: only p1 + p2 is fixed
};

/// Closed-form populations for theta = pi/2, kappa = 0.
inline TMAnalytic tm_analytic(const TMParams& p) {
    if (p.kappa != 0.0 || std::abs(normalize_angle(p.theta) - kPi / 2) > 1e-12)
        throw DomainError("tm_analytic applies only to theta = pi/2, kappa = 0");
    const double muc = tm_critical_coupling(p.delta_c);
    auto pop = [&](double mu) { return (4.0 * mu * mu + p.delta_c * kRecoil) / (8.0 * mu * mu); };
    TMAnalytic a;
    if (p.mu1 <= muc && p.mu2 <= muc) return a;
    if (p.mu1 == p.mu2) {
        a.branch = TMBranch::MDW;
        a.family = true;
        a.p1 = a.p2 = 0.5 * pop(p.mu1);
    } else if (p.mu1 > p.mu2) {
        a.branch = TMBranch::DW1;
        a.p1 = pop(p.mu1);
    } else {
        a.branch = TMBranch::DW2;
        a.p2 = pop(p.mu2);
    }
    return a;
}

/// Explicit fixed point for given populations at theta = pi/2, kappa = 0 (real b's).
inline TMState tm_analytic_state(const TMParams& p, double p1, double p2) {
    if (p1 < 0.0 || p2 < 0.0 || p1 + p2 >= 1.0) throw DomainError("tm_analytic_state: unphysical populations");
    TMState s{{std::sqrt(p1), 0.0}, {std::sqrt(p2), 0.0}, {}};
    const double sq = std::sqrt(s.q());
    s.alpha = sq * (p.mu1 * 2.0 * s.beta1.real() + p.mu2 * 2.0 * s.beta2.real() * std::polar(1.0, -p.theta)) /
              cplx{p.delta_c, p.kappa};
    return s;
}

/// i d/dt of (da, da*, db1, db1*, db2, db2*) linearized at s; eigenvalues are omega = nu - i gamma.
inline Eigen::Matrix<cplx, 6, 6> tm_fluctuation_matrix(const TMState& s, const TMParams& p,
                                                       double residual_tol = 1e-6) {
    if (detail::force_norm(s, p) > residual_tol)
        throw DomainError("tm_fluctuation_matrix: state is not a steady state");
    const auto j = detail::force_jacobian(s, p);  // dF/dz, i dz/dt = F
    // complex variables in real layout: b1 -> (0,1), b2 -> (2,3), alpha -> (4,5)
    const std::array<int, 3> var{4, 0, 2};  // alpha, b1, b2
    const cplx I{0.0, 1.0};
    Eigen::Matrix<cplx, 6, 6> m;
    for (int a = 0; a < 3; ++a) {
        const int ra = var[static_cast<std::size_t>(a)];
        for (int b = 0; b < 3; ++b) {
            const int rb = var[static_cast<std::size_t>(b)];
            // F_a = Fr + i Fi as function of w_b = x + i y
            const cplx dfx{j(ra, rb), j(ra + 1, rb)};
            const cplx dfy{j(ra, rb + 1), j(ra + 1, rb + 1)};
            const cplx dw = 0.5 * (dfx - I * dfy);
            const cplx dwc = 0.5 * (dfx + I * dfy);
            m(2 * a, 2 * b) = dw;
            m(2 * a, 2 * b + 1) = dwc;
            // i d/dt w* = -conj(F): derivatives conjugate with a sign flip
            m(2 * a + 1, 2 * b) = -std::conj(dwc);
            m(2 * a + 1, 2 * b + 1) = -std::conj(dw);
        }
    }
    return m;
}

inline Spectrum tm_spectrum(const TMState& s, const TMParams& p) {
    const Eigen::MatrixXcd m = tm_fluctuation_matrix(s, p);
    return {poly_roots(characteristic_polynomial(m)), SpectrumSource::ThreeMode6};
}

struct TMTrajectory {
    std::vector<double> times;
    std::vector<TMState> states;
};

/// RK4 in the interaction picture of the free cavity and recoil terms.
inline TMTrajectory tm_evolve(const TMState& init, const TMParams& p, double dt, long n_steps, long stride = 1) {
    p.validate();
    if (!(dt > 0.0) || n_steps < 0 || stride < 1) throw DomainError("tm_evolve: bad step settings");
    const cplx lb{0.0, -kRecoil};
    const cplx la{-p.kappa, p.delta_c};
    struct Y {
        cplx b1, b2, a;
    };
    auto nonlinear = [&](const Y& y) {
        const auto d = tm_rhs({y.b1, y.b2, y.a}, p);
        return Y{d.dbeta1 - lb * y.b1, d.dbeta2 - lb * y.b2, d.dalpha - la * y.a};
    };
    const cplx eb = std::exp(lb * dt), ebh = std::exp(lb * (dt / 2));
    const cplx ea = std::exp(la * dt), eah = std::exp(la * (dt / 2));
    auto prop = [](const Y& y, cplx fb, cplx fa) { return Y{fb * y.b1, fb * y.b2, fa * y.a}; };
    auto add = [](const Y& y, const Y& k, double s) { return Y{y.b1 + s * k.b1, y.b2 + s * k.b2, y.a + s * k.a}; };

    TMTrajectory out;
    Y y{init.beta1, init.beta2, init.alpha};
    out.times.push_back(0.0);
    out.states.push_back(init);
    for (long s = 1; s <= n_steps; ++s) {
        const Y k1 = nonlinear(y);
        const Y k2 = nonlinear(prop(add(y, k1, dt / 2), ebh, eah));
        const Y k3 = nonlinear(add(prop(y, ebh, eah), k2, dt / 2));
        const Y k4 = nonlinear(add(prop(y, eb, ea), prop(k3, ebh, eah), dt));
        const Y a = prop(add(y, k1, dt / 6), eb, ea);
        const Y b = prop(Y{k2.b1 + k3.b1, k2.b2 + k3.b2, k2.a + k3.a}, ebh, eah);
        y = Y{a.b1 + dt / 3 * b.b1 + dt / 6 * k4.b1, a.b2 + dt / 3 * b.b2 + dt / 6 * k4.b2,
              a.a + dt / 3 * b.a + dt / 6 * k4.a};
        if (!(1.0 - std::norm(y.b1) - std::norm(y.b2) > 0.0))
            throw DomainError("tm_evolve: Holstein-Primakoff breakdown at step " + std::to_string(s));
        if (s % stride == 0) {
            out.times.push_back(dt * static_cast<double>(s));
            out.states.push_back({y.b1, y.b2, y.a});
        }
    }
    return out;
}

/// Lower-mu relaxation of the (eps, eps) and (eps, -eps) seeds, mirroring find_steady_state.
inline TMSteady tm_find_steady(const TMParams& p, double eps = 0.01, const TMSteadySettings& st = {}) {
    auto a = tm_steady(p, {{eps, 0.0}, {eps, 0.0}, {}}, st);
    auto b = tm_steady(p, {{eps, 0.0}, {-eps, 0.0}, {}}, st);
    if (a.converged != b.converged) return a.converged ? a : b;
    const double tie = 1e-9 * std::max(1.0, std::abs(a.mu));
    if (std::abs(a.mu - b.mu) > tie) return a.mu < b.mu ? a : b;
    return std::abs(b.state.beta2) < std::abs(a.state.beta2) ? b : a;
}

struct Comparison {
    CellRecord full;
    TMSteady reduced;
    OrderParameters reduced_order;
    PhaseLabel reduced_label = PhaseLabel::NP;
    double reduced_growth = 0.0;  // max Im over the three-mode spectrum of the reduced state
    double delta_theta1 = 0.0;    // |Theta1|_reduced - |Theta1|_full
    double delta_theta2 = 0.0;
};

/// Full continuum classification next to the three-mode steady state at the same physical point.
inline Comparison compare_with_full(const ModelParams& params, const Grid& grid, const ClassifyConfig& cfg = {}) {
    Comparison c;
    c.full = classify_point(params, grid, cfg);
    const auto tp = TMParams::from_model(params);
    c.reduced = tm_find_steady(tp, cfg.seed_eps);
    c.reduced_order = tm_order_parameters(c.reduced.state);
    c.reduced_label = label_from_order(c.reduced_order.theta1, c.reduced_order.theta2, cfg);
    if (c.reduced.converged) c.reduced_growth = max_growth(tm_spectrum(c.reduced.state, tp));
    c.delta_theta1 = std::abs(c.reduced_order.theta1) - std::abs(c.full.theta1);
    c.delta_theta2 = std::abs(c.reduced_order.theta2) - std::abs(c.full.theta2);
    return c;
}

}  // namespace quadcav
