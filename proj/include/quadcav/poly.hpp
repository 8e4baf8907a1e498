#pragma once

// Complex polynomials with ascending coefficients: p(z) = sum_i c[i] z^i.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "quadcav/error.hpp"

namespace quadcav {

using Poly = std::vector<std::complex<double>>;

class RootFindError : public SolverError {
public:
    RootFindError(const std::string& what, Poly best) : SolverError(what), best_(std::move(best)) {}
    [[nodiscard]] const Poly& best_iterate() const { return best_; }

private:
    Poly best_;
};

inline std::complex<double> poly_eval(const Poly& c, std::complex<double> z) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc;
}

/// sum_i |c_i| |z|^i, the scale against which residuals are judged.
inline double poly_scale(const Poly& c, std::complex<double> z) {
    const double r = std::abs(z);
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * r + std::abs(c[i]);
    return acc;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, {0.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline Poly poly_add(Poly a, const Poly& b, std::complex<double> s = 1.0) {
    if (a.size() < b.size()) a.resize(b.size(), {0.0, 0.0});
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
    return a;
}

/// Monic polynomial with the given roots.
inline Poly poly_from_roots(const std::vector<std::complex<double>>& roots) {
    Poly p{{1.0, 0.0}};
    for (const auto& r : roots) p = poly_mul(p, Poly{-r, {1.0, 0.0}});
    return p;
}

inline Poly poly_derivative(const Poly& c) {
    if (c.size() < 2) return {{0.0, 0.0}};
    Poly d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
    return d;
}

namespace detail {

// Roots of multiplicity m only resolve to ~eps^(1/m). A tight group of m roots whose
// centre zeroes p, p', ..., p^(m-1) is a multiple root: the centre is refined by Newton
// on p^(m-1), where it is simple, and the group is placed on it.
inline void merge_multiple_roots(const Poly& c, std::vector<std::complex<double>>& z, double tol) {
    const std::size_t n = z.size();
    std::vector<bool> used(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        if (used[k]) continue;
        const double rad = 1e-3 * std::max(1.0, std::abs(z[k]));
        std::vector<std::size_t> group{k};
        for (std::size_t j = k + 1; j < n; ++j)
            if (!used[j] && std::abs(z[j] - z[k]) < rad) group.push_back(j);
        if (group.size() < 2) continue;
        std::complex<double> centre{0.0, 0.0};
        for (auto j : group) centre += z[j] / static_cast<double>(group.size());
        std::vector<Poly> ders{c};
        for (std::size_t m = 1; m <= group.size(); ++m) ders.push_back(poly_derivative(ders.back()));
        const Poly& q = ders[group.size() - 1];
        const Poly& dq = ders[group.size()];
        for (int it = 0; it < 8; ++it) {
            const auto d = poly_eval(dq, centre);
            if (d == std::complex<double>{0.0, 0.0}) break;
            centre -= poly_eval(q, centre) / d;
        }
        bool multiple = std::abs(centre - z[k]) < rad;
        for (std::size_t m = 0; m < group.size() && multiple; ++m)
            multiple = std::abs(poly_eval(ders[m], centre)) <= (m == 0 ? tol : 1e-10) * poly_scale(ders[m], centre);
        if (!multiple) continue;
        for (auto j : group) {
            z[j] = centre;
            used[j] = true;
        }
    }
}

}  // namespace detail

/// Durand-Kerner iteration, finished by a Newton polish of every root and a merge of
/// numerically multiple roots.
/// Starts on a circle of radius 1 + max|c_i / c_n|.
inline std::vector<std::complex<double>> poly_roots(Poly c, double tol = 1e-12, int max_iter = 200) {
    while (!c.empty() && c.back() == std::complex<double>{0.0, 0.0}) c.pop_back();
    if (c.size() < 2) throw DomainError("poly_roots: degree must be >= 1 with nonzero leading coefficient");
    const std::size_t n = c.size() - 1;
    const auto lead = c.back();
    for (auto& v : c) v /= lead;

    double radius = 0.0;
    for (std::size_t i = 0; i < n; ++i) radius = std::max(radius, std::abs(c[i]));
    radius += 1.0;

    std::vector<std::complex<double>> z(n);
    for (std::size_t k = 0; k < n; ++k)
        z[k] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4);

    auto converged = [&] {
        for (const auto& r : z)
            if (std::abs(poly_eval(c, r)) > tol * poly_scale(c, r)) return false;
        return true;
    };

    int it = 0;
    for (; it < max_iter; ++it) {
        double change = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> den{1.0, 0.0};
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) den *= z[k] - z[j];
            if (den == std::complex<double>{0.0, 0.0}) den = {1e-300, 0.0};
            const auto step = poly_eval(c, z[k]) / den;
            z[k] -= step;
            change = std::max(change, std::abs(step) / std::max(1.0, std::abs(z[k])));
        }
        if (change < tol || converged()) break;
    }

    Poly dc(n);
    for (std::size_t i = 1; i <= n; ++i) dc[i - 1] = static_cast<double>(i) * c[i];
    for (auto& r : z) {
        for (int k = 0; k < 3; ++k) {
            const auto d = poly_eval(dc, r);
            if (d == std::complex<double>{0.0, 0.0}) break;
            const auto cand = r - poly_eval(c, r) / d;
            if (std::abs(poly_eval(c, cand)) >= std::abs(poly_eval(c, r))) break;
            r = cand;
        }
    }
    detail::merge_multiple_roots(c, z, tol);
    if (!converged()) {
        double worst = 0.0;
        for (const auto& r : z) worst = std::max(worst, std::abs(poly_eval(c, r)) / poly_scale(c, r));
        throw RootFindError("poly_roots: no convergence after " + std::to_string(it) +
                                " iterations, worst relative residual " + std::to_string(worst),
                            z);
    }
    return z;
}

/// Coefficients of det(z I - A), ascending, via the Faddeev-LeVerrier recursion.
inline Poly characteristic_polynomial(const Eigen::MatrixXcd& a) {
    const auto n = a.rows();
    if (n != a.cols()) throw DomainError("characteristic_polynomial: matrix must be square");
    Poly c(static_cast<std::size_t>(n) + 1);
    c[static_cast<std::size_t>(n)] = 1.0;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        m = a * m + c[static_cast<std::size_t>(n - k + 1)] * id;
        c[static_cast<std::size_t>(n - k)] = -(a * m).trace() / static_cast<double>(k);
    }
    return c;
}

}  // namespace quadcav
