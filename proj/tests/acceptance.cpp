// Acceptance suite: one PASS/FAIL line per criterion, sub-checks listed beneath.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <tuple>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "quadcav/core.hpp"
#include "quadcav/dynamics.hpp"
#include "quadcav/scan.hpp"
#include "quadcav/stability.hpp"
#include "quadcav/threemode.hpp"

using namespace quadcav;

namespace {

constexpr std::size_t kNx = 128;
constexpr std::size_t kCells = 64;
constexpr double kHi = 30.0;

struct Check {
    std::string what;
    bool ok;
};

class Criterion {
public:
    explicit Criterion(std::string title) : title_(std::move(title)) {}

    bool check(bool ok, const std::string& what) {
        checks_.push_back({what, ok});
        return ok;
    }
    [[nodiscard]] bool passed() const {
        for (const auto& c : checks_)
            if (!c.ok) return false;
        return !checks_.empty();
    }
    void print() const {
        std::cout << (passed() ? "[PASS] " : "[FAIL] ") << title_ << "\n";
        for (const auto& c : checks_) std::cout << "         " << (c.ok ? "ok   " : "FAIL ") << c.what << "\n";
        std::cout << std::flush;
    }

private:
    std::string title_;
    std::vector<Check> checks_;
};

std::string num(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelParams model(double kappa, double theta) {
    ModelParams p;
    p.kappa = kappa;
    p.theta = theta;
    return p;
}

PhaseTable square_sweep(const ModelParams& base, double* secs) {
    const auto t0 = std::chrono::steady_clock::now();
    auto t = sweep_eta(base, {0, kHi}, {0, kHi}, kCells, kCells, Grid(kNx), ClassifyConfig{}, 0);
    *secs = seconds_since(t0);
    return t;
}

/// Boundary position along a row/column: midpoint of the first label change from NP.
double first_exit_from_np(const std::vector<CellRecord>& line, const std::vector<double>& coord) {
    for (std::size_t k = 1; k < line.size(); ++k)
        if (line[k - 1].label == PhaseLabel::NP && line[k].label != PhaseLabel::NP) return 0.5 * (coord[k - 1] + coord[k]);
    return -1;
}

std::vector<CellRecord> classify_line(const std::function<ModelParams(double)>& at, double lo, double hi, double step) {
    std::vector<ModelParams> pts;
    for (double s = lo; s <= hi + 1e-12; s += step) pts.push_back(at(s));
    return classify_points(pts, Grid(kNx), ClassifyConfig{}, 0);
}

std::string crossings_text(const std::vector<Crossing>& xs) {
    std::ostringstream os;
    for (const auto& x : xs)
        os << to_string(x.from) << "->" << to_string(x.to) << " jump " << num(x.jump, 3) << (x.first_order ? " (1st) " : " (2nd) ");
    return os.str();
}

bool closed_under_reflection(const std::vector<cplx>& r, double tol) {
    std::vector<cplx> m;
    for (const auto& z : r) m.push_back(-std::conj(z));
    return oracle::set_distance(r, m) < tol;
}

// ---------------------------------------------------------------------------

PhaseTable g_closed;  // shared by criteria 1 and 2

Criterion criterion1() {
    Criterion c("1  closed-system threshold (kappa=0, theta=pi/2): lambda_c = sqrt(150)");
    const double lc = std::sqrt(150.0);
    const auto th = np_threshold(model(0, kPi / 2), 0);
    const double rel = std::abs(th.lambda - lc) / lc;
    c.check(rel <= 1e-6, "np_threshold " + num(th.lambda, 12) + ", relative error " + num(rel, 3) + " <= 1e-6");
    double secs = 0;
    g_closed = square_sweep(model(0, kPi / 2), &secs);
    const double step = g_closed.first.step();
    std::vector<CellRecord> row, col;
    std::vector<double> coord;
    for (std::size_t i = 0; i < kCells; ++i) {
        row.push_back(g_closed.at(i, 0));
        col.push_back(g_closed.at(0, i));
        coord.push_back(g_closed.first.value(i));
    }
    const double b1 = first_exit_from_np(row, coord), b2 = first_exit_from_np(col, coord);
    c.check(std::abs(b1 - lc) <= step, "sweep boundary on lambda1 axis " + num(b1) + " within one cell (" + num(step, 4) + ")");
    c.check(std::abs(b2 - lc) <= step, "sweep boundary on lambda2 axis " + num(b2) + " within one cell");
    c.check(secs <= 600, "64x64 sweep at N_x=128 took " + num(secs, 4) + " s (<= 600 s)");
    return c;
}

Criterion criterion2() {
    Criterion c("2  four-phase structure and transition orders (kappa=0, theta=pi/2)");
    const double lc = std::sqrt(150.0);
    const double step = g_closed.first.step();
    std::size_t mismatched = 0, compared = 0, diag = 0;
    for (std::size_t i = 0; i < kCells; ++i)
        for (std::size_t j = 0; j < kCells; ++j) {
            const auto& cell = g_closed.at(i, j);
            diag += cell.diagnostic ? 1 : 0;
            const double l1 = g_closed.first.value(i), l2 = g_closed.second.value(j);
            if (std::abs(std::max(l1, l2) - lc) < step) continue;  // one-cell band at lambda_c
            PhaseLabel want = PhaseLabel::NP;
            if (std::max(l1, l2) > lc) want = i == j ? PhaseLabel::MDW : (l1 > l2 ? PhaseLabel::DW1 : PhaseLabel::DW2);
            ++compared;
            if (cell.label != want) ++mismatched;
        }
    c.check(mismatched == 0, num(static_cast<double>(mismatched)) + " of " + num(static_cast<double>(compared)) +
                                 " cells off the predicted NP/DW1/DW2/MDW layout (one-cell band at lambda_c excluded)");
    c.check(diag == 0, "diagnostic cells: " + num(static_cast<double>(diag)));

    const double h = 0.005;
    // DW II -> DW I across the diagonal at total 40
    const auto diag_path = classify_line([](double s) {
        auto p = model(0, kPi / 2);
        p.lambda1 = 20 + s;
        p.lambda2 = 20 - s;
        return p;
    }, -0.05, 0.05, h);
    const auto xd = transition_order(diag_path, ClassifyConfig{}.jump_tol);
    bool all_first = !xd.empty(), saw_dw = false;
    for (const auto& x : xd) all_first = all_first && x.first_order;
    saw_dw = diag_path.front().label == PhaseLabel::DW2 && diag_path.back().label == PhaseLabel::DW1;
    c.check(all_first && saw_dw, "DW2->DW1 across lambda1=lambda2=20, spacing 0.005: " + crossings_text(xd));

    auto second_order_path = [&](const std::string& name, std::function<ModelParams(double)> at) {
        const auto path = classify_line(at, 12.2, 12.3, h);
        const auto xs = transition_order(path, ClassifyConfig{}.jump_tol);
        bool ok = !xs.empty();
        for (const auto& x : xs) ok = ok && !x.first_order && x.from == PhaseLabel::NP;
        c.check(ok, name + ", spacing 0.005: " + crossings_text(xs));
    };
    second_order_path("NP->DW1 at lambda2=5", [](double s) {
        auto p = model(0, kPi / 2);
        p.lambda1 = s;
        p.lambda2 = 5;
        return p;
    });
    second_order_path("NP->DW2 at lambda1=5", [](double s) {
        auto p = model(0, kPi / 2);
        p.lambda1 = 5;
        p.lambda2 = s;
        return p;
    });
    second_order_path("NP->MDW on the diagonal", [](double s) {
        auto p = model(0, kPi / 2);
        p.lambda1 = p.lambda2 = s;
        return p;
    });
    return c;
}

Criterion criterion3() {
    Criterion c("3  adiabatic spectrum vs eigenvalues of the explicit 4x4 matrix (1000 draws, 1e-10)");
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) {
        ModelParams p;
        p.lambda1 = 30 * u(rng);
        p.lambda2 = 30 * u(rng);
        p.theta = 2 * kPi * u(rng) - kPi;
        p.delta_c = -(1 + 999 * u(rng));
        p.kappa = 1000 * u(rng);
        const auto ref = oracle::eigenvalues(
            Eigen::MatrixXd(oracle::explicit_matrix(p.lambda1, p.lambda2, p.theta, p.delta_c, p.kappa)));
        worst = std::max(worst, oracle::set_distance(adiabatic_spectrum(p).roots, ref));
    }
    c.check(worst <= 1e-10, "max root distance " + num(worst, 3));
    c.check(seconds_since(t0) < 60, "runtime " + num(seconds_since(t0), 3) + " s");
    return c;
}

Criterion criterion4() {
    Criterion c("4  instability criterion vs spectral classification (1e4 draws)");
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0, 1);
    int agree = 0, outside_band = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        ModelParams p;
        p.lambda1 = 30 * u(rng);
        p.lambda2 = 30 * u(rng);
        p.theta = 2 * kPi * u(rng) - kPi;
        p.delta_c = -(1 + 999 * u(rng));
        p.kappa = 1000 * u(rng);
        const bool crit = instability_criterion(p);
        const bool spec = !classify_stability(adiabatic_spectrum(p)).stable;
        if (crit == spec) {
            ++agree;
            continue;
        }
        const double phi = p.mixing_angle();
        const double cchi = p.delta_c / std::hypot(p.delta_c, p.kappa);
        const double margin = std::pow(std::sin(phi) * std::sin(p.theta), 2) - cchi * cchi;
        if (std::abs(margin) > 1e-6) ++outside_band;
    }
    c.check(agree >= 0.999 * n, "agreement " + num(agree) + "/" + num(n));
    c.check(outside_band == 0, "disagreements outside the 1e-6 band: " + num(outside_band));
    return c;
}

Criterion criterion5() {
    Criterion c("5  dissipative UST region (theta=pi/2, kappa=200) and limit cycle at lambda1=lambda2=15");
    double secs = 0;
    const auto t = square_sweep(model(200, kPi / 2), &secs);
    const double c2 = 9.0 / 13.0;
    auto expect_ust = [&](std::size_t i, std::size_t j) {
        const double l1 = t.first.value(i), l2 = t.second.value(j);
        if (l1 + l2 == 0) return false;
        const double s = std::sin(2 * std::atan2(l2, l1));
        return s * s > c2;
    };
    std::size_t mism = 0, compared = 0, ust = 0;
    for (std::size_t i = 0; i < kCells; ++i)
        for (std::size_t j = 0; j < kCells; ++j) {
            const bool want = expect_ust(i, j);
            bool band = false;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const long a = static_cast<long>(i) + di, b = static_cast<long>(j) + dj;
                    if (a < 0 || b < 0 || a >= static_cast<long>(kCells) || b >= static_cast<long>(kCells)) continue;
                    band = band || expect_ust(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) != want;
                }
            const bool got = t.at(i, j).label == PhaseLabel::UST;
            ust += got ? 1 : 0;
            if (band) continue;
            ++compared;
            if (got != want) ++mism;
        }
    c.check(mism == 0, "UST cells vs sin^2(phi) > 9/13: " + num(static_cast<double>(mism)) + " mismatches of " +
                           num(static_cast<double>(compared)) + " cells off the one-cell band (" +
                           num(static_cast<double>(ust)) + " UST cells, sweep " + num(secs, 4) + " s)");

    Grid g(kNx);
    auto p = model(200, kPi / 2);
    p.lambda1 = p.lambda2 = 15;
    const auto psi = seed_state(0.01, 0.01, g);
    const double dt = default_time_step(p);
    const auto traj = evolve_real_time(psi, cavity_steady(order_parameters(psi, g), p), p, g, dt,
                                       static_cast<long>(std::ceil(500 / dt)), std::max(1L, std::lround(0.1 / dt)));
    const auto lc = detect_limit_cycle(traj, ClassifyConfig{}.transient_fraction);
    // window statistics, printed so a failure is diagnosable
    const auto& s = traj.samples;
    const double t_start = 0.4 * s.back().t;
    std::vector<double> w;
    for (const auto& x : s)
        if (x.t >= t_start) w.push_back(std::abs(x.alpha));
    double lead = 0, trail = 0;
    for (std::size_t i = 0; i < w.size() / 2; ++i) lead += w[i];
    for (std::size_t i = w.size() / 2; i < w.size(); ++i) trail += w[i];
    lead /= static_cast<double>(w.size() / 2);
    trail /= static_cast<double>(w.size() - w.size() / 2);
    c.check(lc.oscillatory, "real-time 500/w_R at lambda=15: oscillatory=" + std::string(lc.oscillatory ? "true" : "false") +
                                ", std/mean amplitude " + num(lc.amplitude, 3) + ", period " + num(lc.period, 4) +
                                ", trailing/leading mean " + num(trail / lead, 4) + " (detector needs >= 0.9)");
    return c;
}

Criterion criterion6() {
    const double tc = critical_angle(-300, 200);
    Criterion c("6  critical-angle restoration (theta = -chi + pi/2 = " + num(tc, 5) + ")");
    double secs = 0;
    const auto t = square_sweep(model(200, tc), &secs);
    const double etac = std::sqrt(150.0) / std::abs(std::sin(tc));
    const double step = t.first.step();
    std::size_t ust = 0, bad = 0, region = 0;
    double worst_t2 = 0;
    std::string where;
    for (std::size_t i = 0; i < kCells; ++i)
        for (std::size_t j = 0; j < kCells; ++j) {
            const auto& cell = t.at(i, j);
            const double l1 = t.first.value(i), l2 = t.second.value(j);
            if (cell.label == PhaseLabel::UST && ++ust <= 4) where += " (" + num(l1, 4) + ", " + num(l2, 4) + ")";
            if (l1 > etac + step && l1 > l2 + step) {
                ++region;
                if (cell.label != PhaseLabel::DW1 || std::abs(cell.theta2) >= 1e-3) ++bad;
                worst_t2 = std::max(worst_t2, std::abs(cell.theta2));
            }
        }
    c.check(ust == 0, "UST cells on the 64x64 sweep: " + num(static_cast<double>(ust)) + where + " (sweep " + num(secs, 4) + " s)");
    c.check(bad == 0, "region lambda1 > eta_c~, lambda1 > lambda2: " + num(static_cast<double>(bad)) + " of " +
                          num(static_cast<double>(region)) + " cells not DW1 with |Theta2| < 1e-3 (max |Theta2| " +
                          num(worst_t2, 3) + ")");
    std::vector<CellRecord> row;
    std::vector<double> coord;
    for (std::size_t i = 0; i < kCells; ++i) {
        row.push_back(t.at(i, 0));
        coord.push_back(t.first.value(i));
    }
    const double b = first_exit_from_np(row, coord);
    c.check(std::abs(b - etac) <= step && row.back().label == PhaseLabel::DW1,
            "DW1 threshold on lambda2=0 at " + num(b) + " vs eta_c/|sin theta_c| = " + num(etac) + " (cell " + num(step, 4) + ")");
    return c;
}

Criterion criterion7() {
    Criterion c("7  beyond-adiabatic convergence along lambda1 + lambda2 = 2, delta_c = -1.5 kappa");
    std::vector<double> dev;
    std::string text;
    for (double kap : {5.0, 15.0, 50.0, 1000.0, 6000.0}) {
        double worst = 0;
        for (int i = 0; i <= 200; ++i) {
            ModelParams p;
            p.kappa = kap;
            p.delta_c = -1.5 * kap;
            p.lambda1 = 2.0 * i / 200;
            p.lambda2 = 2.0 - p.lambda1;
            worst = std::max(worst, soft_branch_deviation(p));
        }
        dev.push_back(worst);
        text += num(worst, 3) + " ";
    }
    bool mono = true;
    for (std::size_t i = 1; i < dev.size(); ++i) mono = mono && dev[i] < dev[i - 1];
    c.check(mono, "max relative deviation for kappa = 5, 15, 50, 1000, 6000: " + text + "(strictly decreasing)");
    c.check(dev.back() <= 0.01, "at kappa = 6000: " + num(dev.back(), 3) + " <= 1%");
    auto np = model(200, kPi / 5);
    np.lambda1 = np.lambda2 = 5;
    const auto v5 = classify_stability(beyond_adiabatic_roots(np));
    np.theta = 0;
    const auto v0 = classify_stability(beyond_adiabatic_roots(np));
    c.check(!v5.stable, "NP at theta=pi/5 (lambda=5, kappa=200): root with Im>0, |Re|>0, growth " + num(v5.worst_growth, 3));
    c.check(v0.stable, "NP at theta=0: no growing oscillatory root (worst " + num(v0.worst_growth, 3) + ")");
    return c;
}

Criterion criterion8() {
    Criterion c("8  three-mode closed forms (kappa=0, theta=pi/2)");
    const double muc = tm_critical_coupling(-300);
    const TMParams dw{2 * muc, 0, kPi / 2, -300, 0};
    const auto s = tm_steady(dw, {{0.1, 0}, {0, 0}, {}});
    c.check(s.converged && std::abs(s.state.p1() - 0.375) <= 1e-8,
            "tm_steady at mu1 = 2 mu_c: p1 = " + num(s.state.p1(), 15) + " (|p1 - 3/8| = " + num(std::abs(s.state.p1() - 0.375), 3) + ")");
    const TMParams np{0.5 * muc, 0.5 * muc, kPi / 2, -300, 0};
    const TMParams d1{2 * muc, 0.5 * muc, kPi / 2, -300, 0};
    const TMParams d2{0.5 * muc, 2 * muc, kPi / 2, -300, 0};
    const TMParams md{2 * muc, 2 * muc, kPi / 2, -300, 0};
    const double r_np = tm_residual(tm_analytic_state(np, tm_analytic(np).p1, tm_analytic(np).p2), np);
    const double r_1 = tm_residual(tm_analytic_state(d1, tm_analytic(d1).p1, tm_analytic(d1).p2), d1);
    const double r_2 = tm_residual(tm_analytic_state(d2, tm_analytic(d2).p1, tm_analytic(d2).p2), d2);
    double r_m = 0;
    for (double f : {0.1, 0.5, 0.8}) r_m = std::max(r_m, tm_residual(tm_analytic_state(md, 0.375 * f, 0.375 * (1 - f)), md));
    c.check(std::max({r_np, r_1, r_2, r_m}) < 1e-10, "residuals NP " + num(r_np, 3) + ", DW1 " + num(r_1, 3) + ", DW2 " +
                                                         num(r_2, 3) + ", MDW family " + num(r_m, 3) + " (< 1e-10)");
    return c;
}

Criterion criterion9() {
    const double tc = critical_angle(-300, 200);
    Criterion c("9  three-mode breakdown at theta_c: full DW1 vs three-mode MDW for eta1 > eta_c~ > eta2");
    const double etac = std::sqrt(150.0) / std::abs(std::sin(tc));
    Grid g(kNx);
    std::size_t n = 0, full_dw1 = 0, tm_mdw = 0, both = 0;
    std::string first_bad;
    for (double l1 : {16.0, 18.5, 21.0, 23.5, 26.0, 28.5})
        for (double l2 : {3.0, 6.0, 9.0, 12.0}) {
            auto p = model(200, tc);
            p.lambda1 = l1;
            p.lambda2 = l2;
            if (!(l1 > etac && etac > l2)) continue;
            const auto r = compare_with_full(p, g);
            ++n;
            const bool f = r.full.label == PhaseLabel::DW1 && std::abs(r.full.theta2) < 1e-3;
            const bool m = r.reduced_label == PhaseLabel::MDW;
            full_dw1 += f ? 1 : 0;
            tm_mdw += m ? 1 : 0;
            both += (f && m) ? 1 : 0;
            if (!(f && m) && first_bad.empty())
                first_bad = " e.g. (" + num(l1) + ", " + num(l2) + "): full " + std::string(to_string(r.full.label)) +
                            ", three-mode " + std::string(to_string(r.reduced_label)) + " with Theta = (" +
                            num(r.reduced_order.theta1, 4) + ", " + num(r.reduced_order.theta2, 3) + ")";
        }
    c.check(n >= 20, "sampled cells: " + num(static_cast<double>(n)));
    c.check(full_dw1 == n, "full model DW1 with |Theta2| < 1e-3: " + num(static_cast<double>(full_dw1)) + "/" + num(static_cast<double>(n)));
    c.check(both == n, "three-mode MDW: " + num(static_cast<double>(tm_mdw)) + "/" + num(static_cast<double>(n)) + first_bad);
    return c;
}

Criterion criterion10() {
    Criterion c("10 property suites");
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    {
        Grid g(64);
        double worst = 0;
        for (int i = 0; i < 100000; ++i) {
            // alternate smooth and sample-wise random fields
            CondensateField psi;
            if (i % 2 == 0) {
                psi = oracle::random_field(rng, g, 1 + i % 9);
            } else {
                std::normal_distribution<double> nd;
                psi.amplitudes.resize(g.num_points());
                for (auto& v : psi.amplitudes) v = {nd(rng), nd(rng)};
                psi = normalized(std::move(psi), g);
            }
            const auto op = order_parameters(psi, g);
            worst = std::max(worst, op.theta1 * op.theta1 + op.theta2 * op.theta2);
        }
        c.check(worst <= 1.0, "Theta1^2 + Theta2^2 over 1e5 random fields: max " + num(worst, 6));
    }
    {
        double a4 = 0, s6 = 0, t6 = 0;
        for (int i = 0; i < 1000; ++i) {
            ModelParams p;
            p.lambda1 = 20 * u(rng);
            p.lambda2 = 20 * u(rng);
            p.theta = 2 * kPi * u(rng) - kPi;
            p.kappa = 500 * u(rng);
            auto refl = [](const Spectrum& s) {
                std::vector<cplx> m;
                double scale = 1;
                for (const auto& z : s.roots) {
                    m.push_back(-std::conj(z));
                    scale = std::max(scale, std::abs(z));
                }
                return oracle::set_distance(s.roots, m) / scale;
            };
            a4 = std::max(a4, refl(adiabatic_spectrum(p)));
            s6 = std::max(s6, refl(beyond_adiabatic_roots(p)));
            t6 = std::max(t6, refl(tm_spectrum({}, TMParams::from_model(p))));
        }
        for (auto [m1, m2, th] : {std::tuple{16.0, 9.0, 2.2}, std::tuple{14.0, 14.0, 1.0}, std::tuple{20.0, 5.0, -2.0}}) {
            const TMParams p{m1, m2, th, -300, 200};
            const auto s = tm_find_steady(p);
            if (!s.converged) continue;
            const auto r = tm_spectrum(s.state, p).roots;
            std::vector<cplx> m;
            double scale = 1;
            for (const auto& z : r) {
                m.push_back(-std::conj(z));
                scale = std::max(scale, std::abs(z));
            }
            t6 = std::max(t6, oracle::set_distance(r, m) / scale);
        }
        c.check(std::max({a4, s6, t6}) <= 1e-9, "closure under w -> -conj(w), relative to spectral scale: analytic-4 " +
                                                    num(a4, 3) + ", sextic-6 " + num(s6, 3) + ", threemode-6 " + num(t6, 3));
    }
    {
        Grid g(kNx);
        auto p = model(200, kPi / 2);
        p.lambda1 = p.lambda2 = 15;
        const double dt = default_time_step(p);
        const auto tr = evolve_real_time(seed_state(0.01, 0.01, g), 0.0, p, g, dt, static_cast<long>(100 / dt), 1000);
        double dn = 0;
        for (const auto& s : tr.samples) dn = std::max(dn, std::abs(s.norm - 1));
        c.check(dn <= 1e-8, "norm deviation over 100/w_R (UST point): " + num(dn, 3));
        auto q = model(0, 1.1);
        q.lambda1 = 18;
        q.lambda2 = 6;
        std::mt19937_64 frng(5);
        const auto psi = oracle::random_field(frng, g);
        const double dq = default_time_step(q);
        const auto tq = evolve_real_time(psi, cavity_steady(order_parameters(psi, g), q) + cplx{0.3, -0.2}, q, g, dq,
                                         static_cast<long>(100 / dq), static_cast<long>(100 / dq), true);
        const double e0 = closed_system_energy(tq.fields.front(), tq.samples.front().alpha, q, g);
        const double e1 = closed_system_energy(tq.fields.back(), tq.samples.back().alpha, q, g);
        c.check(std::abs(e1 - e0) <= 1e-6 * std::abs(e0), "kappa=0 energy drift over 100/w_R: " + num(std::abs(e1 - e0) / std::abs(e0), 3) + " |E|");
    }
    {
        Grid g(kNx);
        double worst_ratio_dev = 0, worst_abs = 0;
        for (int i = 0; i < 20; ++i) {
            ModelParams p;
            p.lambda1 = 25 * u(rng);
            p.lambda2 = 25 * u(rng);
            p.theta = 2 * kPi * u(rng) - kPi;
            p.kappa = 300 * u(rng);
            double err[2];
            const double taus[2] = {2e-3, 1e-3};
            for (int k = 0; k < 2; ++k) {
                const double h = 1e-6;
                Eigen::Matrix2d jac;
                for (int col = 0; col < 2; ++col) {
                    const double e1 = col == 0 ? h : 0, e2 = col == 1 ? h : 0;
                    const auto a = order_parameters(imaginary_time_step(seed_state(e1, e2, g), p, g, taus[k]), g);
                    const auto b = order_parameters(imaginary_time_step(seed_state(-e1, -e2, g), p, g, taus[k]), g);
                    jac(0, col) = (a.theta1 - b.theta1) / (2 * h * std::sqrt(2.0));
                    jac(1, col) = (a.theta2 - b.theta2) / (2 * h * std::sqrt(2.0));
                }
                err[k] = (jac - iteration_matrix(p, taus[k])).norm();
            }
            worst_ratio_dev = std::max(worst_ratio_dev, std::abs(err[0] / err[1] - 4));
            worst_abs = std::max(worst_abs, err[1] / (taus[1] * taus[1]));
        }
        c.check(worst_ratio_dev < 0.5, "iteration_matrix vs FD Jacobian: error ratio at dtau 2e-3/1e-3 within " +
                                           num(worst_ratio_dev, 3) + " of 4 (second order), max err/dtau^2 " + num(worst_abs, 3));
    }
    {
        Grid g(kNx);
        int used = 0, tries = 0;
        double worst = 0, worst_res = 0;
        RelaxSettings rs{0.01, 1e-10, 500000};
        while (used < 100 && tries < 400) {
            ++tries;
            ModelParams p;
            p.lambda1 = 30 * u(rng);
            p.lambda2 = 30 * u(rng);
            p.kappa = tries % 3 == 0 ? 0 : 300 * u(rng);
            p.theta = 2 * kPi * u(rng) - kPi;
            if (instability_criterion(p)) continue;
            const auto ss = find_steady_state(p, g, rs);
            if (!ss.converged) continue;
            ++used;
            const FieldState st{ss.alpha0, ss.psi0};
            const auto r0 = steady_state_residual(st, p, g).total();
            const auto r1 = steady_state_residual(apply_z2(st), p, g).total();
            worst = std::max(worst, std::abs(r0 - r1));
            worst_res = std::max(worst_res, r1);
        }
        c.check(used == 100 && worst <= 1e-10, "Z2 on " + num(used) + " converged steady states: residual change " +
                                                   num(worst, 3) + " (max transformed residual " + num(worst_res, 3) + ")");
    }
    return c;
}

}  // namespace

int main() {
    std::cout << "quadcav acceptance suite (N_x = " << kNx << ", sweeps " << kCells << "x" << kCells << " on [0, " << kHi
              << "]^2)\n"
              << std::flush;
    const std::vector<std::function<Criterion()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                      criterion6, criterion7, criterion8, criterion9, criterion10};
    int failed = 0;
    for (const auto& run : all) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto c = run();
        c.print();
        std::cout << "         (" << num(seconds_since(t0), 4) << " s)\n" << std::flush;
        failed += c.passed() ? 0 : 1;
    }
    std::cout << "acceptance: " << (static_cast<int>(all.size()) - failed) << "/" << all.size() << " criteria passed\n";
    return failed;
}
