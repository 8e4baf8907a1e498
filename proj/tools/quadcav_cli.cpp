// quadcav: steady states, dynamics, spectra and phase diagrams from a JSON config.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "quadcav/cli/config.hpp"
#include "quadcav/cli/output.hpp"
#include "quadcav/core.hpp"
#include "quadcav/dynamics.hpp"
#include "quadcav/scan.hpp"
#include "quadcav/stability.hpp"
#include "quadcav/threemode.hpp"

#ifndef QUADCAV_GIT_DESCRIBE
#define QUADCAV_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace quadcav;
using namespace quadcav::cli;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kIo = 4 };

struct Context {
    RunConfig rc;
    fs::path out_dir;
    unsigned threads = 0;
    bool seeded = false;
    std::uint64_t seed = 0;

    [[nodiscard]] fs::path file(const std::string& suffix) const {
        return out_dir / (rc.raw.at("output").at("prefix").get<std::string>() + suffix);
    }
    [[nodiscard]] Grid grid() const { return Grid(rc.grid_points); }
};

json cplx_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json roots_json(const std::vector<cplx>& r) {
    json a = json::array();
    for (const auto& z : r) a.push_back(cplx_json(z));
    return a;
}

std::vector<cplx> sorted_roots(std::vector<cplx> r) {
    std::sort(r.begin(), r.end(), [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
    return r;
}

json run_meta(const Context& ctx, const std::string& command) {
    json m{{"command", command}, {"version", QUADCAV_GIT_DESCRIBE}, {"config", ctx.rc.raw}};
    if (ctx.seeded) m["seed"] = ctx.seed;
    return m;
}

ProgressFn progress_printer() {
    return [last = std::size_t{0}](std::size_t done, std::size_t total) mutable {
        const std::size_t pct = 100 * done / total;
        if (pct >= last + 5 || done == total) {
            last = pct;
            std::cerr << "\r" << done << "/" << total << " cells" << (done == total ? "\n" : "") << std::flush;
        }
    };
}

int cmd_steady(const Context& ctx) {
    const auto grid = ctx.grid();
    const auto& p = ctx.rc.model;
    const auto ss = find_steady_state(p, grid, ctx.rc.relax, ctx.rc.classify.seed_eps);
    const auto spec = adiabatic_spectrum(p);
    json doc = run_meta(ctx, "steady");
    doc["mu"] = ss.mu;
    doc["theta1"] = ss.order.theta1;
    doc["theta2"] = ss.order.theta2;
    doc["alpha"] = cplx_json(ss.alpha0);
    doc["converged"] = ss.converged;
    doc["iterations"] = ss.iterations;
    doc["residual"] = ss.residual;
    doc["label"] = std::string(to_string(label_from_order(ss.order.theta1, ss.order.theta2, ctx.rc.classify)));
    doc["uniform_state_stable"] = classify_stability(spec, ctx.rc.classify.stability_tol).stable;
    doc["instability_criterion"] = p.lambda1 + p.lambda2 > 0.0 && instability_criterion(p);
    write_json(ctx.file("_steady.json"), doc);

    CsvWriter w(ctx.file("_psi.csv"), ctx.rc.raw, "steady-state wavefunction");
    w.header({"x", "re_psi", "im_psi", "density"});
    for (std::size_t j = 0; j < ss.psi0.size(); ++j)
        w.row({fmt(grid.position(j)), fmt(ss.psi0[j].real()), fmt(ss.psi0[j].imag()), fmt(std::norm(ss.psi0[j]))});
    std::cout << "mu=" << fmt(ss.mu) << " theta1=" << fmt(ss.order.theta1) << " theta2=" << fmt(ss.order.theta2)
              << " converged=" << ss.converged << "\n";
    return kOk;
}

int cmd_evolve(const Context& ctx) {
    const auto grid = ctx.grid();
    const auto& p = ctx.rc.model;
    const auto& e = ctx.rc.raw.at("evolve");
    double eps1 = e.at("seed_eps1").get<double>(), eps2 = e.at("seed_eps2").get<double>();
    if (ctx.seeded) {
        std::mt19937_64 rng(ctx.seed);
        std::uniform_real_distribution<double> u(-ctx.rc.classify.seed_eps, ctx.rc.classify.seed_eps);
        eps1 = u(rng);
        eps2 = u(rng);
    }
    const auto psi = seed_state(eps1, eps2, grid);
    const cplx alpha = e.at("alpha_steady").get<bool>() ? cavity_steady(order_parameters(psi, grid), p)
                                                       : cplx{e.at("alpha_re").get<double>(), e.at("alpha_im").get<double>()};
    double dt = e.at("dt").get<double>();
    if (dt <= 0.0) dt = default_time_step(p);
    const double duration = e.at("duration").get<double>();
    long stride = e.at("stride").get<long>();
    if (stride <= 0) stride = std::max(1L, std::lround(e.at("sample_dt").get<double>() / dt));
    const long steps = static_cast<long>(std::ceil(duration / dt));
    const auto traj = evolve_real_time(psi, alpha, p, grid, dt, steps, stride);

    CsvWriter w(ctx.file("_evolve.csv"), ctx.rc.raw, "trajectory");
    w.comment("seed_eps1 " + fmt(eps1) + " seed_eps2 " + fmt(eps2) + " dt " + fmt(dt));
    w.header({"t", "re_alpha", "im_alpha", "abs_alpha", "theta1", "theta2", "norm"});
    for (const auto& s : traj.samples)
        w.row({fmt(s.t), fmt(s.alpha.real()), fmt(s.alpha.imag()), fmt(std::abs(s.alpha)), fmt(s.theta1),
               fmt(s.theta2), fmt(s.norm)});

    json doc = run_meta(ctx, "evolve");
    doc["dt"] = dt;
    doc["steps"] = steps;
    doc["seed_eps"] = {eps1, eps2};
    const double frac = e.at("transient_fraction").get<double>();
    try {
        const auto lc = detect_limit_cycle(traj, frac);
        doc["limit_cycle"] = {{"oscillatory", lc.oscillatory}, {"period", lc.period}, {"amplitude", lc.amplitude}};
    } catch (const DomainError& err) {
        doc["limit_cycle"] = nullptr;
        doc["limit_cycle_error"] = err.what();
    }
    const auto& last = traj.samples.back();
    doc["final"] = {{"t", last.t}, {"alpha", cplx_json(last.alpha)}, {"theta1", last.theta1}, {"theta2", last.theta2},
                    {"norm", last.norm}};
    write_json(ctx.file("_evolve.json"), doc);
    return kOk;
}

int cmd_spectrum(const Context& ctx) {
    const auto& s = ctx.rc.raw.at("spectrum");
    const std::string param = s.at("parameter").get<std::string>();
    if (param != "lambda1" && param != "lambda2" && param != "theta")
        throw ConfigError("spectrum.parameter must be lambda1, lambda2 or theta");
    const double lo = s.at("lo").get<double>(), hi = s.at("hi").get<double>();
    const long count = s.at("count").get<long>();
    if (count < 1) throw ConfigError("spectrum.count must be >= 1");
    const double cut = s.at("cut_total").get<double>();
    const double ratio = s.at("detuning_ratio").get<double>();
    std::vector<double> kappas;
    for (const auto& k : s.at("kappas")) kappas.push_back(k.get<double>());
    if (kappas.empty()) kappas.push_back(ctx.rc.model.kappa);

    CsvWriter w(ctx.file("_spectrum.csv"), ctx.rc.raw, "spectrum");
    w.comment("roots sorted by (Re, Im) within each source");
    std::vector<std::string> cols{"kappa", "delta_c", param, "lambda1", "lambda2"};
    for (int i = 1; i <= 4; ++i) cols.push_back("ad_re" + std::to_string(i));
    for (int i = 1; i <= 4; ++i) cols.push_back("ad_im" + std::to_string(i));
    for (int i = 1; i <= 6; ++i) cols.push_back("sx_re" + std::to_string(i));
    for (int i = 1; i <= 6; ++i) cols.push_back("sx_im" + std::to_string(i));
    cols.push_back("soft_deviation");
    w.header(cols);
    for (double kappa : kappas) {
        ModelParams p = ctx.rc.model;
        p.kappa = kappa;
        if (ratio != 0.0) p.delta_c = ratio * kappa;
        for (long i = 0; i < count; ++i) {
            const double v = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
            if (param == "lambda1") p.lambda1 = v;
            if (param == "lambda2") p.lambda2 = v;
            if (param == "theta") p.theta = v;
            if (cut > 0.0 && param == "lambda1") p.lambda2 = cut - v;
            if (cut > 0.0 && param == "lambda2") p.lambda1 = cut - v;
            const auto ad = sorted_roots(adiabatic_spectrum(p).roots);
            const auto sx = sorted_roots(beyond_adiabatic_roots(p).roots);
            std::vector<std::string> row{fmt(kappa), fmt(p.delta_c), fmt(v), fmt(p.lambda1), fmt(p.lambda2)};
            for (const auto& z : ad) row.push_back(fmt(z.real()));
            for (const auto& z : ad) row.push_back(fmt(z.imag()));
            for (const auto& z : sx) row.push_back(fmt(z.real()));
            for (const auto& z : sx) row.push_back(fmt(z.imag()));
            row.push_back(fmt(soft_branch_deviation(p)));
            w.row(row);
        }
    }
    return kOk;
}

int cmd_threshold(const Context& ctx) {
    const auto& t = ctx.rc.raw.at("threshold");
    const double phi = t.at("phi").get<double>();
    const auto th = np_threshold(ctx.rc.model, phi, t.at("cap").get<double>());
    json doc = run_meta(ctx, "threshold");
    doc["phi"] = phi;
    doc["lambda_c"] = th.lambda;
    doc["bounded"] = th.bounded;
    doc["instability_criterion"] = instability_criterion(ctx.rc.model.with_pump(1.0, phi));
    write_json(ctx.file("_threshold.json"), doc);
    std::cout << "lambda_c=" << fmt(th.lambda) << (th.bounded ? "" : " (unbounded: no crossing below cap)") << "\n";
    return kOk;
}

std::pair<Axis, Axis> sweep_axes(const Context& ctx, const std::string& n1, const std::string& n2) {
    const auto& s = ctx.rc.raw.at("sweep");
    auto axis = [&](const json& a, const std::string& name) {
        const long c = a.at("count").get<long>();
        if (c < 1) throw ConfigError("sweep axis count must be >= 1");
        return Axis{name, a.at("lo").get<double>(), a.at("hi").get<double>(), static_cast<std::size_t>(c)};
    };
    return {axis(s.at("axis1"), n1), axis(s.at("axis2"), n2)};
}

int write_scan(const Context& ctx, const PhaseTable& t, const std::string& command, double seconds) {
    const auto csv = ctx.file("_scan.csv");
    write_table_csv(csv, t, ctx.rc.raw);
    json doc = run_meta(ctx, command);
    doc["axes"] = json::array();
    for (const auto* a : {&t.first, &t.second})
        doc["axes"].push_back({{"name", a->name}, {"lo", a->lo}, {"hi", a->hi}, {"count", a->count}});
    doc["labels"] = label_counts(t.cells);
    std::size_t diag = 0;
    for (const auto& c : t.cells) diag += c.diagnostic ? 1 : 0;
    doc["diagnostic_cells"] = diag;
    doc["wall_time_s"] = seconds;
    doc["table"] = csv.filename().string();
    write_json(ctx.file("_manifest.json"), doc);
    if (ctx.rc.raw.at("output").at("gnuplot").get<bool>())
        write_label_gnuplot(ctx.file("_scan.gp"), csv.filename().string(), t);
    return kOk;
}

int cmd_scan_eta(const Context& ctx) {
    const auto [a1, a2] = sweep_axes(ctx, "lambda1", "lambda2");
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = sweep_eta(ctx.rc.model, {a1.lo, a1.hi}, {a2.lo, a2.hi}, a1.count, a2.count, ctx.grid(),
                             ctx.rc.classify, ctx.threads, progress_printer());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return write_scan(ctx, t, "scan-eta", secs);
}

int cmd_scan_angle(const Context& ctx) {
    const auto [a1, a2] = sweep_axes(ctx, "theta", "phi");
    const double eta = ctx.rc.raw.at("sweep").at("eta_total").get<double>();
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = sweep_theta_phi(ctx.rc.model, eta, {a1.lo, a1.hi}, {a2.lo, a2.hi}, a1.count, a2.count,
                                   ctx.grid(), ctx.rc.classify, ctx.threads, progress_printer());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return write_scan(ctx, t, "scan-angle", secs);
}

json tm_point_json(const TMParams& tp, const TMSteady& s, const ClassifyConfig& cfg) {
    const auto op = tm_order_parameters(s.state);
    json j{{"mu1", tp.mu1}, {"mu2", tp.mu2}, {"p1", s.state.p1()}, {"p2", s.state.p2()},
           {"beta1", cplx_json(s.state.beta1)}, {"beta2", cplx_json(s.state.beta2)},
           {"alpha", cplx_json(s.state.alpha)}, {"theta1", op.theta1}, {"theta2", op.theta2},
           {"label", std::string(to_string(label_from_order(op.theta1, op.theta2, cfg)))},
           {"converged", s.converged}, {"residual", s.residual},
           {"conserved_quantity", tm_conserved_quantity(s.state)}};
    if (s.converged) {
        const auto spec = tm_spectrum(s.state, tp);
        j["spectrum"] = roots_json(sorted_roots(spec.roots));
        j["max_growth"] = max_growth(spec);
    }
    return j;
}

int cmd_threemode(const Context& ctx) {
    const auto& tmc = ctx.rc.raw.at("threemode");
    const auto& cfg = ctx.rc.classify;
    if (!tmc.at("sweep").get<bool>()) {
        const auto tp = TMParams::from_model(ctx.rc.model);
        const TMState init{{tmc.at("beta1_re").get<double>(), 0.0}, {tmc.at("beta2_re").get<double>(), 0.0}, {}};
        const auto s = tm_steady(tp, init);
        json doc = run_meta(ctx, "threemode");
        doc["state"] = tm_point_json(tp, s, cfg);
        if (tp.kappa == 0.0 && std::abs(normalize_angle(tp.theta) - kPi / 2) < 1e-12) {
            const auto a = tm_analytic(tp);
            doc["analytic"] = {{"p1", a.p1}, {"p2", a.p2}, {"family", a.family}};
        }
        write_json(ctx.file("_threemode.json"), doc);
        std::cout << "p1=" << fmt(s.state.p1()) << " p2=" << fmt(s.state.p2()) << " converged=" << s.converged << "\n";
        return kOk;
    }
    const auto [a1, a2] = sweep_axes(ctx, "lambda1", "lambda2");
    std::vector<TMSteady> res(a1.count * a2.count);
    std::vector<TMParams> pts(res.size());
    for (std::size_t i = 0; i < a1.count; ++i)
        for (std::size_t j = 0; j < a2.count; ++j) {
            ModelParams p = ctx.rc.model;
            p.lambda1 = a1.value(i);
            p.lambda2 = a2.value(j);
            pts[i * a2.count + j] = TMParams::from_model(p);
        }
    parallel_for(res.size(), ctx.threads, [&](std::size_t k) { res[k] = tm_find_steady(pts[k], cfg.seed_eps); },
                 progress_printer());
    CsvWriter w(ctx.file("_threemode.csv"), ctx.rc.raw, "three-mode table");
    w.header({"i", "j", "lambda1", "lambda2", "mu1", "mu2", "p1", "p2", "theta1", "theta2", "label", "label_code",
              "converged", "residual", "max_growth"});
    std::vector<CellRecord> labels;
    for (std::size_t k = 0; k < res.size(); ++k) {
        const auto op = tm_order_parameters(res[k].state);
        const auto l = label_from_order(op.theta1, op.theta2, cfg);
        CellRecord c;
        c.label = l;
        labels.push_back(c);
        double g = 0.0;
        if (res[k].converged) g = max_growth(tm_spectrum(res[k].state, pts[k]));
        w.row({fmt(k / a2.count), fmt(k % a2.count), fmt(a1.value(k / a2.count)), fmt(a2.value(k % a2.count)),
               fmt(pts[k].mu1), fmt(pts[k].mu2), fmt(res[k].state.p1()), fmt(res[k].state.p2()), fmt(op.theta1),
               fmt(op.theta2), std::string(to_string(l)), std::to_string(label_code(l)), fmt(res[k].converged),
               fmt(res[k].residual), fmt(g)});
    }
    json doc = run_meta(ctx, "threemode");
    doc["labels"] = label_counts(labels);
    write_json(ctx.file("_threemode_manifest.json"), doc);
    return kOk;
}

int cmd_compare(const Context& ctx) {
    const auto [a1, a2] = sweep_axes(ctx, "lambda1", "lambda2");
    const auto grid = ctx.grid();
    std::vector<Comparison> res(a1.count * a2.count);
    parallel_for(
        res.size(), ctx.threads,
        [&](std::size_t k) {
            ModelParams p = ctx.rc.model;
            p.lambda1 = a1.value(k / a2.count);
            p.lambda2 = a2.value(k % a2.count);
            res[k] = compare_with_full(p, grid, ctx.rc.classify);
        },
        progress_printer());
    CsvWriter w(ctx.file("_compare.csv"), ctx.rc.raw, "full vs three-mode");
    w.header({"i", "j", "lambda1", "lambda2", "full_label", "tm_label", "full_theta1", "full_theta2", "tm_theta1",
              "tm_theta2", "delta_theta1", "delta_theta2", "full_converged", "tm_converged", "tm_max_growth"});
    std::size_t mismatch = 0;
    json pairs = json::object();
    for (std::size_t k = 0; k < res.size(); ++k) {
        const auto& c = res[k];
        if (c.full.label != c.reduced_label) ++mismatch;
        const std::string key = std::string(to_string(c.full.label)) + "->" + std::string(to_string(c.reduced_label));
        pairs[key] = pairs.value(key, 0) + 1;
        w.row({fmt(k / a2.count), fmt(k % a2.count), fmt(c.full.lambda1), fmt(c.full.lambda2),
               std::string(to_string(c.full.label)), std::string(to_string(c.reduced_label)), fmt(c.full.theta1),
               fmt(c.full.theta2), fmt(c.reduced_order.theta1), fmt(c.reduced_order.theta2), fmt(c.delta_theta1),
               fmt(c.delta_theta2), fmt(c.full.converged), fmt(c.reduced.converged), fmt(c.reduced_growth)});
    }
    json doc = run_meta(ctx, "compare");
    doc["cells"] = res.size();
    doc["label_mismatches"] = mismatch;
    doc["label_pairs"] = pairs;
    write_json(ctx.file("_compare.json"), doc);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadcav: driven-dissipative two-mode cavity BEC simulator"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    unsigned threads = 0;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized perturbation amplitudes");
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--set", overrides, "override a config key, e.g. --set model.kappa=200")->take_all();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads for sweeps (0 = all cores)");
    app.fallthrough();

    struct Command {
        std::string name;
        std::string help;
        int (*fn)(const Context&);
    };
    const std::vector<Command> commands{
        {"steady", "relax to the ground state at one parameter point", cmd_steady},
        {"evolve", "real-time trajectory and limit-cycle verdict", cmd_evolve},
        {"spectrum", "adiabatic and sextic spectra along a parameter line", cmd_spectrum},
        {"threshold", "uniform-state instability threshold along a pump ray", cmd_threshold},
        {"scan-eta", "phase table over (lambda1, lambda2)", cmd_scan_eta},
        {"scan-angle", "phase table over (theta, phi) at fixed total pump", cmd_scan_angle},
        {"threemode", "three-mode steady state, or a table with threemode.sweep", cmd_threemode},
        {"compare", "full model vs three-mode model over a pump grid", cmd_compare}};
    for (const auto& c : commands) app.add_subcommand(c.name, c.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    Context ctx;
    try {
        json user;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file " + config_path);
            try {
                user = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
        }
        ctx.rc = parse_run_config(effective_config(user, overrides));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    }
    ctx.threads = threads;
    ctx.seeded = seed_opt->count() > 0;
    ctx.seed = seed;
    ctx.out_dir = out_dir;

    try {
        fs::create_directories(ctx.out_dir);
        for (const auto& c : commands)
            if (app.got_subcommand(c.name)) return c.fn(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolver;
    }
    return kConfig;
}
