#pragma once

// Run configuration: a JSON document merged over built-in defaults.
// Unknown keys and type mismatches are rejected; dotted overrides patch single keys.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "quadcav/core.hpp"
#include "quadcav/dynamics.hpp"
#include "quadcav/scan.hpp"
#include "quadcav/threemode.hpp"

namespace quadcav::cli {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline json default_config() {
    return json{
        {"model", {{"lambda1", 0.0}, {"lambda2", 0.0}, {"theta", kPi / 2}, {"delta_c", -300.0}, {"kappa", 0.0},
                   {"v1", 0.0}, {"v2", 0.0}, {"theta_critical", false}}},
        {"grid", {{"points", 128}}},
        {"relax", {{"d_tau", 0.01}, {"tol", 1e-9}, {"max_iter", 500000}}},
        {"classify", {{"order_tol", 1e-3}, {"dw_purity_tol", 1e-3}, {"jump_tol", 0.05}, {"seed_eps", 0.01},
                      {"evolve_time", 500.0}, {"transient_fraction", 0.4}, {"stability_tol", 1e-9}}},
        {"evolve", {{"dt", 0.0}, {"duration", 500.0}, {"stride", 0}, {"sample_dt", 0.1}, {"seed_eps1", 0.01},
                    {"seed_eps2", 0.01}, {"alpha_re", 0.0}, {"alpha_im", 0.0}, {"alpha_steady", true},
                    {"transient_fraction", 0.4}}},
        {"spectrum", {{"parameter", "lambda1"}, {"lo", 0.0}, {"hi", 4.0}, {"count", 201}, {"cut_total", 0.0},
                      {"kappas", json::array()}, {"detuning_ratio", 0.0}}},
        {"threshold", {{"phi", 0.0}, {"cap", 100.0}}},
        {"sweep", {{"axis1", {{"lo", 0.0}, {"hi", 30.0}, {"count", 64}}},
                   {"axis2", {{"lo", 0.0}, {"hi", 30.0}, {"count", 64}}},
                   {"eta_total", 10.0}}},
        {"threemode", {{"beta1_re", 0.01}, {"beta2_re", 0.01}, {"sweep", false}}},
        {"output", {{"prefix", "run"}, {"gnuplot", true}}},
    };
}

namespace detail {

inline bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return !(a.is_number_integer() || a.is_number_unsigned()) || b.is_number_integer() || b.is_number_unsigned();
    return a.type() == b.type();
}

inline void merge_checked(json& base, const json& patch, const std::string& path) {
    if (!patch.is_object()) throw ConfigError("config section '" + path + "' must be an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
        json& slot = base[it.key()];
        if (slot.is_object()) {
            merge_checked(slot, it.value(), key);
        } else if (slot.is_array()) {
            if (!it.value().is_array()) throw ConfigError("config key '" + key + "' must be an array");
            slot = it.value();
        } else {
            if (!same_kind(slot, it.value()))
                throw ConfigError("config key '" + key + "' has the wrong type (expected " + std::string(slot.type_name()) + ")");
            slot = slot.is_number_float() ? json(it.value().get<double>()) : it.value();
        }
    }
}

}  // namespace detail

/// Defaults, then the user document, then "a.b.c=value" overrides in order.
inline json effective_config(const json& user, const std::vector<std::string>& overrides) {
    json cfg = default_config();
    if (!user.is_null()) detail::merge_checked(cfg, user, "");
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
        const std::string key = o.substr(0, eq);
        const std::string text = o.substr(eq + 1);
        json value;
        try {
            value = json::parse(text);
        } catch (const json::parse_error&) {
            value = text;
        }
        json patch = value;
        std::size_t end = key.size();
        while (true) {
            const auto dot = key.rfind('.', end - 1);
            const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1, end - (dot == std::string::npos ? 0 : dot + 1));
            patch = json{{part, patch}};
            if (dot == std::string::npos) break;
            end = dot;
        }
        detail::merge_checked(cfg, patch, "");
    }
    return cfg;
}

struct RunConfig {
    json raw;
    ModelParams model;
    std::size_t grid_points = 128;
    RelaxSettings relax;
    ClassifyConfig classify;
    std::uint64_t seed = 0;
};

inline RunConfig parse_run_config(const json& cfg) {
    RunConfig rc;
    rc.raw = cfg;
    try {
        const auto& m = cfg.at("model");
        rc.model.lambda1 = m.at("lambda1").get<double>();
        rc.model.lambda2 = m.at("lambda2").get<double>();
        rc.model.theta = m.at("theta").get<double>();
        rc.model.delta_c = m.at("delta_c").get<double>();
        rc.model.kappa = m.at("kappa").get<double>();
        rc.model.v1 = m.at("v1").get<double>();
        rc.model.v2 = m.at("v2").get<double>();
        if (m.at("theta_critical").get<bool>()) rc.model.theta = critical_angle(rc.model.delta_c, rc.model.kappa);
        rc.model.validate();
        if (rc.model.delta_c == 0.0 && rc.model.kappa == 0.0)
            throw ConfigError("model.delta_c and model.kappa cannot both be zero");
        const auto n = cfg.at("grid").at("points").get<long>();
        if (n < 8) throw ConfigError("grid.points must be >= 8");
        rc.grid_points = static_cast<std::size_t>(n);
        const auto& r = cfg.at("relax");
        rc.relax = {r.at("d_tau").get<double>(), r.at("tol").get<double>(), r.at("max_iter").get<long>()};
        const auto& c = cfg.at("classify");
        rc.classify.order_tol = c.at("order_tol").get<double>();
        rc.classify.dw_purity_tol = c.at("dw_purity_tol").get<double>();
        rc.classify.jump_tol = c.at("jump_tol").get<double>();
        rc.classify.seed_eps = c.at("seed_eps").get<double>();
        rc.classify.evolve_time = c.at("evolve_time").get<double>();
        rc.classify.transient_fraction = c.at("transient_fraction").get<double>();
        rc.classify.stability_tol = c.at("stability_tol").get<double>();
        rc.classify.relax = rc.relax;
        rc.classify.validate();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return rc;
}

}  // namespace quadcav::cli
