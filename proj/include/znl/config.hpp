#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "znl/common.hpp"
#include "znl/domain.hpp"
#include "znl/sde.hpp"

namespace znl {

/// Flat JSON experiment description. Every knob is explicit (in particular
/// master_seed: no ambient randomness anywhere), and serialization round-trips
/// bit-exactly: doubles travel through nlohmann::json's shortest-round-trip
/// printer, which preserves the value.
struct ExperimentConfig {
    std::string field_label = "ex1-sqrt";
    std::map<std::string, double> field_params;

    std::string domain_kind = "interval";  // interval | box | ball
    double l = -1.0, r = 1.0;              // interval
    std::vector<double> lo, hi;            // box
    std::vector<double> center;            // ball
    double radius = 1.0;                   // ball

    std::vector<double> epsilons = {0.05};
    double step = 1e-4;
    double horizon = 5.0;
    std::string noise_mode = "independent";  // independent | common
    std::uint64_t master_seed = 0;
    long n_paths = 1000;

    double h = 1e-3;
    double tol = 1e-12;
    long max_sweeps = 2000;
    long max_iters = 1000000;
    double sor_omega = 1.5;
    double sor_tol = 1e-10;

    std::string output_dir = ".";

    Domain make_domain() const {
        if (domain_kind == "interval") return Domain::interval(l, r);
        if (domain_kind == "box") return Domain::box(lo, hi);
        if (domain_kind == "ball") return Domain::ball(center, radius);
        throw ValidationError("config: unknown domain kind '" + domain_kind +
                              "' (interval, box, ball)");
    }

    SdeConfig make_sde(double epsilon) const {
        SdeConfig cfg;
        cfg.epsilon = epsilon;
        cfg.step = step;
        cfg.horizon = horizon;
        cfg.master_seed = master_seed;
        if (noise_mode == "common")
            cfg.noise_mode = NoiseMode::Common;
        else if (noise_mode == "independent")
            cfg.noise_mode = NoiseMode::Independent;
        else
            throw ValidationError("config: noise_mode must be independent or common");
        return cfg;
    }
};

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["field_label"] = c.field_label;
    j["field_params"] = c.field_params;
    j["domain_kind"] = c.domain_kind;
    if (c.domain_kind == "interval") {
        j["l"] = c.l;
        j["r"] = c.r;
    } else if (c.domain_kind == "box") {
        j["lo"] = c.lo;
        j["hi"] = c.hi;
    } else {
        j["center"] = c.center;
        j["radius"] = c.radius;
    }
    j["epsilons"] = c.epsilons;
    j["step"] = c.step;
    j["horizon"] = c.horizon;
    j["noise_mode"] = c.noise_mode;
    j["master_seed"] = c.master_seed;
    j["n_paths"] = c.n_paths;
    j["h"] = c.h;
    j["tol"] = c.tol;
    j["max_sweeps"] = c.max_sweeps;
    j["max_iters"] = c.max_iters;
    j["sor_omega"] = c.sor_omega;
    j["sor_tol"] = c.sor_tol;
    j["output_dir"] = c.output_dir;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    auto get = [&](const char* key, auto& target) {
        if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
    };
    get("field_label", c.field_label);
    get("field_params", c.field_params);
    get("domain_kind", c.domain_kind);
    get("l", c.l);
    get("r", c.r);
    get("lo", c.lo);
    get("hi", c.hi);
    get("center", c.center);
    get("radius", c.radius);
    if (j.contains("epsilon")) c.epsilons = {j.at("epsilon").get<double>()};
    get("epsilons", c.epsilons);
    get("step", c.step);
    get("horizon", c.horizon);
    get("noise_mode", c.noise_mode);
    get("master_seed", c.master_seed);
    get("n_paths", c.n_paths);
    get("h", c.h);
    get("tol", c.tol);
    get("max_sweeps", c.max_sweeps);
    get("max_iters", c.max_iters);
    get("sor_omega", c.sor_omega);
    get("sor_tol", c.sor_tol);
    get("output_dir", c.output_dir);
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config field error: ") + e.what());
    }
}

}  // namespace znl
