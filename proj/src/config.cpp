#include "bbmwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "bbmwave/errors.hpp"
#include "json.hpp"

namespace bbmwave {

namespace {

using nlohmann::json;

const std::vector<std::string> kExperiments = {
    "simulate",     "verify-airy",  "verify-density", "martingale",
    "bulk-gauss",   "edge-profile", "survival",       "hits",
    "heuristic-curve", "calibrate"};

[[noreturn]] void bad(const std::string& what) {
    throw config_error("config: " + what);
}

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) bad("\"" + key + "\" must be a number");
    return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) bad("\"" + key + "\" must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) bad("\"" + key + "\" must be a string");
    return v.get<std::string>();
}

void parse_params(const json& j, ModelParams& out) {
    if (!j.is_object()) bad("\"params\" must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "rho")
            out.rho = as_number(val, "params.rho");
        else if (key == "beta")
            out.beta = as_number(val, "params.beta");
        else if (key == "delta")
            out.delta = as_number(val, "params.delta");
        else if (key == "profile") {
            if (as_string(val, "params.profile") != "default_linear")
                bad("\"params.profile\" must be \"default_linear\"");
        } else
            bad("unknown key \"params." + key + "\"");
    }
}

void parse_init(const json& j, ExperimentConfig& out) {
    if (!j.is_object()) bad("\"init\" must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "kind") {
            const std::string kind = as_string(val, "init.kind");
            if (kind == "point")
                out.init = ReplicaPlan::Init::point;
            else if (kind == "edge_cloud")
                out.init = ReplicaPlan::Init::edge_cloud;
            else
                bad("\"init.kind\" must be \"point\" or \"edge_cloud\"");
        } else if (key == "x")
            out.init_x = as_number(val, "init.x");
        else if (key == "u")
            out.edge_u = as_number(val, "init.u");
        else
            bad("unknown key \"init." + key + "\"");
    }
}

void parse_barrier(const json& j, Barrier& out) {
    if (!j.is_object()) bad("\"barrier\" must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "kind") {
            const std::string kind = as_string(val, "barrier.kind");
            if (kind == "none")
                out.kind = Barrier::Kind::none;
            else if (kind == "fixed")
                out.kind = Barrier::Kind::fixed;
            else if (kind == "moving")
                out.kind = Barrier::Kind::moving;
            else
                bad("\"barrier.kind\" must be \"none\", \"fixed\" or "
                    "\"moving\"");
        } else if (key == "A")
            out.A = as_number(val, "barrier.A");
        else
            bad("unknown key \"barrier." + key + "\"");
    }
}

void parse_step(const json& j, StepPolicy& out) {
    if (!j.is_object()) bad("\"step\" must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "dt_max")
            out.dt_max = as_number(val, "step.dt_max");
        else if (key == "event_cap")
            out.event_cap = as_number(val, "step.event_cap");
        else if (key == "max_particles")
            out.max_particles = as_count(val, "step.max_particles");
        else
            bad("unknown key \"step." + key + "\"");
    }
}

void parse_discrete(const json& j, DiscreteInputs& out) {
    if (!j.is_object()) bad("\"discrete\" must be an object");
    bool has_n = false, has_mu = false, has_s = false;
    for (const auto& [key, val] : j.items()) {
        if (key == "N") {
            out.N = as_number(val, "discrete.N");
            has_n = true;
        } else if (key == "mu") {
            out.mu = as_number(val, "discrete.mu");
            has_mu = true;
        } else if (key == "s") {
            out.s = as_number(val, "discrete.s");
            has_s = true;
        } else
            bad("unknown key \"discrete." + key + "\"");
    }
    if (!has_n || !has_mu || !has_s)
        bad("\"discrete\" needs all of N, mu and s");
}

bool known_experiment(const std::string& name) {
    return std::find(kExperiments.begin(), kExperiments.end(), name) !=
           kExperiments.end();
}

bool monte_carlo_experiment(const std::string& name) {
    return name == "simulate" || name == "martingale" ||
           name == "bulk-gauss" || name == "edge-profile" ||
           name == "survival" || name == "hits";
}

}  // namespace

const std::vector<std::string>& experiment_names() { return kExperiments; }

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad(e.what());
    }
    if (!j.is_object()) bad("top level must be an object");
    ExperimentConfig c;
    for (const auto& [key, val] : j.items()) {
        if (key == "experiment")
            c.experiment = as_string(val, "experiment");
        else if (key == "params")
            parse_params(val, c.params);
        else if (key == "init")
            parse_init(val, c);
        else if (key == "barrier")
            parse_barrier(val, c.barrier);
        else if (key == "horizon")
            c.horizon = as_number(val, "horizon");
        else if (key == "snapshot_times") {
            if (!val.is_array()) bad("\"snapshot_times\" must be an array");
            c.snapshot_times.clear();
            for (const auto& t : val)
                c.snapshot_times.push_back(as_number(t, "snapshot_times[]"));
        } else if (key == "replicas")
            c.replicas = as_count(val, "replicas");
        else if (key == "seed")
            c.seed = as_count(val, "seed");
        else if (key == "out_dir")
            c.out_dir = as_string(val, "out_dir");
        else if (key == "step")
            parse_step(val, c.step);
        else if (key == "discrete") {
            DiscreteInputs d;
            parse_discrete(val, d);
            c.discrete = d;
        } else
            bad("unknown key \"" + key + "\"");
    }
    return c;
}

std::string serialize_config(const ExperimentConfig& c) {
    if (c.params.profile.kind != RateProfile::Kind::default_linear)
        throw config_error(
            "config: only the default rate profile is serializable");
    json j;
    j["experiment"] = c.experiment;
    j["params"] = {{"rho", c.params.rho},
                   {"beta", c.params.beta},
                   {"delta", c.params.delta},
                   {"profile", "default_linear"}};
    j["init"] = {{"kind", c.init == ReplicaPlan::Init::point ? "point"
                                                             : "edge_cloud"},
                 {"x", c.init_x},
                 {"u", c.edge_u}};
    const char* barrier_kind = c.barrier.kind == Barrier::Kind::none
                                   ? "none"
                                   : c.barrier.kind == Barrier::Kind::fixed
                                         ? "fixed"
                                         : "moving";
    j["barrier"] = {{"kind", barrier_kind}, {"A", c.barrier.A}};
    j["horizon"] = c.horizon;
    j["snapshot_times"] = c.snapshot_times;
    j["replicas"] = c.replicas;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["step"] = {{"dt_max", c.step.dt_max},
                 {"event_cap", c.step.event_cap},
                 {"max_particles", c.step.max_particles}};
    if (c.discrete)
        j["discrete"] = {{"N", c.discrete->N},
                         {"mu", c.discrete->mu},
                         {"s", c.discrete->s}};
    return j.dump(2) + "\n";
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot read \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const config_error& e) {
        throw config_error(std::string(e.what()) + " (in \"" + path + "\")");
    }
}

void validate(const ExperimentConfig& c) {
    if (!known_experiment(c.experiment))
        bad("unknown experiment \"" + c.experiment + "\"");
    validate(c.params);
    if (!std::isfinite(c.horizon) || c.horizon < 0.0)
        bad("\"horizon\" must be finite and >= 0");
    double prev = 0.0;
    for (double t : c.snapshot_times) {
        if (!std::isfinite(t) || t < prev || t > c.horizon)
            bad("\"snapshot_times\" must be nondecreasing within "
                "[0, horizon]");
        prev = t;
    }
    if (!std::isfinite(c.init_x)) bad("\"init.x\" must be finite");
    if (c.init == ReplicaPlan::Init::edge_cloud) {
        if (!(c.edge_u > 0.0) || !std::isfinite(c.edge_u))
            bad("\"init.u\" must be finite and > 0");
        if (!(c.params.beta > 0.0))
            bad("edge_cloud init requires beta > 0");
    }
    if (!(c.step.dt_max > 0.0) || !std::isfinite(c.step.dt_max))
        bad("\"step.dt_max\" must be finite and > 0");
    if (!(c.step.event_cap > 0.0) || !(c.step.event_cap < 1.0))
        bad("\"step.event_cap\" must lie in (0, 1)");
    if (c.step.max_particles == 0) bad("\"step.max_particles\" must be >= 1");

    if (monte_carlo_experiment(c.experiment) && c.replicas == 0)
        bad("\"" + c.experiment + "\" needs replicas >= 1");
    if (c.experiment == "martingale" || c.experiment == "hits") {
        if (c.barrier.kind != Barrier::Kind::fixed)
            bad("\"" + c.experiment + "\" needs a fixed barrier");
        if (c.init != ReplicaPlan::Init::point)
            bad("\"" + c.experiment + "\" starts from a point");
    }
    if (c.experiment == "hits" && c.snapshot_times.size() < 2)
        bad("\"hits\" needs at least two snapshot times to form windows");
    if (c.experiment == "martingale" && c.snapshot_times.empty())
        bad("\"martingale\" needs at least one snapshot time");
    if (c.experiment == "survival") {
        if (c.init != ReplicaPlan::Init::point || !(c.init_x > 0.0))
            bad("\"survival\" starts from a point at x > 0");
        if (c.barrier.kind != Barrier::Kind::none)
            bad("\"survival\" runs barrier-free");
    }
    if (c.experiment == "bulk-gauss" || c.experiment == "edge-profile") {
        if (!(c.params.beta > 0.0))
            bad("\"" + c.experiment + "\" requires beta > 0");
        if (c.snapshot_times.empty())
            bad("\"" + c.experiment + "\" needs at least one snapshot time");
    }
    if (c.experiment == "calibrate") {
        if (!c.discrete)
            bad("\"calibrate\" needs the \"discrete\" inputs {N, mu, s}");
        if (!(c.discrete->N > 1.0) || !std::isfinite(c.discrete->N))
            bad("\"discrete.N\" must be finite and > 1");
        if (!(c.discrete->mu > 0.0) || !std::isfinite(c.discrete->mu))
            bad("\"discrete.mu\" must be finite and > 0");
        if (!(c.discrete->s > 0.0) || !std::isfinite(c.discrete->s))
            bad("\"discrete.s\" must be finite and > 0");
    }
}

ReplicaPlan to_plan(const ExperimentConfig& c) {
    ReplicaPlan plan;
    plan.params = c.params;
    plan.init = c.init;
    plan.init_x = c.init_x;
    plan.edge_u = c.edge_u;
    plan.barrier = c.barrier;
    plan.horizon = c.horizon;
    plan.snapshot_times = c.snapshot_times;
    plan.replicas = c.replicas;
    plan.step = c.step;
    return plan;
}

}  // namespace bbmwave
