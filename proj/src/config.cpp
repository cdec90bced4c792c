#include "aldram/config.hpp"

#include <fstream>
#include <stdexcept>

namespace aldram {

RunConfig default_config() {
    return RunConfig{};
}

void validate(const RunConfig& cfg) {
    validate(cfg.electrical);
    validate(cfg.variation);
    validate(cfg.profiling);
    if (cfg.controller.guardband_temp < 0.0 ||
        cfg.controller.guardband_timing_fraction < 0.0 ||
        !(cfg.controller.sample_interval_s > 0.0))
        throw std::invalid_argument("RunConfig: invalid controller knobs");
    if (!(cfg.perf.tck > 0.0) || !(cfg.perf.blocking_factor > 0.0) ||
        cfg.perf.mpki_threshold < 0.0)
        throw std::invalid_argument("RunConfig: invalid perf knobs");
    if (cfg.output_dir.empty())
        throw std::invalid_argument("RunConfig: empty output_dir");
}

void to_json(nlohmann::json& j, const ProfileRequest& r) {
    j = nlohmann::json{{"temp", r.temp},
                       {"pattern_stress", r.pattern.d_sense_mult},
                       {"t_refw", r.t_refw},
                       {"mode", to_string(r.mode)},
                       {"resolution", r.resolution}};
}

void from_json(const nlohmann::json& j, ProfileRequest& r) {
    ProfileRequest d;
    r.temp = j.value("temp", d.temp);
    r.pattern.d_sense_mult = j.value("pattern_stress", d.pattern.d_sense_mult);
    r.t_refw = j.value("t_refw", d.t_refw);
    std::string mode = j.value("mode", std::string(to_string(d.mode)));
    if (mode == "per_parameter")
        r.mode = SearchMode::per_parameter;
    else if (mode == "joint")
        r.mode = SearchMode::joint;
    else
        throw std::invalid_argument("ProfileRequest: unknown mode '" + mode + "'");
    r.resolution = j.value("resolution", d.resolution);
}

void to_json(nlohmann::json& j, const ControllerKnobs& k) {
    j = nlohmann::json{{"guardband_temp", k.guardband_temp},
                       {"guardband_timing_fraction", k.guardband_timing_fraction},
                       {"sample_interval_s", k.sample_interval_s}};
}

void from_json(const nlohmann::json& j, ControllerKnobs& k) {
    ControllerKnobs d;
    k.guardband_temp = j.value("guardband_temp", d.guardband_temp);
    k.guardband_timing_fraction =
        j.value("guardband_timing_fraction", d.guardband_timing_fraction);
    k.sample_interval_s = j.value("sample_interval_s", d.sample_interval_s);
}

void to_json(nlohmann::json& j, const PerfKnobs& k) {
    j = nlohmann::json{{"mpki_threshold", k.mpki_threshold},
                       {"blocking_factor", k.blocking_factor},
                       {"tck", k.tck}};
}

void from_json(const nlohmann::json& j, PerfKnobs& k) {
    PerfKnobs d;
    k.mpki_threshold = j.value("mpki_threshold", d.mpki_threshold);
    k.blocking_factor = j.value("blocking_factor", d.blocking_factor);
    k.tck = j.value("tck", d.tck);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"electrical", c.electrical}, {"variation", c.variation},
                       {"profiling", c.profiling},   {"controller", c.controller},
                       {"perf", c.perf},             {"seed", c.seed},
                       {"output_dir", c.output_dir}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
    RunConfig d;
    c.electrical = j.value("electrical", d.electrical);
    c.variation = j.value("variation", d.variation);
    c.profiling = j.value("profiling", d.profiling);
    c.controller = j.value("controller", d.controller);
    c.perf = j.value("perf", d.perf);
    if (!j.contains("seed"))
        throw std::invalid_argument("RunConfig: seed is mandatory");
    j.at("seed").get_to(c.seed);
    c.output_dir = j.value("output_dir", d.output_dir);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config " + path + ": " + e.what());
    }
    RunConfig cfg = j.get<RunConfig>();
    validate(cfg);
    return cfg;
}

void save_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write config: " + path);
    nlohmann::json j = cfg;
    out << j.dump(2) << "\n";
}

} // namespace aldram
