#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "aldram/charge_model.hpp"
#include "aldram/perf_model.hpp"
#include "aldram/profiler.hpp"
#include "aldram/variation.hpp"

namespace aldram {

struct ControllerKnobs {
    double guardband_temp = 5.0;
    double guardband_timing_fraction = 0.02;
    double sample_interval_s = 1.0;
};

// Full run configuration; the seed is mandatory (no wall-clock seeding) so
// every emitted byte is a function of (config, bank, seed).
struct RunConfig {
    ElectricalParams electrical;
    VariationSpec variation;
    ProfileRequest profiling;
    ControllerKnobs controller;
    PerfKnobs perf;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
};

// Defaults carry the frozen calibrated electrical and variation parameters.
RunConfig default_config();

void validate(const RunConfig& cfg);

void to_json(nlohmann::json& j, const ProfileRequest& r);
void from_json(const nlohmann::json& j, ProfileRequest& r);
void to_json(nlohmann::json& j, const ControllerKnobs& k);
void from_json(const nlohmann::json& j, ControllerKnobs& k);
void to_json(nlohmann::json& j, const PerfKnobs& k);
void from_json(const nlohmann::json& j, PerfKnobs& k);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& cfg);

} // namespace aldram
