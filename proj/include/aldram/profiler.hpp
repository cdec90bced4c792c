#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aldram/charge_model.hpp"
#include "aldram/timing.hpp"
#include "aldram/variation.hpp"

namespace aldram {

enum class SearchMode { per_parameter, joint };
enum class TimingField { rcd, ras, wr, rp };

const char* to_string(SearchMode mode);
const char* to_string(TimingField field);

struct ProfileRequest {
    double temp = 55.0;            // degC, must lie in [0, 100]
    PatternStress pattern{};
    double t_refw = 64.0;          // ms
    SearchMode mode = SearchMode::per_parameter;
    double resolution = 0.05;      // ns search grid step
};

void validate(const ProfileRequest& req);

// Raised when a DIMM fails even at standard timings (miscalibration).
class StandardTimingsUnsafe : public std::runtime_error {
public:
    explicit StandardTimingsUnsafe(const std::string& what) : std::runtime_error(what) {}
};

struct DimmTimingProfile {
    int dimm_id = 0;
    double temp = 0.0;
    SearchMode mode = SearchMode::per_parameter;
    TimingParams min_safe;
    ReductionSet reductions; // vs standard_ddr3
    double read_sum = 0.0;
    double write_sum = 0.0;
};

// Minimum error-free timings for one DIMM, evaluated at the worst refresh
// point (t_since_refresh = t_refw). per_parameter mode searches each field
// with the others at standard; joint mode runs coordinate descent in the
// fixed order (t_rcd, t_ras, t_wr, t_rp) until a full pass makes no progress.
DimmTimingProfile min_safe_timings(const Dimm& dimm, const ProfileRequest& req,
                                   const ElectricalParams& params);

struct TempSummary {
    double temp = 0.0;
    ReductionSet mean_reduction;
    ReductionSet stddev_reduction;
    double mean_read_sum = 0.0;
    double mean_write_sum = 0.0;
    int dimm_count = 0;
};

struct PopulationReport {
    std::vector<DimmTimingProfile> profiles; // ordered by (temp, dimm)
    std::vector<TempSummary> summaries;      // one per temperature
    std::vector<std::string> errors;         // per-DIMM failures, run continues
};

PopulationReport population_profile(const std::vector<Dimm>& dimms,
                                    const std::vector<double>& temps,
                                    const ProfileRequest& req_template,
                                    const ElectricalParams& params, int jobs = 1);

// Profiles at each refresh interval (ms, sorted descending). min_safe is
// elementwise non-increasing as the interval shrinks.
std::vector<DimmTimingProfile> refresh_sweep(const Dimm& dimm, double temp,
                                             const std::vector<double>& intervals_ms,
                                             const ProfileRequest& req_template,
                                             const ElectricalParams& params);

// Minimum safe values of the remaining fields with `fix_field` held at
// standard * (1 - fix_fraction). Throws TimingError if the fixed reduction
// alone already fails.
DimmTimingProfile interaction_study(const Dimm& dimm, double temp,
                                    TimingField fix_field, double fix_fraction,
                                    const ProfileRequest& req_template,
                                    const ElectricalParams& params);

enum class Scenario {
    same_test,
    different_data_pattern,
    different_timing_combination,
    different_temperature,
    read_vs_write,
};

const char* to_string(Scenario s);

struct RepeatabilityResult {
    Scenario scenario = Scenario::same_test;
    int erroneous_cells = 0;  // failed in at least one iteration
    int repeatable_cells = 0; // failed in every iteration
    // Unset when no cell erred at all (a distinct outcome, not a fraction).
    std::optional<double> fraction_repeatable;
};

RepeatabilityResult repeatability_test(const Dimm& dimm, const TimingParams& timings,
                                       double temp, Scenario scenario, int iterations,
                                       double trial_noise_sigma, std::uint64_t seed,
                                       const ElectricalParams& params);

struct CalibrationReport {
    bool feasible = false;
    ElectricalParams params;
    VariationSpec variation;
    ReductionSet target;
    ReductionSet achieved;        // population mean at the calibration temp
    ReductionSet corner_achieved; // worst-corner solo reductions at 85 degC
    int evaluations = 0;
};

// Fits tau_sense/tau_restore_nominal/tau_precharge/tau_leak_ref so the worst
// corner at 85 degC has exactly extra_margin_fraction of solo slack per
// field, then adjusts the variation sigmas and v_read until the population
// mean solo reductions at `temp` hit `targets`. Returns feasible = false with
// the best-found residuals if the targets are out of reach.
CalibrationReport calibrate(const VariationSpec& spec, const ElectricalParams& params,
                            const ReductionSet& targets, double temp,
                            int population = 24, std::uint64_t seed = 1,
                            double tolerance = 0.02);

// Worst-corner solo reductions at `temp` (single-cell profile at `resolution`).
ReductionSet corner_solo_reductions(const VariationSpec& spec,
                                    const ElectricalParams& params, double temp,
                                    double resolution = 0.01);

std::string population_csv(const PopulationReport& report);
nlohmann::json population_summary_json(const PopulationReport& report);

} // namespace aldram
