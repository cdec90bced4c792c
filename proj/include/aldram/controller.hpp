#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aldram/charge_model.hpp"
#include "aldram/profiler.hpp"
#include "aldram/timing.hpp"

namespace aldram {

struct ProfileBin {
    double bin_upper_temp = 0.0; // degC
    TimingParams timings;
};

// Per-DIMM temperature-binned timing tables. Bin temperatures are shared by
// every DIMM in the table; bins are sorted ascending and timings are
// elementwise non-decreasing with bin_upper_temp.
struct ProfileTable {
    double guardband_temp = 5.0;
    double guardband_timing_fraction = 0.02;
    std::map<int, std::vector<ProfileBin>> dimms;
};

// Builds the table from joint-mode profiles. Requires every DIMM to be
// profiled at the same temperatures, including the 85 degC anchor. Applies
// the timing guardband and enforces bin monotonicity by a running
// elementwise max going up in temperature.
ProfileTable build_table(const std::vector<DimmTimingProfile>& profiles,
                         double guardband_temp = 5.0,
                         double guardband_timing_fraction = 0.02);

struct Selection {
    TimingParams timings;
    // Index into the DIMM's bin list; bins.size() means the standard-timings
    // fail-safe (above the top bin, or unknown DIMM).
    int bin_index = 0;
    bool known_dimm = true;
};

// Stateless selection: lowest bin whose bin_upper_temp >= temp +
// guardband_temp; standard timings above the top bin or for unknown DIMMs.
Selection select_timings(const ProfileTable& table, int dimm_id, double temp);

// Bin selection with hysteresis: promotion to a hotter bin is immediate,
// demotion additionally requires the temperature to fall guardband_temp
// below the cooler bin's selection boundary.
class HysteresisSelector {
public:
    HysteresisSelector(const std::vector<ProfileBin>& bins, double guardband_temp);
    int select(double temp); // returns bin index, bins.size() = standard
    int transitions() const { return transitions_; }

private:
    const std::vector<ProfileBin>& bins_;
    double guard_;
    int current_ = -1; // unset
    int transitions_ = 0;

    int target_bin(double temp, double guard) const;
};

struct TempSample {
    double time_s = 0.0;
    double temp_c = 0.0;
};

struct TempTrace {
    std::vector<TempSample> samples;
};

// Throws std::invalid_argument if any step exceeds the slew cap (degC/s).
void validate_slew(const TempTrace& trace, double slew_cap_c_per_s = 0.1);

enum class TraceProfile { constant, ramp, diurnal };

struct TraceSpec {
    TraceProfile profile = TraceProfile::constant;
    double duration_s = 3600.0;
    double sample_interval_s = 1.0;
    double temp_start = 55.0;  // constant level / ramp start / diurnal mean
    double temp_end = 55.0;    // ramp end
    double amplitude = 5.0;    // diurnal swing
    double period_s = 86400.0; // diurnal period
    double noise_sigma = 0.0;  // slew-capped additive noise
    double slew_cap = 0.1;     // degC/s
};

// Emits a trace satisfying the slew cap by construction; rejects ramps whose
// required slope exceeds the cap.
TempTrace gen_temp_trace(const TraceSpec& spec, std::uint64_t seed = 0);

struct SafetyViolation {
    double time_s = 0.0;
    int dimm_id = 0;
    int chip_id = 0;
    int cell_id = 0;
    FailStage stage = FailStage::none;
};

struct TimelinePoint {
    double time_s = 0.0;
    double temp_c = 0.0;
    int bin = 0;
    double read_sum_ns = 0.0;  // mean across DIMMs of the applied timings
    double write_sum_ns = 0.0;
};

struct ControllerReport {
    std::vector<TimelinePoint> timeline;
    std::optional<SafetyViolation> violation; // set => run aborted there
    double avg_read_sum_ns = 0.0;             // time-weighted
    double avg_write_sum_ns = 0.0;
    int transitions = 0;
};

// Steps through the trace, selecting timings per sample with hysteresis and
// verifying that every cell of every DIMM passes access_outcome under the
// applied timings at the sample temperature. The per-sample check uses a
// per-(dimm, bin) maximum-safe-temperature bound justified by the model's
// temperature monotonicity; `exhaustive_check` forces the direct per-cell
// evaluation at every sample instead (the test oracle path).
ControllerReport simulate_controller(const ProfileTable& table, const TempTrace& trace,
                                     const std::vector<Dimm>& bank,
                                     const ElectricalParams& params,
                                     bool exhaustive_check = false);

void to_json(nlohmann::json& j, const ProfileTable& t);
void from_json(const nlohmann::json& j, ProfileTable& t);
nlohmann::json controller_report_json(const ControllerReport& r);
std::string timeline_csv(const ControllerReport& r);

} // namespace aldram
