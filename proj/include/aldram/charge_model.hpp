#pragma once

#include "json.hpp"

#include "aldram/timing.hpp"
#include "aldram/variation.hpp"

namespace aldram {

// Normalized RC constants and thresholds for one cell/bitline pair.
// Voltages are dimensionless with full rail = 1 and bitline precharge = 0.5.
// Defaults are the frozen calibrated values (see profiler::calibrate).
struct ElectricalParams {
    double c_ratio = 0.9;               // bitline-to-cell capacitance ratio
    double tau_sense = 284.959991;      // ns, bitline rail-out during sensing
    double tau_restore_nominal = 2.421698; // ns, write-driver restore path
    double tau_active = 6.232662;       // ns, sense-amp restore during tRAS
    double tau_precharge = 3.192108;    // ns
    double tau_leak_ref = 111.105983;   // ms, nominal cell at t_ref
    double t_ref = 85.0;                // degC, leakage reference temperature
    double leak_halving_per = 425.0;    // degC per retention halving
    double d_sense = 0.02;              // minimum charge-share differential
    double v_read = 0.051890;           // bitline level required for read-out
    double t_overhead_act = 4.0;        // ns, wordline enable + charge share
    double t_overhead_pre = 1.0;        // ns, delay before equalization
};

void validate(const ElectricalParams& p); // throws std::invalid_argument

struct ChargeState {
    double q = 1.0;        // normalized cell voltage for a stored '1'
    double delta_bl = 0.0; // signed residual bitline offset from 0.5
};

// Data-pattern severity as a multiplier on d_sense (1.0 solid, 1.15 worst).
struct PatternStress {
    double d_sense_mult = 1.0;
};

inline constexpr PatternStress kSolidPattern{1.0};
inline constexpr PatternStress kWorstPattern{1.15};

// d = (q - (0.5 + delta_bl)) / (1 + c_ratio). Correct sensing of a stored
// '1' requires d >= d_sense.
double charge_share(const ChargeState& state, const ElectricalParams& params);

// level(t) = 1 - (1 - d) * exp(-t / tau_sense). Rejects d < 0: a negative
// differential is a latch-to-wrong-value event, not an amplification input.
double sense_level(double d, double t_ns, const ElectricalParams& params);

// Time for sense_level to reach v_read from differential d; 0 if already met.
double time_to_read(double d, const ElectricalParams& params);

// q_end = 1 - (1 - q_start) * exp(-t_avail / tau_restore_cell).
double restore(double q_start, double t_avail_ns, double tau_restore_cell_ns);

// delta = 0.5 * exp(-t_avail / tau_precharge); t_avail already clamped >= 0.
double precharge_residual(double t_avail_ns, const ElectricalParams& params);

// Leakage time constant in ms at `temp` for a cell with `retention_mult`.
double leak_tau(double temp_c, double retention_mult, const ElectricalParams& params);

// q' = q * exp(-dt / leak_tau(temp)).
double leak(double q, double dt_ms, double temp_c, double retention_mult,
            const ElectricalParams& params);

enum class FailStage {
    none,
    sense_offset,           // differential below d_sense
    readout,                // bitline level at tRCD below v_read
    restore_insufficient,   // restored charge cannot survive the next window
    precharge_insufficient, // bitline residual alone kills the differential
};

const char* to_string(FailStage stage);

struct Outcome {
    bool correct = true;
    FailStage stage = FailStage::none;
};

// Which half of the composed access cycle to check. The write test covers the
// tWR-restored first interval; the read test covers the tRAS-restored second
// interval. `full` checks both (the canonical profiling composition).
enum class AccessPhase { full, write_test, read_test };

// Composes leak -> charge_share -> sense/readout (tRCD) -> restore (tRAS
// window) -> precharge residual (tRP) -> second sense/readout after another
// full refresh window. Returns the first violated stage.
// Invalid timing orderings throw TimingError (a configuration error, not a
// cell failure).
Outcome access_outcome(const CellSample& cell, const TimingParams& timings,
                       double temp_c, double t_since_refresh_ms,
                       PatternStress pattern, const ElectricalParams& params,
                       AccessPhase phase = AccessPhase::full);

// The first-interval differential of the composed cycle under `timings` at
// t_since_refresh = t_refw; the margin quantity the profiler and
// slowest_cell rank cells by.
double end_of_window_differential(const CellSample& cell, const TimingParams& timings,
                                  double temp_c, const ElectricalParams& params);

void to_json(nlohmann::json& j, const ElectricalParams& p);
void from_json(const nlohmann::json& j, ElectricalParams& p);

} // namespace aldram
