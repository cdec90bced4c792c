#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

namespace aldram {

// DRAM timing-parameter set. The four critical fields (t_rcd, t_ras, t_wr,
// t_rp) are the reducible ones; t_refw and t_cl are fixed auxiliaries.
// Values are continuous nanoseconds except t_refw (milliseconds).
struct TimingParams {
    double t_rcd = 0.0;   // ns, activation-to-read/write delay
    double t_ras = 0.0;   // ns, activation-to-precharge (restoration window)
    double t_wr = 0.0;    // ns, write-recovery restoration window
    double t_rp = 0.0;    // ns, precharge duration
    double t_refw = 64.0; // ms, refresh window
    double t_cl = 13.75;  // ns, CAS latency, never reduced

    bool operator==(const TimingParams&) const = default;
};

// One reduction fraction per critical field, each in [0, 1).
struct ReductionSet {
    double rcd = 0.0;
    double ras = 0.0;
    double wr = 0.0;
    double rp = 0.0;

    bool operator==(const ReductionSet&) const = default;
};

class TimingError : public std::runtime_error {
public:
    explicit TimingError(const std::string& what) : std::runtime_error(what) {}
};

// DDR3-1600 11-11-11-flavored baseline: 13.75/35/15/13.75 ns, 64 ms refresh.
TimingParams standard_ddr3();

// Throws TimingError on nonpositive fields or t_ras < t_rcd.
void validate(const TimingParams& t);

// Scales each critical field by (1 - fraction); t_refw and t_cl unchanged.
// The result is re-validated.
TimingParams reduce(const TimingParams& base, const ReductionSet& pct);

// (read_sum, write_sum) = (t_rcd+t_ras+t_rp, t_rcd+t_wr+t_rp).
std::pair<double, double> latency_sums(const TimingParams& t);

// Per-field fraction by which `t` sits below `base` (negative if above).
ReductionSet reductions_vs(const TimingParams& t, const TimingParams& base);

void to_json(nlohmann::json& j, const TimingParams& t);
void from_json(const nlohmann::json& j, TimingParams& t);

} // namespace aldram
