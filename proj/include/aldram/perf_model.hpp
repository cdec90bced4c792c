#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "aldram/timing.hpp"

namespace aldram {

struct WorkloadStats {
    std::string name;
    double mpki = 0.0; // last-level cache misses per kilo-instruction
    double row_hit_frac = 0.0;
    double row_miss_frac = 0.0;
    double row_conflict_frac = 0.0;
    double write_frac = 0.0;
    double base_cpi = 1.0; // CPI at zero memory stalls
};

void validate(const WorkloadStats& w); // throws std::invalid_argument

struct PerfKnobs {
    double mpki_threshold = 10.0; // memory-intensive cutoff (inclusive)
    double blocking_factor = 0.7; // fraction of memory latency not hidden
    double tck = 1.25;            // ns per cycle
};

enum class Intensity { memory_intensive, non_intensive };
Intensity classify(const WorkloadStats& stats, const PerfKnobs& knobs = {});

enum class RowOutcome { hit, miss, conflict };
enum class MemOp { read, write };

// Open-page latency decomposition: hit -> t_cl; miss -> t_rcd + t_cl;
// conflict(read) -> t_rp + t_rcd + t_cl; conflict(write) additionally covers
// the prior row's write recovery as max(t_rp, t_wr).
double access_latency(const TimingParams& timings, RowOutcome kind, MemOp op);

// Average memory access time over the workload's row-outcome mix, ns.
double analytic_amat(const WorkloadStats& stats, const TimingParams& timings);

// speedup% = 100 * (CPI(base) / CPI(reduced) - 1) with
// CPI(t) = base_cpi + (mpki/1000) * (AMAT(t)/tck) * blocking_factor.
// Rejects reduced > base on any critical field; result is always >= 0.
double estimate_speedup(const WorkloadStats& stats, const TimingParams& base,
                        const TimingParams& reduced, const PerfKnobs& knobs = {});

struct TraceAccess {
    int bank = 0;
    int row = 0;
    MemOp op = MemOp::read;
};

struct AccessTrace {
    std::vector<TraceAccess> accesses;
    double tck = 1.25; // ns, command clock for cycle quantization
};

struct TraceResult {
    double total_time_ns = 0.0;
    std::vector<double> latencies_ns; // per access
    double amat_ns = 0.0;
};

// Minimal per-bank state machine honoring tRCD/tRAS/tWR/tRP sequencing with
// single-channel in-order service; command times are quantized up to the
// clock. Validates latency composition, not scheduling policy.
TraceResult trace_simulate(const AccessTrace& trace, const TimingParams& timings);

struct GroupSummary {
    int count = 0;
    double geomean_speedup_pct = 0.0;
};

struct WorkloadResult {
    WorkloadStats stats;
    double speedup_pct = 0.0;
    Intensity category = Intensity::non_intensive;
};

struct CohortReport {
    std::vector<WorkloadResult> results; // input order
    GroupSummary intensive;
    GroupSummary non_intensive;
    GroupSummary overall;
};

CohortReport cohort_report(const std::vector<WorkloadStats>& workloads,
                           const TimingParams& base, const TimingParams& reduced,
                           const PerfKnobs& knobs = {});

// CSV with header name,mpki,row_hit_frac,row_miss_frac,row_conflict_frac,
// write_frac,base_cpi. Throws std::runtime_error naming the offending row.
std::vector<WorkloadStats> load_workloads_csv(const std::string& path);
std::vector<TraceAccess> load_trace_csv(const std::string& path);

std::string cohort_csv(const CohortReport& report);
nlohmann::json cohort_json(const CohortReport& report);

} // namespace aldram
