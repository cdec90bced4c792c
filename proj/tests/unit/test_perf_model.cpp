#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "aldram/perf_model.hpp"

using namespace aldram;

namespace {

WorkloadStats sample_workload() {
    WorkloadStats w;
    w.name = "sample";
    w.mpki = 25.0;
    w.row_hit_frac = 0.5;
    w.row_miss_frac = 0.3;
    w.row_conflict_frac = 0.2;
    w.write_frac = 0.3;
    w.base_cpi = 0.8;
    return w;
}

} // namespace

TEST_CASE("access_latency composes the open-page timing paths") {
    const TimingParams t = standard_ddr3();
    CHECK(access_latency(t, RowOutcome::hit, MemOp::read) == doctest::Approx(t.t_cl));
    CHECK(access_latency(t, RowOutcome::miss, MemOp::read) ==
          doctest::Approx(t.t_rcd + t.t_cl));
    CHECK(access_latency(t, RowOutcome::conflict, MemOp::read) ==
          doctest::Approx(t.t_rp + t.t_rcd + t.t_cl));
    CHECK(access_latency(t, RowOutcome::conflict, MemOp::write) ==
          doctest::Approx(std::max(t.t_rp, t.t_wr) + t.t_rcd + t.t_cl));
}

TEST_CASE("analytic_amat is the outcome-mix weighted latency") {
    const WorkloadStats w = sample_workload();
    const TimingParams t = standard_ddr3();
    double expect = 0.0;
    for (MemOp op : {MemOp::read, MemOp::write}) {
        const double opw = (op == MemOp::write) ? w.write_frac : 1.0 - w.write_frac;
        expect += opw * (w.row_hit_frac * access_latency(t, RowOutcome::hit, op) +
                         w.row_miss_frac * access_latency(t, RowOutcome::miss, op) +
                         w.row_conflict_frac * access_latency(t, RowOutcome::conflict, op));
    }
    CHECK(analytic_amat(w, t) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("estimate_speedup: zero reduction means zero speedup") {
    const WorkloadStats w = sample_workload();
    const TimingParams base = standard_ddr3();
    CHECK(estimate_speedup(w, base, base) == doctest::Approx(0.0));
}

TEST_CASE("estimate_speedup: reduced timings help, never hurt") {
    const WorkloadStats w = sample_workload();
    const TimingParams base = standard_ddr3();
    const TimingParams fast = reduce(base, {0.27, 0.32, 0.33, 0.18});
    CHECK(estimate_speedup(w, base, fast) > 0.0);

    TimingParams slower = base;
    slower.t_rcd *= 1.2;
    CHECK_THROWS(estimate_speedup(w, base, slower));
}

TEST_CASE("classify uses the inclusive MPKI threshold") {
    WorkloadStats w = sample_workload();
    w.mpki = 10.0;
    CHECK(classify(w) == Intensity::memory_intensive);
    w.mpki = 9.99;
    CHECK(classify(w) == Intensity::non_intensive);
}

TEST_CASE("trace_simulate honors row-buffer outcomes") {
    const TimingParams t = standard_ddr3();
    AccessTrace trace;
    trace.accesses = {{0, 1, MemOp::read},   // first touch: miss
                      {0, 1, MemOp::read},   // same row: hit
                      {0, 2, MemOp::read},   // other row, same bank: conflict
                      {1, 5, MemOp::read}};  // fresh bank: miss
    const TraceResult res = trace_simulate(trace, t);
    REQUIRE(res.latencies_ns.size() == 4);
    CHECK(res.latencies_ns[1] < res.latencies_ns[0]);
    CHECK(res.latencies_ns[2] > res.latencies_ns[0]);
    CHECK(res.amat_ns > 0.0);
    CHECK(res.total_time_ns > 0.0);

    // Reduced timings never slow the trace down.
    const TraceResult fast = trace_simulate(trace, reduce(t, {0.2, 0.2, 0.2, 0.1}));
    CHECK(fast.total_time_ns <= res.total_time_ns + 1e-9);
}

TEST_CASE("cohort_report orders intensive above non-intensive") {
    const auto workloads = load_workloads_csv(ALDRAM_TEST_WORKLOADS);
    REQUIRE(workloads.size() == 35);
    const TimingParams base = standard_ddr3();
    const TimingParams fast = reduce(base, {0.27, 0.32, 0.33, 0.18});
    const CohortReport rep = cohort_report(workloads, base, fast);
    CHECK(rep.intensive.count + rep.non_intensive.count == 35);
    CHECK(rep.intensive.geomean_speedup_pct > rep.non_intensive.geomean_speedup_pct);
    CHECK(rep.non_intensive.geomean_speedup_pct > 0.0);
    for (const auto& r : rep.results)
        CHECK(r.speedup_pct >= 0.0);
}

TEST_CASE("workload CSV loader reports the offending row") {
    const char* path = "/tmp/aldram_bad_workloads.csv";
    {
        std::ofstream out(path);
        out << "name,mpki,row_hit_frac,row_miss_frac,row_conflict_frac,write_frac,base_cpi\n";
        out << "ok,12,0.5,0.3,0.2,0.3,1.0\n";
        out << "broken,12,0.5,oops,0.2,0.3,1.0\n";
    }
    try {
        load_workloads_csv(path);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
    std::remove(path);
    CHECK_THROWS(load_workloads_csv("/tmp/definitely_missing_workloads.csv"));
}

TEST_CASE("workload validation rejects inconsistent stats") {
    WorkloadStats w = sample_workload();
    w.row_hit_frac = 0.9; // fractions no longer sum to 1
    CHECK_THROWS(validate(w));
    w = sample_workload();
    w.mpki = -1.0;
    CHECK_THROWS(validate(w));
}
