#include "aldram/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace aldram {

void validate(const WorkloadStats& w) {
    auto frac = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("WorkloadStats " + w.name + ": " + name +
                                        " out of [0,1]");
    };
    frac(w.row_hit_frac, "row_hit_frac");
    frac(w.row_miss_frac, "row_miss_frac");
    frac(w.row_conflict_frac, "row_conflict_frac");
    frac(w.write_frac, "write_frac");
    if (std::fabs(w.row_hit_frac + w.row_miss_frac + w.row_conflict_frac - 1.0) > 1e-9)
        throw std::invalid_argument("WorkloadStats " + w.name +
                                    ": row fractions must sum to 1");
    if (w.mpki < 0.0)
        throw std::invalid_argument("WorkloadStats " + w.name + ": negative mpki");
    if (!(w.base_cpi > 0.0))
        throw std::invalid_argument("WorkloadStats " + w.name + ": nonpositive base_cpi");
}

Intensity classify(const WorkloadStats& stats, const PerfKnobs& knobs) {
    validate(stats);
    return stats.mpki >= knobs.mpki_threshold ? Intensity::memory_intensive
                                              : Intensity::non_intensive;
}

double access_latency(const TimingParams& t, RowOutcome kind, MemOp op) {
    validate(t);
    switch (kind) {
    case RowOutcome::hit:
        return t.t_cl;
    case RowOutcome::miss:
        return t.t_rcd + t.t_cl;
    case RowOutcome::conflict:
        return (op == MemOp::write ? std::max(t.t_rp, t.t_wr) : t.t_rp) + t.t_rcd + t.t_cl;
    }
    return 0.0;
}

double analytic_amat(const WorkloadStats& stats, const TimingParams& timings) {
    validate(stats);
    auto mix = [&](RowOutcome kind) {
        return (1.0 - stats.write_frac) * access_latency(timings, kind, MemOp::read) +
               stats.write_frac * access_latency(timings, kind, MemOp::write);
    };
    return stats.row_hit_frac * mix(RowOutcome::hit) +
           stats.row_miss_frac * mix(RowOutcome::miss) +
           stats.row_conflict_frac * mix(RowOutcome::conflict);
}

double estimate_speedup(const WorkloadStats& stats, const TimingParams& base,
                        const TimingParams& reduced, const PerfKnobs& knobs) {
    validate(base);
    validate(reduced);
    if (reduced.t_rcd > base.t_rcd || reduced.t_ras > base.t_ras ||
        reduced.t_wr > base.t_wr || reduced.t_rp > base.t_rp)
        throw std::invalid_argument("estimate_speedup: reduced exceeds base");

    auto cpi = [&](const TimingParams& t) {
        return stats.base_cpi +
               (stats.mpki / 1000.0) * (analytic_amat(stats, t) / knobs.tck) *
                   knobs.blocking_factor;
    };
    return 100.0 * (cpi(base) / cpi(reduced) - 1.0);
}

TraceResult trace_simulate(const AccessTrace& trace, const TimingParams& t) {
    validate(t);
    if (trace.accesses.empty())
        throw std::invalid_argument("trace_simulate: empty trace");
    if (!(trace.tck > 0.0))
        throw std::invalid_argument("trace_simulate: nonpositive tck");

    auto quantize = [&](double ns) {
        return std::ceil(ns / trace.tck - 1e-9) * trace.tck;
    };

    struct BankState {
        bool open = false;
        int row = -1;
        double act_time = -1e18;        // last activation
        double write_data_time = -1e18; // last write data on the open row
        double precharge_done = 0.0;
    };
    std::map<int, BankState> banks;

    TraceResult result;
    double now = 0.0; // channel free time; requests arrive back-to-back
    for (const TraceAccess& a : trace.accesses) {
        BankState& b = banks[a.bank];
        double data;
        if (b.open && b.row == a.row) {
            data = quantize(now + t.t_cl);
        } else if (!b.open) {
            double act = quantize(std::max(now, b.precharge_done));
            data = quantize(act + t.t_rcd + t.t_cl);
            b.act_time = act;
            b.open = true;
            b.row = a.row;
            b.write_data_time = -1e18;
        } else {
            // Row conflict: precharge may start only after the open row's
            // restoration (tRAS) and any write recovery (tWR) complete.
            double pre = quantize(std::max({now, b.act_time + t.t_ras,
                                            b.write_data_time + t.t_wr}));
            double act = quantize(pre + t.t_rp);
            data = quantize(act + t.t_rcd + t.t_cl);
            b.act_time = act;
            b.row = a.row;
            b.write_data_time = -1e18;
        }
        if (a.op == MemOp::write)
            b.write_data_time = data;
        result.latencies_ns.push_back(data - now);
        now = data;
    }
    result.total_time_ns = now;
    double sum = 0.0;
    for (double l : result.latencies_ns)
        sum += l;
    result.amat_ns = sum / static_cast<double>(result.latencies_ns.size());
    return result;
}

namespace {

double geomean_pct(const std::vector<double>& speedups) {
    if (speedups.empty())
        return 0.0;
    double log_sum = 0.0;
    for (double s : speedups)
        log_sum += std::log1p(s / 100.0);
    return 100.0 * std::expm1(log_sum / static_cast<double>(speedups.size()));
}

} // namespace

CohortReport cohort_report(const std::vector<WorkloadStats>& workloads,
                           const TimingParams& base, const TimingParams& reduced,
                           const PerfKnobs& knobs) {
    if (workloads.empty())
        throw std::invalid_argument("cohort_report: empty cohort");
    CohortReport report;
    std::vector<double> intensive, non_intensive, all;
    for (const auto& w : workloads) {
        double s = estimate_speedup(w, base, reduced, knobs);
        Intensity cat = classify(w, knobs);
        report.results.push_back({w, s, cat});
        all.push_back(s);
        (cat == Intensity::memory_intensive ? intensive : non_intensive).push_back(s);
    }
    report.intensive = {static_cast<int>(intensive.size()), geomean_pct(intensive)};
    report.non_intensive = {static_cast<int>(non_intensive.size()),
                            geomean_pct(non_intensive)};
    report.overall = {static_cast<int>(all.size()), geomean_pct(all)};
    return report;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    return fields;
}

} // namespace

std::vector<WorkloadStats> load_workloads_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open workload file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty workload file: " + path);

    std::vector<WorkloadStats> out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 7)
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": expected 7 fields, got " +
                                     std::to_string(fields.size()));
        try {
            WorkloadStats w;
            w.name = fields[0];
            w.mpki = std::stod(fields[1]);
            w.row_hit_frac = std::stod(fields[2]);
            w.row_miss_frac = std::stod(fields[3]);
            w.row_conflict_frac = std::stod(fields[4]);
            w.write_frac = std::stod(fields[5]);
            w.base_cpi = std::stod(fields[6]);
            validate(w);
            out.push_back(w);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ": row " + std::to_string(row) + ": " +
                                     e.what());
        }
    }
    if (out.empty())
        throw std::runtime_error("no workloads in " + path);
    return out;
}

std::vector<TraceAccess> load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open trace file: " + path);
    std::string line;
    std::vector<TraceAccess> out;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (row == 1 && line.rfind("bank", 0) == 0))
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": expected bank,row,op");
        TraceAccess a;
        a.bank = std::stoi(fields[0]);
        a.row = std::stoi(fields[1]);
        if (fields[2] == "read")
            a.op = MemOp::read;
        else if (fields[2] == "write")
            a.op = MemOp::write;
        else
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": op must be read or write");
        out.push_back(a);
    }
    return out;
}

std::string cohort_csv(const CohortReport& report) {
    std::string out = "name,mpki,category,speedup_pct\n";
    char buf[256];
    for (const auto& r : report.results) {
        std::snprintf(buf, sizeof(buf), "%s,%.3f,%s,%.6f\n", r.stats.name.c_str(),
                      r.stats.mpki,
                      r.category == Intensity::memory_intensive ? "intensive"
                                                                : "non_intensive",
                      r.speedup_pct);
        out += buf;
    }
    return out;
}

nlohmann::json cohort_json(const CohortReport& report) {
    nlohmann::json j;
    j["intensive"] = {{"count", report.intensive.count},
                      {"geomean_speedup_pct", report.intensive.geomean_speedup_pct}};
    j["non_intensive"] = {{"count", report.non_intensive.count},
                          {"geomean_speedup_pct", report.non_intensive.geomean_speedup_pct}};
    j["overall"] = {{"count", report.overall.count},
                    {"geomean_speedup_pct", report.overall.geomean_speedup_pct}};
    return j;
}

} // namespace aldram
