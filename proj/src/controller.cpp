#include "aldram/controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

namespace aldram {

namespace {

TimingParams max_elementwise(const TimingParams& a, const TimingParams& b) {
    TimingParams out = a;
    out.t_rcd = std::max(a.t_rcd, b.t_rcd);
    out.t_ras = std::max(a.t_ras, b.t_ras);
    out.t_wr = std::max(a.t_wr, b.t_wr);
    out.t_rp = std::max(a.t_rp, b.t_rp);
    return out;
}

bool leq_elementwise(const TimingParams& a, const TimingParams& b) {
    return a.t_rcd <= b.t_rcd && a.t_ras <= b.t_ras && a.t_wr <= b.t_wr &&
           a.t_rp <= b.t_rp;
}

} // namespace

ProfileTable build_table(const std::vector<DimmTimingProfile>& profiles,
                         double guardband_temp, double guardband_timing_fraction) {
    if (profiles.empty())
        throw std::invalid_argument("build_table: no profiles");
    if (guardband_temp < 0.0 || guardband_timing_fraction < 0.0)
        throw std::invalid_argument("build_table: negative guardband");

    std::map<int, std::map<double, TimingParams>> by_dimm;
    for (const auto& p : profiles) {
        auto [it, inserted] = by_dimm[p.dimm_id].emplace(p.temp, p.min_safe);
        if (!inserted)
            throw std::invalid_argument("build_table: duplicate (dimm, temp) profile");
    }

    std::set<double> temps;
    for (const auto& [temp, _] : by_dimm.begin()->second)
        temps.insert(temp);
    if (!temps.count(85.0))
        throw std::invalid_argument("build_table: profiles missing the 85 degC anchor");
    for (const auto& [id, m] : by_dimm)
        for (double t : temps)
            if (!m.count(t))
                throw std::invalid_argument("build_table: DIMM " + std::to_string(id) +
                                            " missing a profiled temperature");

    ProfileTable table;
    table.guardband_temp = guardband_temp;
    table.guardband_timing_fraction = guardband_timing_fraction;
    const double scale = 1.0 + guardband_timing_fraction;
    for (const auto& [id, m] : by_dimm) {
        std::vector<ProfileBin> bins;
        for (const auto& [temp, min_safe] : m) { // map iteration = ascending temp
            ProfileBin bin;
            bin.bin_upper_temp = temp;
            bin.timings = min_safe;
            bin.timings.t_rcd *= scale;
            bin.timings.t_ras *= scale;
            bin.timings.t_wr *= scale;
            bin.timings.t_rp *= scale;
            // Merge rule: a cooler bin may never be slower than a hotter one.
            if (!bins.empty())
                bin.timings = max_elementwise(bin.timings, bins.back().timings);
            validate(bin.timings);
            bins.push_back(bin);
        }
        table.dimms.emplace(id, std::move(bins));
    }
    return table;
}

namespace {

int lowest_covering_bin(const std::vector<ProfileBin>& bins, double temp, double guard) {
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i].bin_upper_temp >= temp + guard)
            return static_cast<int>(i);
    return static_cast<int>(bins.size()); // standard fail-safe
}

} // namespace

Selection select_timings(const ProfileTable& table, int dimm_id, double temp) {
    Selection sel;
    auto it = table.dimms.find(dimm_id);
    if (it == table.dimms.end()) {
        sel.timings = standard_ddr3();
        sel.bin_index = 0;
        sel.known_dimm = false; // fail-safe, caller logs the warning
        return sel;
    }
    const auto& bins = it->second;
    sel.bin_index = lowest_covering_bin(bins, temp, table.guardband_temp);
    sel.timings = sel.bin_index < static_cast<int>(bins.size())
                      ? bins[sel.bin_index].timings
                      : standard_ddr3();
    return sel;
}

HysteresisSelector::HysteresisSelector(const std::vector<ProfileBin>& bins,
                                       double guardband_temp)
    : bins_(bins), guard_(guardband_temp) {}

int HysteresisSelector::target_bin(double temp, double guard) const {
    return lowest_covering_bin(bins_, temp, guard);
}

int HysteresisSelector::select(double temp) {
    int target = target_bin(temp, guard_);
    if (current_ < 0) {
        current_ = target;
    } else if (target > current_) {
        current_ = target; // promotion is immediate (safety)
        ++transitions_;
    } else if (target < current_) {
        int demoted = target_bin(temp, 2.0 * guard_);
        if (demoted < current_) {
            current_ = demoted;
            ++transitions_;
        }
    }
    return current_;
}

void validate_slew(const TempTrace& trace, double slew_cap_c_per_s) {
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
        double dt = trace.samples[i].time_s - trace.samples[i - 1].time_s;
        if (!(dt > 0.0))
            throw std::invalid_argument("TempTrace: times must be strictly increasing");
        double rate = std::fabs(trace.samples[i].temp_c - trace.samples[i - 1].temp_c) / dt;
        if (rate > slew_cap_c_per_s + 1e-9)
            throw std::invalid_argument("TempTrace: slew " + std::to_string(rate) +
                                        " degC/s exceeds the cap at sample " +
                                        std::to_string(i));
    }
}

TempTrace gen_temp_trace(const TraceSpec& spec, std::uint64_t seed) {
    if (!(spec.duration_s > 0.0) || !(spec.sample_interval_s > 0.0))
        throw std::invalid_argument("gen_temp_trace: nonpositive duration or interval");
    if (!(spec.slew_cap > 0.0))
        throw std::invalid_argument("gen_temp_trace: nonpositive slew cap");

    const double two_pi = 2.0 * std::acos(-1.0);
    switch (spec.profile) {
    case TraceProfile::constant:
        break;
    case TraceProfile::ramp:
        if (std::fabs(spec.temp_end - spec.temp_start) / spec.duration_s >
            spec.slew_cap + 1e-12)
            throw std::invalid_argument("gen_temp_trace: ramp slope exceeds slew cap");
        break;
    case TraceProfile::diurnal:
        if (two_pi * spec.amplitude / spec.period_s > spec.slew_cap)
            throw std::invalid_argument("gen_temp_trace: diurnal slope exceeds slew cap");
        break;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    TempTrace trace;
    const auto n = static_cast<std::size_t>(spec.duration_s / spec.sample_interval_s) + 1;
    double prev = spec.temp_start;
    for (std::size_t k = 0; k < n; ++k) {
        double t = static_cast<double>(k) * spec.sample_interval_s;
        double base = spec.temp_start;
        if (spec.profile == TraceProfile::ramp)
            base = spec.temp_start + (spec.temp_end - spec.temp_start) * t / spec.duration_s;
        else if (spec.profile == TraceProfile::diurnal)
            base = spec.temp_start + spec.amplitude * std::sin(two_pi * t / spec.period_s);
        double desired = base;
        if (spec.noise_sigma > 0.0)
            desired += spec.noise_sigma * normal(rng);
        // Clamp each step to the slew budget so the trace is legal by
        // construction even with noise.
        double max_step = spec.slew_cap * spec.sample_interval_s;
        double temp = k == 0 ? desired : std::clamp(desired, prev - max_step, prev + max_step);
        trace.samples.push_back({t, temp});
        prev = temp;
    }
    validate_slew(trace, spec.slew_cap);
    return trace;
}

namespace {

// Highest temperature in [0, 100] (to 0.01 degC) at which every cell of the
// DIMM passes under `timings`; -1 if it fails even at 0.
double max_safe_temp(const Dimm& dimm, const TimingParams& timings,
                     const ElectricalParams& params) {
    auto passes = [&](double temp) {
        for (const CellSample& c : dimm.cells)
            if (!access_outcome(c, timings, temp, timings.t_refw, kSolidPattern, params)
                     .correct)
                return false;
        return true;
    };
    if (!passes(0.0))
        return -1.0;
    if (passes(100.0))
        return 100.0;
    double lo = 0.0, hi = 100.0;
    while (hi - lo > 0.01) {
        double mid = 0.5 * (lo + hi);
        (passes(mid) ? lo : hi) = mid;
    }
    return lo;
}

std::optional<SafetyViolation> find_violation(const Dimm& dimm, const TimingParams& t,
                                              double temp, double time_s,
                                              const ElectricalParams& params) {
    for (const CellSample& c : dimm.cells) {
        Outcome o = access_outcome(c, t, temp, t.t_refw, kSolidPattern, params);
        if (!o.correct)
            return SafetyViolation{time_s, dimm.dimm_id, c.chip_id, c.cell_id, o.stage};
    }
    return std::nullopt;
}

} // namespace

ControllerReport simulate_controller(const ProfileTable& table, const TempTrace& trace,
                                     const std::vector<Dimm>& bank,
                                     const ElectricalParams& params,
                                     bool exhaustive_check) {
    ControllerReport report;
    if (trace.samples.empty())
        return report;
    validate_slew(trace);
    if (bank.empty())
        throw std::invalid_argument("simulate_controller: empty DIMM bank");
    if (table.dimms.empty())
        throw std::invalid_argument("simulate_controller: empty table");

    // Bin boundaries are shared across DIMMs (enforced by build_table), so a
    // single hysteresis state drives every DIMM.
    const auto& ref_bins = table.dimms.begin()->second;
    HysteresisSelector selector(ref_bins, table.guardband_temp);
    const TimingParams std_t = standard_ddr3();
    const int standard_bin = static_cast<int>(ref_bins.size());

    // (dimm index, bin) -> highest temperature verified safe.
    std::map<std::pair<std::size_t, int>, double> safe_temp_cache;

    double weighted_read = 0.0, weighted_write = 0.0, total_weight = 0.0;
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        const double time_s = trace.samples[k].time_s;
        const double temp = trace.samples[k].temp_c;
        const int bin = selector.select(temp);

        double read_acc = 0.0, write_acc = 0.0;
        for (std::size_t di = 0; di < bank.size(); ++di) {
            const Dimm& dimm = bank[di];
            auto it = table.dimms.find(dimm.dimm_id);
            const bool known = it != table.dimms.end();
            const TimingParams& t =
                (known && bin < standard_bin) ? it->second[bin].timings : std_t;
            const int cache_bin = (known && bin < standard_bin) ? bin : standard_bin;

            if (exhaustive_check) {
                if (auto v = find_violation(dimm, t, temp, time_s, params)) {
                    report.violation = v;
                    report.transitions = selector.transitions();
                    return report;
                }
            } else {
                auto key = std::make_pair(di, cache_bin);
                auto cached = safe_temp_cache.find(key);
                double verified = cached == safe_temp_cache.end()
                                      ? (safe_temp_cache[key] = max_safe_temp(dimm, t, params))
                                      : cached->second;
                if (temp > verified) {
                    if (auto v = find_violation(dimm, t, temp, time_s, params)) {
                        report.violation = v;
                        report.transitions = selector.transitions();
                        return report;
                    }
                    safe_temp_cache[key] = temp;
                }
            }
            auto [r, w] = latency_sums(t);
            read_acc += r;
            write_acc += w;
        }
        const double n = static_cast<double>(bank.size());
        TimelinePoint pt{time_s, temp, bin, read_acc / n, write_acc / n};
        report.timeline.push_back(pt);

        double weight;
        if (trace.samples.size() == 1)
            weight = 1.0;
        else if (k + 1 < trace.samples.size())
            weight = trace.samples[k + 1].time_s - time_s;
        else
            weight = time_s - trace.samples[k - 1].time_s;
        weighted_read += pt.read_sum_ns * weight;
        weighted_write += pt.write_sum_ns * weight;
        total_weight += weight;
    }
    report.avg_read_sum_ns = weighted_read / total_weight;
    report.avg_write_sum_ns = weighted_write / total_weight;
    report.transitions = selector.transitions();
    return report;
}

void to_json(nlohmann::json& j, const ProfileTable& t) {
    j["guardband_temp"] = t.guardband_temp;
    j["guardband_timing_fraction"] = t.guardband_timing_fraction;
    nlohmann::json dimms = nlohmann::json::object();
    for (const auto& [id, bins] : t.dimms) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& bin : bins)
            arr.push_back({{"bin_upper_temp", bin.bin_upper_temp}, {"timings", bin.timings}});
        dimms[std::to_string(id)] = arr;
    }
    j["dimms"] = dimms;
}

void from_json(const nlohmann::json& j, ProfileTable& t) {
    t.guardband_temp = j.at("guardband_temp").get<double>();
    t.guardband_timing_fraction = j.at("guardband_timing_fraction").get<double>();
    t.dimms.clear();
    for (const auto& [key, arr] : j.at("dimms").items()) {
        std::vector<ProfileBin> bins;
        for (const auto& b : arr) {
            ProfileBin bin;
            bin.bin_upper_temp = b.at("bin_upper_temp").get<double>();
            bin.timings = b.at("timings").get<TimingParams>();
            bins.push_back(bin);
        }
        if (!std::is_sorted(bins.begin(), bins.end(),
                            [](const ProfileBin& a, const ProfileBin& b) {
                                return a.bin_upper_temp < b.bin_upper_temp;
                            }))
            throw std::invalid_argument("ProfileTable: bins not sorted by temperature");
        for (std::size_t i = 1; i < bins.size(); ++i)
            if (!leq_elementwise(bins[i - 1].timings, bins[i].timings))
                throw std::invalid_argument("ProfileTable: timings not monotone in temperature");
        t.dimms.emplace(std::stoi(key), std::move(bins));
    }
}

nlohmann::json controller_report_json(const ControllerReport& r) {
    nlohmann::json j;
    j["samples"] = r.timeline.size();
    j["transitions"] = r.transitions;
    j["avg_read_sum_ns"] = r.avg_read_sum_ns;
    j["avg_write_sum_ns"] = r.avg_write_sum_ns;
    if (r.violation) {
        j["violation"] = {{"time_s", r.violation->time_s},
                          {"dimm_id", r.violation->dimm_id},
                          {"chip_id", r.violation->chip_id},
                          {"cell_id", r.violation->cell_id},
                          {"stage", to_string(r.violation->stage)}};
    } else {
        j["violation"] = nullptr;
    }
    return j;
}

std::string timeline_csv(const ControllerReport& r) {
    std::string out = "time_s,temp_c,bin,read_sum_ns,write_sum_ns\n";
    char buf[160];
    for (const auto& p : r.timeline) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.4f,%d,%.4f,%.4f\n", p.time_s, p.temp_c,
                      p.bin, p.read_sum_ns, p.write_sum_ns);
        out += buf;
    }
    return out;
}

} // namespace aldram
