#include "aldram/profiler.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <thread>

namespace aldram {

const char* to_string(SearchMode mode) {
    return mode == SearchMode::per_parameter ? "per_parameter" : "joint";
}

const char* to_string(TimingField field) {
    switch (field) {
    case TimingField::rcd: return "t_rcd";
    case TimingField::ras: return "t_ras";
    case TimingField::wr: return "t_wr";
    case TimingField::rp: return "t_rp";
    }
    return "?";
}

const char* to_string(Scenario s) {
    switch (s) {
    case Scenario::same_test: return "same_test";
    case Scenario::different_data_pattern: return "different_data_pattern";
    case Scenario::different_timing_combination: return "different_timing_combination";
    case Scenario::different_temperature: return "different_temperature";
    case Scenario::read_vs_write: return "read_vs_write";
    }
    return "?";
}

void validate(const ProfileRequest& req) {
    if (!(req.resolution > 0.0))
        throw std::invalid_argument("ProfileRequest: resolution must be positive");
    if (req.temp < 0.0 || req.temp > 100.0)
        throw std::invalid_argument("ProfileRequest: temp outside [0, 100]");
    if (!(req.t_refw > 0.0))
        throw std::invalid_argument("ProfileRequest: t_refw must be positive");
}

namespace {

double get_field(const TimingParams& t, TimingField f) {
    switch (f) {
    case TimingField::rcd: return t.t_rcd;
    case TimingField::ras: return t.t_ras;
    case TimingField::wr: return t.t_wr;
    case TimingField::rp: return t.t_rp;
    }
    return 0.0;
}

void set_field(TimingParams& t, TimingField f, double v) {
    switch (f) {
    case TimingField::rcd: t.t_rcd = v; break;
    case TimingField::ras: t.t_ras = v; break;
    case TimingField::wr: t.t_wr = v; break;
    case TimingField::rp: t.t_rp = v; break;
    }
}

constexpr TimingField kFieldOrder[4] = {TimingField::rcd, TimingField::ras,
                                        TimingField::wr, TimingField::rp};

bool dimm_passes(const Dimm& dimm, const TimingParams& t, double temp,
                 PatternStress pattern, const ElectricalParams& params) {
    for (const CellSample& c : dimm.cells)
        if (!access_outcome(c, t, temp, t.t_refw, pattern, params).correct)
            return false;
    return true;
}

// Smallest on-grid value of `field` (grid anchored at the standard value,
// step = resolution) for which the whole DIMM still passes, holding the other
// fields at their values in `base`. Monotonicity of the charge model makes
// the pass set an upward-closed interval, so binary search applies; a final
// confirmation step re-checks minimality.
double search_field_min(const Dimm& dimm, TimingParams base, TimingField field,
                        const ProfileRequest& req, const ElectricalParams& params) {
    const TimingParams std_t = standard_ddr3();
    const double std_v = get_field(std_t, field);
    const double floor_v =
        field == TimingField::ras ? std::max(base.t_rcd, req.resolution) : req.resolution;

    const double start_v = get_field(base, field);
    const long k_start = std::lround((std_v - start_v) / req.resolution);
    const long k_max = static_cast<long>(std::floor((std_v - floor_v) / req.resolution + 1e-9));

    auto pass_at = [&](long k) {
        TimingParams t = base;
        set_field(t, field, std_v - static_cast<double>(k) * req.resolution);
        return dimm_passes(dimm, t, req.temp, req.pattern, params);
    };

    if (!pass_at(k_start))
        throw StandardTimingsUnsafe("DIMM " + std::to_string(dimm.dimm_id) +
                                    " fails at its starting timings on " +
                                    std::string(to_string(field)));
    long lo = k_start; // known passing
    long hi = k_max;
    if (pass_at(k_max)) {
        lo = k_max;
    } else {
        while (hi - lo > 1) {
            long mid = lo + (hi - lo) / 2;
            (pass_at(mid) ? lo : hi) = mid;
        }
    }
    // Minimality certificate.
    if (!pass_at(lo) || (lo < k_max && pass_at(lo + 1)))
        throw std::logic_error("search_field_min: monotonicity violated");
    return std_v - static_cast<double>(lo) * req.resolution;
}

DimmTimingProfile make_profile(const Dimm& dimm, double temp, SearchMode mode,
                               const TimingParams& min_safe) {
    DimmTimingProfile p;
    p.dimm_id = dimm.dimm_id;
    p.temp = temp;
    p.mode = mode;
    p.min_safe = min_safe;
    p.reductions = reductions_vs(min_safe, standard_ddr3());
    auto [r, w] = latency_sums(min_safe);
    p.read_sum = r;
    p.write_sum = w;
    return p;
}

} // namespace

DimmTimingProfile min_safe_timings(const Dimm& dimm, const ProfileRequest& req,
                                   const ElectricalParams& params) {
    validate(req);
    if (dimm.cells.empty())
        throw std::invalid_argument("min_safe_timings: empty DIMM");

    TimingParams base = standard_ddr3();
    base.t_refw = req.t_refw;
    if (!dimm_passes(dimm, base, req.temp, req.pattern, params))
        throw StandardTimingsUnsafe("DIMM " + std::to_string(dimm.dimm_id) +
                                    " fails at standard timings (miscalibration?)");

    TimingParams result = base;
    if (req.mode == SearchMode::per_parameter) {
        for (TimingField f : kFieldOrder)
            set_field(result, f, search_field_min(dimm, base, f, req, params));
    } else {
        TimingParams current = base;
        bool progress = true;
        while (progress) {
            progress = false;
            for (TimingField f : kFieldOrder) {
                double v = search_field_min(dimm, current, f, req, params);
                if (v < get_field(current, f) - 1e-12) {
                    set_field(current, f, v);
                    progress = true;
                }
            }
        }
        result = current;
    }
    return make_profile(dimm, req.temp, req.mode, result);
}

PopulationReport population_profile(const std::vector<Dimm>& dimms,
                                    const std::vector<double>& temps,
                                    const ProfileRequest& req_template,
                                    const ElectricalParams& params, int jobs) {
    if (dimms.empty() || temps.empty())
        throw std::invalid_argument("population_profile: empty inputs");
    if (jobs < 1)
        jobs = 1;

    struct Task {
        std::size_t temp_idx;
        std::size_t dimm_idx;
    };
    std::vector<Task> tasks;
    for (std::size_t ti = 0; ti < temps.size(); ++ti)
        for (std::size_t di = 0; di < dimms.size(); ++di)
            tasks.push_back({ti, di});

    std::vector<std::optional<DimmTimingProfile>> results(tasks.size());
    std::vector<std::string> task_errors(tasks.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size())
                return;
            ProfileRequest req = req_template;
            req.temp = temps[tasks[i].temp_idx];
            try {
                results[i] = min_safe_timings(dimms[tasks[i].dimm_idx], req, params);
            } catch (const std::exception& e) {
                task_errors[i] = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    // Deterministic assembly in task order regardless of worker count.
    PopulationReport report;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (results[i])
            report.profiles.push_back(*results[i]);
        else
            report.errors.push_back(task_errors[i]);
    }

    for (double temp : temps) {
        TempSummary s;
        s.temp = temp;
        ReductionSet sum{}, sumsq{};
        double read_sum = 0.0, write_sum = 0.0;
        for (const auto& p : report.profiles) {
            if (p.temp != temp)
                continue;
            ++s.dimm_count;
            sum.rcd += p.reductions.rcd;
            sum.ras += p.reductions.ras;
            sum.wr += p.reductions.wr;
            sum.rp += p.reductions.rp;
            sumsq.rcd += p.reductions.rcd * p.reductions.rcd;
            sumsq.ras += p.reductions.ras * p.reductions.ras;
            sumsq.wr += p.reductions.wr * p.reductions.wr;
            sumsq.rp += p.reductions.rp * p.reductions.rp;
            read_sum += p.read_sum;
            write_sum += p.write_sum;
        }
        if (s.dimm_count > 0) {
            double n = s.dimm_count;
            s.mean_reduction = {sum.rcd / n, sum.ras / n, sum.wr / n, sum.rp / n};
            auto sd = [n](double sq, double mean) {
                return std::sqrt(std::max(0.0, sq / n - mean * mean));
            };
            s.stddev_reduction = {sd(sumsq.rcd, s.mean_reduction.rcd),
                                  sd(sumsq.ras, s.mean_reduction.ras),
                                  sd(sumsq.wr, s.mean_reduction.wr),
                                  sd(sumsq.rp, s.mean_reduction.rp)};
            s.mean_read_sum = read_sum / n;
            s.mean_write_sum = write_sum / n;
        }
        report.summaries.push_back(s);
    }
    return report;
}

std::vector<DimmTimingProfile> refresh_sweep(const Dimm& dimm, double temp,
                                             const std::vector<double>& intervals_ms,
                                             const ProfileRequest& req_template,
                                             const ElectricalParams& params) {
    if (intervals_ms.empty())
        throw std::invalid_argument("refresh_sweep: no intervals");
    if (!std::is_sorted(intervals_ms.rbegin(), intervals_ms.rend()))
        throw std::invalid_argument("refresh_sweep: intervals must be sorted descending");
    for (double iv : intervals_ms)
        if (!(iv > 0.0))
            throw std::invalid_argument("refresh_sweep: intervals must be positive");

    std::vector<DimmTimingProfile> out;
    for (double iv : intervals_ms) {
        ProfileRequest req = req_template;
        req.temp = temp;
        req.t_refw = iv;
        out.push_back(min_safe_timings(dimm, req, params));
    }
    return out;
}

DimmTimingProfile interaction_study(const Dimm& dimm, double temp,
                                    TimingField fix_field, double fix_fraction,
                                    const ProfileRequest& req_template,
                                    const ElectricalParams& params) {
    if (!(fix_fraction >= 0.0 && fix_fraction < 1.0))
        throw std::invalid_argument("interaction_study: fix_fraction out of [0,1)");
    ProfileRequest req = req_template;
    req.temp = temp;
    validate(req);

    TimingParams base = standard_ddr3();
    base.t_refw = req.t_refw;
    // Keep the fixed value on the search grid.
    const double std_v = get_field(base, fix_field);
    const double fixed_v =
        std_v - std::floor(std_v * fix_fraction / req.resolution) * req.resolution;
    set_field(base, fix_field, fixed_v);
    validate(base);
    if (!dimm_passes(dimm, base, temp, req.pattern, params))
        throw TimingError("interaction_study: infeasible, the fixed reduction alone fails");

    TimingParams result = base;
    for (TimingField f : kFieldOrder) {
        if (f == fix_field)
            continue;
        set_field(result, f, search_field_min(dimm, base, f, req, params));
    }
    return make_profile(dimm, temp, SearchMode::per_parameter, result);
}

RepeatabilityResult repeatability_test(const Dimm& dimm, const TimingParams& timings,
                                       double temp, Scenario scenario, int iterations,
                                       double trial_noise_sigma, std::uint64_t seed,
                                       const ElectricalParams& params) {
    if (iterations < 2)
        throw std::invalid_argument("repeatability_test: iterations must be >= 2");
    if (trial_noise_sigma < 0.0)
        throw std::invalid_argument("repeatability_test: negative trial_noise_sigma");
    validate(timings);

    // A neighboring timing combination for the different-timing scenario.
    TimingParams alt = timings;
    alt.t_rcd += 0.25;
    alt.t_ras -= 0.25;
    alt.t_wr += 0.25;
    alt.t_rp -= 0.25;
    try {
        validate(alt);
    } catch (const TimingError&) {
        alt = timings;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<int> fail_count(dimm.cells.size(), 0);
    for (int it = 0; it < iterations; ++it) {
        TimingParams t = timings;
        double trial_temp = temp;
        PatternStress pattern{1.0};
        AccessPhase phase = AccessPhase::full;
        switch (scenario) {
        case Scenario::same_test:
            break;
        case Scenario::different_data_pattern:
            pattern = (it % 2 == 0) ? kSolidPattern : kWorstPattern;
            break;
        case Scenario::different_timing_combination:
            if (it % 2 == 1)
                t = alt;
            break;
        case Scenario::different_temperature:
            trial_temp = (it % 2 == 0) ? temp - 5.0 : temp + 5.0;
            break;
        case Scenario::read_vs_write:
            phase = (it % 2 == 0) ? AccessPhase::read_test : AccessPhase::write_test;
            break;
        }
        for (std::size_t ci = 0; ci < dimm.cells.size(); ++ci) {
            // Fresh multiplicative lognormal perturbation on d_sense per cell
            // per trial.
            PatternStress noisy = pattern;
            noisy.d_sense_mult *= std::exp(trial_noise_sigma * normal(rng));
            if (!access_outcome(dimm.cells[ci], t, trial_temp, t.t_refw, noisy, params,
                                phase)
                     .correct)
                ++fail_count[ci];
        }
    }

    RepeatabilityResult res;
    res.scenario = scenario;
    for (int n : fail_count) {
        if (n > 0)
            ++res.erroneous_cells;
        if (n == iterations)
            ++res.repeatable_cells;
    }
    if (res.erroneous_cells > 0)
        res.fraction_repeatable =
            static_cast<double>(res.repeatable_cells) / res.erroneous_cells;
    return res;
}

namespace {

double get_reduction(const ReductionSet& r, TimingField f) {
    switch (f) {
    case TimingField::rcd: return r.rcd;
    case TimingField::ras: return r.ras;
    case TimingField::wr: return r.wr;
    case TimingField::rp: return r.rp;
    }
    return 0.0;
}

// Solo reduction of a single field for a single-cell DIMM; "standard unsafe"
// encoded as -1 so it sorts below any achievable target.
double corner_field_reduction(const CellSample& corner, const ElectricalParams& params,
                              double temp, TimingField field, double resolution) {
    Dimm d;
    d.dimm_id = -1;
    d.cells = {corner};
    ProfileRequest req;
    req.temp = temp;
    req.resolution = resolution;
    TimingParams base = standard_ddr3();
    if (!dimm_passes(d, base, temp, req.pattern, params))
        return -1.0;
    double v = search_field_min(d, base, field, req, params);
    return 1.0 - v / get_field(base, field);
}

// Anchor state: {tau_sense, ln tau_leak_ref, tau_restore_nominal, tau_active,
// v_read}. tau_precharge is not an anchor knob: the residual floor pins it
// directly to the tRP reduction target (see calibrate). v_read is anchored
// rather than calibrated against the population: the corner's sensing and
// steady-state equations jointly determine both tau_sense and the read
// threshold.
using AnchorX = std::array<double, 5>;
constexpr int kAnchorDim = 5;

void apply_anchor(ElectricalParams& p, const AnchorX& x) {
    p.tau_sense = x[0];
    p.tau_leak_ref = std::exp(x[1]);
    p.tau_restore_nominal = x[2];
    p.tau_active = x[3];
    p.v_read = x[4];
}

// Misfit of the corner's four solo reductions against the extra-margin
// target, in nanoseconds of the corresponding timing fields so that "within
// one search resolution" is a uniform criterion. Returns {sum of squares,
// max abs error}; infeasible points rank as 1e18.
std::pair<double, double> anchor_misfit(const CellSample& corner,
                                        const ElectricalParams& base, const AnchorX& x,
                                        double target, int* evals) {
    if (x[0] < 0.1 || x[2] < 0.2 || x[3] < 0.5 || x[1] > 20.0 ||
        x[4] <= 2.0 * base.d_sense || x[4] >= 0.95)
        return {1e18, 1e18};
    ElectricalParams p = base;
    apply_anchor(p, x);
    const TimingField fields[4] = {TimingField::rcd, TimingField::ras, TimingField::wr,
                                   TimingField::rp};
    const TimingParams std_t = standard_ddr3();
    double ssq = 0.0, worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        double red = corner_field_reduction(corner, p, 85.0, fields[i], 0.0005);
        ++*evals;
        if (red < 0.0)
            return {1e18, 1e18};
        double err_ns = (red - target) * get_field(std_t, fields[i]);
        ssq += err_ns * err_ns;
        worst = std::max(worst, std::fabs(err_ns));
    }
    return {ssq, worst};
}

// Pin the worst corner's four solo reductions at 85 degC to the extra-margin
// fraction. The four responses are strongly coupled (all bind through the
// same charge margins) and the steady-state restore has a fold, so a
// coordinate-wise solve stalls; a Nelder-Mead descent on the joint misfit is
// robust to both. The anchored system is rank-deficient -- a one-parameter
// family of electrical parameters pins the same corner -- so a weak pull
// toward the caller's tau_sense selects the family member; calibrate uses
// that to steer population behavior without disturbing the anchor. Accepts
// when every field is anchored within 0.04 ns.
bool anchor_corner(const VariationSpec& spec, ElectricalParams& params, int* evals) {
    const CellSample corner = worst_case_corner(spec);
    const double m = spec.extra_margin_fraction;
    const double ts_pull = params.tau_sense;
    const TimingParams std_t = standard_ddr3();

    AnchorX x = {params.tau_sense, std::log(params.tau_leak_ref),
                 params.tau_restore_nominal, params.tau_active, params.v_read};
    // Leakage dominates feasibility: raise it until the corner survives
    // standard timings at all, so the descent starts on the live branch.
    {
        ElectricalParams p = params;
        int lifts = 0;
        for (; lifts < 80; ++lifts) {
            apply_anchor(p, x);
            ++*evals;
            if (access_outcome(corner, std_t, 85.0, std_t.t_refw, kSolidPattern, p)
                    .correct)
                break;
            x[1] += 0.1;
        }
        if (lifts == 80)
            return false;
    }

    auto eval = [&](const AnchorX& pt) {
        auto mis = anchor_misfit(corner, params, pt, m, evals);
        double dv = pt[0] - ts_pull;
        mis.first += 3e-4 * dv * dv;
        return mis;
    };
    const double accept_ns = 0.04;
    const int n = kAnchorDim;
    double best_worst = 1e18;
    const double scales[2][kAnchorDim] = {{0.1, 0.02, 0.05, 1.0, 0.05},
                                          {0.02, 0.004, 0.01, 0.2, 0.01}};
    for (const double* scale : scales) {
        std::array<std::pair<double, AnchorX>, kAnchorDim + 1> simp;
        simp[0] = {eval(x).first, x};
        for (int k = 0; k < n; ++k) {
            AnchorX v = x;
            v[k] += scale[k];
            simp[k + 1] = {eval(v).first, v};
        }
        auto by_val = [](const auto& a, const auto& b) { return a.first < b.first; };
        for (int it = 0; it < 500; ++it) {
            std::sort(simp.begin(), simp.end(), by_val);
            AnchorX c{};
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    c[k] += simp[i].second[k] / n;
            auto& worst = simp[n];
            AnchorX xr;
            for (int k = 0; k < n; ++k)
                xr[k] = c[k] + (c[k] - worst.second[k]);
            double fr = eval(xr).first;
            if (fr < simp[0].first) {
                AnchorX xe;
                for (int k = 0; k < n; ++k)
                    xe[k] = c[k] + 2.0 * (c[k] - worst.second[k]);
                double fe = eval(xe).first;
                worst = fe < fr ? std::make_pair(fe, xe) : std::make_pair(fr, xr);
            } else if (fr < simp[n - 1].first) {
                worst = {fr, xr};
            } else {
                AnchorX xc;
                for (int k = 0; k < n; ++k)
                    xc[k] = c[k] + 0.5 * (worst.second[k] - c[k]);
                double fc = eval(xc).first;
                if (fc < worst.first) {
                    worst = {fc, xc};
                } else {
                    for (int i = 1; i <= n; ++i) {
                        for (int k = 0; k < n; ++k)
                            simp[i].second[k] = simp[0].second[k] +
                                                0.5 * (simp[i].second[k] -
                                                       simp[0].second[k]);
                        simp[i].first = eval(simp[i].second).first;
                    }
                }
            }
        }
        std::sort(simp.begin(), simp.end(), by_val);
        x = simp[0].second;
        best_worst = eval(x).second;
        if (best_worst <= accept_ns)
            break;
    }
    if (best_worst > accept_ns)
        return false;
    apply_anchor(params, x);
    return true;
}

ReductionSet population_mean_solo(const VariationSpec& spec, const ElectricalParams& params,
                                  double temp, int population, std::uint64_t seed) {
    std::vector<Dimm> bank = sample_bank(spec, seed, population);
    ProfileRequest req;
    req.temp = temp;
    PopulationReport rep = population_profile(
        bank, {temp}, req, params,
        static_cast<int>(std::min<unsigned>(8, std::thread::hardware_concurrency())));
    if (!rep.errors.empty())
        throw StandardTimingsUnsafe(rep.errors.front());
    return rep.summaries.front().mean_reduction;
}

} // namespace

ReductionSet corner_solo_reductions(const VariationSpec& spec,
                                    const ElectricalParams& params, double temp,
                                    double resolution) {
    const CellSample corner = worst_case_corner(spec);
    ReductionSet r;
    r.rcd = corner_field_reduction(corner, params, temp, TimingField::rcd, resolution);
    r.ras = corner_field_reduction(corner, params, temp, TimingField::ras, resolution);
    r.wr = corner_field_reduction(corner, params, temp, TimingField::wr, resolution);
    r.rp = corner_field_reduction(corner, params, temp, TimingField::rp, resolution);
    return r;
}

CalibrationReport calibrate(const VariationSpec& spec, const ElectricalParams& params,
                            const ReductionSet& targets, double temp,
                            int population, std::uint64_t seed, double tolerance) {
    validate(spec);
    validate(params);

    CalibrationReport report;
    report.target = targets;
    report.variation = spec;
    report.params = params;

    // Physical ceilings: no calibration can profile a field below its fixed
    // overhead, so such targets are infeasible without running the search.
    {
        const TimingParams std_t = standard_ddr3();
        const bool over =
            targets.rcd > 1.0 - params.t_overhead_act / std_t.t_rcd ||
            targets.ras > 1.0 - params.t_overhead_act / std_t.t_ras ||
            targets.rp > 1.0 - params.t_overhead_pre / std_t.t_rp;
        if (over) {
            report.feasible = false;
            return report;
        }
    }

    // Outer knobs shaping the 55-vs-85 and typical-vs-corner spread:
    // {c_ratio, sigma_resistance, sigma_retention, sigma_capacitance,
    // ln leak_halving_per, tau_sense pull}. The leakage temperature exponent
    // controls how much margin the operating temperature recovers relative to
    // the anchored worst case; the pull selects the member of the anchor's
    // solution family (see anchor_corner).
    using Theta = std::array<double, 6>;
    auto apply = [&](const Theta& th, VariationSpec& s, ElectricalParams& p) {
        p.c_ratio = th[0];
        s.sigma_resistance = th[1];
        s.sigma_retention = th[2];
        s.sigma_capacitance = th[3];
        p.leak_halving_per = std::exp(th[4]);
        p.tau_sense = th[5];
    };
    // Each anchored solution seeds the next candidate's inner solve; the
    // anchor basin moves continuously with the outer knobs.
    ElectricalParams warm = params;

    // The residual floor (delta must stay under the sense offset) makes the
    // minimum safe tRP cell-independent for any cell with ordinary charge
    // margins, so tau_precharge follows directly from the tRP target.
    {
        const TimingParams std_t = standard_ddr3();
        const ProfileRequest req;
        const double d_min = params.d_sense * req.pattern.d_sense_mult;
        warm.tau_precharge =
            (std_t.t_rp * (1.0 - targets.rp) - params.t_overhead_pre) /
            std::log(0.5 / d_min);
    }
    auto objective = [&](const Theta& th, ReductionSet* achieved, VariationSpec* s_out,
                         ElectricalParams* p_out) -> double {
        VariationSpec s = spec;
        ElectricalParams p = warm;
        apply(th, s, p);
        if (!(p.c_ratio > 0.3 && p.c_ratio < 8.0))
            return 1e9;
        if (th[1] < 0 || th[2] < 0 || th[3] < 0 || th[5] < 1.0)
            return 1e9;
        if (!(p.leak_halving_per >= 5.0 && p.leak_halving_per <= 500.0))
            return 1e9;
        if (!anchor_corner(s, p, &report.evaluations))
            return 1e9;
        warm = p;
        ReductionSet a;
        try {
            a = population_mean_solo(s, p, temp, population, seed);
        } catch (const StandardTimingsUnsafe&) {
            return 1e9;
        }
        ++report.evaluations;
        if (achieved)
            *achieved = a;
        if (s_out)
            *s_out = s;
        if (p_out)
            *p_out = p;
        double e_rcd = a.rcd - targets.rcd;
        double e_ras = a.ras - targets.ras;
        double e_wr = a.wr - targets.wr;
        double e_rp = a.rp - targets.rp;
        return e_rcd * e_rcd + e_ras * e_ras + e_wr * e_wr + e_rp * e_rp;
    };

    Theta th = {params.c_ratio,           spec.sigma_resistance,
                spec.sigma_retention,     spec.sigma_capacitance,
                std::log(params.leak_halving_per), params.tau_sense};
    ReductionSet best_achieved{};
    VariationSpec best_spec = spec;
    ElectricalParams best_params = params;
    double best = objective(th, &best_achieved, &best_spec, &best_params);

    auto within_tol = [&](const ReductionSet& a) {
        return std::fabs(a.rcd - targets.rcd) <= tolerance &&
               std::fabs(a.ras - targets.ras) <= tolerance &&
               std::fabs(a.wr - targets.wr) <= tolerance &&
               std::fabs(a.rp - targets.rp) <= tolerance;
    };

    // Compass search over the outer knobs with shrinking steps.
    double step[6] = {0.3, 0.03, 0.05, 0.03, 0.25, 3.0};
    for (int round = 0; round < 60 && !(best < 1e8 && within_tol(best_achieved)); ++round) {
        bool improved = false;
        for (int k = 0; k < 6; ++k) {
            for (double dir : {+1.0, -1.0}) {
                Theta cand = th;
                cand[k] += dir * step[k];
                ReductionSet a;
                VariationSpec s;
                ElectricalParams p;
                double val = objective(cand, &a, &s, &p);
                if (val < best) {
                    best = val;
                    best_achieved = a;
                    best_spec = s;
                    best_params = p;
                    th = cand;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved)
            for (double& s : step)
                s *= 0.5;
        if (*std::max_element(step, step + 6) < 1e-4)
            break;
    }

    report.params = best_params;
    report.variation = best_spec;
    report.achieved = best_achieved;
    report.corner_achieved = corner_solo_reductions(best_spec, best_params, 85.0);
    report.feasible = best < 1e8 && within_tol(best_achieved);
    return report;
}

std::string population_csv(const PopulationReport& report) {
    std::string out =
        "dimm_id,temp_c,t_rcd,t_ras,t_wr,t_rp,red_rcd,red_ras,red_wr,red_rp,"
        "read_sum_ns,write_sum_ns\n";
    char buf[256];
    for (const auto& p : report.profiles) {
        std::snprintf(buf, sizeof(buf),
                      "%d,%.2f,%.4f,%.4f,%.4f,%.4f,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f\n",
                      p.dimm_id, p.temp, p.min_safe.t_rcd, p.min_safe.t_ras,
                      p.min_safe.t_wr, p.min_safe.t_rp, p.reductions.rcd,
                      p.reductions.ras, p.reductions.wr, p.reductions.rp, p.read_sum,
                      p.write_sum);
        out += buf;
    }
    return out;
}

nlohmann::json population_summary_json(const PopulationReport& report) {
    nlohmann::json j;
    j["temperatures"] = nlohmann::json::array();
    for (const auto& s : report.summaries) {
        j["temperatures"].push_back({
            {"temp_c", s.temp},
            {"dimm_count", s.dimm_count},
            {"mean_reduction",
             {{"rcd", s.mean_reduction.rcd},
              {"ras", s.mean_reduction.ras},
              {"wr", s.mean_reduction.wr},
              {"rp", s.mean_reduction.rp}}},
            {"stddev_reduction",
             {{"rcd", s.stddev_reduction.rcd},
              {"ras", s.stddev_reduction.ras},
              {"wr", s.stddev_reduction.wr},
              {"rp", s.stddev_reduction.rp}}},
            {"mean_read_sum_ns", s.mean_read_sum},
            {"mean_write_sum_ns", s.mean_write_sum},
        });
    }
    j["errors"] = report.errors;
    return j;
}

} // namespace aldram
