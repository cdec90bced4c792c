// aldram_lab: command-line front end for the adaptive-latency DRAM
// simulation laboratory. Subcommands cover configuration generation, DIMM
// bank sampling, calibration, profiling studies, timing-table construction,
// controller simulation, and performance estimation.
//
// Exit codes: 0 success, 1 usage/parse error, 2 calibration failure
// (standard timings unsafe or infeasible fit), 3 controller safety
// violation.

#include "CLI11.hpp"

#include "aldram/config.hpp"
#include "aldram/controller.hpp"
#include "aldram/perf_model.hpp"
#include "aldram/profiler.hpp"
#include "aldram/timing.hpp"
#include "aldram/variation.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace aldram;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCalibration = 2;
constexpr int kExitSafety = 3;

struct GlobalOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string output_dir;
};

// Config resolution order: --config flag, ALDRAM_LAB_CONFIG env var, frozen
// defaults. CLI --seed/--output-dir override the loaded values.
RunConfig resolve_config(const GlobalOpts& g) {
    RunConfig cfg;
    std::string path = g.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("ALDRAM_LAB_CONFIG"))
            path = env;
    }
    if (!path.empty())
        cfg = load_config(path);
    else
        cfg = default_config();
    if (g.seed)
        cfg.seed = *g.seed;
    if (!g.output_dir.empty())
        cfg.output_dir = g.output_dir;
    validate(cfg);
    return cfg;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    return fs::path(cfg.output_dir) / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + p.string());
    f << text;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
    write_text(p, j.dump(2) + "\n");
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty())
            continue;
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size())
            throw std::invalid_argument(std::string(what) + ": bad number '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

ReductionSet parse_reductions(const std::string& s) {
    std::vector<double> v = parse_double_list(s, "reductions");
    if (v.size() != 4)
        throw std::invalid_argument("reductions: expected 4 comma-separated fractions "
                                    "(rcd,ras,wr,rp)");
    return ReductionSet{v[0], v[1], v[2], v[3]};
}

TimingField parse_field(const std::string& s) {
    if (s == "rcd") return TimingField::rcd;
    if (s == "ras") return TimingField::ras;
    if (s == "wr") return TimingField::wr;
    if (s == "rp") return TimingField::rp;
    throw std::invalid_argument("unknown timing field '" + s + "' (rcd|ras|wr|rp)");
}

const Dimm& find_dimm(const std::vector<Dimm>& bank, int dimm_id) {
    for (const Dimm& d : bank)
        if (d.dimm_id == dimm_id)
            return d;
    throw std::invalid_argument("dimm_id " + std::to_string(dimm_id) + " not in bank");
}

nlohmann::json profile_json(const DimmTimingProfile& p) {
    return nlohmann::json{{"dimm_id", p.dimm_id},
                          {"temp", p.temp},
                          {"mode", to_string(p.mode)},
                          {"min_safe", p.min_safe},
                          {"reductions",
                           {{"rcd", p.reductions.rcd},
                            {"ras", p.reductions.ras},
                            {"wr", p.reductions.wr},
                            {"rp", p.reductions.rp}}},
                          {"read_sum_ns", p.read_sum},
                          {"write_sum_ns", p.write_sum}};
}

int cmd_init(const GlobalOpts& g, const std::string& out_name) {
    GlobalOpts local = g;
    // init intentionally ignores an existing config file: it generates the
    // full-defaults one other commands start from.
    local.config_path.clear();
    RunConfig cfg = default_config();
    if (g.seed)
        cfg.seed = *g.seed;
    if (!g.output_dir.empty())
        cfg.output_dir = g.output_dir;
    nlohmann::json j = cfg;
    fs::path p = out_path(cfg, out_name);
    write_json(p, j);
    std::cout << "wrote " << p.string() << "\n";
    return kExitOk;
}

int cmd_gen_dimms(const RunConfig& cfg, int count, const std::string& out_name) {
    std::vector<Dimm> bank = sample_bank(cfg.variation, cfg.seed, count);
    fs::path p = out_path(cfg, out_name);
    save_bank(p.string(), bank, cfg.variation);
    std::cout << "wrote " << p.string() << " (" << bank.size() << " dimms)\n";
    return kExitOk;
}

int cmd_calibrate(const RunConfig& cfg, const std::string& targets_str, double temp,
                  int population, double tolerance) {
    ReductionSet targets = parse_reductions(targets_str);
    CalibrationReport rep = calibrate(cfg.variation, cfg.electrical, targets, temp,
                                      population, cfg.seed, tolerance);
    nlohmann::json j{{"feasible", rep.feasible},
                     {"evaluations", rep.evaluations},
                     {"electrical", rep.params},
                     {"variation", rep.variation},
                     {"target",
                      {{"rcd", rep.target.rcd},
                       {"ras", rep.target.ras},
                       {"wr", rep.target.wr},
                       {"rp", rep.target.rp}}},
                     {"achieved",
                      {{"rcd", rep.achieved.rcd},
                       {"ras", rep.achieved.ras},
                       {"wr", rep.achieved.wr},
                       {"rp", rep.achieved.rp}}},
                     {"corner_achieved",
                      {{"rcd", rep.corner_achieved.rcd},
                       {"ras", rep.corner_achieved.ras},
                       {"wr", rep.corner_achieved.wr},
                       {"rp", rep.corner_achieved.rp}}}};
    fs::path p = out_path(cfg, "calibration.json");
    write_json(p, j);
    std::printf("calibration %s; achieved rcd=%.3f ras=%.3f wr=%.3f rp=%.3f\n",
                rep.feasible ? "feasible" : "infeasible", rep.achieved.rcd,
                rep.achieved.ras, rep.achieved.wr, rep.achieved.rp);
    return rep.feasible ? kExitOk : kExitCalibration;
}

int cmd_profile(const RunConfig& cfg, const std::string& bank_path,
                const std::string& temps_str, int jobs) {
    std::vector<double> temps = parse_double_list(temps_str, "temps");
    if (temps.empty()) {
        std::cerr << "profile: empty temperature list\n";
        return kExitUsage;
    }
    std::vector<Dimm> bank = load_bank(bank_path);
    PopulationReport rep =
        population_profile(bank, temps, cfg.profiling, cfg.electrical, jobs);
    if (!rep.errors.empty()) {
        for (const std::string& e : rep.errors)
            std::cerr << "unsafe: " << e << "\n";
        return kExitCalibration;
    }
    write_text(out_path(cfg, "population.csv"), population_csv(rep));
    write_json(out_path(cfg, "population_summary.json"),
               population_summary_json(rep));
    for (const TempSummary& s : rep.summaries)
        std::printf("temp %.1f C: mean reduction rcd=%.3f ras=%.3f wr=%.3f rp=%.3f "
                    "(%d dimms)\n",
                    s.temp, s.mean_reduction.rcd, s.mean_reduction.ras,
                    s.mean_reduction.wr, s.mean_reduction.rp, s.dimm_count);
    return kExitOk;
}

int cmd_refresh_sweep(const RunConfig& cfg, const std::string& bank_path, int dimm_id,
                      double temp, const std::string& intervals_str) {
    std::vector<double> intervals = parse_double_list(intervals_str, "intervals");
    if (intervals.empty()) {
        std::cerr << "refresh-sweep: empty interval list\n";
        return kExitUsage;
    }
    std::vector<Dimm> bank = load_bank(bank_path);
    const Dimm& dimm = find_dimm(bank, dimm_id);
    std::vector<DimmTimingProfile> profiles =
        refresh_sweep(dimm, temp, intervals, cfg.profiling, cfg.electrical);
    std::string csv = "interval_ms,t_rcd,t_ras,t_wr,t_rp,read_sum_ns,write_sum_ns\n";
    char buf[160];
    for (size_t i = 0; i < profiles.size(); ++i) {
        const auto& p = profiles[i];
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                      intervals[i], p.min_safe.t_rcd, p.min_safe.t_ras, p.min_safe.t_wr,
                      p.min_safe.t_rp, p.read_sum, p.write_sum);
        csv += buf;
    }
    fs::path p = out_path(cfg, "refresh_sweep.csv");
    write_text(p, csv);
    std::cout << "wrote " << p.string() << "\n";
    return kExitOk;
}

int cmd_interaction(const RunConfig& cfg, const std::string& bank_path, int dimm_id,
                    double temp, const std::string& field_str, double fraction) {
    TimingField field = parse_field(field_str);
    std::vector<Dimm> bank = load_bank(bank_path);
    const Dimm& dimm = find_dimm(bank, dimm_id);
    DimmTimingProfile p =
        interaction_study(dimm, temp, field, fraction, cfg.profiling, cfg.electrical);
    nlohmann::json j = profile_json(p);
    j["fixed_field"] = field_str;
    j["fixed_fraction"] = fraction;
    fs::path path = out_path(cfg, "interaction.json");
    write_json(path, j);
    std::printf("interaction (%s fixed at -%.0f%%): t_rcd=%.3f t_ras=%.3f t_wr=%.3f "
                "t_rp=%.3f\n",
                field_str.c_str(), fraction * 100.0, p.min_safe.t_rcd, p.min_safe.t_ras,
                p.min_safe.t_wr, p.min_safe.t_rp);
    return kExitOk;
}

int cmd_repeatability(const RunConfig& cfg, const std::string& bank_path, int dimm_id,
                      double temp, const std::string& reductions_str, int iterations,
                      double noise) {
    ReductionSet reds = parse_reductions(reductions_str);
    TimingParams timings = reduce(standard_ddr3(), reds);
    std::vector<Dimm> bank = load_bank(bank_path);
    const Dimm& dimm = find_dimm(bank, dimm_id);
    const Scenario scenarios[] = {
        Scenario::same_test, Scenario::different_data_pattern,
        Scenario::different_timing_combination, Scenario::different_temperature,
        Scenario::read_vs_write};
    nlohmann::json rows = nlohmann::json::array();
    for (Scenario sc : scenarios) {
        RepeatabilityResult r = repeatability_test(dimm, timings, temp, sc, iterations,
                                                   noise, cfg.seed, cfg.electrical);
        nlohmann::json row{{"scenario", to_string(sc)},
                           {"erroneous_cells", r.erroneous_cells},
                           {"repeatable_cells", r.repeatable_cells}};
        if (r.fraction_repeatable)
            row["fraction_repeatable"] = *r.fraction_repeatable;
        rows.push_back(row);
        std::printf("%-28s erroneous=%d repeatable=%d%s\n", to_string(sc),
                    r.erroneous_cells, r.repeatable_cells,
                    r.fraction_repeatable
                        ? (" fraction=" + std::to_string(*r.fraction_repeatable)).c_str()
                        : " (no errors)");
    }
    write_json(out_path(cfg, "repeatability.json"), rows);
    return kExitOk;
}

int cmd_build_table(const RunConfig& cfg, const std::string& bank_path,
                    const std::string& temps_str, int jobs,
                    const std::string& out_name) {
    std::vector<double> temps = parse_double_list(temps_str, "temps");
    if (temps.empty()) {
        std::cerr << "build-table: empty temperature list\n";
        return kExitUsage;
    }
    std::vector<Dimm> bank = load_bank(bank_path);
    ProfileRequest req = cfg.profiling;
    req.mode = SearchMode::joint;
    PopulationReport rep = population_profile(bank, temps, req, cfg.electrical, jobs);
    if (!rep.errors.empty()) {
        for (const std::string& e : rep.errors)
            std::cerr << "unsafe: " << e << "\n";
        return kExitCalibration;
    }
    ProfileTable table =
        build_table(rep.profiles, cfg.controller.guardband_temp,
                    cfg.controller.guardband_timing_fraction);
    nlohmann::json j = table;
    fs::path p = out_path(cfg, out_name);
    write_json(p, j);
    std::cout << "wrote " << p.string() << " (" << table.dimms.size() << " dimms, "
              << temps.size() << " bins)\n";
    return kExitOk;
}

int cmd_controller(const RunConfig& cfg, const std::string& bank_path,
                   const std::string& table_path, const std::string& profile_str,
                   double duration, double start, double end, double amplitude,
                   double period, double noise) {
    std::vector<Dimm> bank = load_bank(bank_path);
    std::ifstream tf(table_path);
    if (!tf) {
        std::cerr << "controller: cannot open table " << table_path << "\n";
        return kExitUsage;
    }
    nlohmann::json tj = nlohmann::json::parse(tf);
    ProfileTable table = tj.get<ProfileTable>();

    TraceSpec spec;
    if (profile_str == "constant")
        spec.profile = TraceProfile::constant;
    else if (profile_str == "ramp")
        spec.profile = TraceProfile::ramp;
    else if (profile_str == "diurnal")
        spec.profile = TraceProfile::diurnal;
    else {
        std::cerr << "controller: unknown trace profile '" << profile_str << "'\n";
        return kExitUsage;
    }
    spec.duration_s = duration;
    spec.sample_interval_s = cfg.controller.sample_interval_s;
    spec.temp_start = start;
    spec.temp_end = end;
    spec.amplitude = amplitude;
    spec.period_s = period;
    spec.noise_sigma = noise;
    TempTrace trace = gen_temp_trace(spec, cfg.seed);

    ControllerReport rep = simulate_controller(table, trace, bank, cfg.electrical);
    write_text(out_path(cfg, "timeline.csv"), timeline_csv(rep));
    write_json(out_path(cfg, "controller_report.json"), controller_report_json(rep));
    if (rep.violation) {
        const SafetyViolation& v = *rep.violation;
        std::fprintf(stderr,
                     "SAFETY VIOLATION t=%.1fs dimm=%d chip=%d cell=%d stage=%s\n",
                     v.time_s, v.dimm_id, v.chip_id, v.cell_id, to_string(v.stage));
        return kExitSafety;
    }
    std::printf("controller ok: %zu samples, %d transitions, avg read %.3f ns, "
                "avg write %.3f ns\n",
                rep.timeline.size(), rep.transitions, rep.avg_read_sum_ns,
                rep.avg_write_sum_ns);
    return kExitOk;
}

int cmd_perf(const RunConfig& cfg, const std::string& workloads_path,
             const std::string& reductions_str) {
    ReductionSet reds = parse_reductions(reductions_str);
    std::vector<WorkloadStats> workloads = load_workloads_csv(workloads_path);
    TimingParams base = standard_ddr3();
    TimingParams reduced = reduce(base, reds);
    CohortReport rep = cohort_report(workloads, base, reduced, cfg.perf);
    write_text(out_path(cfg, "perf.csv"), cohort_csv(rep));
    write_json(out_path(cfg, "perf.json"), cohort_json(rep));
    std::printf("speedup geomean: intensive %.2f%% (%d), non-intensive %.2f%% (%d), "
                "overall %.2f%%\n",
                rep.intensive.geomean_speedup_pct, rep.intensive.count,
                rep.non_intensive.geomean_speedup_pct, rep.non_intensive.count,
                rep.overall.geomean_speedup_pct);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive-latency DRAM simulation laboratory"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path,
                   "JSON config path (default: $ALDRAM_LAB_CONFIG or built-ins)");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "override config seed");
    app.add_option("--jobs", g.jobs, "worker threads for profiling")
        ->check(CLI::PositiveNumber);
    app.add_option("--output-dir", g.output_dir, "override config output_dir");

    // init
    auto* init = app.add_subcommand("init", "write a full-defaults config file");
    std::string init_out = "config.json";
    init->add_option("--out", init_out, "output file name");

    // gen-dimms
    auto* gen = app.add_subcommand("gen-dimms", "sample a DIMM bank");
    int gen_count = 115;
    std::string gen_out = "bank.json";
    gen->add_option("--count", gen_count, "number of DIMMs")->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "output file name");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "fit electrical params to targets");
    std::string cal_targets = "0.27,0.32,0.33,0.18";
    double cal_temp = 55.0, cal_tol = 0.02;
    int cal_pop = 24;
    cal->add_option("--targets", cal_targets, "rcd,ras,wr,rp mean reduction targets");
    cal->add_option("--temp", cal_temp, "calibration temperature (degC)");
    cal->add_option("--population", cal_pop, "DIMMs in the calibration population");
    cal->add_option("--tolerance", cal_tol, "per-field tolerance");

    // profile
    auto* prof = app.add_subcommand("profile", "minimum safe timings per DIMM");
    std::string prof_bank, prof_temps;
    prof->add_option("--bank", prof_bank, "DIMM bank file")->required();
    prof->add_option("--temps", prof_temps, "comma-separated temperatures")->required();

    // refresh-sweep
    auto* sweep = app.add_subcommand("refresh-sweep", "profile vs refresh interval");
    std::string sw_bank, sw_intervals = "64,32,16,8";
    int sw_dimm = 0;
    double sw_temp = 55.0;
    sweep->add_option("--bank", sw_bank, "DIMM bank file")->required();
    sweep->add_option("--dimm", sw_dimm, "dimm_id");
    sweep->add_option("--temp", sw_temp, "temperature (degC)");
    sweep->add_option("--intervals", sw_intervals, "refresh intervals (ms, descending)");

    // interaction
    auto* inter = app.add_subcommand("interaction", "joint profile with one field fixed");
    std::string in_bank, in_field = "wr";
    int in_dimm = 0;
    double in_temp = 55.0, in_fraction = 0.2;
    inter->add_option("--bank", in_bank, "DIMM bank file")->required();
    inter->add_option("--dimm", in_dimm, "dimm_id");
    inter->add_option("--temp", in_temp, "temperature (degC)");
    inter->add_option("--fix", in_field, "field to fix (rcd|ras|wr|rp)");
    inter->add_option("--fraction", in_fraction, "fixed reduction fraction");

    // repeatability
    auto* rep = app.add_subcommand("repeatability", "error repeatability per scenario");
    std::string rp_bank, rp_reds = "0.3,0.35,0.4,0.2";
    int rp_dimm = 0, rp_iters = 10;
    double rp_temp = 55.0, rp_noise = 0.08;
    rep->add_option("--bank", rp_bank, "DIMM bank file")->required();
    rep->add_option("--dimm", rp_dimm, "dimm_id");
    rep->add_option("--temp", rp_temp, "temperature (degC)");
    rep->add_option("--reductions", rp_reds, "rcd,ras,wr,rp fractions under test");
    rep->add_option("--iterations", rp_iters, "trials per scenario");
    rep->add_option("--noise", rp_noise, "per-trial noise sigma");

    // build-table
    auto* bt = app.add_subcommand("build-table", "binned timing table from profiles");
    std::string bt_bank, bt_temps = "55,70,85", bt_out = "table.json";
    bt->add_option("--bank", bt_bank, "DIMM bank file")->required();
    bt->add_option("--temps", bt_temps, "bin temperatures (must include 85)");
    bt->add_option("--out", bt_out, "output file name");

    // controller
    auto* ctl = app.add_subcommand("controller", "simulate the adaptive controller");
    std::string ct_bank, ct_table, ct_profile = "constant";
    double ct_duration = 3600.0, ct_start = 34.0, ct_end = 34.0;
    double ct_amplitude = 5.0, ct_period = 86400.0, ct_noise = 0.0;
    ctl->add_option("--bank", ct_bank, "DIMM bank file")->required();
    ctl->add_option("--table", ct_table, "timing table file")->required();
    ctl->add_option("--trace", ct_profile, "constant|ramp|diurnal");
    ctl->add_option("--duration", ct_duration, "trace length (s)");
    ctl->add_option("--start", ct_start, "start / constant / mean temperature");
    ctl->add_option("--end", ct_end, "ramp end temperature");
    ctl->add_option("--amplitude", ct_amplitude, "diurnal swing (degC)");
    ctl->add_option("--period", ct_period, "diurnal period (s)");
    ctl->add_option("--noise", ct_noise, "trace noise sigma");

    // perf
    auto* perf = app.add_subcommand("perf", "workload speedup estimates");
    std::string pf_workloads, pf_reds = "0.27,0.32,0.33,0.18";
    perf->add_option("--workloads", pf_workloads, "workload stats CSV")->required();
    perf->add_option("--reductions", pf_reds, "rcd,ras,wr,rp fractions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (*seed_flag)
        g.seed = seed_opt;

    try {
        if (*init)
            return cmd_init(g, init_out);
        RunConfig cfg = resolve_config(g);
        if (*gen)
            return cmd_gen_dimms(cfg, gen_count, gen_out);
        if (*cal)
            return cmd_calibrate(cfg, cal_targets, cal_temp, cal_pop, cal_tol);
        if (*prof)
            return cmd_profile(cfg, prof_bank, prof_temps, g.jobs);
        if (*sweep)
            return cmd_refresh_sweep(cfg, sw_bank, sw_dimm, sw_temp, sw_intervals);
        if (*inter)
            return cmd_interaction(cfg, in_bank, in_dimm, in_temp, in_field, in_fraction);
        if (*rep)
            return cmd_repeatability(cfg, rp_bank, rp_dimm, rp_temp, rp_reds, rp_iters,
                                     rp_noise);
        if (*bt)
            return cmd_build_table(cfg, bt_bank, bt_temps, g.jobs, bt_out);
        if (*ctl)
            return cmd_controller(cfg, ct_bank, ct_table, ct_profile, ct_duration,
                                  ct_start, ct_end, ct_amplitude, ct_period, ct_noise);
        if (*perf)
            return cmd_perf(cfg, pf_workloads, pf_reds);
    } catch (const StandardTimingsUnsafe& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
