#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "aldram/profiler.hpp"

using namespace aldram;

namespace {

VariationSpec tiny_spec() {
    VariationSpec spec;
    spec.cells_per_chip_sampled = 2; // 16 cells total
    return spec;
}

bool dimm_passes(const Dimm& dimm, const TimingParams& t, double temp,
                 const ProfileRequest& req, const ElectricalParams& params) {
    for (const CellSample& c : dimm.cells)
        if (!access_outcome(c, t, temp, req.t_refw, req.pattern, params).correct)
            return false;
    return true;
}

// Exhaustive per-field grid scan: walk one field down from standard in
// resolution steps (others at standard) and return the last safe value.
double grid_scan_field(const Dimm& dimm, TimingField field, double temp,
                       const ProfileRequest& req, const ElectricalParams& params) {
    const TimingParams base = standard_ddr3();
    double last_safe = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0;; ++k) {
        TimingParams t = base;
        double* slot = nullptr;
        switch (field) {
        case TimingField::rcd: slot = &t.t_rcd; break;
        case TimingField::ras: slot = &t.t_ras; break;
        case TimingField::wr: slot = &t.t_wr; break;
        case TimingField::rp: slot = &t.t_rp; break;
        }
        *slot -= k * req.resolution;
        bool ok = false;
        try {
            validate(t);
            ok = dimm_passes(dimm, t, temp, req, params);
        } catch (const TimingError&) {
            ok = false;
        }
        if (!ok)
            return last_safe;
        last_safe = *slot;
    }
}

} // namespace

TEST_CASE("binary search equals exhaustive grid scan on small dimms") {
    const ElectricalParams params;
    const VariationSpec spec = tiny_spec();
    ProfileRequest req;
    req.temp = 55.0;
    req.resolution = 0.5;
    for (std::uint64_t seed : {1ULL, 17ULL, 300ULL, 4242ULL}) {
        const Dimm dimm = sample_dimm(spec, seed, static_cast<int>(seed));
        const DimmTimingProfile prof = min_safe_timings(dimm, req, params);
        CHECK(prof.min_safe.t_rcd ==
              doctest::Approx(grid_scan_field(dimm, TimingField::rcd, 55.0, req, params))
                  .epsilon(1e-12));
        CHECK(prof.min_safe.t_ras ==
              doctest::Approx(grid_scan_field(dimm, TimingField::ras, 55.0, req, params))
                  .epsilon(1e-12));
        CHECK(prof.min_safe.t_wr ==
              doctest::Approx(grid_scan_field(dimm, TimingField::wr, 55.0, req, params))
                  .epsilon(1e-12));
        CHECK(prof.min_safe.t_rp ==
              doctest::Approx(grid_scan_field(dimm, TimingField::rp, 55.0, req, params))
                  .epsilon(1e-12));
    }
}

TEST_CASE("per-parameter minimality: one step below any solo minimum fails") {
    const ElectricalParams params;
    const VariationSpec spec;
    ProfileRequest req;
    req.temp = 55.0;
    for (std::uint64_t seed : {3ULL, 8ULL}) {
        const Dimm dimm = sample_dimm(spec, seed, 0);
        const DimmTimingProfile prof = min_safe_timings(dimm, req, params);
        const TimingParams base = standard_ddr3();
        struct Slot { double TimingParams::*field; double min; };
        const Slot slots[] = {{&TimingParams::t_rcd, prof.min_safe.t_rcd},
                              {&TimingParams::t_ras, prof.min_safe.t_ras},
                              {&TimingParams::t_wr, prof.min_safe.t_wr},
                              {&TimingParams::t_rp, prof.min_safe.t_rp}};
        for (const Slot& s : slots) {
            TimingParams at_min = base;
            at_min.*(s.field) = s.min;
            CHECK(dimm_passes(dimm, at_min, 55.0, req, params));
            TimingParams below = base;
            below.*(s.field) = s.min - req.resolution;
            bool ok = true;
            try {
                validate(below);
                ok = dimm_passes(dimm, below, 55.0, req, params);
            } catch (const TimingError&) {
                ok = false;
            }
            CHECK_FALSE(ok);
        }
    }
}

TEST_CASE("joint mode yields a simultaneously safe, minimal set") {
    const ElectricalParams params;
    const VariationSpec spec;
    ProfileRequest req;
    req.temp = 55.0;
    req.mode = SearchMode::joint;
    const Dimm dimm = sample_dimm(spec, 21, 0);
    const DimmTimingProfile prof = min_safe_timings(dimm, req, params);
    CHECK(dimm_passes(dimm, prof.min_safe, 55.0, req, params));

    // Joint reductions never beat the solo reductions field-by-field.
    ProfileRequest solo_req = req;
    solo_req.mode = SearchMode::per_parameter;
    const DimmTimingProfile solo = min_safe_timings(dimm, solo_req, params);
    CHECK(prof.reductions.rcd <= solo.reductions.rcd + 1e-12);
    CHECK(prof.reductions.ras <= solo.reductions.ras + 1e-12);
    CHECK(prof.reductions.wr <= solo.reductions.wr + 1e-12);
    CHECK(prof.reductions.rp <= solo.reductions.rp + 1e-12);
}

TEST_CASE("profiles are hotter-is-slower: min_safe(85) >= min_safe(55)") {
    const ElectricalParams params;
    const VariationSpec spec;
    ProfileRequest req;
    for (std::uint64_t seed : {2ULL, 40ULL, 41ULL}) {
        const Dimm dimm = sample_dimm(spec, seed, 0);
        req.temp = 55.0;
        const DimmTimingProfile cold = min_safe_timings(dimm, req, params);
        req.temp = 85.0;
        const DimmTimingProfile hot = min_safe_timings(dimm, req, params);
        CHECK(hot.min_safe.t_rcd >= cold.min_safe.t_rcd - 1e-12);
        CHECK(hot.min_safe.t_ras >= cold.min_safe.t_ras - 1e-12);
        CHECK(hot.min_safe.t_wr >= cold.min_safe.t_wr - 1e-12);
        CHECK(hot.min_safe.t_rp >= cold.min_safe.t_rp - 1e-12);
    }
}

TEST_CASE("standard-unsafe dimms raise a calibration error") {
    const ElectricalParams params;
    Dimm dimm = sample_dimm(VariationSpec{}, 1, 0);
    CellSample hopeless;
    hopeless.retention_mult = 1e-6;
    hopeless.independent_retention_factor = 1e-6;
    dimm.cells.push_back(hopeless);
    ProfileRequest req;
    CHECK_THROWS_AS(min_safe_timings(dimm, req, params), StandardTimingsUnsafe);
}

TEST_CASE("refresh_sweep is elementwise monotone in the interval") {
    const ElectricalParams params;
    const Dimm dimm = sample_dimm(VariationSpec{}, 12, 0);
    ProfileRequest req;
    const auto profiles = refresh_sweep(dimm, 55.0, {64.0, 32.0, 16.0}, req, params);
    REQUIRE(profiles.size() == 3);
    for (std::size_t i = 1; i < profiles.size(); ++i) {
        CHECK(profiles[i].min_safe.t_rcd <= profiles[i - 1].min_safe.t_rcd + 1e-12);
        CHECK(profiles[i].min_safe.t_ras <= profiles[i - 1].min_safe.t_ras + 1e-12);
        CHECK(profiles[i].min_safe.t_wr <= profiles[i - 1].min_safe.t_wr + 1e-12);
        CHECK(profiles[i].min_safe.t_rp <= profiles[i - 1].min_safe.t_rp + 1e-12);
    }

    // A single interval reproduces the plain profile at that window.
    ProfileRequest one = req;
    one.temp = 55.0;
    one.t_refw = 64.0;
    const auto single = refresh_sweep(dimm, 55.0, {64.0}, req, params);
    const DimmTimingProfile direct = min_safe_timings(dimm, one, params);
    CHECK(single.at(0).min_safe == direct.min_safe);
}

TEST_CASE("interaction_study: fixing nothing reproduces the solo profile") {
    const ElectricalParams params;
    const Dimm dimm = sample_dimm(VariationSpec{}, 33, 0);
    ProfileRequest req;
    req.temp = 55.0;
    const DimmTimingProfile solo = min_safe_timings(dimm, req, params);
    const DimmTimingProfile fixed0 =
        interaction_study(dimm, 55.0, TimingField::rcd, 0.0, req, params);
    CHECK(fixed0.min_safe.t_ras == doctest::Approx(solo.min_safe.t_ras).epsilon(1e-12));
    CHECK(fixed0.min_safe.t_wr == doctest::Approx(solo.min_safe.t_wr).epsilon(1e-12));
    CHECK(fixed0.min_safe.t_rp == doctest::Approx(solo.min_safe.t_rp).epsilon(1e-12));
}

TEST_CASE("interaction_study: a held reduction shrinks what remains") {
    const ElectricalParams params;
    const Dimm dimm = sample_dimm(VariationSpec{}, 33, 0);
    ProfileRequest req;
    req.temp = 55.0;
    const DimmTimingProfile solo = min_safe_timings(dimm, req, params);
    REQUIRE(solo.reductions.rcd > 0.05);
    const DimmTimingProfile held =
        interaction_study(dimm, 55.0, TimingField::rcd, solo.reductions.rcd, req, params);
    CHECK(held.reductions.ras < solo.reductions.ras);
    CHECK(held.reductions.ras <= solo.reductions.ras + 1e-12);
    CHECK(held.reductions.wr <= solo.reductions.wr + 1e-12);
    CHECK(held.reductions.rp <= solo.reductions.rp + 1e-12);
}

TEST_CASE("repeatability: zero noise repeats exactly, regardless of iterations") {
    const ElectricalParams params;
    const Dimm dimm = sample_dimm(VariationSpec{}, 51, 0);
    const TimingParams t = reduce(standard_ddr3(), {0.2, 0.25, 0.25, 0.1});
    const auto r2 = repeatability_test(dimm, t, 55.0, Scenario::same_test, 2, 0.0, 9, params);
    const auto r10 =
        repeatability_test(dimm, t, 55.0, Scenario::same_test, 10, 0.0, 9, params);
    REQUIRE(r2.fraction_repeatable.has_value());
    REQUIRE(r10.fraction_repeatable.has_value());
    CHECK(*r2.fraction_repeatable == 1.0);
    CHECK(*r10.fraction_repeatable == 1.0);
    CHECK(r2.erroneous_cells == r10.erroneous_cells);
}

TEST_CASE("repeatability: no erroneous cells is a distinct outcome") {
    const ElectricalParams params;
    const Dimm dimm = sample_dimm(VariationSpec{}, 51, 0);
    const auto r = repeatability_test(dimm, standard_ddr3(), 55.0, Scenario::same_test,
                                      3, 0.0, 9, params);
    CHECK(r.erroneous_cells == 0);
    CHECK_FALSE(r.fraction_repeatable.has_value());
}

TEST_CASE("calibrate: frozen defaults are already a feasible fixed point") {
    const VariationSpec spec;
    const ElectricalParams params;
    const ReductionSet targets{0.27, 0.32, 0.33, 0.18};
    const CalibrationReport rep = calibrate(spec, params, targets, 55.0);
    CHECK(rep.feasible);
    CHECK(std::abs(rep.achieved.rcd - targets.rcd) <= 0.02);
    CHECK(std::abs(rep.achieved.ras - targets.ras) <= 0.02);
    CHECK(std::abs(rep.achieved.wr - targets.wr) <= 0.02);
    CHECK(std::abs(rep.achieved.rp - targets.rp) <= 0.02);
    // The fit is a fixed point: calibrating from the frozen values does not
    // wander away from them.
    CHECK(rep.params.tau_sense == doctest::Approx(params.tau_sense).epsilon(0.05));
    CHECK(rep.params.tau_leak_ref == doctest::Approx(params.tau_leak_ref).epsilon(0.05));
}

TEST_CASE("calibrate: targets beyond the physical overheads are infeasible") {
    const VariationSpec spec;
    const ElectricalParams params;
    const CalibrationReport rep =
        calibrate(spec, params, {0.99, 0.99, 0.99, 0.99}, 55.0);
    CHECK_FALSE(rep.feasible);
}

TEST_CASE("population_profile aggregates, averages, and isolates failures") {
    const ElectricalParams params;
    const VariationSpec spec;
    auto bank = sample_bank(spec, 6, 4);
    ProfileRequest req;

    SUBCASE("single dimm, single temp equals the direct profile") {
        const PopulationReport rep =
            population_profile({bank[0]}, {55.0}, req, params, 1);
        REQUIRE(rep.profiles.size() == 1);
        ProfileRequest direct = req;
        direct.temp = 55.0;
        const DimmTimingProfile solo = min_safe_timings(bank[0], direct, params);
        CHECK(rep.profiles[0].min_safe == solo.min_safe);
        REQUIRE(rep.summaries.size() == 1);
        CHECK(rep.summaries[0].mean_reduction.rcd ==
              doctest::Approx(solo.reductions.rcd).epsilon(1e-12));
    }

    SUBCASE("summaries are the arithmetic means of the per-dimm values") {
        const PopulationReport rep = population_profile(bank, {55.0}, req, params, 2);
        REQUIRE(rep.profiles.size() == 4);
        double mean_rcd = 0.0, mean_read = 0.0;
        for (const auto& p : rep.profiles) {
            mean_rcd += p.reductions.rcd;
            mean_read += p.read_sum;
        }
        CHECK(rep.summaries[0].mean_reduction.rcd ==
              doctest::Approx(mean_rcd / 4.0).epsilon(1e-12));
        CHECK(rep.summaries[0].mean_read_sum ==
              doctest::Approx(mean_read / 4.0).epsilon(1e-12));
    }

    SUBCASE("a hopeless dimm is reported without aborting the rest") {
        CellSample hopeless;
        hopeless.retention_mult = 1e-6;
        hopeless.independent_retention_factor = 1e-6;
        bank[2].cells.push_back(hopeless);
        const PopulationReport rep = population_profile(bank, {55.0}, req, params, 2);
        CHECK(rep.errors.size() == 1);
        CHECK(rep.profiles.size() == 3);
    }
}

TEST_CASE("population reports are identical across worker counts") {
    const ElectricalParams params;
    const auto bank = sample_bank(VariationSpec{}, 6, 6);
    ProfileRequest req;
    const PopulationReport serial = population_profile(bank, {55.0, 85.0}, req, params, 1);
    const PopulationReport wide = population_profile(bank, {55.0, 85.0}, req, params, 8);
    CHECK(population_csv(serial) == population_csv(wide));
    CHECK(population_summary_json(serial).dump() == population_summary_json(wide).dump());
}

TEST_CASE("population CSV carries the documented header") {
    const ElectricalParams params;
    const auto bank = sample_bank(VariationSpec{}, 6, 1);
    const PopulationReport rep =
        population_profile(bank, {55.0}, ProfileRequest{}, params, 1);
    const std::string csv = population_csv(rep);
    CHECK(csv.rfind("dimm_id,temp_c,t_rcd,t_ras,t_wr,t_rp,red_rcd,red_ras,red_wr,red_rp,"
                    "read_sum_ns,write_sum_ns",
                    0) == 0);
}
