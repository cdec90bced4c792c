#include "doctest.h"

#include <cmath>
#include <random>

#include "aldram/charge_model.hpp"
#include "aldram/timing.hpp"
#include "ode_oracle.hpp"

using namespace aldram;

namespace {

// Spec-flavored reference constants: small c_ratio-free checks use these
// rather than the frozen calibrated defaults so the expected values stay
// human-checkable.
ElectricalParams reference_params() {
    ElectricalParams p;
    p.c_ratio = 5.0;
    p.tau_sense = 3.0;
    p.tau_restore_nominal = 9.0;
    p.tau_active = 9.0;
    p.tau_precharge = 4.0;
    p.tau_leak_ref = 100.0;
    p.t_ref = 85.0;
    p.leak_halving_per = 10.0;
    p.d_sense = 0.02;
    p.v_read = 0.75;
    p.t_overhead_act = 2.0;
    p.t_overhead_pre = 1.0;
    return p;
}

} // namespace

TEST_CASE("charge_share matches the capacitance-divider formula") {
    const ElectricalParams p = reference_params();
    CHECK(charge_share({0.5, 0.0}, p) == doctest::Approx(0.0));
    CHECK(charge_share({1.0, 0.0}, p) == doctest::Approx(0.5 / 6.0).epsilon(1e-9));
    CHECK(charge_share({1.0, 0.1}, p) == doctest::Approx(0.4 / 6.0).epsilon(1e-9));
}

TEST_CASE("charge_share of a stored zero mirrors the stored one") {
    const ElectricalParams p = reference_params();
    for (double q : {0.55, 0.7, 0.93}) {
        for (double delta : {-0.1, 0.0, 0.08}) {
            const double d1 = charge_share({q, delta}, p);
            const double d0 = charge_share({1.0 - q, -delta}, p);
            // '0' modeled as q -> 1-q with negated bitline offset.
            CHECK(d0 == doctest::Approx(-d1).epsilon(1e-12));
        }
    }
}

TEST_CASE("sense_level endpoints, monotonicity, and rejection of negative d") {
    const ElectricalParams p = reference_params();
    CHECK(sense_level(0.2, 0.0, p) == doctest::Approx(0.2));
    CHECK(sense_level(0.75, 0.0, p) == doctest::Approx(0.75));
    const double t75 = 3.0 * std::log((1.0 - 0.5 / 6.0) / 0.25);
    CHECK(sense_level(0.5 / 6.0, t75, p) == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(sense_level(0.2, 5.0, p) > sense_level(0.2, 4.0, p));
    CHECK(sense_level(0.3, 4.0, p) > sense_level(0.2, 4.0, p));
    CHECK_THROWS_AS(sense_level(-0.01, 1.0, p), std::invalid_argument);
}

TEST_CASE("time_to_read examples and round trip with sense_level") {
    const ElectricalParams p = reference_params();
    CHECK(time_to_read(p.v_read, p) == doctest::Approx(0.0));
    CHECK(time_to_read(0.5 / 6.0, p) ==
          doctest::Approx(3.0 * std::log((1.0 - 0.5 / 6.0) / 0.25)).epsilon(1e-9));
    CHECK(time_to_read(0.3, p) == doctest::Approx(3.0 * std::log(0.7 / 0.25)).epsilon(1e-9));
    CHECK(time_to_read(0.3, p) < time_to_read(0.5 / 6.0, p));
    for (double d : {0.05, 0.2, 0.5, 0.74}) {
        const double t = time_to_read(d, p);
        CHECK(sense_level(d, t, p) == doctest::Approx(p.v_read).epsilon(1e-9));
    }
}

TEST_CASE("restore saturation examples") {
    CHECK(restore(1.0, 7.0, 9.0) == doctest::Approx(1.0));
    CHECK(restore(0.0, 9.0, 9.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
    CHECK(restore(0.0, 27.0, 9.0) == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-9));
    CHECK(restore(0.3, 5.0, 9.0) > 0.3);
    CHECK(restore(0.3, 5.0, 9.0) < 1.0);
}

TEST_CASE("precharge_residual examples") {
    const ElectricalParams p = reference_params();
    CHECK(precharge_residual(0.0, p) == doctest::Approx(0.5));
    CHECK(precharge_residual(4.0, p) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-9));
    CHECK(precharge_residual(20.0, p) == doctest::Approx(0.5 * std::exp(-5.0)).epsilon(1e-9));
    CHECK(precharge_residual(6.0, p) < precharge_residual(5.0, p));
}

TEST_CASE("leak identity, e-folding, and halving step") {
    const ElectricalParams p = reference_params();
    CHECK(leak(0.8, 0.0, 55.0, 1.0, p) == doctest::Approx(0.8));
    const double tau85 = leak_tau(85.0, 1.0, p);
    CHECK(tau85 == doctest::Approx(p.tau_leak_ref));
    CHECK(leak(1.0, tau85, 85.0, 1.0, p) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(leak_tau(95.0, 1.0, p) == doctest::Approx(tau85 / 2.0).epsilon(1e-12));
    CHECK(leak_tau(55.0, 1.0, p) > leak_tau(56.0, 1.0, p));
}

TEST_CASE("closed forms agree with RK4 ODE oracles") {
    const ElectricalParams p = reference_params();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double tau = 0.5 + 10.0 * u(rng);
        const double t = 20.0 * u(rng);
        const double d = 0.9 * u(rng);
        ElectricalParams q = p;
        q.tau_sense = tau;
        q.tau_precharge = tau;
        const double s_cf = sense_level(d, t, q);
        CHECK(std::abs(s_cf - oracle::sense_ode(d, t, tau)) <= 1e-6 * std::abs(s_cf) + 1e-12);
        const double r_cf = restore(d, t, tau);
        CHECK(std::abs(r_cf - oracle::restore_ode(d, t, tau)) <= 1e-6 * std::abs(r_cf) + 1e-12);
        const double pr_cf = precharge_residual(t, q);
        CHECK(std::abs(pr_cf - oracle::precharge_ode(t, tau)) <= 1e-6 * std::abs(pr_cf) + 1e-12);
        ElectricalParams lk = p;
        lk.tau_leak_ref = tau;
        const double l_cf = leak(d, t, 85.0, 1.0, lk);
        CHECK(std::abs(l_cf - oracle::leak_ode(d, t, tau)) <= 1e-6 * std::abs(l_cf) + 1e-12);
    }
}

TEST_CASE("access_outcome: nominal cell passes standard timings at 55 C") {
    const ElectricalParams p; // frozen calibrated defaults
    const CellSample nominal;
    const TimingParams std_t = standard_ddr3();
    const Outcome out =
        access_outcome(nominal, std_t, 55.0, std_t.t_refw, kSolidPattern, p);
    CHECK(out.correct);
    CHECK(out.stage == FailStage::none);
}

TEST_CASE("access_outcome: near-zero tRCD fails at readout") {
    const ElectricalParams p;
    const CellSample nominal;
    TimingParams t = standard_ddr3();
    t.t_rcd = 0.01;
    const Outcome out = access_outcome(nominal, t, 55.0, t.t_refw, kSolidPattern, p);
    CHECK_FALSE(out.correct);
    CHECK(out.stage == FailStage::readout);
}

TEST_CASE("access_outcome: invalid timing ordering is a configuration error") {
    const ElectricalParams p;
    const CellSample nominal;
    TimingParams t = standard_ddr3();
    t.t_ras = t.t_rcd - 1.0;
    CHECK_THROWS_AS(
        access_outcome(nominal, t, 55.0, t.t_refw, kSolidPattern, p), TimingError);
}

TEST_CASE("access_outcome monotonicity in charge, temperature, and timings") {
    const ElectricalParams p;
    const VariationSpec spec;
    const Dimm dimm = sample_dimm(spec, 99, 0);
    const TimingParams std_t = standard_ddr3();
    for (double f : {0.0, 0.1, 0.2, 0.3}) {
        const TimingParams t = reduce(std_t, {f, f, f, 0.1});
        for (const CellSample& c :
             {dimm.cells[0], dimm.cells[500], worst_case_corner(spec)}) {
            const bool hot = access_outcome(c, t, 85.0, t.t_refw, kSolidPattern, p).correct;
            const bool cold = access_outcome(c, t, 55.0, t.t_refw, kSolidPattern, p).correct;
            // Hotter never rescues a failing cell.
            if (hot)
                CHECK(cold);
            // A strictly slower timing set never fails where the faster passed.
            const bool relaxed =
                access_outcome(c, std_t, 85.0, std_t.t_refw, kSolidPattern, p).correct;
            if (hot)
                CHECK(relaxed);
        }
    }
}

TEST_CASE("worst pattern stress is at least as strict as solid") {
    const ElectricalParams p;
    const VariationSpec spec;
    const Dimm dimm = sample_dimm(spec, 7, 0);
    const TimingParams t = reduce(standard_ddr3(), {0.2, 0.25, 0.25, 0.1});
    for (std::size_t i = 0; i < dimm.cells.size(); i += 97) {
        const bool worst =
            access_outcome(dimm.cells[i], t, 55.0, t.t_refw, kWorstPattern, p).correct;
        const bool solid =
            access_outcome(dimm.cells[i], t, 55.0, t.t_refw, kSolidPattern, p).correct;
        if (worst)
            CHECK(solid);
    }
}

TEST_CASE("ElectricalParams validation and JSON round trip") {
    ElectricalParams p;
    CHECK_NOTHROW(validate(p));
    ElectricalParams bad = p;
    bad.d_sense = 0.9; // must stay below v_read
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = p;
    bad.tau_sense = 0.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);

    nlohmann::json j;
    to_json(j, p);
    ElectricalParams back;
    from_json(j, back);
    CHECK(back.tau_sense == doctest::Approx(p.tau_sense).epsilon(1e-15));
    CHECK(back.leak_halving_per == doctest::Approx(p.leak_halving_per).epsilon(1e-15));
    CHECK(back.tau_active == doctest::Approx(p.tau_active).epsilon(1e-15));
}
