#include "aldram/timing.hpp"

#include <cmath>

namespace aldram {

TimingParams standard_ddr3() {
    TimingParams t;
    t.t_rcd = 13.75;
    t.t_ras = 35.0;
    t.t_wr = 15.0;
    t.t_rp = 13.75;
    t.t_refw = 64.0;
    t.t_cl = 13.75;
    return t;
}

void validate(const TimingParams& t) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw TimingError(std::string("timing field must be positive: ") + name);
    };
    positive(t.t_rcd, "t_rcd");
    positive(t.t_ras, "t_ras");
    positive(t.t_wr, "t_wr");
    positive(t.t_rp, "t_rp");
    positive(t.t_refw, "t_refw");
    positive(t.t_cl, "t_cl");
    // Small tolerance so a t_ras searched down to exactly t_rcd survives
    // floating-point wobble in the two paths that computed them.
    if (t.t_ras < t.t_rcd - 1e-9)
        throw TimingError("t_ras (" + std::to_string(t.t_ras) + ") < t_rcd (" +
                          std::to_string(t.t_rcd) + ")");
}

TimingParams reduce(const TimingParams& base, const ReductionSet& pct) {
    validate(base);
    auto frac_ok = [](double f, const char* name) {
        if (!(f >= 0.0 && f < 1.0))
            throw TimingError(std::string("reduction fraction out of [0,1): ") + name);
    };
    frac_ok(pct.rcd, "rcd");
    frac_ok(pct.ras, "ras");
    frac_ok(pct.wr, "wr");
    frac_ok(pct.rp, "rp");

    TimingParams out = base;
    out.t_rcd = base.t_rcd * (1.0 - pct.rcd);
    out.t_ras = base.t_ras * (1.0 - pct.ras);
    out.t_wr = base.t_wr * (1.0 - pct.wr);
    out.t_rp = base.t_rp * (1.0 - pct.rp);
    validate(out);
    return out;
}

std::pair<double, double> latency_sums(const TimingParams& t) {
    validate(t);
    return {t.t_rcd + t.t_ras + t.t_rp, t.t_rcd + t.t_wr + t.t_rp};
}

ReductionSet reductions_vs(const TimingParams& t, const TimingParams& base) {
    ReductionSet r;
    r.rcd = 1.0 - t.t_rcd / base.t_rcd;
    r.ras = 1.0 - t.t_ras / base.t_ras;
    r.wr = 1.0 - t.t_wr / base.t_wr;
    r.rp = 1.0 - t.t_rp / base.t_rp;
    return r;
}

void to_json(nlohmann::json& j, const TimingParams& t) {
    j = nlohmann::json{{"t_rcd", t.t_rcd}, {"t_ras", t.t_ras}, {"t_wr", t.t_wr},
                       {"t_rp", t.t_rp},   {"t_refw", t.t_refw}, {"t_cl", t.t_cl}};
}

void from_json(const nlohmann::json& j, TimingParams& t) {
    j.at("t_rcd").get_to(t.t_rcd);
    j.at("t_ras").get_to(t.t_ras);
    j.at("t_wr").get_to(t.t_wr);
    j.at("t_rp").get_to(t.t_rp);
    t.t_refw = j.value("t_refw", 64.0);
    t.t_cl = j.value("t_cl", 13.75);
}

} // namespace aldram
