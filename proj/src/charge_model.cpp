#include "aldram/charge_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aldram {

void validate(const ElectricalParams& p) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("ElectricalParams: ") + name +
                                        " must be positive");
    };
    positive(p.c_ratio, "c_ratio");
    positive(p.tau_sense, "tau_sense");
    positive(p.tau_restore_nominal, "tau_restore_nominal");
    positive(p.tau_active, "tau_active");
    positive(p.tau_precharge, "tau_precharge");
    positive(p.tau_leak_ref, "tau_leak_ref");
    positive(p.leak_halving_per, "leak_halving_per");
    positive(p.t_overhead_act, "t_overhead_act");
    positive(p.t_overhead_pre, "t_overhead_pre");
    if (!(p.d_sense > 0.0 && p.d_sense < 0.5))
        throw std::invalid_argument("ElectricalParams: d_sense must be in (0, 0.5)");
    if (!(p.v_read > p.d_sense && p.v_read < 1.0))
        throw std::invalid_argument("ElectricalParams: v_read must be in (d_sense, 1)");
}

double charge_share(const ChargeState& state, const ElectricalParams& params) {
    if (!(state.q >= 0.0 && state.q <= 1.0))
        throw std::invalid_argument("ChargeState: q out of [0,1]");
    if (!(std::fabs(state.delta_bl) <= 0.5))
        throw std::invalid_argument("ChargeState: |delta_bl| > 0.5");
    return (state.q - (0.5 + state.delta_bl)) / (1.0 + params.c_ratio);
}

double sense_level(double d, double t_ns, const ElectricalParams& params) {
    if (d < 0.0)
        throw std::invalid_argument("sense_level: negative differential (flipped sense)");
    if (d > 1.0)
        throw std::invalid_argument("sense_level: differential > 1");
    if (t_ns < 0.0)
        throw std::invalid_argument("sense_level: negative time");
    return 1.0 - (1.0 - d) * std::exp(-t_ns / params.tau_sense);
}

double time_to_read(double d, const ElectricalParams& params) {
    if (d < 0.0 || d >= 1.0)
        throw std::invalid_argument("time_to_read: differential out of [0,1)");
    if (d >= params.v_read)
        return 0.0;
    return params.tau_sense * std::log((1.0 - d) / (1.0 - params.v_read));
}

double restore(double q_start, double t_avail_ns, double tau_restore_cell_ns) {
    if (q_start < 0.0 || q_start > 1.0)
        throw std::invalid_argument("restore: q_start out of [0,1]");
    if (t_avail_ns < 0.0)
        throw std::invalid_argument("restore: negative time");
    if (!(tau_restore_cell_ns > 0.0))
        throw std::invalid_argument("restore: nonpositive time constant");
    return 1.0 - (1.0 - q_start) * std::exp(-t_avail_ns / tau_restore_cell_ns);
}

double precharge_residual(double t_avail_ns, const ElectricalParams& params) {
    if (t_avail_ns < 0.0)
        throw std::invalid_argument("precharge_residual: negative time");
    return 0.5 * std::exp(-t_avail_ns / params.tau_precharge);
}

double leak_tau(double temp_c, double retention_mult, const ElectricalParams& params) {
    if (!(retention_mult > 0.0))
        throw std::invalid_argument("leak_tau: nonpositive retention_mult");
    return params.tau_leak_ref * retention_mult *
           std::exp2(-(temp_c - params.t_ref) / params.leak_halving_per);
}

double leak(double q, double dt_ms, double temp_c, double retention_mult,
            const ElectricalParams& params) {
    if (dt_ms < 0.0)
        throw std::invalid_argument("leak: negative interval");
    return q * std::exp(-dt_ms / leak_tau(temp_c, retention_mult, params));
}

const char* to_string(FailStage stage) {
    switch (stage) {
    case FailStage::none: return "none";
    case FailStage::sense_offset: return "sense_offset";
    case FailStage::readout: return "readout";
    case FailStage::restore_insufficient: return "restore_insufficient";
    case FailStage::precharge_insufficient: return "precharge_insufficient";
    }
    return "?";
}

namespace {

// Sense + readout check shared by both intervals. `weak_stage` is the
// attribution when the differential is short even with a fully equalized
// bitline (sense_offset for the first interval, restore_insufficient for
// the second).
Outcome check_access(double q, double delta, double c_eff, double d_min,
                     double t_sense_avail, const ElectricalParams& params,
                     FailStage weak_stage) {
    double d = (q - (0.5 + delta)) / (1.0 + c_eff);
    if (d < d_min) {
        double d_full = (q - 0.5) / (1.0 + c_eff);
        return {false, d_full >= d_min ? FailStage::precharge_insufficient : weak_stage};
    }
    if (t_sense_avail <= 0.0)
        return {false, FailStage::readout};
    double level = 1.0 - (1.0 - d) * std::exp(-t_sense_avail / params.tau_sense);
    if (level < params.v_read)
        return {false, FailStage::readout};
    return {true, FailStage::none};
}

} // namespace

Outcome access_outcome(const CellSample& cell, const TimingParams& timings,
                       double temp_c, double t_since_refresh_ms,
                       PatternStress pattern, const ElectricalParams& params,
                       AccessPhase phase) {
    validate(timings);
    if (t_since_refresh_ms < 0.0 || t_since_refresh_ms > timings.t_refw)
        throw TimingError("t_since_refresh outside the refresh window");

    const double tau_cell = params.tau_restore_nominal * cell.resistance_mult;
    const double c_eff = params.c_ratio / cell.capacitance_mult;
    const double d_min = params.d_sense * pattern.d_sense_mult;
    const double delta =
        precharge_residual(std::max(0.0, timings.t_rp - params.t_overhead_pre), params);
    const double t_sense_avail = timings.t_rcd - params.t_overhead_act;

    // A residual imbalance beyond the sense-amp offset can flip a cell whose
    // own differential is marginal, independent of how strong this cell is.
    if (delta > d_min)
        return {false, FailStage::precharge_insufficient};

    // First interval: cell written worst-case from empty, restored only by the
    // tWR window, then leaking until this access.
    double q0 = restore(0.0, timings.t_wr, tau_cell);
    double q1 = leak(q0, t_since_refresh_ms, temp_c, cell.retention_mult, params);
    if (phase != AccessPhase::read_test) {
        Outcome first = check_access(q1, delta, c_eff, d_min, t_sense_avail, params,
                                     FailStage::sense_offset);
        if (!first.correct)
            return first;
        if (phase == AccessPhase::write_test)
            return first;
    }

    // Read steady state: every activation in service (refreshes included)
    // restores through the sense amp with the same truncated tRAS window, so
    // under-restoration compounds cycle over cycle. The worst case is the
    // fixed point of one cycle: leak a full refresh window, charge-share,
    // restore for the active window. The sense-amp path is much weaker than
    // the write driver, hence the separate tau_active constant.
    const double lk = std::exp(-timings.t_refw /
                               leak_tau(temp_c, cell.retention_mult, params));
    const double w_ras = std::max(0.0, timings.t_ras - params.t_overhead_act);
    const double tau_act = params.tau_active * cell.resistance_mult;
    double q = 1.0;
    for (int i = 0; i < 200; ++i) {
        double d = (q * lk - (0.5 + delta)) / (1.0 + c_eff);
        double share = std::clamp(0.5 + d, 0.0, 1.0);
        double next = restore(share, w_ras, tau_act);
        if (std::fabs(next - q) < 1e-12) {
            q = next;
            break;
        }
        q = next;
    }
    return check_access(q * lk, delta, c_eff, d_min, t_sense_avail, params,
                        FailStage::restore_insufficient);
}

double end_of_window_differential(const CellSample& cell, const TimingParams& timings,
                                  double temp_c, const ElectricalParams& params) {
    const double tau_cell = params.tau_restore_nominal * cell.resistance_mult;
    const double c_eff = params.c_ratio / cell.capacitance_mult;
    const double delta =
        precharge_residual(std::max(0.0, timings.t_rp - params.t_overhead_pre), params);
    double q0 = restore(0.0, timings.t_wr, tau_cell);
    double q1 = leak(q0, timings.t_refw, temp_c, cell.retention_mult, params);
    return (q1 - (0.5 + delta)) / (1.0 + c_eff);
}

void to_json(nlohmann::json& j, const ElectricalParams& p) {
    j = nlohmann::json{
        {"c_ratio", p.c_ratio},
        {"tau_sense", p.tau_sense},
        {"tau_restore_nominal", p.tau_restore_nominal},
        {"tau_active", p.tau_active},
        {"tau_precharge", p.tau_precharge},
        {"tau_leak_ref", p.tau_leak_ref},
        {"t_ref", p.t_ref},
        {"leak_halving_per", p.leak_halving_per},
        {"d_sense", p.d_sense},
        {"v_read", p.v_read},
        {"t_overhead_act", p.t_overhead_act},
        {"t_overhead_pre", p.t_overhead_pre},
    };
}

void from_json(const nlohmann::json& j, ElectricalParams& p) {
    ElectricalParams defaults;
    p.c_ratio = j.value("c_ratio", defaults.c_ratio);
    p.tau_sense = j.value("tau_sense", defaults.tau_sense);
    p.tau_restore_nominal = j.value("tau_restore_nominal", defaults.tau_restore_nominal);
    p.tau_active = j.value("tau_active", defaults.tau_active);
    p.tau_precharge = j.value("tau_precharge", defaults.tau_precharge);
    p.tau_leak_ref = j.value("tau_leak_ref", defaults.tau_leak_ref);
    p.t_ref = j.value("t_ref", defaults.t_ref);
    p.leak_halving_per = j.value("leak_halving_per", defaults.leak_halving_per);
    p.d_sense = j.value("d_sense", defaults.d_sense);
    p.v_read = j.value("v_read", defaults.v_read);
    p.t_overhead_act = j.value("t_overhead_act", defaults.t_overhead_act);
    p.t_overhead_pre = j.value("t_overhead_pre", defaults.t_overhead_pre);
}

} // namespace aldram
