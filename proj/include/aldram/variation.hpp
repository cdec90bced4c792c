#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace aldram {

struct ElectricalParams; // charge_model.hpp

// Per-cell process-variation multipliers, fixed for the life of the cell.
struct CellSample {
    double resistance_mult = 1.0;  // scales tau_restore_nominal
    double capacitance_mult = 1.0; // divides c_ratio; retention scales with it
    double retention_mult = 1.0;   // capacitance_mult * independent_retention_factor
    double independent_retention_factor = 1.0;
    int chip_id = 0;
    int cell_id = 0;
};

struct VariationSpec {
    double sigma_resistance = 0.13; // lognormal shape, cell-level + chip-level combined
    double sigma_capacitance = 0.0;
    double sigma_retention = 0.0;   // shape of the retention factor independent of capacitance
    double chip_sigma_fraction = 0.5; // fraction of variance shared per chip
    int cells_per_chip_sampled = 128; // tail cells tracked per chip
    int chips_per_dimm = 8;
    double worst_corner_quantile = 0.9999;
    double extra_margin_fraction = 0.05; // manufacturer guardband beyond the corner
};

void validate(const VariationSpec& spec); // throws std::invalid_argument

struct Dimm {
    int dimm_id = 0;
    std::uint64_t seed = 0;
    std::vector<CellSample> cells;
};

// Deterministic for (spec, seed): per-chip RNG streams derived from sub-seeds,
// so chips can be sampled in any order with identical results.
Dimm sample_dimm(const VariationSpec& spec, std::uint64_t seed, int dimm_id = 0);

// Design worst-case cell: resistance at the corner quantile, capacitance and
// the independent retention factor at the mirrored (1 - q) quantile.
CellSample worst_case_corner(const VariationSpec& spec);

// Cell minimizing the end-of-refresh-window charge-share differential at
// `temp` under standard timings; ties broken by lowest (chip_id, cell_id).
const CellSample& slowest_cell(const Dimm& dimm, double temp,
                               const ElectricalParams& params);

std::vector<Dimm> sample_bank(const VariationSpec& spec, std::uint64_t base_seed,
                              int count);

void to_json(nlohmann::json& j, const CellSample& c);
void from_json(const nlohmann::json& j, CellSample& c);
void to_json(nlohmann::json& j, const VariationSpec& s);
void from_json(const nlohmann::json& j, VariationSpec& s);
void to_json(nlohmann::json& j, const Dimm& d);
void from_json(const nlohmann::json& j, Dimm& d);

void save_bank(const std::string& path, const std::vector<Dimm>& bank,
               const VariationSpec& spec);
std::vector<Dimm> load_bank(const std::string& path, VariationSpec* spec_out = nullptr);

} // namespace aldram
