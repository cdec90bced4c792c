#include "aldram/variation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "aldram/charge_model.hpp"

namespace aldram {

void validate(const VariationSpec& spec) {
    if (spec.sigma_resistance < 0 || spec.sigma_capacitance < 0 || spec.sigma_retention < 0)
        throw std::invalid_argument("VariationSpec: sigmas must be >= 0");
    if (spec.chip_sigma_fraction < 0 || spec.chip_sigma_fraction > 1)
        throw std::invalid_argument("VariationSpec: chip_sigma_fraction out of [0,1]");
    if (spec.cells_per_chip_sampled < 1 || spec.chips_per_dimm < 1)
        throw std::invalid_argument("VariationSpec: counts must be >= 1");
    if (!(spec.worst_corner_quantile > 0.5 && spec.worst_corner_quantile < 1.0))
        throw std::invalid_argument("VariationSpec: worst_corner_quantile out of (0.5, 1)");
    if (!(spec.extra_margin_fraction >= 0.0 && spec.extra_margin_fraction < 1.0))
        throw std::invalid_argument("VariationSpec: extra_margin_fraction out of [0,1)");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

Dimm sample_dimm(const VariationSpec& spec, std::uint64_t seed, int dimm_id) {
    validate(spec);
    Dimm dimm;
    dimm.dimm_id = dimm_id;
    dimm.seed = seed;
    dimm.cells.reserve(static_cast<std::size_t>(spec.chips_per_dimm) *
                       spec.cells_per_chip_sampled);

    const double f_chip = std::sqrt(spec.chip_sigma_fraction);
    const double f_cell = std::sqrt(1.0 - spec.chip_sigma_fraction);

    // Screening bound: parts beyond the design worst-case corner are assumed
    // rejected at manufacturing test, so sampled deviations are truncated at
    // the corner quantile in the unfavorable direction. This keeps every
    // shipped cell within the corner that calibration guarantees safe.
    const boost::math::normal_distribution<double> std_normal;
    const double z_cap = boost::math::quantile(std_normal, spec.worst_corner_quantile);

    for (int chip = 0; chip < spec.chips_per_dimm; ++chip) {
        // Independent per-chip stream: chips can be drawn in any order.
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(chip) + 1)));
        std::normal_distribution<double> normal(0.0, 1.0);

        const double zc_r = normal(rng);
        const double zc_c = normal(rng);
        const double zc_i = normal(rng);

        for (int cell = 0; cell < spec.cells_per_chip_sampled; ++cell) {
            const double z_r = std::min(f_chip * zc_r + f_cell * normal(rng), z_cap);
            const double z_c = std::max(f_chip * zc_c + f_cell * normal(rng), -z_cap);
            const double z_i = std::max(f_chip * zc_i + f_cell * normal(rng), -z_cap);

            CellSample s;
            s.resistance_mult = std::exp(spec.sigma_resistance * z_r);
            s.capacitance_mult = std::exp(spec.sigma_capacitance * z_c);
            s.independent_retention_factor = std::exp(spec.sigma_retention * z_i);
            s.retention_mult = s.capacitance_mult * s.independent_retention_factor;
            s.chip_id = chip;
            s.cell_id = cell;
            dimm.cells.push_back(s);
        }
    }
    return dimm;
}

CellSample worst_case_corner(const VariationSpec& spec) {
    validate(spec);
    const boost::math::normal_distribution<double> std_normal;
    const double z = boost::math::quantile(std_normal, spec.worst_corner_quantile);

    CellSample s;
    s.resistance_mult = std::exp(spec.sigma_resistance * z);   // slowest to charge
    s.capacitance_mult = std::exp(-spec.sigma_capacitance * z); // smallest capacity
    s.independent_retention_factor = std::exp(-spec.sigma_retention * z);
    s.retention_mult = s.capacitance_mult * s.independent_retention_factor;
    s.chip_id = -1;
    s.cell_id = -1;
    return s;
}

const CellSample& slowest_cell(const Dimm& dimm, double temp,
                               const ElectricalParams& params) {
    if (dimm.cells.empty())
        throw std::invalid_argument("slowest_cell: empty DIMM");
    const TimingParams std_t = standard_ddr3();
    const CellSample* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const CellSample& c : dimm.cells) {
        double d = end_of_window_differential(c, std_t, temp, params);
        if (d < best_d) {
            best_d = d;
            best = &c;
        }
    }
    return *best;
}

std::vector<Dimm> sample_bank(const VariationSpec& spec, std::uint64_t base_seed,
                              int count) {
    if (count < 1)
        throw std::invalid_argument("sample_bank: count must be >= 1");
    std::vector<Dimm> bank;
    bank.reserve(count);
    for (int i = 0; i < count; ++i)
        bank.push_back(sample_dimm(spec, splitmix64(base_seed + static_cast<std::uint64_t>(i)), i));
    return bank;
}

void to_json(nlohmann::json& j, const CellSample& c) {
    j = nlohmann::json{{"resistance_mult", c.resistance_mult},
                       {"capacitance_mult", c.capacitance_mult},
                       {"retention_mult", c.retention_mult},
                       {"independent_retention_factor", c.independent_retention_factor},
                       {"chip_id", c.chip_id},
                       {"cell_id", c.cell_id}};
}

void from_json(const nlohmann::json& j, CellSample& c) {
    j.at("resistance_mult").get_to(c.resistance_mult);
    j.at("capacitance_mult").get_to(c.capacitance_mult);
    j.at("retention_mult").get_to(c.retention_mult);
    j.at("independent_retention_factor").get_to(c.independent_retention_factor);
    j.at("chip_id").get_to(c.chip_id);
    j.at("cell_id").get_to(c.cell_id);
}

void to_json(nlohmann::json& j, const VariationSpec& s) {
    j = nlohmann::json{{"sigma_resistance", s.sigma_resistance},
                       {"sigma_capacitance", s.sigma_capacitance},
                       {"sigma_retention", s.sigma_retention},
                       {"chip_sigma_fraction", s.chip_sigma_fraction},
                       {"cells_per_chip_sampled", s.cells_per_chip_sampled},
                       {"chips_per_dimm", s.chips_per_dimm},
                       {"worst_corner_quantile", s.worst_corner_quantile},
                       {"extra_margin_fraction", s.extra_margin_fraction}};
}

void from_json(const nlohmann::json& j, VariationSpec& s) {
    VariationSpec d;
    s.sigma_resistance = j.value("sigma_resistance", d.sigma_resistance);
    s.sigma_capacitance = j.value("sigma_capacitance", d.sigma_capacitance);
    s.sigma_retention = j.value("sigma_retention", d.sigma_retention);
    s.chip_sigma_fraction = j.value("chip_sigma_fraction", d.chip_sigma_fraction);
    s.cells_per_chip_sampled = j.value("cells_per_chip_sampled", d.cells_per_chip_sampled);
    s.chips_per_dimm = j.value("chips_per_dimm", d.chips_per_dimm);
    s.worst_corner_quantile = j.value("worst_corner_quantile", d.worst_corner_quantile);
    s.extra_margin_fraction = j.value("extra_margin_fraction", d.extra_margin_fraction);
}

void to_json(nlohmann::json& j, const Dimm& d) {
    j = nlohmann::json{{"dimm_id", d.dimm_id}, {"seed", d.seed}, {"cells", d.cells}};
}

void from_json(const nlohmann::json& j, Dimm& d) {
    j.at("dimm_id").get_to(d.dimm_id);
    j.at("seed").get_to(d.seed);
    j.at("cells").get_to(d.cells);
}

void save_bank(const std::string& path, const std::vector<Dimm>& bank,
               const VariationSpec& spec) {
    nlohmann::json j;
    j["variation"] = spec;
    j["dimms"] = bank;
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("save_bank: cannot open " + path);
    out << j.dump(2) << "\n";
}

std::vector<Dimm> load_bank(const std::string& path, VariationSpec* spec_out) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_bank: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (spec_out)
        *spec_out = j.at("variation").get<VariationSpec>();
    return j.at("dimms").get<std::vector<Dimm>>();
}

} // namespace aldram
