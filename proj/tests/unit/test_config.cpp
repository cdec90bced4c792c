#include "doctest.h"

#include <cstdio>

#include "aldram/config.hpp"

using namespace aldram;

TEST_CASE("default config is valid and carries the calibrated constants") {
    const RunConfig cfg = default_config();
    CHECK_NOTHROW(validate(cfg));
    CHECK(cfg.electrical.tau_sense == doctest::Approx(ElectricalParams{}.tau_sense));
    CHECK(cfg.variation.sigma_resistance ==
          doctest::Approx(VariationSpec{}.sigma_resistance));
    CHECK(cfg.seed == 1);
}

TEST_CASE("config save/load round trip") {
    RunConfig cfg = default_config();
    cfg.seed = 4242;
    cfg.profiling.temp = 40.0;
    cfg.controller.guardband_temp = 7.5;
    cfg.perf.mpki_threshold = 12.0;
    const std::string path = "/tmp/aldram_test_config.json";
    save_config(path, cfg);
    const RunConfig back = load_config(path);
    CHECK(back.seed == 4242);
    CHECK(back.profiling.temp == doctest::Approx(40.0));
    CHECK(back.controller.guardband_temp == doctest::Approx(7.5));
    CHECK(back.perf.mpki_threshold == doctest::Approx(12.0));
    CHECK(back.electrical.tau_leak_ref ==
          doctest::Approx(cfg.electrical.tau_leak_ref).epsilon(1e-15));
    std::remove(path.c_str());
}

TEST_CASE("partial config files fall back to defaults") {
    const std::string path = "/tmp/aldram_test_partial_config.json";
    {
        FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("{\"seed\": 9, \"profiling\": {\"temp\": 60.0}}", f);
        std::fclose(f);
    }
    const RunConfig cfg = load_config(path);
    CHECK(cfg.seed == 9);
    CHECK(cfg.profiling.temp == doctest::Approx(60.0));
    CHECK(cfg.electrical.c_ratio == doctest::Approx(ElectricalParams{}.c_ratio));
    std::remove(path.c_str());
}
