#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <string>

#include "ragbench/errors.hpp"
#include "ragbench/genctl.hpp"
#include "ragbench/util.hpp"

using namespace ragbench;

namespace {
const CategoryAdjustments kAdj = CategoryAdjustments::defaults();
}

TEST_CASE("temperature worked examples") {
    // High precision, strong negative category pull, run start.
    CHECK(adaptive_temperature(PrecisionLevel::high, 0, 0, 0,
                               kAdj.offset_for(std::string("parameters"))) ==
          doctest::Approx(0.30).epsilon(1e-12));
    // Low precision deep into a run: progress term saturates at 0.8.
    CHECK(adaptive_temperature(PrecisionLevel::low, 40, 0, 0,
                               kAdj.offset_for(std::string("applications"))) ==
          doctest::Approx(0.97).epsilon(1e-12));
    // Medium precision with failures and uniqueness pressure: clipped at 1.0.
    CHECK(adaptive_temperature(PrecisionLevel::medium, 10, 3, 2,
                               kAdj.offset_for(std::string("materials"))) == 1.0);

    // Base range endpoints with no adjustments.
    CHECK(adaptive_temperature(PrecisionLevel::high, 0, 0, 0, 0.0) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK(adaptive_temperature(PrecisionLevel::medium, 0, 0, 0, 0.0) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(adaptive_temperature(PrecisionLevel::low, 0, 0, 0, 0.0) ==
          doctest::Approx(0.6).epsilon(1e-12));

    // Failure and similarity terms cap at 0.25 and 0.15.
    CHECK(adaptive_temperature(PrecisionLevel::high, 0, 100, 0, 0.0) ==
          doctest::Approx(0.65).epsilon(1e-12));
    CHECK(adaptive_temperature(PrecisionLevel::high, 0, 0, 100, 0.0) ==
          doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("temperature rejects negative counters") {
    CHECK_THROWS_AS(adaptive_temperature(PrecisionLevel::high, -1, 0, 0, 0.0),
                    ConfigError);
    CHECK_THROWS_AS(adaptive_temperature(PrecisionLevel::high, 0, -1, 0, 0.0),
                    ConfigError);
    CHECK_THROWS_AS(adaptive_temperature(PrecisionLevel::high, 0, 0, -1, 0.0),
                    ConfigError);
}

TEST_CASE("nucleus cutoff follows the temperature bands") {
    CHECK(nucleus_p_for(0.30) == 0.95);
    CHECK(nucleus_p_for(0.40) == 0.95);  // boundary belongs to the low band
    CHECK(nucleus_p_for(0.41) == 0.90);
    CHECK(nucleus_p_for(0.70) == 0.90);
    CHECK(nucleus_p_for(0.71) == 0.85);
    CHECK(nucleus_p_for(1.0) == 0.85);
}

TEST_CASE("similarity threshold relaxes per retry down to a floor") {
    CHECK(sim_threshold(PrecisionLevel::high, 0) ==
          doctest::Approx(0.70).epsilon(1e-12));
    CHECK(sim_threshold(PrecisionLevel::medium, 3) ==
          doctest::Approx(0.60).epsilon(1e-12));
    CHECK(sim_threshold(PrecisionLevel::low, 8) == 0.50);  // floored at 0.50
    CHECK(sim_threshold(PrecisionLevel::low, 0) ==
          doctest::Approx(0.80).epsilon(1e-12));
    CHECK(sim_threshold(PrecisionLevel::high, 1000) == 0.50);
    CHECK_THROWS_AS(sim_threshold(PrecisionLevel::high, -1), ConfigError);
}

TEST_CASE("category offsets accept both shipped names and short aliases") {
    struct Row {
        const char* alias;
        const char* shipped;
        double offset;
    };
    const Row rows[] = {
        {"parameters", "Performance Parameters", -0.10},
        {"processes", "Process Nodes", -0.08},
        {"devices", "Device Physics", -0.05},
        {"testing", "Testing Methodologies", -0.03},
        {"materials", "Materials Science", 0.00},
        {"manufacturing", "Manufacturing Processes", 0.02},
        {"applications", "Applications", 0.05},
    };
    for (const auto& r : rows) {
        CHECK(kAdj.offset_for(std::string(r.alias)) == r.offset);
        CHECK(kAdj.offset_for(std::string(r.shipped)) == r.offset);
    }
    CHECK(kAdj.offset_for(std::nullopt) == 0.0);
    CHECK(kAdj.offset_for(std::string("never heard of it")) == 0.0);
}

TEST_CASE("randomized monotonicity properties") {
    Rng rng(20240816);
    const PrecisionLevel levels[] = {PrecisionLevel::high, PrecisionLevel::medium,
                                     PrecisionLevel::low};
    for (int i = 0; i < 1000; ++i) {
        auto p = levels[rng.below(3)];
        int k = static_cast<int>(rng.below(60));
        int a = static_cast<int>(rng.below(12));
        int s = static_cast<int>(rng.below(8));
        double off = (static_cast<double>(rng.below(31)) - 15.0) / 100.0;

        double t = adaptive_temperature(p, k, a, s, off);
        CHECK(t >= 0.1);
        CHECK(t <= 1.0);
        // Non-decreasing in each counter individually.
        CHECK(adaptive_temperature(p, k + 1, a, s, off) >= t);
        CHECK(adaptive_temperature(p, k, a + 1, s, off) >= t);
        CHECK(adaptive_temperature(p, k, a, s + 1, off) >= t);

        // High precision never dips below the strongest negative pull.
        CHECK(adaptive_temperature(PrecisionLevel::high, k, a, s,
                                   kAdj.offset_for(std::string("parameters"))) >=
              0.30 - 1e-12);

        int r = static_cast<int>(rng.below(12));
        double th = sim_threshold(p, r);
        CHECK(th >= 0.50);
        CHECK(sim_threshold(p, r + 1) <= th);

        // Nucleus cutoff falls (weakly) as temperature rises.
        double t2 = adaptive_temperature(p, k + static_cast<int>(rng.below(5)),
                                         a + static_cast<int>(rng.below(3)), s, off);
        if (t2 >= t) CHECK(nucleus_p_for(t2) <= nucleus_p_for(t));
    }
}

TEST_CASE("control params compose the three knobs from run state") {
    GenerationState st;
    st.successes = 10;
    st.failed_attempts = 3;
    st.consecutive_sim_failures = 2;
    st.retries_current = 3;
    auto cp = control_params(PrecisionLevel::medium, st,
                             std::string("Materials Science"), kAdj);
    CHECK(cp.temperature == 1.0);  // 0.5 + 0.2 + 0 + 0.24 + 0.10 clipped
    CHECK(cp.nucleus_p == 0.85);
    CHECK(cp.sim_threshold == doctest::Approx(0.60).epsilon(1e-12));

    GenerationState fresh;
    auto cp2 = control_params(PrecisionLevel::high, fresh,
                              std::string("parameters"), kAdj);
    CHECK(cp2.temperature == doctest::Approx(0.30).epsilon(1e-12));
    CHECK(cp2.nucleus_p == 0.95);
    CHECK(cp2.sim_threshold == doctest::Approx(0.70).epsilon(1e-12));

    auto cp3 = control_params(PrecisionLevel::low, fresh, std::nullopt, kAdj);
    CHECK(cp3.temperature == doctest::Approx(0.60).epsilon(1e-12));
    CHECK(cp3.nucleus_p == 0.90);
}

TEST_CASE("output limit ladder") {
    CHECK(output_limit_for_window(1) == 1024);
    CHECK(output_limit_for_window(4096) == 1024);
    CHECK(output_limit_for_window(4097) == 2048);
    CHECK(output_limit_for_window(10240) == 2048);
    CHECK(output_limit_for_window(10241) == 4096);
    CHECK(output_limit_for_window(32768) == 4096);
    CHECK(output_limit_for_window(1 << 20) == 4096);
    CHECK_THROWS_AS(output_limit_for_window(0), ConfigError);
    CHECK_THROWS_AS(output_limit_for_window(-4096), ConfigError);

    auto ladder = default_output_ladder();
    REQUIRE(ladder.size() == 3);
    CHECK(ladder[0].max_window == 4096);
    CHECK(ladder[0].output_limit == 1024);
    CHECK(ladder[2].max_window <= 0);  // catch-all rung
    CHECK(ladder[2].output_limit == 4096);

    std::vector<OutputLimitRule> custom{{100, 10}, {200, 20}, {0, 99}};
    CHECK(output_limit_for_window(100, custom) == 10);
    CHECK(output_limit_for_window(101, custom) == 20);
    CHECK(output_limit_for_window(201, custom) == 99);
}
