#include <catch2/catch_amalgamated.hpp>

#include "sbs/sensors.hpp"

using namespace sbs;

namespace {

// One sensor watching segment 0 with unit gain and no drift/noise; the other
// five watch segment 1 so they stay quiet.
SensorLayout probe_layout(double play_width) {
    SensorLayout layout;
    layout.n_segments = 2;
    for (int i = 0; i < kSensorCount; ++i) {
        layout.channels[i] = {1, 1, 1.0, play_width, 0.0, 0.0};
    }
    layout.channels[0] = {0, 0, 1.0, play_width, 0.0, 0.0};
    return layout;
}

}  // namespace

TEST_CASE("init_layout is deterministic and seed-sensitive") {
    CHECK(init_layout(7) == init_layout(7));
    CHECK_FALSE(init_layout(0) == init_layout(1));
}

TEST_CASE("init_layout windows cover at least three quarters of the segments") {
    for (uint64_t seed = 0; seed < 60; ++seed) {
        for (int segs : {6, 7, 12, 31}) {
            const SensorLayout layout = init_layout(seed, segs);
            CHECK(layout_coverage(layout) >= 0.75);
            for (const auto& ch : layout.channels) {
                CHECK(ch.window_lo >= 0);
                CHECK(ch.window_hi < segs);
                CHECK(ch.window_lo <= ch.window_hi);
            }
        }
    }
}

TEST_CASE("init_layout covers small segment counts too") {
    for (int segs : {1, 2, 4, 5})
        CHECK(init_layout(3, segs).n_segments == segs);
    CHECK(layout_coverage(init_layout(3, 4)) >= 0.75);
}

TEST_CASE("play operator follows the textbook recursion") {
    const SensorLayout layout = probe_layout(0.1);
    SensorState state(0);
    auto r1 = read_sensors(layout, state, {0.5, 0.0}, 0.03);
    CHECK(r1[0] == Catch::Approx(0.4));  // max(0.4, min(0.6, 0))
    auto r2 = read_sensors(layout, state, {0.2, 0.0}, 0.03);
    CHECK(r2[0] == Catch::Approx(0.3));  // max(0.1, min(0.3, 0.4))
}

TEST_CASE("zero strain forever gives a constant reading") {
    const SensorLayout layout = probe_layout(0.05);
    SensorState state(0);
    for (int i = 0; i < 50; ++i) {
        auto r = read_sensors(layout, state, {0.0, 0.0}, 0.03);
        for (double v : r) CHECK(v == 0.0);
    }
}

TEST_CASE("inputs inside the deadband never move the play state") {
    const SensorLayout layout = probe_layout(0.1);
    SensorState state(0);
    read_sensors(layout, state, {0.5, 0.0}, 0.03);  // y -> 0.4
    for (double a : {0.35, 0.45, 0.31, 0.49, 0.40}) {
        auto r = read_sensors(layout, state, {a, 0.0}, 0.03);
        CHECK(r[0] == Catch::Approx(0.4));
    }
}

TEST_CASE("hysteresis output is rate independent") {
    const SensorLayout layout = probe_layout(0.05);
    std::vector<double> path{0.0, 0.1, 0.25, 0.4, 0.3, 0.15, 0.35, 0.05, 0.0};
    auto run = [&](double dt) {
        SensorState state(0);
        std::vector<double> ys;
        for (double a : path) ys.push_back(read_sensors(layout, state, {a, 0.0}, dt)[0]);
        return ys;
    };
    CHECK(run(0.03) == run(0.001));
}

TEST_CASE("a press-release cycle leaves a memory trace") {
    const double w = 0.05;
    const SensorLayout layout = probe_layout(w);
    SensorState state(0);
    const double y0 = read_sensors(layout, state, {0.0, 0.0}, 0.03)[0];
    read_sensors(layout, state, {2.5 * w, 0.0}, 0.03);  // press beyond 2w
    const double y2 = read_sensors(layout, state, {0.0, 0.0}, 0.03)[0];
    CHECK(std::abs(y2 - y0) > 1e-12);
}

TEST_CASE("with drift and noise disabled, reads are pure functions") {
    const SensorLayout layout = probe_layout(0.05);
    SensorState a(1), b(999);  // different rng seeds must not matter
    for (double s : {0.1, 0.3, 0.2, 0.0, 0.4}) {
        auto ra = read_sensors(layout, a, {s, s}, 0.03);
        auto rb = read_sensors(layout, b, {s, s}, 0.03);
        CHECK(ra == rb);
    }
}

TEST_CASE("drift accumulates as a random walk when enabled") {
    SensorLayout layout = probe_layout(0.05);
    for (auto& ch : layout.channels) ch.drift_sigma = 0.01;
    SensorState state(5);
    double first = read_sensors(layout, state, {0.0, 0.0}, 0.03)[0];
    double last = first;
    for (int i = 0; i < 200; ++i) last = read_sensors(layout, state, {0.0, 0.0}, 0.03)[0];
    CHECK(last != first);
}

TEST_CASE("negative strain violates the read contract") {
    const SensorLayout layout = probe_layout(0.05);
    SensorState state(0);
    CHECK_THROWS_AS(read_sensors(layout, state, {-0.1, 0.0}, 0.03), ContractViolation);
    CHECK_THROWS_AS(read_sensors(layout, state, {0.1}, 0.03), ContractViolation);
}
