#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "sbs/rng.hpp"
#include "sbs/sim.hpp"

using namespace sbs;

namespace {

SceneSpec empty_scene() {
    SceneSpec s;
    s.workspace = {{0.0, -0.08}, {0.12, 0.08}};
    return s;
}

bool states_identical(const SimState& a, const SimState& b) {
    if (a.finger.node_positions.size() != b.finger.node_positions.size()) return false;
    for (size_t i = 0; i < a.finger.node_positions.size(); ++i)
        if (!(a.finger.node_positions[i] == b.finger.node_positions[i]) ||
            !(a.finger.node_velocities[i] == b.finger.node_velocities[i]))
            return false;
    if (a.objects.size() != b.objects.size()) return false;
    for (size_t i = 0; i < a.objects.size(); ++i)
        if (!(a.objects[i].position == b.objects[i].position)) return false;
    return a.base_pose.x == b.base_pose.x && a.base_pose.y == b.base_pose.y &&
           a.base_pose.theta == b.base_pose.theta;
}

constexpr double kDt = 1.0 / 33.0;

}  // namespace

TEST_CASE("build_scene produces a straight resting finger") {
    Simulator sim(empty_scene());
    SimState s = sim.build_scene(0);
    REQUIRE(static_cast<int>(s.finger.node_positions.size()) == sim.params().nodes);
    for (const auto& v : s.finger.node_velocities) {
        CHECK(v.x == 0.0);
        CHECK(v.y == 0.0);
    }
    const auto strains = sim.strain_profile(s);
    for (double x : strains) CHECK(x < 1e-12);
    // straight chain: consecutive segments at rest length
    for (size_t i = 0; i + 1 < s.finger.node_positions.size(); ++i) {
        const double len = (s.finger.node_positions[i + 1] - s.finger.node_positions[i]).norm();
        CHECK(std::abs(len - sim.params().segment_length) < 1e-12);
    }
}

TEST_CASE("build_scene is deterministic") {
    SceneSpec spec = empty_scene();
    spec.movable_objects.push_back({{{0.22, 0.05}, 0.02}, 0.05, 0});
    Simulator sim(spec);
    SimState a = sim.build_scene(42);
    SimState b = sim.build_scene(42);
    CHECK(states_identical(a, b));
}

TEST_CASE("build_scene rejects shapes overlapping the rest pose") {
    SceneSpec spec = empty_scene();
    ObstacleShape ob;
    ob.kind = ObstacleShape::kDisc;
    ob.disc = {{0.10, 0.0}, 0.03};  // on the rest chain
    spec.static_obstacles.push_back(ob);
    Simulator sim(spec);
    CHECK_THROWS_WITH(sim.build_scene(0), Catch::Matchers::ContainsSubstring("static obstacle 0"));
}

TEST_CASE("holding the current pose is a fixed point") {
    Simulator sim(empty_scene());
    SimState s = sim.build_scene(0);
    const SimState before = s;
    sim.step(s, before.base_pose, kDt);
    for (size_t i = 0; i < s.finger.node_positions.size(); ++i) {
        CHECK(std::abs(s.finger.node_positions[i].x - before.finger.node_positions[i].x) < 1e-12);
        CHECK(std::abs(s.finger.node_positions[i].y - before.finger.node_positions[i].y) < 1e-12);
    }
    CHECK(s.base_pose.x == before.base_pose.x);
    CHECK(s.base_pose.y == before.base_pose.y);
}

TEST_CASE("penalty contact force equals stiffness times depth") {
    SceneSpec spec = empty_scene();
    ObstacleShape ob;
    ob.kind = ObstacleShape::kDisc;
    ob.disc = {{0.3, 0.0}, 0.05};
    spec.static_obstacles.push_back(ob);
    Simulator sim(spec);
    SimState s = sim.build_scene(0);
    // Move the tip node so its skin disc penetrates the obstacle by 0.01 m,
    // keeping the rest of the chain untouched and all velocities zero.
    const double depth = 0.01;
    const int tip = sim.params().nodes - 1;
    const double dist = ob.disc.radius + sim.params().skin_radius - depth;
    s.finger.node_positions[tip] = {0.3 - dist, 0.0};
    ForceBreakdown fb = sim.compute_forces(s);
    CHECK(fb.any_contact);
    const double fn = fb.node_contact_force[tip].norm();
    CHECK(fn == Catch::Approx(sim.params().k_contact * depth).epsilon(1e-9));
}

TEST_CASE("pressing past a movable disc pushes it forward") {
    SceneSpec spec = empty_scene();
    spec.workspace = {{0.0, -0.08}, {0.04, 0.08}};  // base centered at x = 0.02
    spec.movable_objects.push_back({{{0.20, 0.0}, 0.03}, 0.05, 0});
    Simulator sim(spec);
    SimState s = sim.build_scene(0);
    const double x0 = s.objects[0].position.x;
    // Nominal tip would sit 0.05 m past first contact.
    ActionCommand cmd{0.07, 0.0, 0.0};
    for (int i = 0; i < 100; ++i) sim.step(s, cmd, kDt);
    const double dx = s.objects[0].position.x - x0;
    CHECK(dx > 0.0);
    CHECK(std::abs(s.objects[0].position.y) < 1e-9);
    // Golden displacement, frozen from the first verified run of this config.
    CHECK(dx == Catch::Approx(0.031630652).epsilon(1e-6));
}

TEST_CASE("strain profile at rest, stretched, and bent") {
    Simulator sim(empty_scene());
    SimState s = sim.build_scene(0);
    const double L = sim.params().segment_length;

    SECTION("rest is zero") {
        for (double x : sim.strain_profile(s)) CHECK(x < 1e-12);
    }
    SECTION("pure stretch of one segment") {
        const int j = 3;
        for (size_t i = j + 1; i < s.finger.node_positions.size(); ++i)
            s.finger.node_positions[i].x += 0.1 * L;
        const auto strains = sim.strain_profile(s);
        CHECK(strains[j] == Catch::Approx(0.1).margin(1e-9));
        for (int i = 0; i < static_cast<int>(strains.size()); ++i)
            if (i != j) CHECK(strains[i] < 1e-9);
    }
    SECTION("right-angle bend at a joint") {
        const int j = 4;  // segments j.. point along +y
        const Vec2 pivot = s.finger.node_positions[j];
        for (size_t i = j + 1; i < s.finger.node_positions.size(); ++i)
            s.finger.node_positions[i] = {pivot.x, pivot.y + L * (i - j)};
        const auto strains = sim.strain_profile(s);
        CHECK(strains[j] ==
              Catch::Approx(sim.params().bend_strain_alpha * 3.14159265358979 / 2).margin(1e-6));
    }
}

TEST_CASE("trajectories are bit-identical across repeat runs") {
    SceneSpec spec = empty_scene();
    ObstacleShape ob;
    ob.kind = ObstacleShape::kBox;
    ob.box = {{0.24, -0.05}, {0.30, 0.05}};
    spec.static_obstacles.push_back(ob);
    spec.movable_objects.push_back({{{0.20, 0.06}, 0.02}, 0.05, 0});
    Simulator sim(spec);

    auto run = [&] {
        SimState s = sim.build_scene(1);
        Rng rng(99);
        for (int i = 0; i < 120; ++i) {
            ActionCommand cmd{0.06 + 0.05 * std::sin(i * 0.1) + 0.003 * rng.normal(),
                              0.02 * std::cos(i * 0.17), 0.2 * std::sin(i * 0.05)};
            sim.step(s, cmd, kDt);
        }
        return s;
    };
    CHECK(states_identical(run(), run()));
}

TEST_CASE("kinetic energy decays once the command is frozen") {
    Simulator sim(empty_scene());
    SimState s = sim.build_scene(0);
    for (int i = 0; i < 40; ++i)
        sim.step(s, {0.06 + 0.04 * std::sin(i * 0.4), 0.05 * std::cos(i * 0.3), 0.0}, kDt);
    const ActionCommand hold = s.base_pose;  // zero command motion from here on
    double prev = sim.kinetic_energy(s);
    for (int i = 0; i < 60; ++i) {
        sim.step(s, hold, kDt);
        const double ke = sim.kinetic_energy(s);
        CHECK(ke <= prev * (1.0 + 1e-12) + 1e-18);
        prev = ke;
    }
}

TEST_CASE("objects do not move without contact") {
    SceneSpec spec = empty_scene();
    spec.movable_objects.push_back({{{0.25, -0.10}, 0.02}, 0.05, 0});  // out of reach
    Simulator sim(spec);
    SimState s = sim.build_scene(0);
    const Vec2 p0 = s.objects[0].position;
    for (int i = 0; i < 80; ++i) {
        StepInfo info = sim.step(s, {0.06 + 0.04 * std::sin(i * 0.3), 0.0, 0.1}, kDt);
        CHECK_FALSE(info.object_contact[0]);
        CHECK((s.objects[0].position - p0).norm() < 1e-9);
    }
}

TEST_CASE("steady-state penetration stays within the penalty bound") {
    SceneSpec spec = empty_scene();
    ObstacleShape ob;
    ob.kind = ObstacleShape::kBox;
    ob.box = {{0.20, -0.08}, {0.26, 0.08}};  // wall ahead of the tip
    spec.static_obstacles.push_back(ob);
    Simulator sim(spec);
    SimState s = sim.build_scene(0);
    for (int i = 0; i < 66; ++i) sim.step(s, {0.10, 0.0, 0.0}, kDt);  // 2 s, settles
    ForceBreakdown fb = sim.compute_forces(s);
    REQUIRE(fb.any_contact);
    for (int i = 0; i < sim.params().nodes; ++i) {
        const double f = fb.node_contact_force[i].norm();
        if (f == 0.0) continue;
        const double depth =
            sim.params().skin_radius - ob.sdf(s.finger.node_positions[i]);
        CHECK(depth <= f / sim.params().k_contact * 1.10);
    }
}

TEST_CASE("base settles onto a held command within five time constants") {
    Simulator sim(empty_scene());
    SimState s = sim.build_scene(0);
    const ActionCommand cmd{0.10, -0.06, 0.4};
    const double gap0 = std::hypot(cmd.x - s.base_pose.x, cmd.y - s.base_pose.y);
    const int frames = static_cast<int>(std::ceil(5.0 * sim.params().tau / kDt));
    for (int i = 0; i < frames; ++i) sim.step(s, cmd, kDt);
    const double gap = std::hypot(cmd.x - s.base_pose.x, cmd.y - s.base_pose.y);
    CHECK(gap < 0.01 * gap0);
    CHECK(std::abs(cmd.theta - s.base_pose.theta) < 0.01 * 0.4);
}

TEST_CASE("divergent states raise an error naming the node") {
    Simulator sim(empty_scene());
    SimState s = sim.build_scene(0);
    s.finger.node_velocities[3] = {std::nan(""), 0.0};
    CHECK_THROWS_AS(sim.step(s, s.base_pose, kDt), DivergenceError);
    try {
        SimState t = sim.build_scene(0);
        t.finger.node_velocities[3] = {std::nan(""), 0.0};
        sim.step(t, t.base_pose, kDt);
    } catch (const DivergenceError& e) {
        CHECK(e.index == 3);
    }
}

TEST_CASE("step rejects bad inputs") {
    Simulator sim(empty_scene());
    SimState s = sim.build_scene(0);
    CHECK_THROWS_AS(sim.step(s, s.base_pose, 0.0), ContractViolation);
    CHECK_THROWS_AS(sim.step(s, {std::nan(""), 0, 0}, kDt), ContractViolation);
}
