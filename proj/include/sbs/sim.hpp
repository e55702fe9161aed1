#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sbs/errors.hpp"
#include "sbs/geom.hpp"

namespace sbs {

// Commanded base pose. The third axis of the physical workcell maps to
// in-plane base rotation so the efferent signal stays three-dimensional.
struct ActionCommand {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

struct FingerState {
    std::vector<Vec2> node_positions;
    std::vector<Vec2> node_velocities;
};

struct ObstacleShape {
    enum Kind { kDisc, kBox };
    Kind kind = kDisc;
    Disc disc;
    Box box;

    double sdf(const Vec2& p) const { return kind == kDisc ? disc_sdf(disc, p) : box_sdf(box, p); }
    Vec2 normal(const Vec2& p) const { return kind == kDisc ? disc_normal(disc, p) : box_normal(box, p); }
};

struct MovableObject {
    Disc disc;              // initial placement
    double mass = 0.05;     // kg
    int color_id = 0;       // palette index, unique per object
};

struct SceneSpec {
    std::vector<ObstacleShape> static_obstacles;
    std::vector<MovableObject> movable_objects;
    Box workspace{{0.0, -0.08}, {0.12, 0.08}};     // commanded base positions
    double theta_min = -0.6, theta_max = 0.6;      // commanded base rotation
    uint64_t seed = 0;
};

struct ObjectState {
    Vec2 position;
    Vec2 velocity;
};

struct SimState {
    FingerState finger;
    std::vector<ObjectState> objects;
    ActionCommand base_pose;  // realized pose, lags the command
    double time = 0.0;
};

struct SimParams {
    int nodes = 8;
    double segment_length = 0.02;    // m
    double k_stretch = 400.0;        // N/m
    double k_bend = 2.0;             // N*m/rad
    double damping = 0.8;            // kg/s, viscous on node velocity
    double node_mass = 1e-4;         // kg
    double k_contact = 1000.0;       // N/m penalty stiffness
    double friction = 0.4;           // Coulomb coefficient
    double friction_vel_eps = 1e-4;  // m/s, regularizes the tangential direction
    double tau = 0.3;                // s, base first-order lag
    double skin_radius = 0.01;       // m, collision/render radius of the chain
    double bend_strain_alpha = 0.5;  // weight of |joint angle| in the strain profile
    int substeps = 10;
    double object_ground_rate = 1000.0;  // 1/s, quasi-static object damping
};

// Per-step diagnostics; the learning pipeline uses any_contact as the
// ground-truth "contact frame" marker.
struct StepInfo {
    bool any_contact = false;
    std::vector<bool> object_contact;
};

struct ForceBreakdown {
    std::vector<Vec2> node_force;          // everything, including contact
    std::vector<Vec2> node_contact_force;  // contact component only
    std::vector<Vec2> object_force;
    bool any_contact = false;
};

class Simulator {
public:
    // Spring deflections below this are treated as zero (meters / radians).
    static constexpr double kSnapTol = 1e-12;

    Simulator(SceneSpec scene, SimParams params = {})
        : scene_(std::move(scene)), params_(params) {
        if (params_.nodes < 3) throw ConfigError("simulator needs at least 3 nodes");
        if (params_.substeps < 1) throw ConfigError("substeps must be >= 1");
        for (size_t i = 0; i < scene_.movable_objects.size(); ++i)
            for (size_t j = i + 1; j < scene_.movable_objects.size(); ++j)
                if (scene_.movable_objects[i].color_id == scene_.movable_objects[j].color_id)
                    throw ConfigError("movable objects " + std::to_string(i) + " and " +
                                      std::to_string(j) + " share a color id");
    }

    const SceneSpec& scene() const { return scene_; }
    const SimParams& params() const { return params_; }

    // Rest configuration: straight chain from the workspace-center base pose,
    // zero velocity, objects at their spec placement. rng_seed is reserved for
    // initial-state randomization and currently unused; construction is
    // deterministic either way.
    SimState build_scene(uint64_t /*rng_seed*/ = 0) const {
        SimState s;
        const Vec2 c = scene_.workspace.center();
        s.base_pose = {c.x, c.y, 0.5 * (scene_.theta_min + scene_.theta_max)};
        const Vec2 dir{std::cos(s.base_pose.theta), std::sin(s.base_pose.theta)};
        s.finger.node_positions.resize(params_.nodes);
        s.finger.node_velocities.assign(params_.nodes, Vec2{});
        for (int i = 0; i < params_.nodes; ++i)
            s.finger.node_positions[i] = Vec2{s.base_pose.x, s.base_pose.y} + dir * (params_.segment_length * i);
        s.objects.resize(scene_.movable_objects.size());
        for (size_t k = 0; k < scene_.movable_objects.size(); ++k)
            s.objects[k] = {scene_.movable_objects[k].disc.center, Vec2{}};
        reject_overlaps(s);
        return s;
    }

    StepInfo step(SimState& s, const ActionCommand& cmd, double dt) const {
        if (dt <= 0.0) throw ContractViolation("step: dt must be positive");
        if (!std::isfinite(cmd.x) || !std::isfinite(cmd.y) || !std::isfinite(cmd.theta))
            throw ContractViolation("step: non-finite command");
        StepInfo info;
        info.object_contact.assign(s.objects.size(), false);
        const double h = dt / params_.substeps;
        const double decay = std::exp(-h / params_.tau);
        for (int sub = 0; sub < params_.substeps; ++sub) {
            substep(s, cmd, h, decay, info);
        }
        check_divergence(s);
        return info;
    }

    // Per-segment mechanical strain: relative stretch plus weighted bend angle
    // at the segment's root joint (joint 0 bends against the base heading).
    std::vector<double> strain_profile(const SimState& s) const {
        const auto& p = s.finger.node_positions;
        const int nseg = params_.nodes - 1;
        std::vector<double> out(nseg);
        Vec2 prev_dir{std::cos(s.base_pose.theta), std::sin(s.base_pose.theta)};
        for (int i = 0; i < nseg; ++i) {
            const Vec2 seg = p[i + 1] - p[i];
            const double len = seg.norm();
            const double stretch = std::abs(len - params_.segment_length) / params_.segment_length;
            double bend = 0.0;
            if (len > 1e-12) {
                const Vec2 d = seg * (1.0 / len);
                bend = std::atan2(prev_dir.x * d.y - prev_dir.y * d.x, prev_dir.dot(d));
                prev_dir = d;
            }
            out[i] = stretch + params_.bend_strain_alpha * std::abs(bend);
        }
        return out;
    }

    ForceBreakdown compute_forces(const SimState& s) const {
        ForceBreakdown fb;
        const int n = params_.nodes;
        fb.node_force.assign(n, Vec2{});
        fb.node_contact_force.assign(n, Vec2{});
        fb.object_force.assign(s.objects.size(), Vec2{});
        accumulate_spring_forces(s, fb.node_force);
        accumulate_contact_forces(s, fb);
        for (int i = 0; i < n; ++i) fb.node_force[i] += fb.node_contact_force[i];
        return fb;
    }

    double kinetic_energy(const SimState& s) const {
        double ke = 0.0;
        for (const auto& v : s.finger.node_velocities) ke += 0.5 * params_.node_mass * v.norm2();
        return ke;
    }

private:
    void reject_overlaps(const SimState& s) const {
        for (int i = 0; i < params_.nodes; ++i) {
            const Vec2& p = s.finger.node_positions[i];
            for (size_t k = 0; k < scene_.static_obstacles.size(); ++k)
                if (scene_.static_obstacles[k].sdf(p) < params_.skin_radius)
                    throw ConfigError("finger rest pose overlaps static obstacle " + std::to_string(k));
            for (size_t k = 0; k < scene_.movable_objects.size(); ++k)
                if (disc_sdf(scene_.movable_objects[k].disc, p) < params_.skin_radius)
                    throw ConfigError("finger rest pose overlaps movable object " + std::to_string(k));
        }
    }

    void accumulate_spring_forces(const SimState& s, std::vector<Vec2>& f) const {
        const auto& p = s.finger.node_positions;
        const int n = params_.nodes;
        // Linear stretch springs along each segment. Elongations below the
        // snap tolerance count as zero so the rest pose is an exact fixed
        // point despite position rounding.
        for (int i = 0; i + 1 < n; ++i) {
            const Vec2 d = p[i + 1] - p[i];
            const double len = d.norm();
            if (len < 1e-12) continue;
            const double elong = len - params_.segment_length;
            if (std::abs(elong) < kSnapTol) continue;
            const Vec2 dir = d * (1.0 / len);
            const double fm = params_.k_stretch * elong;
            f[i] += dir * fm;
            f[i + 1] -= dir * fm;
        }
        // Angular springs at each joint; joint 0 is anchored to the base heading.
        const Vec2 base_dir{std::cos(s.base_pose.theta), std::sin(s.base_pose.theta)};
        for (int i = 0; i + 1 < n; ++i) {
            const Vec2 u = (i == 0) ? base_dir : p[i] - p[i - 1];
            const Vec2 v = p[i + 1] - p[i];
            const double lu2 = u.norm2(), lv2 = v.norm2();
            if (lu2 < 1e-18 || lv2 < 1e-18) continue;
            const double phi = std::atan2(u.x * v.y - u.y * v.x, u.dot(v));
            if (std::abs(phi) < kSnapTol) continue;
            const double m = params_.k_bend * phi;
            const Vec2 fv = v.perp() * (-m / lv2);
            f[i + 1] += fv;
            f[i] -= fv;
            if (i > 0) {
                const Vec2 fu = u.perp() * (-m / lu2);
                f[i - 1] += fu;
                f[i] -= fu;
            }
        }
    }

    void contact_pair(const Vec2& n_dir, double depth, const Vec2& rel_vel, Vec2& out) const {
        const Vec2 fn = n_dir * (params_.k_contact * depth);
        const double fn_mag = params_.k_contact * depth;
        Vec2 vt = rel_vel - n_dir * rel_vel.dot(n_dir);
        const double vt_mag = vt.norm();
        Vec2 ft{};
        if (vt_mag > 1e-12)
            ft = vt * (-params_.friction * fn_mag / (vt_mag + params_.friction_vel_eps));
        out += fn + ft;
    }

    void accumulate_contact_forces(const SimState& s, ForceBreakdown& fb) const {
        const auto& p = s.finger.node_positions;
        const auto& v = s.finger.node_velocities;
        for (int i = 0; i < params_.nodes; ++i) {
            for (const auto& ob : scene_.static_obstacles) {
                const double gap = ob.sdf(p[i]) - params_.skin_radius;
                if (gap >= 0.0) continue;
                contact_pair(ob.normal(p[i]), -gap, v[i], fb.node_contact_force[i]);
                fb.any_contact = true;
            }
            for (size_t k = 0; k < s.objects.size(); ++k) {
                const Disc d{s.objects[k].position, scene_.movable_objects[k].disc.radius};
                const double gap = disc_sdf(d, p[i]) - params_.skin_radius;
                if (gap >= 0.0) continue;
                Vec2 fc{};
                contact_pair(disc_normal(d, p[i]), -gap, v[i] - s.objects[k].velocity, fc);
                fb.node_contact_force[i] += fc;
                fb.object_force[k] -= fc;
                fb.any_contact = true;
            }
        }
    }

    void substep(SimState& s, const ActionCommand& cmd, double h, double decay, StepInfo& info) const {
        // Base tracks the command through a first-order lag (exact update).
        const ActionCommand prev = s.base_pose;
        s.base_pose.x = cmd.x + (prev.x - cmd.x) * decay;
        s.base_pose.y = cmd.y + (prev.y - cmd.y) * decay;
        s.base_pose.theta = cmd.theta + (prev.theta - cmd.theta) * decay;
        s.finger.node_positions[0] = {s.base_pose.x, s.base_pose.y};
        s.finger.node_velocities[0] = {(s.base_pose.x - prev.x) / h, (s.base_pose.y - prev.y) / h};

        ForceBreakdown fb = compute_forces(s);
        if (fb.any_contact) {
            info.any_contact = true;
            for (size_t k = 0; k < s.objects.size(); ++k)
                if (fb.object_force[k].norm2() > 0.0) info.object_contact[k] = true;
        }

        // Semi-implicit Euler; the velocity damping term is implicit so heavy
        // damping stays stable at the default substep size.
        const double inv_m = 1.0 / params_.node_mass;
        const double damp = 1.0 / (1.0 + h * params_.damping * inv_m);
        for (int i = 1; i < params_.nodes; ++i) {
            Vec2& vel = s.finger.node_velocities[i];
            vel = (vel + fb.node_force[i] * (h * inv_m)) * damp;
            s.finger.node_positions[i] += vel * h;
        }
        // Objects are quasi-static: velocity balances the contact force against
        // ground drag, so an object without contact stays exactly put.
        for (size_t k = 0; k < s.objects.size(); ++k) {
            ObjectState& o = s.objects[k];
            const double drag = scene_.movable_objects[k].mass * params_.object_ground_rate;
            o.velocity = fb.object_force[k] * (1.0 / drag);
            if (o.velocity.norm2() > 0.0) o.position += o.velocity * h;
        }
        s.time += h;
    }

    void check_divergence(const SimState& s) const {
        const auto& p = s.finger.node_positions;
        for (int i = 0; i < params_.nodes; ++i) {
            if (!std::isfinite(p[i].x) || !std::isfinite(p[i].y) ||
                !std::isfinite(s.finger.node_velocities[i].x) ||
                !std::isfinite(s.finger.node_velocities[i].y))
                throw DivergenceError("non-finite finger state at node", i);
            if (i > 0 && (p[i] - p[i - 1]).norm() > 3.0 * params_.segment_length)
                throw DivergenceError("finger segment exploded at node", i);
        }
        for (size_t k = 0; k < s.objects.size(); ++k)
            if (!std::isfinite(s.objects[k].position.x) || !std::isfinite(s.objects[k].position.y))
                throw DivergenceError("non-finite object state", static_cast<long>(k));
    }

    SceneSpec scene_;
    SimParams params_;
};

}  // namespace sbs
