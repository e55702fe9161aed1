#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sbs/errors.hpp"
#include "sbs/rng.hpp"

namespace sbs {

inline constexpr int kSensorCount = 6;

struct SensorChannel {
    int window_lo = 0;  // inclusive segment range the sensor aggregates
    int window_hi = 0;
    double gain = 1.0;
    double play_width = 0.05;   // hysteresis deadband half-width
    double drift_sigma = 0.002; // per sqrt(second)
    double noise_sigma = 0.005;
};

struct SensorLayout {
    std::array<SensorChannel, kSensorCount> channels;
    int n_segments = 7;

    bool operator==(const SensorLayout& o) const {
        if (n_segments != o.n_segments) return false;
        for (int i = 0; i < kSensorCount; ++i) {
            const auto& a = channels[i];
            const auto& b = o.channels[i];
            if (a.window_lo != b.window_lo || a.window_hi != b.window_hi || a.gain != b.gain ||
                a.play_width != b.play_width || a.drift_sigma != b.drift_sigma ||
                a.noise_sigma != b.noise_sigma)
                return false;
        }
        return true;
    }
};

struct SensorDefaults {
    double gain = 1.0;
    double play_width = 0.05;
    double drift_sigma = 0.002;
    double noise_sigma = 0.005;
};

class SensorState {
public:
    explicit SensorState(uint64_t seed) : rng_(seed) { play_.fill(0.0); drift_.fill(0.0); }

    std::array<double, kSensorCount> play_memory() const { return play_; }
    std::array<double, kSensorCount> drift_offset() const { return drift_; }

    friend std::array<double, kSensorCount> read_sensors(const SensorLayout&, SensorState&,
                                                         const std::vector<double>&, double);

private:
    std::array<double, kSensorCount> play_;
    std::array<double, kSensorCount> drift_;
    Rng rng_;
};

// Random embedding of six sensors over the strain segments. The segment range
// is first partitioned into six contiguous chunks at random cut points, so the
// windows jointly cover every segment; each window is then stretched by a
// random margin to create overlap between neighbouring sensors.
inline SensorLayout init_layout(uint64_t seed, int n_segments = 7, SensorDefaults defaults = {}) {
    if (n_segments < 1) throw ConfigError("sensor layout needs at least one segment");
    SensorLayout layout;
    layout.n_segments = n_segments;
    Rng rng(seed);
    std::array<int, kSensorCount> lo{}, hi{};
    if (n_segments >= kSensorCount) {
        // 5 distinct ascending cut points in [1, n_segments-1]
        std::vector<int> cuts;
        for (int c = 1; c < n_segments; ++c) cuts.push_back(c);
        for (size_t i = cuts.size() - 1; i > 0; --i)
            std::swap(cuts[i], cuts[rng.uniform_index(i + 1)]);
        cuts.resize(kSensorCount - 1);
        std::sort(cuts.begin(), cuts.end());
        int start = 0;
        for (int i = 0; i < kSensorCount; ++i) {
            const int end = (i == kSensorCount - 1) ? n_segments : cuts[i];
            lo[i] = start;
            hi[i] = end - 1;
            start = end;
        }
    } else {
        for (int i = 0; i < kSensorCount; ++i) lo[i] = hi[i] = i % n_segments;
    }
    for (int i = 0; i < kSensorCount; ++i) {
        SensorChannel& ch = layout.channels[i];
        ch.window_lo = std::max(0, lo[i] - static_cast<int>(rng.uniform_index(3)));
        ch.window_hi = std::min(n_segments - 1, hi[i] + static_cast<int>(rng.uniform_index(3)));
        ch.gain = defaults.gain * rng.uniform(0.8, 1.2);
        ch.play_width = defaults.play_width * rng.uniform(0.7, 1.3);
        ch.drift_sigma = defaults.drift_sigma;
        ch.noise_sigma = defaults.noise_sigma;
    }
    return layout;
}

// One synchronous read of all six sensors. Each channel aggregates the strain
// over its window, passes it through a play (backlash) operator, then adds a
// drift random walk and white measurement noise. The play update is
// rate-independent; only the drift step size depends on dt.
inline std::array<double, kSensorCount> read_sensors(const SensorLayout& layout,
                                                     SensorState& state,
                                                     const std::vector<double>& strains,
                                                     double dt) {
    if (static_cast<int>(strains.size()) != layout.n_segments)
        throw ContractViolation("read_sensors: strain vector length mismatch");
    for (double s : strains) {
        if (!(s >= 0.0) || !std::isfinite(s))
            throw ContractViolation("read_sensors: strains must be nonnegative and finite");
    }
    std::array<double, kSensorCount> out{};
    const double sqrt_dt = std::sqrt(dt);
    for (int i = 0; i < kSensorCount; ++i) {
        const SensorChannel& ch = layout.channels[i];
        double a = 0.0;
        for (int s = ch.window_lo; s <= ch.window_hi; ++s) a += strains[s];
        double& y = state.play_[i];
        y = std::max(a - ch.play_width, std::min(a + ch.play_width, y));
        if (ch.drift_sigma != 0.0) state.drift_[i] += state.rng_.normal() * ch.drift_sigma * sqrt_dt;
        double reading = ch.gain * y + state.drift_[i];
        if (ch.noise_sigma != 0.0) reading += state.rng_.normal() * ch.noise_sigma;
        out[i] = reading;
    }
    return out;
}

// Fraction of segments covered by at least one sensor window.
inline double layout_coverage(const SensorLayout& layout) {
    std::vector<bool> covered(layout.n_segments, false);
    for (const auto& ch : layout.channels)
        for (int s = ch.window_lo; s <= ch.window_hi; ++s) covered[s] = true;
    const int n = static_cast<int>(std::count(covered.begin(), covered.end(), true));
    return static_cast<double>(n) / layout.n_segments;
}

}  // namespace sbs
