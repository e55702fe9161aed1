#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sbs/errors.hpp"
#include "sbs/geom.hpp"
#include "sbs/rng.hpp"
#include "sbs/sim.hpp"

namespace sbs {

struct Color {
    uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Color& o) const { return r == o.r && g == o.g && b == o.b; }
};

// Mask labels.
inline constexpr uint8_t kMaskBackground = 0;
inline constexpr uint8_t kMaskFinger = 1;
inline constexpr uint8_t kMaskObjectBase = 2;  // object k -> 2 + k
inline constexpr uint8_t kMaskObstacle = 254;
inline constexpr uint8_t kMaskDistractor = 255;

struct Palette {
    Color background{30, 30, 34};
    Color finger{235, 200, 160};
    Color obstacle{90, 100, 120};
    Color distractor{255, 64, 255};
    // Pool the movable-object color_id indexes into; eleven distinct hues.
    std::vector<Color> objects{
        {220, 60, 50},  {60, 180, 75},  {65, 110, 220}, {250, 190, 40},
        {145, 70, 200}, {70, 220, 210}, {240, 130, 30}, {230, 100, 180},
        {130, 200, 60}, {160, 120, 80}, {0, 150, 140},
    };
};

struct DistractorConfig {
    bool enabled = false;
    double radius = 0.012;      // m
    double walk_sigma = 0.01;   // m per frame
    uint64_t seed = 0;
};

struct RenderConfig {
    int width = 64;
    int height = 64;
    Box view{{-0.03, -0.16}, {0.29, 0.16}};
    Palette palette;
    DistractorConfig distractor;
};

struct LabeledImage {
    int width = 0, height = 0;
    std::vector<uint8_t> rgb;   // H*W*3, row-major
    std::vector<uint8_t> mask;  // H*W

    bool operator==(const LabeledImage& o) const {
        return width == o.width && height == o.height && rgb == o.rgb && mask == o.mask;
    }
};

// The distractor blob wanders on its own seeded walk; it never sees the
// simulator state, so its trajectory is uncorrelated with actions and sensors.
class DistractorState {
public:
    DistractorState(const DistractorConfig& cfg, const Box& view)
        : rng_(cfg.seed), cfg_(cfg), view_(view) {
        position_ = {rng_.uniform(view.min.x, view.max.x), rng_.uniform(view.min.y, view.max.y)};
    }

    Vec2 position() const { return position_; }

    void advance() {
        position_.x = reflect(position_.x + rng_.normal() * cfg_.walk_sigma, view_.min.x, view_.max.x);
        position_.y = reflect(position_.y + rng_.normal() * cfg_.walk_sigma, view_.min.y, view_.max.y);
    }

private:
    static double reflect(double v, double lo, double hi) {
        if (v < lo) v = lo + (lo - v);
        if (v > hi) v = hi - (v - hi);
        return std::clamp(v, lo, hi);  // double reflection for wild steps
    }

    Rng rng_;
    DistractorConfig cfg_;
    Box view_;
    Vec2 position_;
};

class Renderer {
public:
    explicit Renderer(RenderConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.width < 16 || cfg_.height < 16) throw ConfigError("render size must be >= 16");
        validate_palette();
    }

    const RenderConfig& config() const { return cfg_; }

    // Flat-color nearest-pixel rasterization, back to front:
    // background, static obstacles, movable objects, finger, distractor.
    LabeledImage render(const SimState& state, const SceneSpec& scene, const SimParams& params,
                        DistractorState* distractor = nullptr) const {
        LabeledImage img;
        img.width = cfg_.width;
        img.height = cfg_.height;
        img.rgb.resize(static_cast<size_t>(cfg_.width) * cfg_.height * 3);
        img.mask.assign(static_cast<size_t>(cfg_.width) * cfg_.height, kMaskBackground);
        fill_background(img);
        for (const auto& ob : scene.static_obstacles) {
            if (ob.kind == ObstacleShape::kDisc)
                draw_disc(img, ob.disc, cfg_.palette.obstacle, kMaskObstacle);
            else
                draw_box(img, ob.box, cfg_.palette.obstacle, kMaskObstacle);
        }
        for (size_t k = 0; k < state.objects.size(); ++k) {
            const Color c = cfg_.palette.objects[scene.movable_objects[k].color_id %
                                                 cfg_.palette.objects.size()];
            draw_disc(img, {state.objects[k].position, scene.movable_objects[k].disc.radius}, c,
                      static_cast<uint8_t>(kMaskObjectBase + k));
        }
        draw_finger(img, state, params);
        if (cfg_.distractor.enabled && distractor) {
            draw_disc(img, {distractor->position(), cfg_.distractor.radius},
                      cfg_.palette.distractor, kMaskDistractor);
            distractor->advance();
        }
        return img;
    }

    Vec2 pixel_center(int px, int py) const {
        return {cfg_.view.min.x + (px + 0.5) * cfg_.view.width() / cfg_.width,
                cfg_.view.min.y + (py + 0.5) * cfg_.view.height() / cfg_.height};
    }

    double pixels_per_meter_x() const { return cfg_.width / cfg_.view.width(); }
    double pixels_per_meter_y() const { return cfg_.height / cfg_.view.height(); }

private:
    void validate_palette() const {
        std::vector<Color> all{cfg_.palette.background, cfg_.palette.finger,
                               cfg_.palette.obstacle, cfg_.palette.distractor};
        all.insert(all.end(), cfg_.palette.objects.begin(), cfg_.palette.objects.end());
        for (size_t i = 0; i < all.size(); ++i)
            for (size_t j = i + 1; j < all.size(); ++j)
                if (all[i] == all[j]) throw ConfigError("palette colors must be pairwise distinct");
    }

    void put(LabeledImage& img, int px, int py, Color c, uint8_t label) const {
        if (px < 0 || px >= cfg_.width || py < 0 || py >= cfg_.height) return;
        const size_t idx = static_cast<size_t>(py) * cfg_.width + px;
        img.rgb[idx * 3 + 0] = c.r;
        img.rgb[idx * 3 + 1] = c.g;
        img.rgb[idx * 3 + 2] = c.b;
        img.mask[idx] = label;
    }

    void fill_background(LabeledImage& img) const {
        const Color c = cfg_.palette.background;
        for (size_t i = 0; i < img.mask.size(); ++i) {
            img.rgb[i * 3 + 0] = c.r;
            img.rgb[i * 3 + 1] = c.g;
            img.rgb[i * 3 + 2] = c.b;
        }
    }

    void draw_disc(LabeledImage& img, const Disc& d, Color c, uint8_t label) const {
        const double sx = pixels_per_meter_x(), sy = pixels_per_meter_y();
        const int x0 = static_cast<int>(std::floor((d.center.x - d.radius - cfg_.view.min.x) * sx)) - 1;
        const int x1 = static_cast<int>(std::ceil((d.center.x + d.radius - cfg_.view.min.x) * sx)) + 1;
        const int y0 = static_cast<int>(std::floor((d.center.y - d.radius - cfg_.view.min.y) * sy)) - 1;
        const int y1 = static_cast<int>(std::ceil((d.center.y + d.radius - cfg_.view.min.y) * sy)) + 1;
        for (int py = std::max(0, y0); py <= std::min(cfg_.height - 1, y1); ++py)
            for (int px = std::max(0, x0); px <= std::min(cfg_.width - 1, x1); ++px)
                if ((pixel_center(px, py) - d.center).norm2() <= d.radius * d.radius)
                    put(img, px, py, c, label);
    }

    void draw_box(LabeledImage& img, const Box& b, Color c, uint8_t label) const {
        for (int py = 0; py < cfg_.height; ++py)
            for (int px = 0; px < cfg_.width; ++px)
                if (b.contains(pixel_center(px, py))) put(img, px, py, c, label);
    }

    void draw_finger(LabeledImage& img, const SimState& state, const SimParams& params) const {
        // Overlapping skin discs along the chain; sub-radius spacing keeps the
        // rasterized stroke 4-connected.
        const auto& p = state.finger.node_positions;
        const double r = params.skin_radius;
        for (size_t i = 0; i + 1 < p.size(); ++i) {
            const Vec2 seg = p[i + 1] - p[i];
            const double len = seg.norm();
            const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.4 * r))));
            for (int s = 0; s <= steps; ++s)
                draw_disc(img, {p[i] + seg * (static_cast<double>(s) / steps), r},
                          cfg_.palette.finger, kMaskFinger);
        }
    }

    RenderConfig cfg_;
};

}  // namespace sbs
