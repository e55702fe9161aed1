#pragma once

#include <algorithm>
#include <cmath>

namespace sbs {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(const Vec2& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    // 90 degree counter-clockwise rotation.
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

struct Box {
    Vec2 min;
    Vec2 max;

    bool contains(const Vec2& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    Vec2 clamp(const Vec2& p) const {
        return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y)};
    }
    Vec2 center() const { return {(min.x + max.x) * 0.5, (min.y + max.y) * 0.5}; }
    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
};

struct Disc {
    Vec2 center;
    double radius = 0.0;
};

// Signed distance from p to the disc surface (negative inside).
inline double disc_sdf(const Disc& d, const Vec2& p) { return (p - d.center).norm() - d.radius; }

// Signed distance from p to the box surface (negative inside).
inline double box_sdf(const Box& b, const Vec2& p) {
    const Vec2 c = b.center();
    const double hx = 0.5 * b.width(), hy = 0.5 * b.height();
    const double dx = std::abs(p.x - c.x) - hx;
    const double dy = std::abs(p.y - c.y) - hy;
    const double ox = std::max(dx, 0.0), oy = std::max(dy, 0.0);
    return std::sqrt(ox * ox + oy * oy) + std::min(std::max(dx, dy), 0.0);
}

// Outward surface normal at p; falls back to +x for degenerate centers.
inline Vec2 disc_normal(const Disc& d, const Vec2& p) {
    Vec2 r = p - d.center;
    const double n = r.norm();
    if (n < 1e-12) return {1.0, 0.0};
    return r * (1.0 / n);
}

inline Vec2 box_normal(const Box& b, const Vec2& p) {
    const Vec2 c = b.center();
    const double hx = 0.5 * b.width(), hy = 0.5 * b.height();
    const double dx = std::abs(p.x - c.x) - hx;
    const double dy = std::abs(p.y - c.y) - hy;
    if (dx > 0.0 || dy > 0.0) {
        // Outside: normal points from the closest surface point to p.
        Vec2 q{std::clamp(p.x, b.min.x, b.max.x), std::clamp(p.y, b.min.y, b.max.y)};
        Vec2 r = p - q;
        const double n = r.norm();
        if (n < 1e-12) return {1.0, 0.0};
        return r * (1.0 / n);
    }
    // Inside: push out along the least-penetrated axis.
    if (dx > dy) return {(p.x >= c.x) ? 1.0 : -1.0, 0.0};
    return {0.0, (p.y >= c.y) ? 1.0 : -1.0};
}

}  // namespace sbs
