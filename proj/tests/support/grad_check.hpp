#pragma once

// Central finite-difference gradient oracle. Lives in test code only; it knows
// nothing about how the ops under test compute their backward pass.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sbs/rng.hpp"
#include "sbs/tensor.hpp"

namespace sbs::testing {

// Builds a scalar loss from the given parameter buffers on a fresh tape.
// Returns the loss tensor; `leaves` receives the leaf tensors in buffer order.
using LossBuilder = std::function<sbs::Tensor<double>(
    sbs::Tape<double>&, const std::vector<std::vector<double>>&, std::vector<sbs::Tensor<double>>&)>;

struct GradCheckResult {
    double max_rel_err = 0.0;
    size_t checked = 0;
    bool ok(double tol) const { return checked > 0 && max_rel_err < tol; }
};

inline GradCheckResult check_gradients(std::vector<std::vector<double>> buffers,
                                       const LossBuilder& build, double fd_step = 1e-5,
                                       double floor = 1e-8) {
    // Analytic pass.
    std::vector<std::vector<double>> analytic(buffers.size());
    {
        sbs::Tape<double> tape;
        std::vector<sbs::Tensor<double>> leaves;
        sbs::Tensor<double> loss = build(tape, buffers, leaves);
        tape.backward(loss);
        for (size_t b = 0; b < buffers.size(); ++b) analytic[b] = leaves[b].grad();
    }
    auto eval = [&](const std::vector<std::vector<double>>& bufs) {
        sbs::Tape<double> tape;
        std::vector<sbs::Tensor<double>> leaves;
        return build(tape, bufs, leaves).item();
    };
    GradCheckResult res;
    for (size_t b = 0; b < buffers.size(); ++b) {
        for (size_t i = 0; i < buffers[b].size(); ++i) {
            const double x0 = buffers[b][i];
            const double h = fd_step * std::max(1.0, std::abs(x0));
            buffers[b][i] = x0 + h;
            const double fp = eval(buffers);
            buffers[b][i] = x0 - h;
            const double fm = eval(buffers);
            buffers[b][i] = x0;
            const double fd = (fp - fm) / (2.0 * h);
            const double g = analytic[b][i];
            const double denom = std::max({floor, std::abs(fd), std::abs(g)});
            res.max_rel_err = std::max(res.max_rel_err, std::abs(fd - g) / denom);
            ++res.checked;
        }
    }
    return res;
}

// Deterministic pseudo-random buffer for oracle inputs.
inline std::vector<double> random_buffer(size_t n, uint64_t seed, double scale = 1.0) {
    sbs::Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-scale, scale);
    return v;
}

}  // namespace sbs::testing
