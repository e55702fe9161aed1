#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "sbs/errors.hpp"

namespace sbs {

// Dense row-major tensor with reverse-mode differentiation. Images are laid
// out H x W x C so renderer bytes map straight onto channel-contiguous data.
//
// A Tape owns every node created through it, in creation order; creation order
// is the topological order, and backward() walks it in reverse exactly once.
// Instantiated with T=float for training and T=double for gradient checks.

template <typename T>
struct TensorNode {
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;  // allocated on first touch; empty means "no gradient yet"
    std::function<void()> backward;
    bool needs_grad = false;

    size_t size() const { return value.size(); }
    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), T(0));
    }
};

inline size_t shape_numel(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
}

template <typename T>
class Tape;

template <typename T>
class Tensor {
public:
    Tensor() = default;
    Tensor(std::shared_ptr<TensorNode<T>> node, Tape<T>* tape) : node_(std::move(node)), tape_(tape) {}

    bool valid() const { return static_cast<bool>(node_); }
    const std::vector<int>& shape() const { return node_->shape; }
    size_t size() const { return node_->size(); }
    std::vector<T>& data() { return node_->value; }
    const std::vector<T>& data() const { return node_->value; }
    const std::vector<T>& grad() const {
        const_cast<TensorNode<T>*>(node_.get())->ensure_grad();
        return node_->grad;
    }
    T item() const {
        if (node_->value.size() != 1) throw ContractViolation("item() on non-scalar tensor");
        return node_->value[0];
    }

    TensorNode<T>* node() const { return node_.get(); }
    std::shared_ptr<TensorNode<T>> node_ptr() const { return node_; }
    Tape<T>* tape() const { return tape_; }

private:
    std::shared_ptr<TensorNode<T>> node_;
    Tape<T>* tape_ = nullptr;
};

template <typename T>
class Tape {
public:
    Tensor<T> leaf(std::vector<int> shape, std::vector<T> data, bool needs_grad = false) {
        if (shape_numel(shape) != data.size())
            throw ContractViolation("leaf: data length does not match shape");
        auto n = std::make_shared<TensorNode<T>>();
        n->shape = std::move(shape);
        n->value = std::move(data);
        n->needs_grad = needs_grad;
        nodes_.push_back(n);
        return Tensor<T>(n, this);
    }

    Tensor<T> leaf(std::vector<int> shape, const T* data, bool needs_grad = false) {
        return leaf(std::move(shape), std::vector<T>(data, data + shape_numel(shape)), needs_grad);
    }

    Tensor<T> zeros(std::vector<int> shape, bool needs_grad = false) {
        return leaf(std::move(shape), std::vector<T>(shape_numel(shape), T(0)), needs_grad);
    }

    // Internal: register an op result. The closure must add into the parents'
    // grad buffers using this node's grad.
    Tensor<T> make(std::vector<int> shape, std::vector<T> value, bool needs_grad,
                   std::function<void()> backward) {
        auto n = std::make_shared<TensorNode<T>>();
        n->shape = std::move(shape);
        n->value = std::move(value);
        n->needs_grad = needs_grad;
        if (needs_grad) n->backward = std::move(backward);
        nodes_.push_back(n);
        return Tensor<T>(n, this);
    }

    // Reverse sweep from `loss` (a scalar). Leaf gradients accumulate across
    // sweeps; internal-node gradients are scratch and are cleared afterwards,
    // so two backward calls add up exactly like one call on the summed loss.
    void backward(const Tensor<T>& loss) {
        if (loss.size() != 1) throw ContractViolation("backward: loss must be scalar");
        TensorNode<T>* target = loss.node();
        target->ensure_grad();
        target->grad[0] += T(1);
        size_t start = nodes_.size();
        while (start > 0 && nodes_[start - 1].get() != target) --start;
        if (start == 0) throw ContractViolation("backward: loss not found on this tape");
        for (size_t i = start; i-- > 0;) {
            TensorNode<T>* n = nodes_[i].get();
            if (n->backward && !n->grad.empty()) n->backward();
        }
        for (size_t i = 0; i < start; ++i) {
            TensorNode<T>* n = nodes_[i].get();
            if (n->backward) n->grad.clear();
        }
    }

    size_t node_count() const { return nodes_.size(); }

private:
    std::vector<std::shared_ptr<TensorNode<T>>> nodes_;
};

namespace ops {

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) throw ContractViolation("add: shape mismatch");
    std::vector<T> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + b.data()[i];
    auto an = a.node_ptr(), bn = b.node_ptr();
    const bool ng = an->needs_grad || bn->needs_grad;
    Tensor<T> out;
    auto* tape = a.tape();
    out = tape->make(a.shape(), std::move(v), ng, nullptr);
    if (ng) {
        TensorNode<T>* on = out.node();
        on->backward = [an, bn, on] {
            if (an->needs_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            }
            if (bn->needs_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i];
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
    std::vector<T> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * s;
    auto an = a.node_ptr();
    Tensor<T> out = a.tape()->make(a.shape(), std::move(v), an->needs_grad, nullptr);
    if (an->needs_grad) {
        TensorNode<T>* on = out.node();
        on->backward = [an, on, s] {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * s;
        };
    }
    return out;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, std::vector<int> shape) {
    if (shape_numel(shape) != a.size()) throw ContractViolation("reshape: element count mismatch");
    auto an = a.node_ptr();
    Tensor<T> out = a.tape()->make(std::move(shape), a.data(), an->needs_grad, nullptr);
    if (an->needs_grad) {
        TensorNode<T>* on = out.node();
        on->backward = [an, on] {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        };
    }
    return out;
}

template <typename T>
Tensor<T> slice1d(const Tensor<T>& a, int begin, int end) {
    if (begin < 0 || end > static_cast<int>(a.size()) || begin >= end)
        throw ContractViolation("slice1d: bad range");
    std::vector<T> v(a.data().begin() + begin, a.data().begin() + end);
    auto an = a.node_ptr();
    Tensor<T> out = a.tape()->make({end - begin}, std::move(v), an->needs_grad, nullptr);
    if (an->needs_grad) {
        TensorNode<T>* on = out.node();
        on->backward = [an, on, begin] {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[begin + i] += on->grad[i];
        };
    }
    return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
    std::vector<T> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] > T(0) ? a.data()[i] : T(0);
    auto an = a.node_ptr();
    Tensor<T> out = a.tape()->make(a.shape(), std::move(v), an->needs_grad, nullptr);
    if (an->needs_grad) {
        TensorNode<T>* on = out.node();
        on->backward = [an, on] {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i)
                if (an->value[i] > T(0)) an->grad[i] += on->grad[i];
        };
    }
    return out;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
    std::vector<T> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = T(1) / (T(1) + std::exp(-a.data()[i]));
    auto an = a.node_ptr();
    Tensor<T> out = a.tape()->make(a.shape(), std::move(v), an->needs_grad, nullptr);
    if (an->needs_grad) {
        TensorNode<T>* on = out.node();
        on->backward = [an, on] {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) {
                const T s = on->value[i];
                an->grad[i] += on->grad[i] * s * (T(1) - s);
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> tanh_op(const Tensor<T>& a) {
    std::vector<T> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(a.data()[i]);
    auto an = a.node_ptr();
    Tensor<T> out = a.tape()->make(a.shape(), std::move(v), an->needs_grad, nullptr);
    if (an->needs_grad) {
        TensorNode<T>* on = out.node();
        on->backward = [an, on] {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i)
                an->grad[i] += on->grad[i] * (T(1) - on->value[i] * on->value[i]);
        };
    }
    return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
    T s = T(0);
    for (const T& x : a.data()) s += x;
    auto an = a.node_ptr();
    Tensor<T> out = a.tape()->make({1}, {s}, an->needs_grad, nullptr);
    if (an->needs_grad) {
        TensorNode<T>* on = out.node();
        on->backward = [an, on] {
            an->ensure_grad();
            for (size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += on->grad[0];
        };
    }
    return out;
}

// y = W x + b with W of shape [out, in].
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& W, const Tensor<T>& b) {
    if (W.shape().size() != 2 || x.shape().size() != 1)
        throw ContractViolation("dense: expects vector input and 2-d weights");
    const int out_dim = W.shape()[0], in_dim = W.shape()[1];
    if (in_dim != x.shape()[0] || b.shape() != std::vector<int>{out_dim})
        throw ContractViolation("dense: shape mismatch");
    std::vector<T> v(out_dim);
    const T* wd = W.data().data();
    const T* xd = x.data().data();
    for (int o = 0; o < out_dim; ++o) {
        T acc = b.data()[o];
        const T* row = wd + static_cast<size_t>(o) * in_dim;
        for (int i = 0; i < in_dim; ++i) acc += row[i] * xd[i];
        v[o] = acc;
    }
    auto xn = x.node_ptr(), wn = W.node_ptr(), bn = b.node_ptr();
    const bool ng = xn->needs_grad || wn->needs_grad || bn->needs_grad;
    Tensor<T> out = x.tape()->make({out_dim}, std::move(v), ng, nullptr);
    if (ng) {
        TensorNode<T>* on = out.node();
        on->backward = [xn, wn, bn, on, out_dim, in_dim] {
            const T* g = on->grad.data();
            if (xn->needs_grad) {
                xn->ensure_grad();
                for (int o = 0; o < out_dim; ++o) {
                    const T go = g[o];
                    const T* row = wn->value.data() + static_cast<size_t>(o) * in_dim;
                    for (int i = 0; i < in_dim; ++i) xn->grad[i] += go * row[i];
                }
            }
            if (wn->needs_grad) {
                wn->ensure_grad();
                for (int o = 0; o < out_dim; ++o) {
                    const T go = g[o];
                    T* row = wn->grad.data() + static_cast<size_t>(o) * in_dim;
                    for (int i = 0; i < in_dim; ++i) row[i] += go * xn->value[i];
                }
            }
            if (bn->needs_grad) {
                bn->ensure_grad();
                for (int o = 0; o < out_dim; ++o) bn->grad[o] += g[o];
            }
        };
    }
    return out;
}

inline int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}
inline int convt_out_dim(int in, int k, int stride, int pad) {
    return (in - 1) * stride - 2 * pad + k;
}

// Cross-correlation with zero padding. Input [H,W,Cin], kernel [K,K,Cin,Cout],
// bias [Cout] (may be invalid for none).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>& bias, int stride,
                 int pad) {
    if (x.shape().size() != 3 || k.shape().size() != 4)
        throw ContractViolation("conv2d: expects HWC input and KKCC kernel");
    const int H = x.shape()[0], W = x.shape()[1], Cin = x.shape()[2];
    const int K = k.shape()[0], Cout = k.shape()[3];
    if (k.shape()[1] != K || k.shape()[2] != Cin) throw ContractViolation("conv2d: kernel shape mismatch");
    if (H + 2 * pad < K || W + 2 * pad < K) throw ContractViolation("conv2d: kernel larger than padded input");
    const int Ho = conv_out_dim(H, K, stride, pad), Wo = conv_out_dim(W, K, stride, pad);
    std::vector<T> v(static_cast<size_t>(Ho) * Wo * Cout, T(0));
    const T* xd = x.data().data();
    const T* kd = k.data().data();
    for (int yo = 0; yo < Ho; ++yo) {
        for (int xo = 0; xo < Wo; ++xo) {
            T* out = v.data() + (static_cast<size_t>(yo) * Wo + xo) * Cout;
            for (int ky = 0; ky < K; ++ky) {
                const int yi = yo * stride - pad + ky;
                if (yi < 0 || yi >= H) continue;
                for (int kx = 0; kx < K; ++kx) {
                    const int xi = xo * stride - pad + kx;
                    if (xi < 0 || xi >= W) continue;
                    const T* in = xd + (static_cast<size_t>(yi) * W + xi) * Cin;
                    const T* kk = kd + (static_cast<size_t>(ky) * K + kx) * Cin * Cout;
                    for (int ci = 0; ci < Cin; ++ci) {
                        const T iv = in[ci];
                        const T* kr = kk + static_cast<size_t>(ci) * Cout;
                        for (int co = 0; co < Cout; ++co) out[co] += iv * kr[co];
                    }
                }
            }
        }
    }
    const bool has_bias = bias.valid();
    if (has_bias) {
        if (bias.shape() != std::vector<int>{Cout}) throw ContractViolation("conv2d: bias shape mismatch");
        for (size_t p = 0; p < v.size(); p += Cout)
            for (int co = 0; co < Cout; ++co) v[p + co] += bias.data()[co];
    }
    auto xn = x.node_ptr(), kn = k.node_ptr();
    auto bn = has_bias ? bias.node_ptr() : nullptr;
    const bool ng = xn->needs_grad || kn->needs_grad || (bn && bn->needs_grad);
    Tensor<T> out = x.tape()->make({Ho, Wo, Cout}, std::move(v), ng, nullptr);
    if (ng) {
        TensorNode<T>* on = out.node();
        on->backward = [xn, kn, bn, on, H, W, Cin, K, Cout, Ho, Wo, stride, pad] {
            const T* g = on->grad.data();
            const bool gx = xn->needs_grad, gk = kn->needs_grad;
            if (gx) xn->ensure_grad();
            if (gk) kn->ensure_grad();
            for (int yo = 0; yo < Ho; ++yo) {
                for (int xo = 0; xo < Wo; ++xo) {
                    const T* go = g + (static_cast<size_t>(yo) * Wo + xo) * Cout;
                    for (int ky = 0; ky < K; ++ky) {
                        const int yi = yo * stride - pad + ky;
                        if (yi < 0 || yi >= H) continue;
                        for (int kx = 0; kx < K; ++kx) {
                            const int xi = xo * stride - pad + kx;
                            if (xi < 0 || xi >= W) continue;
                            const size_t ibase = (static_cast<size_t>(yi) * W + xi) * Cin;
                            const size_t kbase = (static_cast<size_t>(ky) * K + kx) * Cin * Cout;
                            for (int ci = 0; ci < Cin; ++ci) {
                                const T* kr = kn->value.data() + kbase + static_cast<size_t>(ci) * Cout;
                                if (gx) {
                                    T acc = T(0);
                                    for (int co = 0; co < Cout; ++co) acc += go[co] * kr[co];
                                    xn->grad[ibase + ci] += acc;
                                }
                                if (gk) {
                                    const T iv = xn->value[ibase + ci];
                                    T* kg = kn->grad.data() + kbase + static_cast<size_t>(ci) * Cout;
                                    for (int co = 0; co < Cout; ++co) kg[co] += iv * go[co];
                                }
                            }
                        }
                    }
                }
            }
            if (bn && bn->needs_grad) {
                bn->ensure_grad();
                for (size_t p = 0; p < on->grad.size(); p += Cout)
                    for (int co = 0; co < Cout; ++co) bn->grad[co] += on->grad[p + co];
            }
        };
    }
    return out;
}

// Transposed convolution, the exact adjoint of conv2d under the same kernel:
// <conv2d(x,k), y> == <x, conv_transpose2d(y,k)>. Kernel layout [K,K,C1,C2]
// where C2 is this op's input channel count and C1 its output channel count.
template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>& bias,
                           int stride, int pad) {
    if (x.shape().size() != 3 || k.shape().size() != 4)
        throw ContractViolation("conv_transpose2d: expects HWC input and KKCC kernel");
    const int H = x.shape()[0], W = x.shape()[1], C2 = x.shape()[2];
    const int K = k.shape()[0], C1 = k.shape()[2];
    if (k.shape()[1] != K || k.shape()[3] != C2)
        throw ContractViolation("conv_transpose2d: kernel shape mismatch");
    const int Ho = convt_out_dim(H, K, stride, pad), Wo = convt_out_dim(W, K, stride, pad);
    if (Ho < 1 || Wo < 1) throw ContractViolation("conv_transpose2d: empty output");
    std::vector<T> v(static_cast<size_t>(Ho) * Wo * C1, T(0));
    const T* xd = x.data().data();
    const T* kd = k.data().data();
    for (int yi = 0; yi < H; ++yi) {
        for (int xi = 0; xi < W; ++xi) {
            const T* in = xd + (static_cast<size_t>(yi) * W + xi) * C2;
            for (int ky = 0; ky < K; ++ky) {
                const int yo = yi * stride - pad + ky;
                if (yo < 0 || yo >= Ho) continue;
                for (int kx = 0; kx < K; ++kx) {
                    const int xo = xi * stride - pad + kx;
                    if (xo < 0 || xo >= Wo) continue;
                    T* out = v.data() + (static_cast<size_t>(yo) * Wo + xo) * C1;
                    const T* kk = kd + (static_cast<size_t>(ky) * K + kx) * C1 * C2;
                    for (int c1 = 0; c1 < C1; ++c1) {
                        const T* kr = kk + static_cast<size_t>(c1) * C2;
                        T acc = T(0);
                        for (int c2 = 0; c2 < C2; ++c2) acc += in[c2] * kr[c2];
                        out[c1] += acc;
                    }
                }
            }
        }
    }
    const bool has_bias = bias.valid();
    if (has_bias) {
        if (bias.shape() != std::vector<int>{C1})
            throw ContractViolation("conv_transpose2d: bias shape mismatch");
        for (size_t p = 0; p < v.size(); p += C1)
            for (int c1 = 0; c1 < C1; ++c1) v[p + c1] += bias.data()[c1];
    }
    auto xn = x.node_ptr(), kn = k.node_ptr();
    auto bn = has_bias ? bias.node_ptr() : nullptr;
    const bool ng = xn->needs_grad || kn->needs_grad || (bn && bn->needs_grad);
    Tensor<T> out = x.tape()->make({Ho, Wo, C1}, std::move(v), ng, nullptr);
    if (ng) {
        TensorNode<T>* on = out.node();
        on->backward = [xn, kn, bn, on, H, W, C2, K, C1, Ho, Wo, stride, pad] {
            const T* g = on->grad.data();
            const bool gx = xn->needs_grad, gk = kn->needs_grad;
            if (gx) xn->ensure_grad();
            if (gk) kn->ensure_grad();
            for (int yi = 0; yi < H; ++yi) {
                for (int xi = 0; xi < W; ++xi) {
                    const size_t ibase = (static_cast<size_t>(yi) * W + xi) * C2;
                    for (int ky = 0; ky < K; ++ky) {
                        const int yo = yi * stride - pad + ky;
                        if (yo < 0 || yo >= Ho) continue;
                        for (int kx = 0; kx < K; ++kx) {
                            const int xo = xi * stride - pad + kx;
                            if (xo < 0 || xo >= Wo) continue;
                            const T* go = g + (static_cast<size_t>(yo) * Wo + xo) * C1;
                            const size_t kbase = (static_cast<size_t>(ky) * K + kx) * C1 * C2;
                            for (int c1 = 0; c1 < C1; ++c1) {
                                const T gv = go[c1];
                                const T* kr = kn->value.data() + kbase + static_cast<size_t>(c1) * C2;
                                if (gx)
                                    for (int c2 = 0; c2 < C2; ++c2) xn->grad[ibase + c2] += gv * kr[c2];
                                if (gk) {
                                    T* kg = kn->grad.data() + kbase + static_cast<size_t>(c1) * C2;
                                    for (int c2 = 0; c2 < C2; ++c2) kg[c2] += gv * xn->value[ibase + c2];
                                }
                            }
                        }
                    }
                }
            }
            if (bn && bn->needs_grad) {
                bn->ensure_grad();
                for (size_t p = 0; p < on->grad.size(); p += C1)
                    for (int c1 = 0; c1 < C1; ++c1) bn->grad[c1] += on->grad[p + c1];
            }
        };
    }
    return out;
}

// Mean squared error over all elements.
template <typename T>
Tensor<T> mse(const Tensor<T>& pred, const Tensor<T>& target) {
    if (pred.shape() != target.shape()) throw ContractViolation("mse: shape mismatch");
    const size_t n = pred.size();
    T acc = T(0);
    for (size_t i = 0; i < n; ++i) {
        const T d = pred.data()[i] - target.data()[i];
        acc += d * d;
    }
    acc /= static_cast<T>(n);
    auto pn = pred.node_ptr(), tn = target.node_ptr();
    const bool ng = pn->needs_grad || tn->needs_grad;
    Tensor<T> out = pred.tape()->make({1}, {acc}, ng, nullptr);
    if (ng) {
        TensorNode<T>* on = out.node();
        on->backward = [pn, tn, on, n] {
            const T g = on->grad[0] * T(2) / static_cast<T>(n);
            if (pn->needs_grad) {
                pn->ensure_grad();
                for (size_t i = 0; i < n; ++i) pn->grad[i] += g * (pn->value[i] - tn->value[i]);
            }
            if (tn->needs_grad) {
                tn->ensure_grad();
                for (size_t i = 0; i < n; ++i) tn->grad[i] -= g * (pn->value[i] - tn->value[i]);
            }
        };
    }
    return out;
}

// One LSTM cell step. Weights: Wx [4U,X], Wh [4U,U], b [4U]; gate order is
// input, forget, candidate, output. Returns (h_next, c_next).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> lstm_step(const Tensor<T>& x, const Tensor<T>& h,
                                          const Tensor<T>& c, const Tensor<T>& Wx,
                                          const Tensor<T>& Wh, const Tensor<T>& b) {
    const int X = x.shape()[0];
    const int U4 = Wx.shape()[0];
    const int U = U4 / 4;
    if (U4 % 4 != 0 || Wx.shape()[1] != X || Wh.shape() != std::vector<int>{U4, U} ||
        b.shape() != std::vector<int>{U4} || h.shape() != std::vector<int>{U} ||
        c.shape() != std::vector<int>{U})
        throw ContractViolation("lstm_step: inconsistent dimensions");

    // gates = Wx x + Wh h + b, then split into i,f,g,o
    auto gates = std::make_shared<std::vector<T>>(U4);
    for (int r = 0; r < U4; ++r) {
        T acc = b.data()[r];
        const T* wxr = Wx.data().data() + static_cast<size_t>(r) * X;
        for (int i = 0; i < X; ++i) acc += wxr[i] * x.data()[i];
        const T* whr = Wh.data().data() + static_cast<size_t>(r) * U;
        for (int i = 0; i < U; ++i) acc += whr[i] * h.data()[i];
        (*gates)[r] = acc;
    }
    auto act = std::make_shared<std::vector<T>>(U4);  // activated gates
    for (int u = 0; u < U; ++u) {
        (*act)[u] = T(1) / (T(1) + std::exp(-(*gates)[u]));                  // i
        (*act)[U + u] = T(1) / (T(1) + std::exp(-(*gates)[U + u]));          // f
        (*act)[2 * U + u] = std::tanh((*gates)[2 * U + u]);                  // g
        (*act)[3 * U + u] = T(1) / (T(1) + std::exp(-(*gates)[3 * U + u]));  // o
    }
    // fused output [h'(U); c'(U)]
    std::vector<T> hc(2 * U);
    auto tanh_c = std::make_shared<std::vector<T>>(U);
    for (int u = 0; u < U; ++u) {
        const T cu = (*act)[U + u] * c.data()[u] + (*act)[u] * (*act)[2 * U + u];
        hc[U + u] = cu;
        (*tanh_c)[u] = std::tanh(cu);
        hc[u] = (*act)[3 * U + u] * (*tanh_c)[u];
    }
    auto xn = x.node_ptr(), hn = h.node_ptr(), cn = c.node_ptr();
    auto wxn = Wx.node_ptr(), whn = Wh.node_ptr(), bn = b.node_ptr();
    const bool ng = xn->needs_grad || hn->needs_grad || cn->needs_grad || wxn->needs_grad ||
                    whn->needs_grad || bn->needs_grad;
    Tensor<T> fused = x.tape()->make({2 * U}, std::move(hc), ng, nullptr);
    if (ng) {
        TensorNode<T>* on = fused.node();
        on->backward = [xn, hn, cn, wxn, whn, bn, on, act, tanh_c, X, U] {
            std::vector<T> dgate(4 * U);  // grads of pre-activation gates
            for (int u = 0; u < U; ++u) {
                const T gh = on->grad[u];
                T gc = on->grad[U + u];
                const T i = (*act)[u], f = (*act)[U + u], g = (*act)[2 * U + u],
                        o = (*act)[3 * U + u];
                const T tc = (*tanh_c)[u];
                // h = o * tanh(c'); c' = f*c + i*g
                const T go_act = gh * tc;
                gc += gh * o * (T(1) - tc * tc);
                dgate[3 * U + u] = go_act * o * (T(1) - o);
                dgate[u] = gc * g * i * (T(1) - i);
                dgate[U + u] = gc * cn->value[u] * f * (T(1) - f);
                dgate[2 * U + u] = gc * i * (T(1) - g * g);
                if (cn->needs_grad) {
                    cn->ensure_grad();
                    cn->grad[u] += gc * f;
                }
            }
            if (bn->needs_grad) {
                bn->ensure_grad();
                for (int r = 0; r < 4 * U; ++r) bn->grad[r] += dgate[r];
            }
            if (wxn->needs_grad) {
                wxn->ensure_grad();
                for (int r = 0; r < 4 * U; ++r) {
                    T* row = wxn->grad.data() + static_cast<size_t>(r) * X;
                    for (int i2 = 0; i2 < X; ++i2) row[i2] += dgate[r] * xn->value[i2];
                }
            }
            if (whn->needs_grad) {
                whn->ensure_grad();
                for (int r = 0; r < 4 * U; ++r) {
                    T* row = whn->grad.data() + static_cast<size_t>(r) * U;
                    for (int i2 = 0; i2 < U; ++i2) row[i2] += dgate[r] * hn->value[i2];
                }
            }
            if (xn->needs_grad) {
                xn->ensure_grad();
                for (int r = 0; r < 4 * U; ++r) {
                    const T* row = wxn->value.data() + static_cast<size_t>(r) * X;
                    for (int i2 = 0; i2 < X; ++i2) xn->grad[i2] += dgate[r] * row[i2];
                }
            }
            if (hn->needs_grad) {
                hn->ensure_grad();
                for (int r = 0; r < 4 * U; ++r) {
                    const T* row = whn->value.data() + static_cast<size_t>(r) * U;
                    for (int i2 = 0; i2 < U; ++i2) hn->grad[i2] += dgate[r] * row[i2];
                }
            }
        };
    }
    Tensor<T> h_next = slice1d(fused, 0, U);
    Tensor<T> c_next = slice1d(fused, U, 2 * U);
    return {h_next, c_next};
}

}  // namespace ops

// Adam with bias correction; moments live beside each parameter buffer.
template <typename T>
struct AdamState {
    std::vector<T> m, v;
    int64_t t = 0;
};

template <typename T>
void adam_update(std::vector<T>& param, const std::vector<T>& grad, AdamState<T>& st, T lr,
                 T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8)) {
    if (param.size() != grad.size()) throw ContractViolation("adam_update: size mismatch");
    if (st.m.size() != param.size()) {
        st.m.assign(param.size(), T(0));
        st.v.assign(param.size(), T(0));
        st.t = 0;
    }
    ++st.t;
    const T bc1 = T(1) - std::pow(beta1, static_cast<T>(st.t));
    const T bc2 = T(1) - std::pow(beta2, static_cast<T>(st.t));
    for (size_t i = 0; i < param.size(); ++i) {
        st.m[i] = beta1 * st.m[i] + (T(1) - beta1) * grad[i];
        st.v[i] = beta2 * st.v[i] + (T(1) - beta2) * grad[i] * grad[i];
        const T mhat = st.m[i] / bc1;
        const T vhat = st.v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace sbs
