#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace wz::ad {

using Shape = std::vector<int>;

std::size_t numel(const Shape& s);
std::string shape_string(const Shape& s);

struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0);
    Tensor(Shape s, std::vector<double> d);

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
};

class Tape;

/// Handle to a node on a tape. Default-constructed handles are empty.
class Var {
public:
    Var() = default;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    bool valid() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int id() const { return id_; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape; }
    bool requires_grad() const;

private:
    Tape* tape_ = nullptr;
    int id_ = -1;
};

/// Receives (self, upstream gradient, which parents need a gradient) and
/// returns one gradient per parent, empty where not needed. Closures are
/// written with Var ops so that they can be recorded for double backprop.
using Backward = std::function<std::vector<Var>(const Var&, const Var&, const std::vector<bool>&)>;

class Tape {
public:
    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value) { return leaf(std::move(value), false); }
    Var record(Tensor value, std::vector<Var> parents, Backward backward);

    /// Reverse sweep from scalar y. With create_graph the returned
    /// gradients are themselves differentiable.
    std::vector<Var> grad(const Var& y, const std::vector<Var>& xs, bool create_graph = false);

    bool recording() const { return recording_; }
    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

private:
    struct Node {
        Tensor value;
        bool requires_grad = false;
        std::vector<Var> parents;
        Backward backward;
    };
    std::deque<Node> nodes_;
    bool recording_ = true;
};

// Elementwise.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var mul_const(const Var& a, const Tensor& c);
Var square(const Var& a);
Var sqrt(const Var& a);
/// 1/(2a) elementwise, defined as 0 where a == 0.
Var half_inv(const Var& a);
Var leaky_relu(const Var& a, double slope = 0.2);
Var tanh(const Var& a);

// Matrices, [m, k] x [k, n].
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

// Shape.
Var reshape(const Var& a, const Shape& shape);
/// Keeps the leading [h, w] window of the last two axes of [B, C, H, W].
Var crop(const Var& a, int h, int w);
Var pad(const Var& a, int h, int w);

// Channel axis is axis 1 of [B, C, ...].
Var bias_add(const Var& a, const Var& bias);
Var channel_sum(const Var& a);
Var channel_broadcast(const Var& bias, const Shape& shape);

// Reductions.
Var sum(const Var& a);
Var broadcast(const Var& scalar, const Shape& shape);
Var sum_per_sample(const Var& a);
Var broadcast_per_sample(const Var& v, const Shape& shape);
Var mean(const Var& a);

struct ConvGeom {
    int sh = 1, sw = 1, ph = 0, pw = 0;
};

/// x [B, Ci, H, W], w [Co, Ci, kh, kw] -> [B, Co, Ho, Wo].
Var conv2d(const Var& x, const Var& w, ConvGeom g);
/// Adjoint of conv2d in x: y [B, Co, Ho, Wo], w [Co, Ci, kh, kw] -> [B, Ci, h, wd].
Var conv_transpose2d(const Var& y, const Var& w, ConvGeom g, int h, int wd);
/// Adjoint of conv2d in w: x [B, Ci, H, W], y [B, Co, Ho, Wo] -> [Co, Ci, kh, kw].
Var conv2d_weight_grad(const Var& x, const Var& y, ConvGeom g, int kh, int kw);

int conv_out(int in, int k, int s, int p);
int conv_transpose_out(int in, int k, int s, int p);

// Raw kernels, exposed for oracles.
Tensor conv2d_kernel(const Tensor& x, const Tensor& w, ConvGeom g);
Tensor conv_transpose2d_kernel(const Tensor& y, const Tensor& w, ConvGeom g, int h, int wd);
Tensor conv2d_weight_grad_kernel(const Tensor& x, const Tensor& y, ConvGeom g, int kh, int kw);

}  // namespace wz::ad
