#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "wavezoom/autodiff.hpp"

namespace wz::nn {

using ad::Shape;
using ad::Tensor;
using ad::Var;

enum class LayerKind { Dense, Reshape, Conv, ConvT, Crop };
enum class Activation { Linear, LeakyRelu, Tanh };

inline constexpr double kLeakySlope = 0.2;

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    Activation act = Activation::Linear;
    int in = 0, out = 0;                        // dense
    int c_in = 0, c_out = 0, kh = 1, kw = 1;    // conv / convT
    ad::ConvGeom geom;                          // conv / convT
    Shape shape;                                // reshape target, per sample
    int h = 0, w = 0;                           // crop window

    static LayerSpec dense(int in, int out, Activation act);
    static LayerSpec reshape(Shape per_sample);
    static LayerSpec conv(int c_in, int c_out, int kh, int kw, ad::ConvGeom g, Activation act);
    static LayerSpec conv_t(int c_in, int c_out, int kh, int kw, ad::ConvGeom g, Activation act);
    static LayerSpec crop(int h, int w);

    std::size_t weight_count() const;
    std::size_t bias_count() const;
    Shape weight_shape() const;
};

struct NetSpec {
    Shape input;  // per sample, without the batch axis
    std::vector<LayerSpec> layers;

    /// Per-sample shapes after each layer; throws ShapeError if layers do not compose.
    std::vector<Shape> shapes() const;
    Shape output() const;
    std::size_t param_count() const;
    /// Offset of each layer's weights in the flat parameter vector.
    std::vector<std::size_t> offsets() const;
};

void to_json(nlohmann::json& j, const NetSpec& s);
void from_json(const nlohmann::json& j, NetSpec& s);

/// Glorot-uniform weights, zero biases.
std::vector<double> init_params(const NetSpec& spec, std::uint64_t seed);

/// Per-layer weight and bias leaves on a tape, views of a flat vector.
struct Bound {
    std::vector<Var> weights;
    std::vector<Var> biases;

    std::vector<Var> all() const;
};

Bound bind(ad::Tape& tape, const NetSpec& spec, const std::vector<double>& theta, bool requires_grad = true);

/// Gradients returned by Tape::grad for bind(...).all(), flattened into theta layout.
std::vector<double> flatten(const NetSpec& spec, const std::vector<Var>& grads);

/// Input is [B, spec.input...]; output is [B, spec.output()...].
Var forward(const NetSpec& spec, const Bound& params, const Var& x);

/// Forward pass with no recording.
Tensor predict(const NetSpec& spec, const std::vector<double>& theta, const Tensor& x);

struct Penalty {
    double value = 0.0;
    std::vector<double> grad;
};

enum class PenaltyMode { Exact, FiniteDifference };

/// Mean over the batch of (||grad_x D(x)|| - 1)^2 as a differentiable node.
/// At ||grad_x D|| = 0 the subgradient 0 is used.
Var gradient_penalty(const NetSpec& spec, const Bound& params, const Tensor& xhat);

/// Penalty value and its theta-gradient. The finite-difference mode takes
/// grad_x D from one reverse pass and replaces the second-order term by a
/// central difference of D along v = dP/dg.
Penalty input_grad_norm_penalty(const NetSpec& spec, const std::vector<double>& theta, const Tensor& xhat,
                                PenaltyMode mode = PenaltyMode::Exact);

struct AdamState {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<double> m, v;
};

void to_json(nlohmann::json& j, const AdamState& s);
void from_json(const nlohmann::json& j, AdamState& s);

void adam_step(AdamState& state, std::vector<double>& theta, const std::vector<double>& grad);

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

}  // namespace wz::nn
