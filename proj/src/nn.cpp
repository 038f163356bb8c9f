#include "wavezoom/nn.hpp"

#include <cmath>

#include "wavezoom/errors.hpp"
#include "wavezoom/rng.hpp"

namespace wz::nn {

LayerSpec LayerSpec::dense(int in, int out, Activation act) {
    LayerSpec l;
    l.kind = LayerKind::Dense;
    l.in = in;
    l.out = out;
    l.act = act;
    return l;
}

LayerSpec LayerSpec::reshape(Shape per_sample) {
    LayerSpec l;
    l.kind = LayerKind::Reshape;
    l.shape = std::move(per_sample);
    return l;
}

LayerSpec LayerSpec::conv(int c_in, int c_out, int kh, int kw, ad::ConvGeom g, Activation act) {
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.c_in = c_in;
    l.c_out = c_out;
    l.kh = kh;
    l.kw = kw;
    l.geom = g;
    l.act = act;
    return l;
}

LayerSpec LayerSpec::conv_t(int c_in, int c_out, int kh, int kw, ad::ConvGeom g, Activation act) {
    LayerSpec l = conv(c_in, c_out, kh, kw, g, act);
    l.kind = LayerKind::ConvT;
    return l;
}

LayerSpec LayerSpec::crop(int h, int w) {
    LayerSpec l;
    l.kind = LayerKind::Crop;
    l.h = h;
    l.w = w;
    return l;
}

std::size_t LayerSpec::weight_count() const {
    switch (kind) {
        case LayerKind::Dense: return static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
        case LayerKind::Conv:
        case LayerKind::ConvT: return ad::numel(weight_shape());
        default: return 0;
    }
}

std::size_t LayerSpec::bias_count() const {
    switch (kind) {
        case LayerKind::Dense: return static_cast<std::size_t>(out);
        case LayerKind::Conv:
        case LayerKind::ConvT: return static_cast<std::size_t>(c_out);
        default: return 0;
    }
}

Shape LayerSpec::weight_shape() const {
    switch (kind) {
        case LayerKind::Dense: return {out, in};
        case LayerKind::Conv: return {c_out, c_in, kh, kw};
        case LayerKind::ConvT: return {c_in, c_out, kh, kw};
        default: return {};
    }
}

std::vector<Shape> NetSpec::shapes() const {
    std::vector<Shape> out;
    Shape cur = input;
    if (cur.empty()) throw ShapeError("network input shape is empty");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const LayerSpec& l = layers[k];
        const std::string where = "layer " + std::to_string(k) + ": ";
        switch (l.kind) {
            case LayerKind::Dense:
                if (cur != Shape{l.in})
                    throw ShapeError(where + "dense expects [" + std::to_string(l.in) + "], got " + ad::shape_string(cur));
                if (l.out < 1) throw ShapeError(where + "dense output width must be positive");
                cur = {l.out};
                break;
            case LayerKind::Reshape:
                if (ad::numel(l.shape) != ad::numel(cur))
                    throw ShapeError(where + "cannot reshape " + ad::shape_string(cur) + " to " + ad::shape_string(l.shape));
                cur = l.shape;
                break;
            case LayerKind::Conv:
            case LayerKind::ConvT: {
                if (cur.size() != 3 || cur[0] != l.c_in)
                    throw ShapeError(where + "convolution expects [" + std::to_string(l.c_in) + ",H,W], got " +
                                     ad::shape_string(cur));
                if (l.c_out < 1 || l.kh < 1 || l.kw < 1 || l.geom.sh < 1 || l.geom.sw < 1 || l.geom.ph < 0 || l.geom.pw < 0)
                    throw ShapeError(where + "invalid convolution geometry");
                const bool t = l.kind == LayerKind::ConvT;
                const int h = t ? ad::conv_transpose_out(cur[1], l.kh, l.geom.sh, l.geom.ph)
                                : ad::conv_out(cur[1], l.kh, l.geom.sh, l.geom.ph);
                const int w = t ? ad::conv_transpose_out(cur[2], l.kw, l.geom.sw, l.geom.pw)
                                : ad::conv_out(cur[2], l.kw, l.geom.sw, l.geom.pw);
                if (h < 1 || w < 1) throw ShapeError(where + "convolution output is empty for " + ad::shape_string(cur));
                cur = {l.c_out, h, w};
                break;
            }
            case LayerKind::Crop:
                if (cur.size() != 3 || l.h < 1 || l.w < 1 || l.h > cur[1] || l.w > cur[2])
                    throw ShapeError(where + "cannot crop " + ad::shape_string(cur) + " to " + std::to_string(l.h) + "x" +
                                     std::to_string(l.w));
                cur = {cur[0], l.h, l.w};
                break;
        }
        out.push_back(cur);
    }
    return out;
}

Shape NetSpec::output() const {
    const auto s = shapes();
    return s.empty() ? input : s.back();
}

std::size_t NetSpec::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight_count() + l.bias_count();
    return n;
}

std::vector<std::size_t> NetSpec::offsets() const {
    std::vector<std::size_t> out;
    std::size_t n = 0;
    for (const auto& l : layers) {
        out.push_back(n);
        n += l.weight_count() + l.bias_count();
    }
    return out;
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Tanh: return "tanh";
    }
    return "linear";
}

Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "leaky_relu") return Activation::LeakyRelu;
    if (s == "tanh") return Activation::Tanh;
    throw ShapeError("unknown activation '" + s + "'");
}

namespace {

const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Dense: return "dense";
        case LayerKind::Reshape: return "reshape";
        case LayerKind::Conv: return "conv";
        case LayerKind::ConvT: return "conv_t";
        case LayerKind::Crop: return "crop";
    }
    return "dense";
}

LayerKind kind_from(const std::string& s) {
    if (s == "dense") return LayerKind::Dense;
    if (s == "reshape") return LayerKind::Reshape;
    if (s == "conv") return LayerKind::Conv;
    if (s == "conv_t") return LayerKind::ConvT;
    if (s == "crop") return LayerKind::Crop;
    throw ShapeError("unknown layer kind '" + s + "'");
}

Var activate(const Var& a, Activation act) {
    switch (act) {
        case Activation::LeakyRelu: return ad::leaky_relu(a, kLeakySlope);
        case Activation::Tanh: return ad::tanh(a);
        case Activation::Linear: break;
    }
    return a;
}

Shape batched(int b, const Shape& s) {
    Shape out{b};
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

}  // namespace

void to_json(nlohmann::json& j, const NetSpec& s) {
    j = nlohmann::json{{"input", s.input}, {"layers", nlohmann::json::array()}};
    for (const auto& l : s.layers) {
        nlohmann::json e{{"kind", kind_name(l.kind)}};
        switch (l.kind) {
            case LayerKind::Dense:
                e["in"] = l.in;
                e["out"] = l.out;
                e["activation"] = to_string(l.act);
                break;
            case LayerKind::Reshape: e["shape"] = l.shape; break;
            case LayerKind::Conv:
            case LayerKind::ConvT:
                e["c_in"] = l.c_in;
                e["c_out"] = l.c_out;
                e["kernel"] = {l.kh, l.kw};
                e["stride"] = {l.geom.sh, l.geom.sw};
                e["padding"] = {l.geom.ph, l.geom.pw};
                e["activation"] = to_string(l.act);
                break;
            case LayerKind::Crop: e["size"] = {l.h, l.w}; break;
        }
        j["layers"].push_back(e);
    }
}

void from_json(const nlohmann::json& j, NetSpec& s) {
    s.input = j.at("input").get<Shape>();
    s.layers.clear();
    for (const auto& e : j.at("layers")) {
        LayerSpec l;
        l.kind = kind_from(e.at("kind").get<std::string>());
        switch (l.kind) {
            case LayerKind::Dense:
                l = LayerSpec::dense(e.at("in"), e.at("out"), activation_from_string(e.at("activation")));
                break;
            case LayerKind::Reshape: l = LayerSpec::reshape(e.at("shape").get<Shape>()); break;
            case LayerKind::Conv:
            case LayerKind::ConvT: {
                const auto k = e.at("kernel").get<std::vector<int>>();
                const auto st = e.at("stride").get<std::vector<int>>();
                const auto p = e.at("padding").get<std::vector<int>>();
                if (k.size() != 2 || st.size() != 2 || p.size() != 2) throw ShapeError("convolution layer needs 2-element geometry");
                l = LayerSpec::conv(e.at("c_in"), e.at("c_out"), k[0], k[1], {st[0], st[1], p[0], p[1]},
                                    activation_from_string(e.at("activation")));
                if (e.at("kind") == "conv_t") l.kind = LayerKind::ConvT;
                break;
            }
            case LayerKind::Crop: {
                const auto sz = e.at("size").get<std::vector<int>>();
                if (sz.size() != 2) throw ShapeError("crop layer needs a 2-element size");
                l = LayerSpec::crop(sz[0], sz[1]);
                break;
            }
        }
        s.layers.push_back(l);
    }
    s.shapes();
}

std::vector<double> init_params(const NetSpec& spec, std::uint64_t seed) {
    spec.shapes();
    std::vector<double> theta(spec.param_count(), 0.0);
    const auto off = spec.offsets();
    Rng rng(seed);
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const LayerSpec& l = spec.layers[k];
        if (l.weight_count() == 0) continue;
        double fan_in, fan_out;
        if (l.kind == LayerKind::Dense) {
            fan_in = l.in;
            fan_out = l.out;
        } else {
            fan_in = static_cast<double>(l.c_in) * l.kh * l.kw;
            fan_out = static_cast<double>(l.c_out) * l.kh * l.kw;
        }
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (std::size_t i = 0; i < l.weight_count(); ++i) theta[off[k] + i] = rng.uniform(-a, a);
    }
    return theta;
}

std::vector<Var> Bound::all() const {
    std::vector<Var> out;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k].valid()) out.push_back(weights[k]);
        if (biases[k].valid()) out.push_back(biases[k]);
    }
    return out;
}

Bound bind(ad::Tape& tape, const NetSpec& spec, const std::vector<double>& theta, bool requires_grad) {
    if (theta.size() != spec.param_count())
        throw ShapeError("parameter vector has " + std::to_string(theta.size()) + " entries, network needs " +
                         std::to_string(spec.param_count()));
    Bound b;
    const auto off = spec.offsets();
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const LayerSpec& l = spec.layers[k];
        if (l.weight_count() == 0) {
            b.weights.emplace_back();
            b.biases.emplace_back();
            continue;
        }
        const auto w0 = theta.begin() + static_cast<std::ptrdiff_t>(off[k]);
        const auto b0 = w0 + static_cast<std::ptrdiff_t>(l.weight_count());
        b.weights.push_back(tape.leaf(Tensor(l.weight_shape(), std::vector<double>(w0, b0)), requires_grad));
        b.biases.push_back(tape.leaf(
            Tensor({static_cast<int>(l.bias_count())}, std::vector<double>(b0, b0 + static_cast<std::ptrdiff_t>(l.bias_count()))),
            requires_grad));
    }
    return b;
}

std::vector<double> flatten(const NetSpec& spec, const std::vector<Var>& grads) {
    std::vector<double> out;
    out.reserve(spec.param_count());
    for (const Var& g : grads) out.insert(out.end(), g.value().data.begin(), g.value().data.end());
    if (out.size() != spec.param_count()) throw ShapeError("gradient list does not match the network parameters");
    return out;
}

Var forward(const NetSpec& spec, const Bound& params, const Var& x) {
    const Shape& xs = x.shape();
    if (xs.empty() || Shape(xs.begin() + 1, xs.end()) != spec.input)
        throw ShapeError("network input " + ad::shape_string(xs) + " does not match [B]+" + ad::shape_string(spec.input));
    const int batch = xs[0];
    const auto shapes = spec.shapes();
    Var a = x;
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const LayerSpec& l = spec.layers[k];
        switch (l.kind) {
            case LayerKind::Dense:
                a = activate(ad::bias_add(ad::matmul(a, ad::transpose(params.weights[k])), params.biases[k]), l.act);
                break;
            case LayerKind::Reshape: a = ad::reshape(a, batched(batch, l.shape)); break;
            case LayerKind::Conv:
                a = activate(ad::bias_add(ad::conv2d(a, params.weights[k], l.geom), params.biases[k]), l.act);
                break;
            case LayerKind::ConvT:
                a = activate(ad::bias_add(ad::conv_transpose2d(a, params.weights[k], l.geom, shapes[k][1], shapes[k][2]),
                                          params.biases[k]),
                             l.act);
                break;
            case LayerKind::Crop: a = ad::crop(a, l.h, l.w); break;
        }
    }
    return a;
}

Tensor predict(const NetSpec& spec, const std::vector<double>& theta, const Tensor& x) {
    ad::Tape tape;
    const Bound b = bind(tape, spec, theta, false);
    return forward(spec, b, tape.constant(x)).value();
}

Var gradient_penalty(const NetSpec& spec, const Bound& params, const Tensor& xhat) {
    if (spec.output() != Shape{1}) throw ShapeError("gradient penalty needs a scalar-output network");
    ad::Tape& tape = *params.all().front().tape();
    const Var x = tape.leaf(xhat, true);
    const Var d = forward(spec, params, x);
    const Var g = tape.grad(ad::sum(d), {x}, true)[0];
    const Var norm = ad::sqrt(ad::sum_per_sample(ad::square(g)));
    return ad::mean(ad::square(ad::add_scalar(norm, -1.0)));
}

Penalty input_grad_norm_penalty(const NetSpec& spec, const std::vector<double>& theta, const Tensor& xhat,
                                PenaltyMode mode) {
    Penalty out;
    if (mode == PenaltyMode::Exact) {
        ad::Tape tape;
        const Bound b = bind(tape, spec, theta);
        const Var p = gradient_penalty(spec, b, xhat);
        out.value = p.value()[0];
        out.grad = flatten(spec, tape.grad(p, b.all()));
        return out;
    }

    if (spec.output() != Shape{1}) throw ShapeError("gradient penalty needs a scalar-output network");
    Tensor g;
    {
        ad::Tape tape;
        const Bound b = bind(tape, spec, theta, false);
        const Var x = tape.leaf(xhat, true);
        g = tape.grad(ad::sum(forward(spec, b, x)), {x})[0].value();
    }
    const int batch = xhat.shape[0];
    const std::size_t per = g.size() / static_cast<std::size_t>(batch);
    Tensor v(g.shape);
    for (int s = 0; s < batch; ++s) {
        double n2 = 0.0;
        for (std::size_t k = 0; k < per; ++k) n2 += g[s * per + k] * g[s * per + k];
        const double n = std::sqrt(n2);
        out.value += (n - 1.0) * (n - 1.0) / batch;
        const double c = n == 0.0 ? 0.0 : 2.0 * (n - 1.0) / (n * batch);
        for (std::size_t k = 0; k < per; ++k) v[s * per + k] = c * g[s * per + k];
    }
    double vn = 0.0;
    for (double e : v.data) vn += e * e;
    vn = std::sqrt(vn);
    if (vn == 0.0) {
        out.grad.assign(spec.param_count(), 0.0);
        return out;
    }
    // d/dtheta [v . grad_x D] = d/dtheta of a directional derivative of D.
    const double h = 1e-5;
    Tensor xp = xhat, xm = xhat;
    for (std::size_t i = 0; i < xhat.size(); ++i) {
        xp[i] += h * v[i] / vn;
        xm[i] -= h * v[i] / vn;
    }
    ad::Tape tape;
    const Bound b = bind(tape, spec, theta);
    const Var dp = ad::sum(forward(spec, b, tape.constant(xp)));
    const Var dm = ad::sum(forward(spec, b, tape.constant(xm)));
    const Var dir = ad::scale(ad::sub(dp, dm), vn / (2.0 * h));
    out.grad = flatten(spec, tape.grad(dir, b.all()));
    return out;
}

void to_json(nlohmann::json& j, const AdamState& s) {
    j = nlohmann::json{{"lr", s.lr}, {"beta1", s.beta1}, {"beta2", s.beta2}, {"eps", s.eps}, {"step", s.step}};
}

void from_json(const nlohmann::json& j, AdamState& s) {
    s.lr = j.at("lr");
    s.beta1 = j.at("beta1");
    s.beta2 = j.at("beta2");
    s.eps = j.at("eps");
    s.step = j.value("step", std::uint64_t{0});
}

void adam_step(AdamState& st, std::vector<double>& theta, const std::vector<double>& grad) {
    if (grad.size() != theta.size()) throw ShapeError("adam: gradient and parameter sizes differ");
    if (st.m.empty()) {
        st.m.assign(theta.size(), 0.0);
        st.v.assign(theta.size(), 0.0);
    }
    if (st.m.size() != theta.size()) throw ShapeError("adam: moment and parameter sizes differ");
    ++st.step;
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grad[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grad[i] * grad[i];
        theta[i] -= st.lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + st.eps);
    }
}

}  // namespace wz::nn
