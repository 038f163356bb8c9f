#include "wavezoom/autodiff.hpp"

#include <cmath>
#include <sstream>

#include "wavezoom/errors.hpp"

namespace wz::ad {

std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) {
        if (d < 0) throw ShapeError("negative dimension in " + shape_string(s));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_string(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)), data(numel(shape), fill) {}

Tensor::Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != numel(shape))
        throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_string(shape));
}

const Tensor& Var::value() const {
    if (!tape_) throw Error("empty Var");
    return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(id_); }

Var Tape::leaf(Tensor value, bool requires_grad) {
    nodes_.push_back(Node{std::move(value), requires_grad, {}, {}});
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::vector<Var> parents, Backward backward) {
    bool needs = false;
    if (recording_)
        for (const Var& p : parents) needs = needs || p.requires_grad();
    if (!needs) return leaf(std::move(value), false);
    nodes_.push_back(Node{std::move(value), true, std::move(parents), std::move(backward)});
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

std::vector<Var> Tape::grad(const Var& y, const std::vector<Var>& xs, bool create_graph) {
    if (y.tape() != this) throw Error("grad: output belongs to another tape");
    if (y.value().size() != 1) throw ShapeError("grad: output must be a scalar, got " + shape_string(y.shape()));
    const std::size_t n = static_cast<std::size_t>(y.id()) + 1;
    std::vector<Var> g(n);
    g[n - 1] = constant(Tensor(y.shape(), 1.0));

    struct Restore {
        bool& flag;
        bool saved;
        ~Restore() { flag = saved; }
    } restore{recording_, recording_};
    recording_ = create_graph;

    for (std::size_t id = n; id-- > 0;) {
        if (!g[id].valid()) continue;
        const Node& node = nodes_[id];
        if (!node.requires_grad || !node.backward) continue;
        std::vector<bool> need(node.parents.size());
        bool any = false;
        for (std::size_t k = 0; k < need.size(); ++k) {
            need[k] = node.parents[k].requires_grad();
            any = any || need[k];
        }
        if (!any) continue;
        const std::vector<Var> parents = node.parents;
        const std::vector<Var> contrib = node.backward(Var(this, static_cast<int>(id)), g[id], need);
        for (std::size_t k = 0; k < parents.size(); ++k) {
            if (!need[k] || !contrib[k].valid()) continue;
            const auto pid = static_cast<std::size_t>(parents[k].id());
            g[pid] = g[pid].valid() ? add(g[pid], contrib[k]) : contrib[k];
        }
    }

    std::vector<Var> out;
    out.reserve(xs.size());
    for (const Var& x : xs) {
        const auto id = static_cast<std::size_t>(x.id());
        if (x.tape() == this && id < n && g[id].valid())
            out.push_back(g[id]);
        else
            out.push_back(constant(Tensor(x.shape(), 0.0)));
    }
    return out;
}

namespace {

void same_shape(const Var& a, const Var& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
}

Tape& tape_of(const Var& a) {
    if (!a.valid()) throw Error("operation on empty Var");
    return *a.tape();
}

template <typename F>
Tensor map(const Tensor& a, F f) {
    Tensor r(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = f(a[i]);
    return r;
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
    Tensor r(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = f(a[i], b[i]);
    return r;
}

std::size_t channel_stride(const Shape& s) {
    std::size_t inner = 1;
    for (std::size_t k = 2; k < s.size(); ++k) inner *= static_cast<std::size_t>(s[k]);
    return inner;
}

void check_4d(const Shape& s, const char* op) {
    if (s.size() != 4) throw ShapeError(std::string(op) + ": expected a 4-d tensor, got " + shape_string(s));
}

}  // namespace

Var add(const Var& a, const Var& b) {
    same_shape(a, b, "add");
    return tape_of(a).record(zip(a.value(), b.value(), [](double x, double y) { return x + y; }), {a, b},
                             [](const Var&, const Var& g, const std::vector<bool>&) {
                                 return std::vector<Var>{g, g};
                             });
}

Var sub(const Var& a, const Var& b) {
    same_shape(a, b, "sub");
    return tape_of(a).record(zip(a.value(), b.value(), [](double x, double y) { return x - y; }), {a, b},
                             [](const Var&, const Var& g, const std::vector<bool>& need) {
                                 return std::vector<Var>{g, need[1] ? scale(g, -1.0) : Var()};
                             });
}

Var mul(const Var& a, const Var& b) {
    same_shape(a, b, "mul");
    return tape_of(a).record(zip(a.value(), b.value(), [](double x, double y) { return x * y; }), {a, b},
                             [a, b](const Var&, const Var& g, const std::vector<bool>& need) {
                                 return std::vector<Var>{need[0] ? mul(g, b) : Var(), need[1] ? mul(g, a) : Var()};
                             });
}

Var scale(const Var& a, double s) {
    return tape_of(a).record(map(a.value(), [s](double x) { return s * x; }), {a},
                             [s](const Var&, const Var& g, const std::vector<bool>&) {
                                 return std::vector<Var>{scale(g, s)};
                             });
}

Var add_scalar(const Var& a, double s) {
    return tape_of(a).record(map(a.value(), [s](double x) { return x + s; }), {a},
                             [](const Var&, const Var& g, const std::vector<bool>&) { return std::vector<Var>{g}; });
}

Var mul_const(const Var& a, const Tensor& c) {
    if (a.shape() != c.shape)
        throw ShapeError("mul_const: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(c.shape));
    return tape_of(a).record(zip(a.value(), c, [](double x, double y) { return x * y; }), {a},
                             [c](const Var&, const Var& g, const std::vector<bool>&) {
                                 return std::vector<Var>{mul_const(g, c)};
                             });
}

Var square(const Var& a) {
    return tape_of(a).record(map(a.value(), [](double x) { return x * x; }), {a},
                             [a](const Var&, const Var& g, const std::vector<bool>&) {
                                 return std::vector<Var>{mul(g, scale(a, 2.0))};
                             });
}

Var sqrt(const Var& a) {
    return tape_of(a).record(map(a.value(), [](double x) { return std::sqrt(x); }), {a},
                             [](const Var& self, const Var& g, const std::vector<bool>&) {
                                 return std::vector<Var>{mul(g, half_inv(self))};
                             });
}

Var half_inv(const Var& a) {
    return tape_of(a).record(map(a.value(), [](double x) { return x == 0.0 ? 0.0 : 0.5 / x; }), {a},
                             [](const Var& self, const Var& g, const std::vector<bool>&) {
                                 return std::vector<Var>{mul(g, scale(square(self), -2.0))};
                             });
}

Var leaky_relu(const Var& a, double slope) {
    return mul_const(a, map(a.value(), [slope](double x) { return x > 0.0 ? 1.0 : slope; }));
}

Var tanh(const Var& a) {
    return tape_of(a).record(map(a.value(), [](double x) { return std::tanh(x); }), {a},
                             [](const Var& self, const Var& g, const std::vector<bool>&) {
                                 return std::vector<Var>{mul(g, add_scalar(scale(square(self), -1.0), 1.0))};
                             });
}

Var matmul(const Var& a, const Var& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0])
        throw ShapeError("matmul: incompatible shapes " + shape_string(sa) + " x " + shape_string(sb));
    const int m = sa[0], k = sa[1], n = sb[1];
    Tensor r({m, n});
    const auto& A = a.value().data;
    const auto& B = b.value().data;
    for (int i = 0; i < m; ++i)
        for (int l = 0; l < k; ++l) {
            const double av = A[static_cast<std::size_t>(i * k + l)];
            const double* brow = &B[static_cast<std::size_t>(l * n)];
            double* rrow = &r.data[static_cast<std::size_t>(i * n)];
            for (int j = 0; j < n; ++j) rrow[j] += av * brow[j];
        }
    return tape_of(a).record(std::move(r), {a, b}, [a, b](const Var&, const Var& g, const std::vector<bool>& need) {
        return std::vector<Var>{need[0] ? matmul(g, transpose(b)) : Var(), need[1] ? matmul(transpose(a), g) : Var()};
    });
}

Var transpose(const Var& a) {
    const Shape& s = a.shape();
    if (s.size() != 2) throw ShapeError("transpose: expected a matrix, got " + shape_string(s));
    Tensor r({s[1], s[0]});
    for (int i = 0; i < s[0]; ++i)
        for (int j = 0; j < s[1]; ++j)
            r.data[static_cast<std::size_t>(j * s[0] + i)] = a.value().data[static_cast<std::size_t>(i * s[1] + j)];
    return tape_of(a).record(std::move(r), {a}, [](const Var&, const Var& g, const std::vector<bool>&) {
        return std::vector<Var>{transpose(g)};
    });
}

Var reshape(const Var& a, const Shape& shape) {
    if (numel(shape) != a.value().size())
        throw ShapeError("reshape: cannot view " + shape_string(a.shape()) + " as " + shape_string(shape));
    const Shape from = a.shape();
    return tape_of(a).record(Tensor(shape, a.value().data), {a},
                             [from](const Var&, const Var& g, const std::vector<bool>&) {
                                 return std::vector<Var>{reshape(g, from)};
                             });
}

Var crop(const Var& a, int h, int w) {
    const Shape s = a.shape();
    check_4d(s, "crop");
    if (h > s[2] || w > s[3] || h < 1 || w < 1)
        throw ShapeError("crop: window " + std::to_string(h) + "x" + std::to_string(w) + " exceeds " + shape_string(s));
    Tensor r({s[0], s[1], h, w});
    for (int bc = 0; bc < s[0] * s[1]; ++bc)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                r.data[static_cast<std::size_t>((bc * h + i) * w + j)] =
                    a.value().data[static_cast<std::size_t>((bc * s[2] + i) * s[3] + j)];
    return tape_of(a).record(std::move(r), {a}, [s](const Var&, const Var& g, const std::vector<bool>&) {
        return std::vector<Var>{pad(g, s[2], s[3])};
    });
}

Var pad(const Var& a, int h, int w) {
    const Shape s = a.shape();
    check_4d(s, "pad");
    if (h < s[2] || w < s[3]) throw ShapeError("pad: target smaller than " + shape_string(s));
    Tensor r({s[0], s[1], h, w});
    for (int bc = 0; bc < s[0] * s[1]; ++bc)
        for (int i = 0; i < s[2]; ++i)
            for (int j = 0; j < s[3]; ++j)
                r.data[static_cast<std::size_t>((bc * h + i) * w + j)] =
                    a.value().data[static_cast<std::size_t>((bc * s[2] + i) * s[3] + j)];
    return tape_of(a).record(std::move(r), {a}, [s](const Var&, const Var& g, const std::vector<bool>&) {
        return std::vector<Var>{crop(g, s[2], s[3])};
    });
}

Var channel_sum(const Var& a) {
    const Shape s = a.shape();
    if (s.size() < 2) throw ShapeError("channel_sum: expected [B, C, ...], got " + shape_string(s));
    const std::size_t inner = channel_stride(s);
    Tensor r({s[1]});
    for (int b = 0; b < s[0]; ++b)
        for (int c = 0; c < s[1]; ++c) {
            const double* p = &a.value().data[(static_cast<std::size_t>(b) * s[1] + c) * inner];
            double acc = 0.0;
            for (std::size_t k = 0; k < inner; ++k) acc += p[k];
            r.data[static_cast<std::size_t>(c)] += acc;
        }
    return tape_of(a).record(std::move(r), {a}, [s](const Var&, const Var& g, const std::vector<bool>&) {
        return std::vector<Var>{channel_broadcast(g, s)};
    });
}

Var channel_broadcast(const Var& bias, const Shape& shape) {
    if (shape.size() < 2 || bias.shape() != Shape{shape[1]})
        throw ShapeError("channel_broadcast: bias " + shape_string(bias.shape()) + " does not match " +
                         shape_string(shape));
    const std::size_t inner = channel_stride(shape);
    Tensor r(shape);
    for (int b = 0; b < shape[0]; ++b)
        for (int c = 0; c < shape[1]; ++c) {
            double* p = &r.data[(static_cast<std::size_t>(b) * shape[1] + c) * inner];
            const double v = bias.value().data[static_cast<std::size_t>(c)];
            for (std::size_t k = 0; k < inner; ++k) p[k] = v;
        }
    return tape_of(bias).record(std::move(r), {bias}, [](const Var&, const Var& g, const std::vector<bool>&) {
        return std::vector<Var>{channel_sum(g)};
    });
}

Var bias_add(const Var& a, const Var& bias) {
    if (a.shape().size() < 2 || bias.shape() != Shape{a.shape()[1]})
        throw ShapeError("bias_add: bias " + shape_string(bias.shape()) + " does not match " + shape_string(a.shape()));
    const Shape s = a.shape();
    const std::size_t inner = channel_stride(s);
    Tensor r = a.value();
    for (int b = 0; b < s[0]; ++b)
        for (int c = 0; c < s[1]; ++c) {
            double* p = &r.data[(static_cast<std::size_t>(b) * s[1] + c) * inner];
            const double v = bias.value().data[static_cast<std::size_t>(c)];
            for (std::size_t k = 0; k < inner; ++k) p[k] += v;
        }
    return tape_of(a).record(std::move(r), {a, bias}, [](const Var&, const Var& g, const std::vector<bool>& need) {
        return std::vector<Var>{g, need[1] ? channel_sum(g) : Var()};
    });
}

Var sum(const Var& a) {
    double acc = 0.0;
    for (double v : a.value().data) acc += v;
    const Shape s = a.shape();
    return tape_of(a).record(Tensor({1}, acc), {a}, [s](const Var&, const Var& g, const std::vector<bool>&) {
        return std::vector<Var>{broadcast(g, s)};
    });
}

Var broadcast(const Var& scalar, const Shape& shape) {
    if (scalar.value().size() != 1) throw ShapeError("broadcast: expected a scalar, got " + shape_string(scalar.shape()));
    return tape_of(scalar).record(Tensor(shape, scalar.value()[0]), {scalar},
                                  [](const Var&, const Var& g, const std::vector<bool>&) {
                                      return std::vector<Var>{sum(g)};
                                  });
}

Var sum_per_sample(const Var& a) {
    const Shape s = a.shape();
    if (s.empty()) throw ShapeError("sum_per_sample: scalar input");
    const std::size_t inner = a.value().size() / static_cast<std::size_t>(s[0]);
    Tensor r({s[0]});
    for (int b = 0; b < s[0]; ++b) {
        double acc = 0.0;
        const double* p = &a.value().data[static_cast<std::size_t>(b) * inner];
        for (std::size_t k = 0; k < inner; ++k) acc += p[k];
        r.data[static_cast<std::size_t>(b)] = acc;
    }
    return tape_of(a).record(std::move(r), {a}, [s](const Var&, const Var& g, const std::vector<bool>&) {
        return std::vector<Var>{broadcast_per_sample(g, s)};
    });
}

Var broadcast_per_sample(const Var& v, const Shape& shape) {
    if (shape.empty() || v.shape() != Shape{shape[0]})
        throw ShapeError("broadcast_per_sample: " + shape_string(v.shape()) + " does not match " + shape_string(shape));
    Tensor r(shape);
    const std::size_t inner = r.size() / static_cast<std::size_t>(shape[0]);
    for (int b = 0; b < shape[0]; ++b)
        for (std::size_t k = 0; k < inner; ++k) r.data[static_cast<std::size_t>(b) * inner + k] = v.value()[static_cast<std::size_t>(b)];
    return tape_of(v).record(std::move(r), {v}, [](const Var&, const Var& g, const std::vector<bool>&) {
        return std::vector<Var>{sum_per_sample(g)};
    });
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

int conv_out(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }
int conv_transpose_out(int in, int k, int s, int p) { return (in - 1) * s + k - 2 * p; }

namespace {

// Output positions o in [0, n_out) whose input index o*s - p + a lies in [0, n_in).
void valid_range(int n_in, int n_out, int s, int p, int a, int& lo, int& hi) {
    const int num = p - a;
    lo = num <= 0 ? 0 : (num + s - 1) / s;
    const int top = n_in - 1 + p - a;
    hi = top < 0 ? -1 : std::min(n_out - 1, top / s);
}

struct ConvDims {
    int B, Ci, H, W, Co, Ho, Wo, kh, kw;
};

// Visits every (input, output, weight) index triple of the convolution.
template <typename F>
void for_each_tap(const ConvDims& d, ConvGeom g, F f) {
    for (int b = 0; b < d.B; ++b)
        for (int co = 0; co < d.Co; ++co)
            for (int ci = 0; ci < d.Ci; ++ci) {
                const std::size_t xb = (static_cast<std::size_t>(b) * d.Ci + ci) * d.H * d.W;
                const std::size_t yb = (static_cast<std::size_t>(b) * d.Co + co) * d.Ho * d.Wo;
                const std::size_t wb = (static_cast<std::size_t>(co) * d.Ci + ci) * d.kh * d.kw;
                for (int a = 0; a < d.kh; ++a) {
                    int oh_lo, oh_hi;
                    valid_range(d.H, d.Ho, g.sh, g.ph, a, oh_lo, oh_hi);
                    for (int c = 0; c < d.kw; ++c) {
                        int ow_lo, ow_hi;
                        valid_range(d.W, d.Wo, g.sw, g.pw, c, ow_lo, ow_hi);
                        if (ow_lo > ow_hi) continue;
                        for (int oh = oh_lo; oh <= oh_hi; ++oh) {
                            const int ih = oh * g.sh - g.ph + a;
                            f(xb + static_cast<std::size_t>(ih) * d.W + static_cast<std::size_t>(ow_lo * g.sw - g.pw + c),
                              yb + static_cast<std::size_t>(oh) * d.Wo + static_cast<std::size_t>(ow_lo),
                              wb + static_cast<std::size_t>(a * d.kw + c), ow_hi - ow_lo + 1);
                        }
                    }
                }
            }
}

void check_geom(ConvGeom g) {
    if (g.sh < 1 || g.sw < 1 || g.ph < 0 || g.pw < 0) throw ShapeError("convolution: invalid stride or padding");
}

}  // namespace

Tensor conv2d_kernel(const Tensor& x, const Tensor& w, ConvGeom g) {
    check_4d(x.shape, "conv2d");
    check_4d(w.shape, "conv2d weight");
    check_geom(g);
    if (x.shape[1] != w.shape[1])
        throw ShapeError("conv2d: input channels " + shape_string(x.shape) + " vs weight " + shape_string(w.shape));
    ConvDims d{x.shape[0], x.shape[1], x.shape[2], x.shape[3], w.shape[0], 0, 0, w.shape[2], w.shape[3]};
    d.Ho = conv_out(d.H, d.kh, g.sh, g.ph);
    d.Wo = conv_out(d.W, d.kw, g.sw, g.pw);
    if (d.Ho < 1 || d.Wo < 1) throw ShapeError("conv2d: empty output for input " + shape_string(x.shape));
    Tensor y({d.B, d.Co, d.Ho, d.Wo});
    const int s = g.sw;
    for_each_tap(d, g, [&](std::size_t xi, std::size_t yi, std::size_t wi, int n) {
        const double wv = w.data[wi];
        const double* xp = &x.data[xi];
        double* yp = &y.data[yi];
        for (int k = 0; k < n; ++k) yp[k] += wv * xp[k * s];
    });
    return y;
}

Tensor conv_transpose2d_kernel(const Tensor& y, const Tensor& w, ConvGeom g, int h, int wd) {
    check_4d(y.shape, "conv_transpose2d");
    check_4d(w.shape, "conv_transpose2d weight");
    check_geom(g);
    if (y.shape[1] != w.shape[0])
        throw ShapeError("conv_transpose2d: channels " + shape_string(y.shape) + " vs weight " + shape_string(w.shape));
    ConvDims d{y.shape[0], w.shape[1], h, wd, w.shape[0], y.shape[2], y.shape[3], w.shape[2], w.shape[3]};
    if (conv_out(h, d.kh, g.sh, g.ph) != d.Ho || conv_out(wd, d.kw, g.sw, g.pw) != d.Wo)
        throw ShapeError("conv_transpose2d: output size " + std::to_string(h) + "x" + std::to_string(wd) +
                         " inconsistent with input " + shape_string(y.shape));
    Tensor x({d.B, d.Ci, h, wd});
    const int s = g.sw;
    for_each_tap(d, g, [&](std::size_t xi, std::size_t yi, std::size_t wi, int n) {
        const double wv = w.data[wi];
        double* xp = &x.data[xi];
        const double* yp = &y.data[yi];
        for (int k = 0; k < n; ++k) xp[k * s] += wv * yp[k];
    });
    return x;
}

Tensor conv2d_weight_grad_kernel(const Tensor& x, const Tensor& y, ConvGeom g, int kh, int kw) {
    check_4d(x.shape, "conv2d_weight_grad");
    check_4d(y.shape, "conv2d_weight_grad");
    check_geom(g);
    if (x.shape[0] != y.shape[0]) throw ShapeError("conv2d_weight_grad: batch mismatch");
    ConvDims d{x.shape[0], x.shape[1], x.shape[2], x.shape[3], y.shape[1], y.shape[2], y.shape[3], kh, kw};
    if (conv_out(d.H, kh, g.sh, g.ph) != d.Ho || conv_out(d.W, kw, g.sw, g.pw) != d.Wo)
        throw ShapeError("conv2d_weight_grad: " + shape_string(x.shape) + " and " + shape_string(y.shape) +
                         " are not related by the given geometry");
    Tensor w({d.Co, d.Ci, kh, kw});
    const int s = g.sw;
    for_each_tap(d, g, [&](std::size_t xi, std::size_t yi, std::size_t wi, int n) {
        const double* xp = &x.data[xi];
        const double* yp = &y.data[yi];
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += xp[k * s] * yp[k];
        w.data[wi] += acc;
    });
    return w;
}

Var conv2d(const Var& x, const Var& w, ConvGeom g) {
    const Shape xs = x.shape();
    const Shape ws = w.shape();
    return tape_of(x).record(conv2d_kernel(x.value(), w.value(), g), {x, w},
                             [x, w, g, xs, ws](const Var&, const Var& gr, const std::vector<bool>& need) {
                                 return std::vector<Var>{
                                     need[0] ? conv_transpose2d(gr, w, g, xs[2], xs[3]) : Var(),
                                     need[1] ? conv2d_weight_grad(x, gr, g, ws[2], ws[3]) : Var()};
                             });
}

Var conv_transpose2d(const Var& y, const Var& w, ConvGeom g, int h, int wd) {
    const Shape ws = w.shape();
    return tape_of(y).record(conv_transpose2d_kernel(y.value(), w.value(), g, h, wd), {y, w},
                             [y, w, g, ws](const Var&, const Var& gr, const std::vector<bool>& need) {
                                 return std::vector<Var>{need[0] ? conv2d(gr, w, g) : Var(),
                                                         need[1] ? conv2d_weight_grad(gr, y, g, ws[2], ws[3]) : Var()};
                             });
}

Var conv2d_weight_grad(const Var& x, const Var& y, ConvGeom g, int kh, int kw) {
    const Shape xs = x.shape();
    return tape_of(x).record(conv2d_weight_grad_kernel(x.value(), y.value(), g, kh, kw), {x, y},
                             [x, y, g, xs](const Var&, const Var& gr, const std::vector<bool>& need) {
                                 return std::vector<Var>{need[0] ? conv_transpose2d(y, gr, g, xs[2], xs[3]) : Var(),
                                                         need[1] ? conv2d(x, gr, g) : Var()};
                             });
}

}  // namespace wz::ad
