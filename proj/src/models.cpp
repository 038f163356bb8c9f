#include "wavezoom/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "wavezoom/array_io.hpp"
#include "wavezoom/errors.hpp"
#include "wavezoom/simulation.hpp"

namespace wz {

namespace fs = std::filesystem;
using nlohmann::json;
using nn::Activation;
using nn::LayerSpec;
using nn::NetSpec;
using nn::Tensor;

namespace {

constexpr const char* kFormat = "wavezoom-model";

struct KindName {
    VariantKind kind;
    const char* name;
};

constexpr KindName kNames[] = {{VariantKind::NN, "NN"},         {VariantKind::NN_BC, "NN_BC"},
                               {VariantKind::NN_t, "NN_t"},     {VariantKind::NN_BC_t, "NN_BC_t"},
                               {VariantKind::WGAN, "WGAN"},     {VariantKind::WGAN_BC, "WGAN_BC"},
                               {VariantKind::POD_RF, "POD_RF"}};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string to_string(VariantKind k) {
    for (const auto& e : kNames)
        if (e.kind == k) return e.name;
    return "NN";
}

const std::vector<VariantKind>& all_variants() {
    static const std::vector<VariantKind> v = [] {
        std::vector<VariantKind> out;
        for (const auto& e : kNames) out.push_back(e.kind);
        return out;
    }();
    return v;
}

std::string variant_list() {
    std::string s;
    for (const auto& e : kNames) s += (s.empty() ? "" : ", ") + std::string(e.name);
    return s;
}

VariantKind variant_from_string(const std::string& s) {
    for (const auto& e : kNames)
        if (s == e.name) return e.kind;
    throw ConfigError("unknown variant '" + s + "'; valid variants: " + variant_list());
}

bool is_dcnr(VariantKind k) {
    return k == VariantKind::NN || k == VariantKind::NN_BC || k == VariantKind::NN_t || k == VariantKind::NN_BC_t;
}
bool is_gan(VariantKind k) { return k == VariantKind::WGAN || k == VariantKind::WGAN_BC; }
bool is_boundary(VariantKind k) {
    return k == VariantKind::NN_BC || k == VariantKind::NN_BC_t || k == VariantKind::WGAN_BC;
}
bool is_time_input(VariantKind k) { return k == VariantKind::NN_t || k == VariantKind::NN_BC_t; }

VariantHyper default_hyper(VariantKind k) {
    VariantHyper h;
    if (is_time_input(k)) {
        // One row per (p, t): n_t times more minibatches per epoch.
        h.dcnr.epochs = 20;
        h.dcnr.batch = 64;
    }
    return h;
}

void to_json(json& j, const DcnrHyper& h) {
    j = json{{"epochs", h.epochs}, {"batch", h.batch}, {"lr", h.lr},
             {"beta1", h.beta1},   {"beta2", h.beta2}, {"lr_final", h.lr_final},
             {"channels", h.channels}, {"snap_source", h.snap_source}};
}

void from_json(const json& j, DcnrHyper& h) {
    h.epochs = j.value("epochs", h.epochs);
    h.batch = j.value("batch", h.batch);
    h.lr = j.value("lr", h.lr);
    h.beta1 = j.value("beta1", h.beta1);
    h.beta2 = j.value("beta2", h.beta2);
    h.lr_final = j.value("lr_final", h.lr_final);
    h.channels = j.value("channels", h.channels);
    h.snap_source = j.value("snap_source", h.snap_source);
}

void to_json(json& j, const WganHyper& h) {
    j = json{{"epochs", h.epochs},       {"batch", h.batch},       {"lr", h.lr},
             {"beta1", h.beta1},         {"beta2", h.beta2},       {"lambda_gp", h.lambda_gp},
             {"n_critic", h.n_critic},   {"latent", h.latent},     {"channels", h.channels},
             {"critic_width", h.critic_width}, {"exact_penalty", h.exact_penalty}};
}

void from_json(const json& j, WganHyper& h) {
    h.epochs = j.value("epochs", h.epochs);
    h.batch = j.value("batch", h.batch);
    h.lr = j.value("lr", h.lr);
    h.beta1 = j.value("beta1", h.beta1);
    h.beta2 = j.value("beta2", h.beta2);
    h.lambda_gp = j.value("lambda_gp", h.lambda_gp);
    h.n_critic = j.value("n_critic", h.n_critic);
    h.latent = j.value("latent", h.latent);
    h.channels = j.value("channels", h.channels);
    h.critic_width = j.value("critic_width", h.critic_width);
    h.exact_penalty = j.value("exact_penalty", h.exact_penalty);
}

void to_json(json& j, const PodRfParams& h) {
    j = json{{"energy_tol", h.energy_tol},
             {"mass_weighted", h.mass_weighted},
             {"n_trees", h.forest.n_trees},
             {"min_leaf", h.forest.min_leaf},
             {"max_depth", h.forest.max_depth},
             {"bootstrap", h.forest.bootstrap},
             {"bootstrap_ratio", h.forest.bootstrap_ratio},
             {"max_features", h.forest.max_features}};
}

void from_json(const json& j, PodRfParams& h) {
    h.energy_tol = j.value("energy_tol", h.energy_tol);
    h.mass_weighted = j.value("mass_weighted", h.mass_weighted);
    h.forest.n_trees = j.value("n_trees", h.forest.n_trees);
    h.forest.min_leaf = j.value("min_leaf", h.forest.min_leaf);
    h.forest.max_depth = j.value("max_depth", h.forest.max_depth);
    h.forest.bootstrap = j.value("bootstrap", h.forest.bootstrap);
    h.forest.bootstrap_ratio = j.value("bootstrap_ratio", h.forest.bootstrap_ratio);
    h.forest.max_features = j.value("max_features", h.forest.max_features);
}

TargetShape target_shape(VariantKind k, const SimulationConfig& c) {
    if (is_boundary(k)) return {c.time.n_t, 1, boundary_index(c.sub).size()};
    return {c.time.n_t, c.sub.n_y, c.sub.n_x};
}

std::vector<double> extract_target(VariantKind k, const FieldSeries& full, const GridSpec& sub) {
    if (is_boundary(k)) return sample_on_subboundary(full, sub).values;
    return sample_on_subgrid(full, sub).values;
}

double target_scale(VariantKind k, const Dataset& train) {
    double m = 0.0;
    for (const auto& f : train.fields)
        for (double v : extract_target(k, f, train.config.sub)) m = std::max(m, std::abs(v));
    return m;
}

NetSpec dcnr_spec(int inputs, int channels, int h, int w, const std::vector<int>& stages) {
    if (stages.size() != 3 || *std::min_element(stages.begin(), stages.end()) < 1)
        throw ConfigError("network channels must list 3 positive stage widths");
    struct Axis {
        int start, k, s, p;
    };
    auto axis = [](int n) { return n == 1 ? Axis{1, 1, 1, 0} : Axis{(n + 7) / 8, 4, 2, 1}; };
    const Axis ah = axis(h), aw = axis(w);
    const ad::ConvGeom g{ah.s, aw.s, ah.p, aw.p};
    NetSpec s;
    s.input = {inputs};
    s.layers = {LayerSpec::dense(inputs, stages[0] * ah.start * aw.start, Activation::LeakyRelu),
                LayerSpec::reshape({stages[0], ah.start, aw.start}),
                LayerSpec::conv_t(stages[0], stages[1], ah.k, aw.k, g, Activation::LeakyRelu),
                LayerSpec::conv_t(stages[1], stages[2], ah.k, aw.k, g, Activation::LeakyRelu),
                LayerSpec::conv_t(stages[2], channels, ah.k, aw.k, g, Activation::Linear),
                LayerSpec::crop(h, w)};
    s.shapes();
    return s;
}

NetSpec critic_spec(int channels, int h, int w, int width) {
    if (width < 1) throw ConfigError("critic width must be positive");
    NetSpec s;
    s.input = {channels, h, w};
    int c = channels;
    for (int stage = 0; stage < 3; ++stage) {
        const int co = width << stage;
        const bool sh = h >= 2, sw = w >= 2;
        s.layers.push_back(LayerSpec::conv(c, co, sh ? 4 : 1, sw ? 4 : 1,
                                           {sh ? 2 : 1, sw ? 2 : 1, sh ? 1 : 0, sw ? 1 : 0}, Activation::LeakyRelu));
        h = sh ? ad::conv_out(h, 4, 2, 1) : h;
        w = sw ? ad::conv_out(w, 4, 2, 1) : w;
        c = co;
    }
    s.layers.push_back(LayerSpec::reshape({c * h * w}));
    s.layers.push_back(LayerSpec::dense(c * h * w, 1, Activation::Linear));
    s.shapes();
    return s;
}

std::array<double, 3> dcnr_input(const SimulationConfig& c, const ParamVector& p, bool snap_source) {
    if (!snap_source) return c.bounds.normalize(p);
    const GridSpec& g = c.full;
    auto nearest = [](double v, double lo, double h, std::size_t n) {
        const double f = std::clamp(std::round((v - lo) / h), 0.0, static_cast<double>(n - 1));
        return lo + f * h;
    };
    ParamVector q = p;
    q.x_s = nearest(p.x_s, g.x_min, g.dx(), g.n_x);
    q.y_s = nearest(p.y_s, g.y_min, g.dy(), g.n_y);
    return c.bounds.normalize(q);
}

namespace {

void check_finite(double v, const std::string& what, std::size_t epoch) {
    if (!std::isfinite(v))
        throw NumericalError(what + " became non-finite at epoch " + std::to_string(epoch) +
                             "; lower the learning rate or check the training data");
}

// Rows of (input, normalized target) for DcNR training.
struct Rows {
    std::size_t n = 0, in = 0, out = 0;
    std::vector<double> x, y;
};

Rows dcnr_rows(VariantKind kind, const Dataset& train, const TargetShape& ts, double scale, bool snap) {
    Rows r;
    const bool timed = is_time_input(kind);
    r.in = timed ? 4 : 3;
    r.out = timed ? ts.frame() : ts.size();
    r.n = train.size() * (timed ? ts.n_t : 1);
    r.x.reserve(r.n * r.in);
    r.y.reserve(r.n * r.out);
    const TimeGrid& time = train.config.time;
    for (std::size_t k = 0; k < train.size(); ++k) {
        const auto target = extract_target(kind, train.fields[k], train.config.sub);
        const auto pn = dcnr_input(train.config, train.params[k], snap);
        if (!timed) {
            r.x.insert(r.x.end(), pn.begin(), pn.end());
            for (double v : target) r.y.push_back(v / scale);
            continue;
        }
        for (std::size_t n = 0; n < ts.n_t; ++n) {
            r.x.insert(r.x.end(), pn.begin(), pn.end());
            r.x.push_back(2.0 * time.t(n) / time.t_final() - 1.0);
            for (std::size_t i = 0; i < ts.frame(); ++i) r.y.push_back(target[n * ts.frame() + i] / scale);
        }
    }
    return r;
}

ad::Shape batched(std::size_t b, const ad::Shape& s) {
    ad::Shape out{static_cast<int>(b)};
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

Tensor gather(const std::vector<double>& src, std::size_t width, const std::vector<std::size_t>& idx,
              const ad::Shape& per_sample) {
    Tensor t(batched(idx.size(), per_sample));
    for (std::size_t b = 0; b < idx.size(); ++b)
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(idx[b] * width), width,
                    t.data.begin() + static_cast<std::ptrdiff_t>(b * width));
    return t;
}

double dataset_rmse(const NetSpec& net, const std::vector<double>& theta, const Rows& r) {
    double sse = 0.0;
    const std::size_t chunk = 256;
    for (std::size_t b0 = 0; b0 < r.n; b0 += chunk) {
        std::vector<std::size_t> idx;
        for (std::size_t k = b0; k < std::min(r.n, b0 + chunk); ++k) idx.push_back(k);
        const Tensor out = nn::predict(net, theta, gather(r.x, r.in, idx, net.input));
        for (std::size_t b = 0; b < idx.size(); ++b)
            for (std::size_t i = 0; i < r.out; ++i) {
                const double d = out[b * r.out + i] - r.y[idx[b] * r.out + i];
                sse += d * d;
            }
    }
    return std::sqrt(sse / static_cast<double>(r.n * r.out));
}

nn::AdamState adam(double lr, double b1, double b2) {
    nn::AdamState s;
    s.lr = lr;
    s.beta1 = b1;
    s.beta2 = b2;
    return s;
}

void train_dcnr(nn::NetSpec& net, std::vector<double>& theta, VariantKind kind, const Dataset& train,
                const DcnrHyper& h, std::uint64_t seed, double scale, std::vector<EpochLog>& log, double& initial,
                double& final_loss) {
    const TargetShape ts = target_shape(kind, train.config);
    const Rows rows = dcnr_rows(kind, train, ts, scale, h.snap_source);
    const bool timed = is_time_input(kind);
    net = dcnr_spec(static_cast<int>(rows.in), static_cast<int>(timed ? 1 : ts.n_t), static_cast<int>(ts.h),
                    static_cast<int>(ts.w), h.channels);
    theta = nn::init_params(net, mix_seed(seed, 1));
    const ad::Shape out_shape = net.output();
    Rng rng(mix_seed(seed, 2));
    nn::AdamState opt = adam(h.lr, h.beta1, h.beta2);
    initial = dataset_rmse(net, theta, rows);
    check_finite(initial, "initial DcNR loss", 0);
    const std::size_t batch = std::max<std::size_t>(1, std::min(h.batch, rows.n));
    std::vector<std::size_t> order(rows.n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 1; epoch <= h.epochs; ++epoch) {
        const double phase = static_cast<double>(epoch - 1) / static_cast<double>(h.epochs);
        opt.lr = h.lr_final + 0.5 * (h.lr - h.lr_final) * (1.0 + std::cos(std::numbers::pi * phase));
        rng.shuffle(order.begin(), order.end());
        double acc = 0.0;
        std::size_t steps = 0;
        for (std::size_t b0 = 0; b0 < rows.n; b0 += batch) {
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(b0),
                                               order.begin() + static_cast<std::ptrdiff_t>(std::min(rows.n, b0 + batch)));
            ad::Tape tape;
            const nn::Bound b = nn::bind(tape, net, theta);
            const auto y = tape.constant(gather(rows.y, rows.out, idx, out_shape));
            const auto out = nn::forward(net, b, tape.constant(gather(rows.x, rows.in, idx, net.input)));
            const auto loss = ad::sqrt(ad::mean(ad::square(ad::sub(out, y))));
            const double lv = loss.value()[0];
            check_finite(lv, "DcNR loss", epoch);
            nn::adam_step(opt, theta, nn::flatten(net, tape.grad(loss, b.all())));
            acc += lv;
            ++steps;
        }
        log.push_back({epoch, acc / static_cast<double>(steps), 0, 0, 0, 0});
    }
    final_loss = dataset_rmse(net, theta, rows);
    check_finite(final_loss, "final DcNR loss", h.epochs);
}

Tensor normal_batch(Rng& rng, std::size_t b, int latent) {
    Tensor z({static_cast<int>(b), latent});
    for (auto& v : z.data) v = rng.normal();
    return z;
}

}  // namespace

Model train_model(VariantKind kind, const Dataset& train, const VariantHyper& hyper, std::uint64_t seed,
                  std::size_t jobs) {
    if (train.size() == 0) throw MissingPrerequisite("training dataset is empty");
    Model m;
    m.kind_ = kind;
    m.config_ = train.config;
    m.hyper_ = hyper;

    if (kind == VariantKind::POD_RF) {
        std::vector<FieldSeries> sub;
        for (const auto& f : train.fields) sub.push_back(sample_on_subgrid(f, train.config.sub));
        PodRfParams p = hyper.pod_rf;
        p.forest.seed = mix_seed(seed, 3);
        m.pod_ = PodRfModel::fit(train.params, sub, train.config.bounds, train.config.time, p, jobs);
        double sse = 0.0, count = 0.0;
        for (std::size_t k = 0; k < train.size(); ++k) {
            const FieldSeries pred = m.pod_.predict(train.params[k]);
            for (std::size_t i = 0; i < pred.values.size(); ++i) {
                const double d = pred.values[i] - sub[k].values[i];
                sse += d * d;
            }
            count += static_cast<double>(pred.values.size());
        }
        m.final_loss_ = std::sqrt(sse / count);
        m.log_.push_back({0, m.final_loss_, 0, 0, 0, 0});
        m.trained_ = true;
        return m;
    }

    double scale = target_scale(kind, train);
    if (!std::isfinite(scale)) throw NumericalError("training targets are non-finite");
    if (scale == 0.0) scale = 1.0;  // all-zero targets: identity normalization
    m.scale_ = scale;

    if (is_dcnr(kind)) {
        train_dcnr(m.net_, m.theta_, kind, train, hyper.dcnr, seed, scale, m.log_, m.initial_loss_, m.final_loss_);
        m.trained_ = true;
        return m;
    }

    // WGAN-GP on normalized real samples.
    const WganHyper& h = hyper.wgan;
    if (h.latent < 1 || h.n_critic < 1 || h.batch < 1) throw ConfigError("WGAN latent, n_critic and batch must be positive");
    const TargetShape ts = target_shape(kind, train.config);
    const Rows rows = dcnr_rows(kind, train, ts, scale, false);
    m.latent_ = h.latent;
    m.net_ = dcnr_spec(h.latent, static_cast<int>(ts.n_t), static_cast<int>(ts.h), static_cast<int>(ts.w), h.channels);
    m.critic_ = critic_spec(static_cast<int>(ts.n_t), static_cast<int>(ts.h), static_cast<int>(ts.w), h.critic_width);
    m.theta_ = nn::init_params(m.net_, mix_seed(seed, 1));
    m.critic_theta_ = nn::init_params(m.critic_, mix_seed(seed, 4));
    nn::AdamState gopt = adam(h.lr, h.beta1, h.beta2), copt = adam(h.lr, h.beta1, h.beta2);
    Rng rng(mix_seed(seed, 2));
    const ad::Shape data_shape = m.net_.output();

    auto real_batch = [&] {
        std::vector<std::size_t> idx(h.batch);
        for (auto& i : idx) i = static_cast<std::size_t>(rng.index(rows.n));
        return gather(rows.y, rows.out, idx, data_shape);
    };
    auto critic_mean = [&](const Tensor& x) {
        const Tensor d = nn::predict(m.critic_, m.critic_theta_, x);
        return std::accumulate(d.data.begin(), d.data.end(), 0.0) / static_cast<double>(d.size());
    };

    {
        const Tensor real = real_batch();
        const Tensor fake = nn::predict(m.net_, m.theta_, normal_batch(rng, h.batch, h.latent));
        m.log_.push_back({0, 0, 0, 0, 0, critic_mean(real) - critic_mean(fake)});
    }
    const std::size_t iters = std::max<std::size_t>(1, (rows.n + h.batch - 1) / h.batch);
    for (std::size_t epoch = 1; epoch <= h.epochs; ++epoch) {
        EpochLog e{epoch, 0, 0, 0, 0, 0};
        double critic_steps = 0.0;
        for (std::size_t it = 0; it < iters; ++it) {
            for (std::size_t c = 0; c < h.n_critic; ++c) {
                const Tensor real = real_batch();
                const Tensor fake = nn::predict(m.net_, m.theta_, normal_batch(rng, h.batch, h.latent));
                Tensor xhat = real;
                const std::size_t per = real.size() / h.batch;
                for (std::size_t b = 0; b < h.batch; ++b) {
                    const double u = rng.uniform();
                    for (std::size_t i = 0; i < per; ++i)
                        xhat[b * per + i] = u * real[b * per + i] + (1.0 - u) * fake[b * per + i];
                }
                ad::Tape tape;
                const nn::Bound cb = nn::bind(tape, m.critic_, m.critic_theta_);
                const auto dr = ad::mean(nn::forward(m.critic_, cb, tape.constant(real)));
                const auto df = ad::mean(nn::forward(m.critic_, cb, tape.constant(fake)));
                auto loss = ad::sub(df, dr);
                double penalty = 0.0;
                std::vector<double> extra;
                if (h.lambda_gp > 0.0) {
                    if (h.exact_penalty) {
                        const auto gp = nn::gradient_penalty(m.critic_, cb, xhat);
                        penalty = gp.value()[0];
                        loss = ad::add(loss, ad::scale(gp, h.lambda_gp));
                    } else {
                        const nn::Penalty gp = nn::input_grad_norm_penalty(m.critic_, m.critic_theta_, xhat,
                                                                           nn::PenaltyMode::FiniteDifference);
                        penalty = gp.value;
                        extra = gp.grad;
                    }
                }
                auto grad = nn::flatten(m.critic_, tape.grad(loss, cb.all()));
                for (std::size_t i = 0; i < extra.size(); ++i) grad[i] += h.lambda_gp * extra[i];
                const double lv = loss.value()[0] + (extra.empty() ? 0.0 : h.lambda_gp * penalty);
                check_finite(lv, "critic loss", epoch);
                nn::adam_step(copt, m.critic_theta_, grad);
                e.critic_loss += lv;
                e.penalty += penalty;
                e.wasserstein += dr.value()[0] - df.value()[0];
                critic_steps += 1.0;
            }
            ad::Tape tape;
            const nn::Bound gb = nn::bind(tape, m.net_, m.theta_);
            const nn::Bound cb = nn::bind(tape, m.critic_, m.critic_theta_, false);
            const auto fake = nn::forward(m.net_, gb, tape.constant(normal_batch(rng, h.batch, h.latent)));
            const auto loss = ad::scale(ad::mean(nn::forward(m.critic_, cb, fake)), -1.0);
            check_finite(loss.value()[0], "generator loss", epoch);
            nn::adam_step(gopt, m.theta_, nn::flatten(m.net_, tape.grad(loss, gb.all())));
            e.generator_loss += loss.value()[0];
        }
        e.critic_loss /= critic_steps;
        e.penalty /= critic_steps;
        e.wasserstein /= critic_steps;
        e.generator_loss /= static_cast<double>(iters);
        m.log_.push_back(e);
    }
    m.trained_ = true;
    return m;
}

Model make_model(VariantKind kind, const SimulationConfig& config, double scale, nn::NetSpec net,
                 std::vector<double> theta, int latent) {
    if (kind == VariantKind::POD_RF) throw ConfigError("make_model does not build POD_RF models");
    if (theta.size() != net.param_count()) throw ShapeError("parameter vector does not match the network");
    Model m;
    m.kind_ = kind;
    m.config_ = config;
    m.scale_ = scale;
    m.net_ = std::move(net);
    m.theta_ = std::move(theta);
    m.latent_ = is_gan(kind) ? latent : 0;
    m.hyper_ = default_hyper(kind);
    m.trained_ = true;
    return m;
}

Prediction Model::wrap(const std::vector<double>& values) const {
    const TargetShape ts = target_shape(kind_, config_);
    if (values.size() != ts.size())
        throw ShapeError("model output has " + std::to_string(values.size()) + " values, expected " +
                         std::to_string(ts.size()));
    Prediction p;
    p.is_trace = is_boundary(kind_);
    if (p.is_trace) {
        p.trace = BoundaryTrace(ts.n_t, ts.w);
        for (std::size_t i = 0; i < values.size(); ++i) p.trace.values[i] = denormalize(values[i]);
    } else {
        p.field = FieldSeries(config_.sub, ts.n_t);
        for (std::size_t i = 0; i < values.size(); ++i) p.field.values[i] = denormalize(values[i]);
    }
    return p;
}

Prediction Model::predict(const ParamVector& p) const {
    if (!trained_) throw MissingPrerequisite(to_string(kind_) + " model is not trained");
    if (is_gan(kind_)) throw ConfigError(to_string(kind_) + " is generative; it takes a latent vector, not p");
    if (kind_ == VariantKind::POD_RF) {
        Prediction out;
        out.field = pod_.predict(p);
        return out;
    }
    const auto pn = dcnr_input(config_, p, hyper_.dcnr.snap_source);
    if (!is_time_input(kind_)) return wrap(nn::predict(net_, theta_, Tensor({1, 3}, {pn[0], pn[1], pn[2]})).data);
    const TimeGrid& time = config_.time;
    Tensor x({static_cast<int>(time.n_t), 4});
    for (std::size_t n = 0; n < time.n_t; ++n) {
        x.data[n * 4 + 0] = pn[0];
        x.data[n * 4 + 1] = pn[1];
        x.data[n * 4 + 2] = pn[2];
        x.data[n * 4 + 3] = 2.0 * time.t(n) / time.t_final() - 1.0;
    }
    return wrap(nn::predict(net_, theta_, x).data);
}

Prediction Model::generate(const std::vector<double>& z) const {
    if (!trained_) throw MissingPrerequisite(to_string(kind_) + " model is not trained");
    if (!is_gan(kind_)) throw ConfigError(to_string(kind_) + " is not generative");
    if (z.size() != static_cast<std::size_t>(latent_))
        throw ShapeError("latent vector has " + std::to_string(z.size()) + " entries, expected " + std::to_string(latent_));
    return wrap(nn::predict(net_, theta_, Tensor({1, latent_}, z)).data);
}

std::vector<double> Model::draw_latent(Rng& rng) const {
    std::vector<double> z(static_cast<std::size_t>(latent_));
    for (auto& v : z) v = rng.normal();
    return z;
}

FieldSeries zoom(const Prediction& p, const Submodel& sub) {
    if (p.is_trace) return sub.solve(p.trace);
    if (p.field.grid != sub.grid()) throw ShapeError("zoom: field does not live on the submodel grid");
    return sub.solve(boundary_trace(p.field));
}

std::string Model::loss_csv() const {
    std::ostringstream os;
    if (is_gan(kind_)) {
        os << "epoch,critic_loss,generator_loss,gradient_penalty,wasserstein\n";
        for (const auto& e : log_)
            os << e.epoch << ',' << fmt(e.critic_loss) << ',' << fmt(e.generator_loss) << ',' << fmt(e.penalty) << ','
               << fmt(e.wasserstein) << '\n';
    } else {
        os << "epoch,loss\n";
        for (const auto& e : log_) os << e.epoch << ',' << fmt(e.loss) << '\n';
    }
    return os.str();
}

json Model::hyper_json() const {
    if (is_dcnr(kind_)) return hyper_.dcnr;
    if (is_gan(kind_)) return hyper_.wgan;
    return hyper_.pod_rf;
}

void Model::save(const fs::path& dir) const {
    if (!trained_) throw MissingPrerequisite("cannot save an untrained model");
    fs::create_directories(dir);
    json m;
    m["format"] = kFormat;
    m["version"] = 1;
    m["variant"] = to_string(kind_);
    m["config"] = config_;
    m["scale"] = scale_;
    m["hyper"] = hyper_json();
    m["initial_loss"] = initial_loss_;
    m["final_loss"] = final_loss_;
    json files = json::object();
    if (kind_ == VariantKind::POD_RF) {
        pod_.save(dir / "pod_rf");
    } else {
        m["net"] = net_;
        const std::uint64_t s[1] = {theta_.size()};
        files["net.f64"] = write_array(dir / "net.f64", s, theta_);
        if (is_gan(kind_)) {
            m["latent"] = latent_;
            m["critic"] = critic_;
            const std::uint64_t c[1] = {critic_theta_.size()};
            files["critic.f64"] = write_array(dir / "critic.f64", c, critic_theta_);
        }
    }
    const std::string csv = loss_csv();
    write_text(dir / "loss.csv", csv);
    files["loss.csv"] = sha256_hex(csv);
    m["files"] = files;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

Model Model::load(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) throw MissingPrerequisite("no trained model in " + dir.string());
    const json m = json::parse(read_text(dir / "manifest.json"));
    if (m.value("format", "") != kFormat) throw ShapeError("not a model directory: " + dir.string());
    if (m.value("version", 0) != 1) throw ShapeError("unsupported model version in " + dir.string());
    const json& files = m.at("files");
    auto load_checked = [&](const std::string& name) {
        const auto bytes = read_file(dir / name);
        Array a = decode_array(bytes, name);
        if (sha256_hex(bytes) != files.at(name).get<std::string>()) throw ShapeError(name + ": checksum mismatch");
        return a;
    };
    Model r;
    r.kind_ = variant_from_string(m.at("variant").get<std::string>());
    r.config_ = m.at("config").get<SimulationConfig>();
    r.scale_ = m.at("scale").get<double>();
    r.initial_loss_ = m.at("initial_loss").get<double>();
    r.final_loss_ = m.at("final_loss").get<double>();
    r.hyper_ = default_hyper(r.kind_);
    if (is_dcnr(r.kind_)) r.hyper_.dcnr = m.at("hyper").get<DcnrHyper>();
    if (is_gan(r.kind_)) r.hyper_.wgan = m.at("hyper").get<WganHyper>();
    if (r.kind_ == VariantKind::POD_RF) {
        r.hyper_.pod_rf = m.at("hyper").get<PodRfParams>();
        r.pod_ = PodRfModel::load(dir / "pod_rf");
    } else {
        r.net_ = m.at("net").get<NetSpec>();
        r.theta_ = load_checked("net.f64").data;
        if (r.theta_.size() != r.net_.param_count()) throw ShapeError("net.f64: shape mismatch");
        if (is_gan(r.kind_)) {
            r.latent_ = m.at("latent").get<int>();
            r.critic_ = m.at("critic").get<NetSpec>();
            r.critic_theta_ = load_checked("critic.f64").data;
            if (r.critic_theta_.size() != r.critic_.param_count()) throw ShapeError("critic.f64: shape mismatch");
        }
        const TargetShape ts = target_shape(r.kind_, r.config_);
        const ad::Shape out = r.net_.output();
        if (ad::numel(out) * (is_time_input(r.kind_) ? ts.n_t : 1) != ts.size())
            throw ShapeError("stored network output " + ad::shape_string(out) + " does not match the configured grid");
    }
    r.trained_ = true;
    return r;
}

}  // namespace wz
