#include "wavezoom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "wavezoom/array_io.hpp"
#include "wavezoom/errors.hpp"
#include "wavezoom/parallel.hpp"
#include "wavezoom/rng.hpp"
#include "wavezoom/svg.hpp"

namespace wz {

namespace fs = std::filesystem;

namespace {

constexpr const char* kBundleFile = "BUNDLE.sha256";

std::string g17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string secs(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1fs", s);
    return buf;
}

DatasetReader open_dataset(const RunConfig& cfg, Split s) {
    const fs::path dir = cfg.dataset_dir(s);
    if (!fs::exists(dir / "manifest.json"))
        throw MissingPrerequisite("no " + to_string(s) + " dataset at " + dir.string() + "; run 'wavezoom generate' first");
    DatasetReader r(dir);
    if (!(r.config() == cfg.sim) || r.size() != cfg.sizes.of(s) || r.seed() != cfg.dataset_seed(s))
        throw MissingPrerequisite("the " + to_string(s) + " dataset at " + dir.string() +
                                  " was generated with a different configuration; rerun 'wavezoom generate'");
    return r;
}

Model open_model(const RunConfig& cfg, VariantKind k) {
    const fs::path dir = cfg.model_dir(k);
    if (!fs::exists(dir / "manifest.json"))
        throw MissingPrerequisite("no trained " + to_string(k) + " model at " + dir.string() + "; run 'wavezoom train --variant " +
                                  to_string(k) + "' first");
    Model m = Model::load(dir);
    if (m.kind() != k || !(m.config() == cfg.sim))
        throw MissingPrerequisite("the " + to_string(k) + " model at " + dir.string() +
                                  " was trained under a different configuration; retrain it");
    return m;
}

std::vector<VariantKind> selected(const RunConfig& cfg, std::optional<VariantKind> v, bool (*keep)(VariantKind)) {
    std::vector<VariantKind> out;
    if (v) {
        if (!keep(*v)) return out;
        out.push_back(*v);
        return out;
    }
    for (VariantKind k : all_variants())
        if (cfg.has_variant(k) && keep(k)) out.push_back(k);
    return out;
}

bool parametric(VariantKind k) { return !is_gan(k); }
bool generative(VariantKind k) { return is_gan(k); }

double spatial_max_amplitude(const Prediction& p) {
    if (!p.is_trace) {
        const auto a = max_amplitude(p.field);
        return a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
    }
    double m = 0.0;
    const auto& t = p.trace;
    for (std::size_t b = 0; b < t.n_b; ++b) {
        double lo = t.n_t ? t.at(0, b) : 0.0, hi = lo;
        for (std::size_t n = 1; n < t.n_t; ++n) {
            lo = std::min(lo, t.at(n, b));
            hi = std::max(hi, t.at(n, b));
        }
        m = std::max(m, hi - lo);
    }
    return m;
}

void check_finite_field(const FieldSeries& f, const std::string& what) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw NumericalError(what + " produced a non-finite value");
}

std::string file_label(const std::string& s) {
    std::string o = s;
    for (char& c : o)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    return o;
}

svg::Series as_series(const std::string& label, const Curve& c) {
    svg::Series s{label, {}, {}};
    for (std::size_t k = 0; k < c.size(); ++k) {
        s.x.push_back(static_cast<double>(c.t_offset + k));
        s.y.push_back(c.skipped[k] ? NAN : c.value[k]);
    }
    return s;
}

double curve_mean(const Curve& c) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < c.size(); ++k)
        if (!c.skipped[k]) {
            s += c.value[k];
            ++n;
        }
    return n ? s / static_cast<double>(n) : NAN;
}

std::string trend_row(const std::string& claim, const std::string& lhs, double lv, const std::string& rhs, double rv) {
    std::string verdict = "NA";
    if (std::isfinite(lv) && std::isfinite(rv)) verdict = lv < rv ? "PASS" : "FAIL";
    return claim + ',' + lhs + ',' + g17(lv) + ',' + rhs + ',' + g17(rv) + ',' + verdict + '\n';
}

const EvalResult* find_eval(const std::vector<EvalResult>& rs, const std::string& label) {
    for (const auto& r : rs)
        if (r.label == label) return &r;
    return nullptr;
}

const UqResult* find_uq(const UqReport& rep, const std::string& label) {
    for (const auto& r : rep.sources)
        if (r.label == label) return &r;
    return nullptr;
}

void finish_bundle(const fs::path& dir) { write_text(dir / kBundleFile, bundle_hash(dir) + "\n"); }

}  // namespace

std::string curve_rows(const std::string& label, const Curve& c) {
    std::string out;
    for (std::size_t k = 0; k < c.size(); ++k)
        out += label + ',' + std::to_string(c.t_offset + k) + ',' + g17(c.skipped[k] ? NAN : c.value[k]) + ',' +
               (c.skipped[k] ? "1" : "0") + '\n';
    return out;
}

std::string bundle_hash(const fs::path& dir) {
    std::vector<std::string> rel;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) {
            const std::string r = fs::relative(e.path(), dir).generic_string();
            if (r != kBundleFile) rel.push_back(r);
        }
    std::sort(rel.begin(), rel.end());
    std::string listing;
    for (const auto& r : rel) listing += r + ' ' + sha256_file(dir / r) + '\n';
    return sha256_hex(listing);
}

// ---------------------------------------------------------------- generate

void cmd_generate(const RunConfig& cfg, std::size_t jobs, std::ostream& log) {
    for (Split s : {Split::Train, Split::Test, Split::Mc}) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::size_t n = write_dataset(s, cfg.sim, cfg.sizes.of(s), cfg.dataset_seed(s), cfg.dataset_dir(s), jobs);
        log << "generate: " << to_string(s) << " " << n << " samples -> " << cfg.dataset_dir(s).string() << " ("
            << secs(seconds_since(t0)) << ")\n";
    }
}

// ---------------------------------------------------------------- train

void cmd_train(const RunConfig& cfg, std::optional<VariantKind> variant, std::size_t jobs, std::ostream& log) {
    std::vector<VariantKind> kinds;
    if (variant)
        kinds.push_back(*variant);
    else
        kinds = selected(cfg, std::nullopt, [](VariantKind) { return true; });
    const Dataset train = open_dataset(cfg, Split::Train).load();
    for (VariantKind k : kinds) {
        const auto t0 = std::chrono::steady_clock::now();
        const Model m = train_model(k, train, cfg.hyper_for(k), cfg.model_seed(k), jobs);
        fs::remove_all(cfg.model_dir(k));
        m.save(cfg.model_dir(k));
        log << "train: " << to_string(k);
        if (is_gan(k))
            log << " wasserstein estimate " << g17(m.log().front().wasserstein) << " -> " << g17(m.log().back().wasserstein);
        else if (k == VariantKind::POD_RF)
            log << " rank " << m.surrogate().basis().rank() << ", training RMSE " << g17(m.final_loss());
        else
            log << " loss " << g17(m.initial_loss()) << " -> " << g17(m.final_loss());
        log << " (" << secs(seconds_since(t0)) << ") -> " << cfg.model_dir(k).string() << "\n";
    }
}

// ---------------------------------------------------------------- evaluate

std::vector<EvalResult> evaluate_entries(const Dataset& test, const std::vector<EvalEntry>& entries,
                                         const Submodel& sub, std::size_t jobs) {
    if (test.size() == 0) throw MissingPrerequisite("evaluation needs a non-empty test set");
    const double dt = test.config.time.dt;
    std::vector<FieldSeries> truth(test.size()), truth_ke(test.size());
    parallel_for(test.size(), jobs, [&](std::size_t k) {
        truth[k] = sample_on_subgrid(test.fields[k], test.config.sub);
        truth_ke[k] = kinetic_energy(truth[k], dt);
    });
    std::vector<EvalResult> out;
    for (const auto& e : entries) {
        std::vector<Curve> eps(test.size()), ke(test.size());
        std::vector<FieldSeries> err(test.size());
        std::vector<double> res(test.size(), 0.0);
        parallel_for(test.size(), jobs, [&](std::size_t k) {
            const FieldSeries m = e.predict(k, test.params[k]);
            check_finite_field(m, e.label);
            if (m.grid != truth[k].grid || m.n_t != truth[k].n_t)
                throw ShapeError(e.label + ": prediction does not live on the zone of interest");
            eps[k] = epsilon_curve(m, truth[k]);
            ke[k] = epsilon_curve(kinetic_energy(m, dt), truth_ke[k], 1);
            if (e.zoomed) res[k] = sub.max_residual(m);
            FieldSeries map(truth[k].grid, 1);
            double top = 0.0;
            for (double v : truth[k].values) top = std::max(top, std::abs(v));
            if (top > 0.0) {
                for (std::size_t n = 0; n < m.n_t; ++n)
                    for (std::size_t i = 0; i < m.frame_size(); ++i)
                        map.values[i] += std::abs(m.frame(n)[i] - truth[k].frame(n)[i]) / top;
                for (double& v : map.values) v /= static_cast<double>(m.n_t);
            }
            err[k] = std::move(map);
        });
        EvalResult r;
        r.label = e.label;
        r.eps = epsilon_aggregate(eps);
        r.eps_ke = epsilon_aggregate(ke);
        r.error_map = pointwise_mean(err);
        r.max_residual = *std::max_element(res.begin(), res.end());
        out.push_back(std::move(r));
    }
    return out;
}

void write_eval_report(const std::vector<EvalResult>& results, const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string eps = "variant,t_index,value,skipped\n", ke = eps;
    std::string maps = "variant,j,i,value\n";
    std::string summary = "variant,median_epsilon,mean_epsilon,median_epsilon_ke,mean_epsilon_ke,max_step_residual\n";
    std::vector<svg::Series> se, sk;
    for (const auto& r : results) {
        eps += curve_rows(r.label, r.eps);
        ke += curve_rows(r.label, r.eps_ke);
        const auto& g = r.error_map.grid;
        for (std::size_t j = 0; j < g.n_y; ++j)
            for (std::size_t i = 0; i < g.n_x; ++i)
                maps += r.label + ',' + std::to_string(j) + ',' + std::to_string(i) + ',' + g17(r.error_map.at(0, j, i)) + '\n';
        summary += r.label + ',' + g17(curve_median(r.eps)) + ',' + g17(curve_mean(r.eps)) + ',' +
                   g17(curve_median(r.eps_ke)) + ',' + g17(curve_mean(r.eps_ke)) + ',' + g17(r.max_residual) + '\n';
        se.push_back(as_series(r.label, r.eps));
        sk.push_back(as_series(r.label, r.eps_ke));
        write_text(dir / ("error_map_" + file_label(r.label) + ".svg"),
                   svg::heatmap("mean |M - U| / max |U|: " + r.label, g.n_y, g.n_x, r.error_map.values));
    }
    write_text(dir / "epsilon.csv", eps);
    write_text(dir / "epsilon_ke.csv", ke);
    write_text(dir / "error_map.csv", maps);
    write_text(dir / "summary.csv", summary);
    write_text(dir / "epsilon.svg", svg::line_plot("relative error on the test set", "time index", "epsilon", se));
    write_text(dir / "epsilon_ke.svg", svg::line_plot("relative error on kinetic energy", "time index", "epsilon", sk));

    const EvalResult* zoomed = find_eval(results, "NN_BC_ZOOM");
    const EvalResult* plain = find_eval(results, "NN");
    std::string trend = "claim,lhs,lhs_value,rhs,rhs_value,verdict\n";
    trend += trend_row("median epsilon on K_e: NN_BC_ZOOM below NN", "NN_BC_ZOOM",
                       zoomed ? curve_median(zoomed->eps_ke) : NAN, "NN", plain ? curve_median(plain->eps_ke) : NAN);
    write_text(dir / "trend.csv", trend);
    finish_bundle(dir);
}

void cmd_evaluate(const RunConfig& cfg, std::optional<VariantKind> variant, std::size_t jobs, std::ostream& log) {
    if (variant && is_gan(*variant))
        throw ConfigError(to_string(*variant) + " is generative; it is evaluated by 'wavezoom uq'");
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset test = open_dataset(cfg, Split::Test).load();
    const Submodel sub(cfg.sim.sub, cfg.sim.time, cfg.sim.wave_speed);
    std::vector<Model> models;
    for (VariantKind k : selected(cfg, variant, parametric)) models.push_back(open_model(cfg, k));

    std::vector<EvalEntry> entries;
    entries.push_back({"ORACLE",
                       [&](std::size_t k, const ParamVector&) { return sample_on_subgrid(test.fields[k], cfg.sim.sub); },
                       false});
    for (const Model& m : models) {
        const std::string name = to_string(m.kind());
        if (!is_boundary(m.kind()))
            entries.push_back({name, [&m](std::size_t, const ParamVector& p) { return m.predict(p).field; }, false});
        entries.push_back({name + "_ZOOM", [&m, &sub](std::size_t, const ParamVector& p) { return zoom(m.predict(p), sub); },
                           true});
    }
    const auto results = evaluate_entries(test, entries, sub, jobs);
    const fs::path dir = cfg.report_dir("evaluate");
    write_eval_report(results, dir);
    for (const auto& r : results)
        log << "evaluate: " << r.label << " median epsilon " << g17(curve_median(r.eps)) << ", on K_e "
            << g17(curve_median(r.eps_ke)) << "\n";
    log << "evaluate: report -> " << dir.string() << " (" << secs(seconds_since(t0)) << ")\n";
}

// ---------------------------------------------------------------- uq

UqReport uq_report(const std::vector<FieldSeries>& train_sub, const std::function<FieldSeries(std::size_t)>& truth,
                   std::size_t n_truth, const std::vector<UqSource>& sources, std::size_t bins,
                   const Submodel* residual_check) {
    if (train_sub.empty()) throw MissingPrerequisite("UQ needs the training set");
    if (n_truth == 0) throw MissingPrerequisite("UQ needs a non-empty Monte-Carlo set");
    UqReport rep;
    rep.train_mean = pointwise_mean(train_sub);
    rep.train_std = pointwise_std(train_sub, rep.train_mean);
    const FieldSeries& e_train = rep.train_mean;

    auto accumulate = [&](const std::string& label, std::size_t n, const std::function<Prediction(std::size_t)>& get,
                          bool zoomed) {
        if (n == 0) throw ConfigError(label + ": at least one draw is required");
        UqResult r;
        r.label = label;
        r.has_field = true;
        FieldSeries sum(e_train.grid, e_train.n_t), sq(e_train.grid, e_train.n_t);
        for (std::size_t d = 0; d < n; ++d) {
            const Prediction p = get(d);
            r.amplitude.push_back(spatial_max_amplitude(p));
            if (p.is_trace) {
                r.has_field = false;
                continue;
            }
            check_finite_field(p.field, label);
            if (p.field.grid != e_train.grid || p.field.n_t != e_train.n_t)
                throw ShapeError(label + ": sample does not live on the zone of interest");
            for (std::size_t i = 0; i < sum.values.size(); ++i) {
                sum.values[i] += p.field.values[i];
                const double dv = p.field.values[i] - e_train.values[i];
                sq.values[i] += dv * dv;
            }
            if (zoomed && residual_check) r.max_residual = std::max(r.max_residual, residual_check->max_residual(p.field));
        }
        if (r.has_field) {
            for (double& v : sum.values) v /= static_cast<double>(n);
            for (double& v : sq.values) v = std::sqrt(v / static_cast<double>(n));
            r.mean = std::move(sum);
            r.sigma = std::move(sq);
            r.sigma_rel = discrepancy_rel(r.sigma, rep.train_std);
        }
        return r;
    };

    rep.sources.push_back(accumulate("mc_truth", n_truth, [&](std::size_t k) {
        Prediction p;
        p.field = truth(k);
        return p;
    }, false));
    const FieldSeries mc_mean = rep.sources.front().mean;
    rep.sources.front().eps_mean = epsilon_curve(mc_mean, mc_mean);
    for (const auto& s : sources) {
        UqResult r = accumulate(s.label, s.draws, s.draw, s.zoomed);
        if (r.has_field) r.eps_mean = epsilon_curve(r.mean, mc_mean);
        rep.sources.push_back(std::move(r));
    }
    double top = 0.0;
    for (const auto& r : rep.sources)
        for (double a : r.amplitude) top = std::max(top, a);
    rep.edges = uniform_edges(0.0, top, bins);
    return rep;
}

void write_uq_report(const UqReport& rep, const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string eps = "variant,t_index,value,skipped\n";
    std::string sig = "source,t_index,value,skipped\n";
    std::string hist = "source,bin_lo,bin_hi,count\n";
    std::string maps = "source,j,i,mean_error,sigma_max\n";
    std::string summary = "source,draws,median_epsilon_on_mean,median_sigma_rel,max_step_residual\n";
    std::vector<svg::Series> se, ss;
    std::vector<svg::Bars> bars;
    const UqResult& truth = rep.sources.front();
    double truth_top = 0.0;
    for (double v : truth.mean.values) truth_top = std::max(truth_top, std::abs(v));
    for (const auto& r : rep.sources) {
        const Histogram h = histogram(r.amplitude, rep.edges);
        svg::Bars b{r.label, {}};
        for (std::size_t k = 0; k < h.counts.size(); ++k) {
            hist += r.label + ',' + g17(h.edges[k]) + ',' + g17(h.edges[k + 1]) + ',' + std::to_string(h.counts[k]) + '\n';
            b.counts.push_back(static_cast<double>(h.counts[k]));
        }
        bars.push_back(std::move(b));
        summary += r.label + ',' + std::to_string(r.amplitude.size()) + ',' +
                   g17(r.has_field ? curve_median(r.eps_mean) : NAN) + ',' +
                   g17(r.has_field ? curve_median(r.sigma_rel) : NAN) + ',' + g17(r.max_residual) + '\n';
        if (!r.has_field) continue;
        eps += curve_rows(r.label, r.eps_mean);
        sig += curve_rows(r.label, r.sigma_rel);
        se.push_back(as_series(r.label, r.eps_mean));
        ss.push_back(as_series(r.label, r.sigma_rel));
        const auto& g = r.mean.grid;
        std::vector<double> err(g.node_count(), 0.0), smax(g.node_count(), 0.0);
        for (std::size_t n = 0; n < r.mean.n_t; ++n)
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                err[i] += std::abs(r.mean.frame(n)[i] - truth.mean.frame(n)[i]);
                smax[i] = std::max(smax[i], r.sigma.frame(n)[i]);
            }
        for (double& v : err) v = truth_top > 0.0 ? v / static_cast<double>(r.mean.n_t) / truth_top : 0.0;
        for (std::size_t j = 0; j < g.n_y; ++j)
            for (std::size_t i = 0; i < g.n_x; ++i)
                maps += r.label + ',' + std::to_string(j) + ',' + std::to_string(i) + ',' + g17(err[g.node(i, j)]) + ',' +
                        g17(smax[g.node(i, j)]) + '\n';
        if (&r != &truth)
            write_text(dir / ("mean_error_" + file_label(r.label) + ".svg"),
                       svg::heatmap("time-mean |E[M] - E[U_mc]| / max |E[U_mc]|: " + r.label, g.n_y, g.n_x, err));
        write_text(dir / ("sigma_" + file_label(r.label) + ".svg"),
                   svg::heatmap("max over t of sigma: " + r.label, g.n_y, g.n_x, smax));
    }
    write_text(dir / "epsilon_mean.csv", eps);
    write_text(dir / "sigma_rel.csv", sig);
    write_text(dir / "amplitude_hist.csv", hist);
    write_text(dir / "maps.csv", maps);
    write_text(dir / "summary.csv", summary);
    write_text(dir / "epsilon_mean.svg", svg::line_plot("relative error on the mean", "time index", "epsilon", se));
    write_text(dir / "sigma_rel.svg", svg::line_plot("relative discrepancy", "time index", "sigma_rel", ss));
    write_text(dir / "amplitude_hist.svg", svg::histogram("maximum amplitude", rep.edges, bars));

    const UqResult* zoomed = find_uq(rep, "WGAN_BC_ZOOM");
    const UqResult* plain = find_uq(rep, "WGAN");
    std::string trend = "claim,lhs,lhs_value,rhs,rhs_value,verdict\n";
    trend += trend_row("median epsilon on the mean: WGAN_BC_ZOOM below WGAN", "WGAN_BC_ZOOM",
                       zoomed ? curve_median(zoomed->eps_mean) : NAN, "WGAN", plain ? curve_median(plain->eps_mean) : NAN);
    write_text(dir / "trend.csv", trend);
    finish_bundle(dir);
}

void cmd_uq(const RunConfig& cfg, std::optional<VariantKind> variant, std::size_t jobs, std::ostream& log) {
    if (variant && !is_gan(*variant))
        throw ConfigError(to_string(*variant) + " is parametric; it is evaluated by 'wavezoom evaluate'");
    const auto t0 = std::chrono::steady_clock::now();
    const DatasetReader train = open_dataset(cfg, Split::Train);
    const DatasetReader mc = open_dataset(cfg, Split::Mc);
    const Submodel sub(cfg.sim.sub, cfg.sim.time, cfg.sim.wave_speed);
    std::vector<FieldSeries> train_sub(train.size());
    parallel_for(train.size(), jobs, [&](std::size_t k) { train_sub[k] = sample_on_subgrid(train.field(k), cfg.sim.sub); });

    const std::size_t draws = cfg.uq.draws ? cfg.uq.draws : cfg.sizes.mc;
    std::vector<Model> models;
    for (VariantKind k : selected(cfg, variant, generative)) models.push_back(open_model(cfg, k));
    std::vector<std::vector<std::vector<double>>> latents;
    const auto& all = all_variants();
    for (const Model& m : models) {
        const auto idx = static_cast<std::uint64_t>(std::find(all.begin(), all.end(), m.kind()) - all.begin());
        Rng rng(mix_seed(cfg.uq_seed(), idx));
        std::vector<std::vector<double>> zs(draws);
        for (auto& z : zs) z = m.draw_latent(rng);
        latents.push_back(std::move(zs));
    }
    std::vector<UqSource> sources;
    for (std::size_t s = 0; s < models.size(); ++s) {
        const Model& m = models[s];
        const auto& zs = latents[s];
        const std::string name = to_string(m.kind());
        sources.push_back({name, [&m, &zs](std::size_t d) { return m.generate(zs[d]); }, draws, false});
        sources.push_back({name + "_ZOOM",
                           [&m, &zs, &sub](std::size_t d) {
                               Prediction p;
                               p.field = zoom(m.generate(zs[d]), sub);
                               return p;
                           },
                           draws, true});
    }
    const auto rep = uq_report(
        train_sub, [&](std::size_t k) { return sample_on_subgrid(mc.field(k), cfg.sim.sub); }, mc.size(), sources,
        cfg.uq.bins, &sub);
    const fs::path dir = cfg.report_dir("uq");
    write_uq_report(rep, dir);
    for (const auto& r : rep.sources)
        log << "uq: " << r.label << " draws " << r.amplitude.size() << (r.has_field ? ", median epsilon on mean " + g17(curve_median(r.eps_mean)) : std::string())
            << "\n";
    log << "uq: report -> " << dir.string() << " (" << secs(seconds_since(t0)) << ")\n";
}

}  // namespace wz
