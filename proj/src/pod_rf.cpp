#include "wavezoom/pod_rf.hpp"

#include "json.hpp"
#include "wavezoom/array_io.hpp"
#include "wavezoom/errors.hpp"
#include "wavezoom/fem.hpp"
#include "wavezoom/parallel.hpp"
#include "wavezoom/rng.hpp"
#include "wavezoom/simulation.hpp"

namespace wz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "wavezoom-pod-rf";
constexpr std::size_t kNodeColumns = 6;

std::vector<double> encode_forest(const Forest& f, std::vector<double>& roots) {
    std::vector<double> rows;
    roots.clear();
    std::size_t offset = 0;
    for (const auto& t : f.trees()) {
        roots.push_back(static_cast<double>(offset));
        for (const auto& n : t.nodes()) {
            rows.insert(rows.end(), {static_cast<double>(n.feature), n.threshold, static_cast<double>(n.left),
                                     static_cast<double>(n.right), n.value, static_cast<double>(n.count)});
        }
        offset += t.nodes().size();
    }
    roots.push_back(static_cast<double>(offset));
    return rows;
}

Forest decode_forest(const Array& nodes, const Array& roots, std::size_t n_features) {
    if (nodes.shape.size() != 2 || nodes.shape[1] != kNodeColumns || roots.shape.size() != 1 || roots.data.empty()) {
        throw ShapeError("forest arrays have the wrong shape");
    }
    std::vector<RegressionTree> trees;
    for (std::size_t t = 0; t + 1 < roots.data.size(); ++t) {
        const auto b = static_cast<std::size_t>(roots.data[t]);
        const auto e = static_cast<std::size_t>(roots.data[t + 1]);
        if (e < b || e > nodes.shape[0]) throw ShapeError("forest tree offsets out of range");
        std::vector<RegressionTree::Node> ns;
        for (std::size_t k = b; k < e; ++k) {
            const double* r = &nodes.data[k * kNodeColumns];
            RegressionTree::Node n;
            n.feature = static_cast<std::int32_t>(r[0]);
            n.threshold = r[1];
            n.left = static_cast<std::int32_t>(r[2]);
            n.right = static_cast<std::int32_t>(r[3]);
            n.value = r[4];
            n.count = static_cast<std::uint32_t>(r[5]);
            ns.push_back(n);
        }
        trees.emplace_back(std::move(ns));
    }
    return Forest(n_features, std::move(trees));
}

}  // namespace

Eigen::VectorXd lumped_mass(const GridSpec& grid) {
    const Grid g = build_grid(grid);
    const ElementMatrices em = element_matrices(grid.dx(), grid.dy());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.node_count()));
    for (const auto& el : g.elements)
        for (int a = 0; a < 4; ++a) w[static_cast<Eigen::Index>(el[a])] += em.mass.row(a).sum();
    return w;
}

std::vector<double> PodRfModel::features(const ParamVector& p, std::size_t step) const {
    const auto pn = bounds_.normalize(p);
    const double tn = 2.0 * time_.t(step) / time_.t_final() - 1.0;
    return {pn[0], pn[1], pn[2], tn};
}

PodRfModel PodRfModel::fit(const std::vector<ParamVector>& params, const std::vector<FieldSeries>& fields,
                           const ParamBounds& bounds, const TimeGrid& time, const PodRfParams& hyper,
                           std::size_t jobs) {
    if (params.empty() || params.size() != fields.size()) {
        throw ConfigError("POD_RF needs a non-empty training set with one field per parameter vector");
    }
    PodRfModel m;
    m.grid_ = fields.front().grid;
    m.time_ = time;
    m.bounds_ = bounds;
    m.hyper_ = hyper;
    const auto dof = static_cast<Eigen::Index>(m.grid_.node_count());
    const auto rows = static_cast<Eigen::Index>(params.size() * time.n_t);
    if (rows < 2) throw ConfigError("POD_RF needs at least 2 training rows");
    Eigen::MatrixXd snapshots(rows, dof);
    Eigen::MatrixXd inputs(rows, 4);
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (fields[k].grid != m.grid_ || fields[k].n_t != time.n_t) throw ShapeError("POD_RF training fields disagree in shape");
        for (std::size_t n = 0; n < time.n_t; ++n) {
            const auto r = static_cast<Eigen::Index>(k * time.n_t + n);
            snapshots.row(r) = Eigen::Map<const Eigen::RowVectorXd>(fields[k].frame(n), dof);
            const auto f = m.features(params[k], n);
            for (int c = 0; c < 4; ++c) inputs(r, c) = f[static_cast<std::size_t>(c)];
        }
    }
    const Eigen::VectorXd w = hyper.mass_weighted ? lumped_mass(m.grid_) : Eigen::VectorXd();
    m.basis_ = build_pod(snapshots, hyper.energy_tol, w);
    const auto rank = static_cast<Eigen::Index>(m.basis_.rank());
    const Eigen::MatrixXd coords = hyper.mass_weighted ? Eigen::MatrixXd(snapshots * w.asDiagonal() * m.basis_.modes.transpose())
                                                       : Eigen::MatrixXd(snapshots * m.basis_.modes.transpose());
    m.forests_.resize(static_cast<std::size_t>(rank));
    // Trees inside one forest run in parallel; coordinates are processed in order.
    for (Eigen::Index k = 0; k < rank; ++k) {
        ForestParams fp = hyper.forest;
        fp.seed = mix_seed(hyper.forest.seed, static_cast<std::uint64_t>(k));
        m.forests_[static_cast<std::size_t>(k)] = fit_forest(inputs, coords.col(k), fp, jobs);
    }
    return m;
}

Eigen::VectorXd PodRfModel::predict_coords(const ParamVector& p, std::size_t step) const {
    if (basis_.dof() == 0) throw MissingPrerequisite("POD_RF model is not trained");
    const auto f = features(p, step);
    Eigen::VectorXd a(static_cast<Eigen::Index>(forests_.size()));
    for (std::size_t k = 0; k < forests_.size(); ++k) a[static_cast<Eigen::Index>(k)] = forests_[k].predict(f);
    return a;
}

FieldSeries PodRfModel::predict(const ParamVector& p) const {
    FieldSeries out(grid_, time_.n_t);
    for (std::size_t n = 0; n < time_.n_t; ++n) {
        const Eigen::VectorXd u = reconstruct(predict_coords(p, n), basis_);
        std::copy(u.data(), u.data() + u.size(), out.frame(n));
    }
    return out;
}

void PodRfModel::save(const fs::path& dir) const {
    fs::create_directories(dir);
    json m;
    m["format"] = kFormat;
    m["version"] = 1;
    m["grid"] = grid_;
    m["time"] = time_;
    m["bounds"] = bounds_;
    m["energy_tol"] = hyper_.energy_tol;
    m["mass_weighted"] = hyper_.mass_weighted;
    m["forest"] = {{"n_trees", hyper_.forest.n_trees},     {"min_leaf", hyper_.forest.min_leaf},
                   {"max_depth", hyper_.forest.max_depth}, {"bootstrap", hyper_.forest.bootstrap},
                   {"bootstrap_ratio", hyper_.forest.bootstrap_ratio},
                   {"max_features", hyper_.forest.max_features}, {"seed", hyper_.forest.seed}};
    m["rank"] = basis_.rank();
    json files = json::object();
    const std::uint64_t mshape[2] = {basis_.rank(), basis_.dof()};
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> modes = basis_.modes;
    files["modes.f64"] = write_array(dir / "modes.f64", mshape, std::span(modes.data(), static_cast<std::size_t>(modes.size())));
    const std::uint64_t eshape[1] = {static_cast<std::uint64_t>(basis_.eigenvalues.size())};
    files["eigenvalues.f64"] = write_array(dir / "eigenvalues.f64", eshape,
                                           std::span(basis_.eigenvalues.data(), static_cast<std::size_t>(basis_.eigenvalues.size())));
    const std::uint64_t wshape[1] = {static_cast<std::uint64_t>(basis_.weights.size())};
    files["weights.f64"] = write_array(dir / "weights.f64", wshape,
                                       std::span(basis_.weights.data(), static_cast<std::size_t>(basis_.weights.size())));
    for (std::size_t k = 0; k < forests_.size(); ++k) {
        std::vector<double> roots;
        const auto rows = encode_forest(forests_[k], roots);
        const std::uint64_t nshape[2] = {rows.size() / kNodeColumns, kNodeColumns};
        const std::uint64_t rshape[1] = {roots.size()};
        const std::string base = "forest_" + std::to_string(k);
        files[base + "_nodes.f64"] = write_array(dir / (base + "_nodes.f64"), nshape, rows);
        files[base + "_roots.f64"] = write_array(dir / (base + "_roots.f64"), rshape, roots);
    }
    m["files"] = files;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

PodRfModel PodRfModel::load(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) throw MissingPrerequisite("no POD_RF model in " + dir.string());
    const json m = json::parse(read_text(dir / "manifest.json"));
    if (m.value("format", "") != kFormat) throw ShapeError("not a POD_RF model: " + dir.string());
    const auto& files = m.at("files");
    auto load_checked = [&](const std::string& name) {
        const auto bytes = read_file(dir / name);
        Array a = decode_array(bytes, name);
        if (sha256_hex(bytes) != files.at(name).get<std::string>()) throw ShapeError(name + ": checksum mismatch");
        return a;
    };
    PodRfModel r;
    r.grid_ = m.at("grid").get<GridSpec>();
    r.time_ = m.at("time").get<TimeGrid>();
    r.bounds_ = m.at("bounds").get<ParamBounds>();
    r.hyper_.energy_tol = m.at("energy_tol").get<double>();
    r.hyper_.mass_weighted = m.at("mass_weighted").get<bool>();
    const auto& fj = m.at("forest");
    r.hyper_.forest = {fj.at("n_trees"), fj.at("min_leaf"), fj.at("max_depth"), fj.at("bootstrap"),
                       fj.at("bootstrap_ratio"), fj.at("max_features"), fj.at("seed")};
    const auto rank = m.at("rank").get<std::size_t>();
    const Array modes = load_checked("modes.f64");
    if (modes.shape != std::vector<std::uint64_t>{rank, r.grid_.node_count()}) throw ShapeError("modes.f64: shape mismatch");
    r.basis_.modes = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        modes.data.data(), static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(r.grid_.node_count()));
    const Array ev = load_checked("eigenvalues.f64");
    r.basis_.eigenvalues = Eigen::Map<const Eigen::VectorXd>(ev.data.data(), static_cast<Eigen::Index>(ev.data.size()));
    const Array w = load_checked("weights.f64");
    r.basis_.weights = Eigen::Map<const Eigen::VectorXd>(w.data.data(), static_cast<Eigen::Index>(w.data.size()));
    for (std::size_t k = 0; k < rank; ++k) {
        const std::string base = "forest_" + std::to_string(k);
        r.forests_.push_back(decode_forest(load_checked(base + "_nodes.f64"), load_checked(base + "_roots.f64"), 4));
    }
    return r;
}

}  // namespace wz
