#include "wavezoom/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "wavezoom/array_io.hpp"
#include "wavezoom/errors.hpp"
#include "wavezoom/fem.hpp"
#include "wavezoom/parallel.hpp"
#include "wavezoom/rng.hpp"

namespace wz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr int kDatasetVersion = 1;
constexpr const char* kDatasetFormat = "wavezoom-dataset";
}  // namespace

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Mc: return "mc";
    }
    return "train";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    if (s == "mc") return Split::Mc;
    throw ConfigError("unknown split '" + s + "' (expected train, test or mc)");
}

std::size_t default_count(Split s) {
    switch (s) {
        case Split::Train: return 100;
        case Split::Test: return 10;
        case Split::Mc: return 1000;
    }
    return 0;
}

std::vector<ParamVector> lhs_sample(std::size_t n, const ParamBounds& bounds, std::uint64_t seed) {
    if (n == 0) throw ConfigError("latin hypercube sample count must be >= 1");
    bounds.validate();
    Rng rng(seed);
    std::vector<std::array<double, 3>> pts(n);
    std::vector<std::size_t> perm(n);
    for (int k = 0; k < 3; ++k) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm.begin(), perm.end());
        const double width = (bounds.hi[k] - bounds.lo[k]) / static_cast<double>(n);
        for (std::size_t s = 0; s < n; ++s) {
            pts[s][k] = bounds.lo[k] + (static_cast<double>(perm[s]) + rng.uniform()) * width;
        }
    }
    std::vector<ParamVector> out;
    out.reserve(n);
    for (const auto& p : pts) out.push_back(ParamVector::from_array(p));
    return out;
}

std::vector<std::size_t> exclusion_violations(const SimulationConfig& config,
                                              const std::vector<ParamVector>& params) {
    std::vector<std::size_t> bad;
    if (!config.exclusion) return bad;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& p = params[k];
        bool hit = in_closure(config.sub, p.x_s, p.y_s);
        if (!hit) {
            const SourceTerm s = make_source(config.full, p);
            const std::size_t i = s.node % config.full.n_x;
            const std::size_t j = s.node / config.full.n_x;
            hit = in_closure(config.sub, config.full.x(i), config.full.y(j));
        }
        if (hit) bad.push_back(k);
    }
    return bad;
}

namespace {

std::vector<ParamVector> checked_design(Split split, const SimulationConfig& config, std::size_t count,
                                        std::uint64_t seed) {
    config.validate();
    if (count == 0) return {};
    auto params = lhs_sample(count, config.bounds, seed);
    const auto bad = exclusion_violations(config, params);
    if (!bad.empty()) {
        std::ostringstream os;
        os << "source-exclusion violation in " << to_string(split) << " split, samples:";
        for (auto k : bad) os << " #" << k << " (x_s=" << params[k].x_s << ", y_s=" << params[k].y_s << ")";
        throw DomainError(os.str());
    }
    return params;
}

json manifest_head(Split split, std::uint64_t seed, const SimulationConfig& config,
                   const std::vector<ParamVector>& params, const fs::path& dir) {
    std::vector<double> flat;
    flat.reserve(params.size() * 3);
    for (const auto& p : params)
        for (double v : p.as_array()) flat.push_back(v);
    const std::uint64_t pshape[2] = {params.size(), 3};
    json m;
    m["format"] = kDatasetFormat;
    m["version"] = kDatasetVersion;
    m["split"] = to_string(split);
    m["seed"] = seed;
    m["count"] = params.size();
    m["config"] = config;
    m["params"] = {{"file", "params.f64"}, {"sha256", write_array(dir / "params.f64", pshape, flat)}};
    m["samples"] = json::array();
    return m;
}

void append_sample(json& m, const fs::path& dir, const SimulationConfig& config, std::size_t k,
                   const ParamVector& p, const FieldSeries& f) {
    if (f.grid != config.full || f.n_t != config.time.n_t)
        throw ShapeError("dataset field " + std::to_string(k) + " does not match the configured grid");
    const std::uint64_t shape[3] = {f.n_t, f.grid.n_y, f.grid.n_x};
    const std::string rel = "fields/" + std::to_string(k) + ".f64";
    const std::string sha = write_array(dir / rel, shape, f.values);
    m["samples"].push_back(
        {{"index", k}, {"omega", p.omega}, {"x_s", p.x_s}, {"y_s", p.y_s}, {"file", rel}, {"sha256", sha}});
}

void reset_dir(const fs::path& dir) {
    fs::remove_all(dir / "fields");
    fs::remove(dir / "manifest.json");
    fs::create_directories(dir / "fields");
}

}  // namespace

Dataset generate_dataset(Split split, const SimulationConfig& config, std::size_t count,
                         std::uint64_t seed, std::size_t jobs) {
    Dataset d;
    d.split = split;
    d.seed = seed;
    d.config = config;
    d.params = checked_design(split, config, count, seed);
    if (count == 0) return d;
    const FullModel model(config.full, config.time, config.wave_speed);
    d.fields.resize(count);
    parallel_for(count, jobs, [&](std::size_t k) { d.fields[k] = model.solve(d.params[k]); });
    return d;
}

std::size_t write_dataset(Split split, const SimulationConfig& config, std::size_t count, std::uint64_t seed,
                          const fs::path& dir, std::size_t jobs) {
    const auto params = checked_design(split, config, count, seed);
    reset_dir(dir);
    json m = manifest_head(split, seed, config, params, dir);
    if (count > 0) {
        const FullModel model(config.full, config.time, config.wave_speed);
        const std::size_t chunk = std::max<std::size_t>(1, jobs) * 8;
        std::vector<FieldSeries> buf;
        for (std::size_t k0 = 0; k0 < count; k0 += chunk) {
            const std::size_t n = std::min(chunk, count - k0);
            buf.assign(n, FieldSeries{});
            parallel_for(n, jobs, [&](std::size_t i) { buf[i] = model.solve(params[k0 + i]); });
            for (std::size_t i = 0; i < n; ++i) append_sample(m, dir, config, k0 + i, params[k0 + i], buf[i]);
        }
    }
    write_text(dir / "manifest.json", m.dump(2) + "\n");
    return count;
}

void save_dataset(const Dataset& d, const fs::path& dir) {
    if (d.fields.size() != d.params.size()) throw ShapeError("dataset has mismatched params/fields");
    reset_dir(dir);
    json m = manifest_head(d.split, d.seed, d.config, d.params, dir);
    for (std::size_t k = 0; k < d.size(); ++k) append_sample(m, dir, d.config, k, d.params[k], d.fields[k]);
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

DatasetReader::DatasetReader(const fs::path& dir) : dir_(dir) {
    if (!fs::exists(dir / "manifest.json")) {
        throw MissingPrerequisite("no dataset manifest in " + dir.string());
    }
    json m;
    try {
        m = json::parse(read_text(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw ShapeError("dataset manifest is not valid JSON: " + std::string(e.what()));
    }
    if (m.value("format", "") != kDatasetFormat || m.value("version", 0) != kDatasetVersion) {
        throw ShapeError("unsupported dataset format/version in " + dir.string());
    }
    try {
        split_ = split_from_string(m.at("split").get<std::string>());
        seed_ = m.at("seed").get<std::uint64_t>();
        config_ = m.at("config").get<SimulationConfig>();
        const auto count = m.at("count").get<std::size_t>();
        const Array pa = load_checked(m.at("params").at("file").get<std::string>(),
                                      m.at("params").at("sha256").get<std::string>());
        if (pa.shape.size() != 2 || pa.shape[0] != count || pa.shape[1] != 3) {
            throw ShapeError("params.f64: shape mismatch with manifest count " + std::to_string(count));
        }
        const auto& samples = m.at("samples");
        if (samples.size() != count) throw ShapeError("manifest sample list does not match count");
        for (std::size_t k = 0; k < count; ++k) {
            params_.push_back({pa.data[3 * k], pa.data[3 * k + 1], pa.data[3 * k + 2]});
            files_.push_back(samples[k].at("file").get<std::string>());
            sums_.push_back(samples[k].at("sha256").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ShapeError("dataset manifest in " + dir.string() + " is malformed: " + e.what());
    }
}

Array DatasetReader::load_checked(const std::string& rel, const std::string& sha) const {
    const auto bytes = read_file(dir_ / rel);
    Array a = decode_array(bytes, rel);
    if (sha256_hex(bytes) != sha) throw ShapeError(rel + ": checksum mismatch");
    return a;
}

FieldSeries DatasetReader::field(std::size_t k) const {
    if (k >= size()) throw ShapeError("dataset sample index out of range");
    Array fa = load_checked(files_[k], sums_[k]);
    if (fa.shape != std::vector<std::uint64_t>{config_.time.n_t, config_.full.n_y, config_.full.n_x}) {
        throw ShapeError(files_[k] + ": shape mismatch with dataset grid");
    }
    FieldSeries f(config_.full, config_.time.n_t);
    f.values = std::move(fa.data);
    return f;
}

Dataset DatasetReader::load() const {
    Dataset d;
    d.split = split_;
    d.seed = seed_;
    d.config = config_;
    d.params = params_;
    for (std::size_t k = 0; k < size(); ++k) d.fields.push_back(field(k));
    return d;
}

Dataset load_dataset(const fs::path& dir) { return DatasetReader(dir).load(); }

}  // namespace wz
