#include "wavezoom/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "wavezoom/array_io.hpp"
#include "wavezoom/errors.hpp"
#include "wavezoom/rng.hpp"

namespace wz {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t DatasetSizes::of(Split s) const {
    switch (s) {
        case Split::Train: return train;
        case Split::Test: return test;
        case Split::Mc: return mc;
    }
    return 0;
}

RunConfig::RunConfig() {
    for (VariantKind k : all_variants()) hyper[k] = default_hyper(k);
}

bool RunConfig::has_variant(VariantKind k) const {
    return std::find(variants.begin(), variants.end(), k) != variants.end();
}

std::uint64_t RunConfig::dataset_seed(Split s) const {
    switch (s) {
        case Split::Train: return seed;
        case Split::Test: return seed + 1;
        case Split::Mc: return seed + 2;
    }
    return seed;
}

std::uint64_t RunConfig::model_seed(VariantKind k) const {
    const auto& all = all_variants();
    const auto idx = static_cast<std::uint64_t>(std::find(all.begin(), all.end(), k) - all.begin());
    return mix_seed(seed + 3, idx);
}

fs::path RunConfig::dataset_dir(Split s) const { return output / "datasets" / to_string(s); }
fs::path RunConfig::model_dir(VariantKind k) const { return output / "models" / to_string(k); }
fs::path RunConfig::report_dir(const std::string& command) const { return output / "reports" / command; }

json variant_hyper_json(VariantKind k, const VariantHyper& h) {
    if (is_dcnr(k)) return h.dcnr;
    if (is_gan(k)) return h.wgan;
    return h.pod_rf;
}

namespace {

void variant_hyper_from_json(VariantKind k, const json& j, VariantHyper& h) {
    if (is_dcnr(k))
        h.dcnr = j.get<DcnrHyper>();
    else if (is_gan(k))
        h.wgan = j.get<WganHyper>();
    else
        h.pod_rf = j.get<PodRfParams>();
}

std::string describe(const json& v) {
    switch (v.type()) {
        case json::value_t::null: return "null";
        case json::value_t::boolean: return "a boolean";
        case json::value_t::string: return "a string";
        case json::value_t::array: return "an array";
        case json::value_t::object: return "an object";
        case json::value_t::number_float: return "a real number";
        default: return v.is_number_integer() && v.get<std::int64_t>() < 0 ? "a negative integer" : "an integer";
    }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// The serialized defaults double as the schema: every key the user gives must
// exist there with a compatible type.
void check_shape(const json& def, const json& user, const std::string& path, std::vector<std::string>& errs) {
    auto bad = [&](const std::string& want) { errs.push_back(path + ": expected " + want + ", got " + describe(user)); };
    switch (def.type()) {
        case json::value_t::object:
            if (!user.is_object()) return bad("an object");
            for (auto it = user.begin(); it != user.end(); ++it) {
                if (!def.contains(it.key())) {
                    std::string known;
                    for (auto d = def.begin(); d != def.end(); ++d) known += (known.empty() ? "" : ", ") + d.key();
                    errs.push_back(join(path, it.key()) + ": unknown key (expected one of: " + known + ")");
                    continue;
                }
                check_shape(def.at(it.key()), it.value(), join(path, it.key()), errs);
            }
            return;
        case json::value_t::array:
            if (!user.is_array()) return bad("an array");
            if (path.rfind("bounds.", 0) == 0 && user.size() != 2) {
                errs.push_back(path + ": expected [min, max]");
                return;
            }
            if (!def.empty())
                for (std::size_t i = 0; i < user.size(); ++i)
                    check_shape(def[0], user[i], path + "[" + std::to_string(i) + "]", errs);
            return;
        case json::value_t::number_unsigned:
            if (!user.is_number_integer() || (!user.is_number_unsigned() && user.get<std::int64_t>() < 0))
                return bad("a non-negative integer");
            return;
        case json::value_t::number_integer:
            if (!user.is_number_integer()) return bad("an integer");
            return;
        case json::value_t::number_float:
            if (!user.is_number()) return bad("a number");
            if (!std::isfinite(user.get<double>())) return bad("a finite number");
            return;
        case json::value_t::boolean:
            if (!user.is_boolean()) return bad("a boolean");
            return;
        case json::value_t::string:
            if (!user.is_string()) return bad("a string");
            return;
        default:
            return;
    }
}

json sim_json(const json& j) {
    json s = {{"mode", j.at("grid").at("mode")},   {"full", j.at("grid").at("full")},
              {"sub", j.at("grid").at("sub")},      {"time", j.at("time")},
              {"wave_speed", j.at("wave_speed")},   {"bounds", j.at("bounds")},
              {"exclusion", j.at("exclusion")}};
    return s;
}

void check_positive(std::vector<std::string>& errs, const std::string& path, double v) {
    if (!(v > 0.0)) errs.push_back(path + ": must be > 0");
}

void check_at_least_one(std::vector<std::string>& errs, const std::string& path, std::size_t v) {
    if (v < 1) errs.push_back(path + ": must be >= 1");
}

void check_beta(std::vector<std::string>& errs, const std::string& path, double v) {
    if (!(v >= 0.0 && v < 1.0)) errs.push_back(path + ": must be in [0, 1)");
}

void check_channels(std::vector<std::string>& errs, const std::string& path, const std::vector<int>& c) {
    if (c.size() != 3) errs.push_back(path + ": expected 3 stage widths");
    for (int v : c)
        if (v < 1) {
            errs.push_back(path + ": widths must be >= 1");
            break;
        }
}

void hyper_errors(VariantKind k, const VariantHyper& h, std::vector<std::string>& errs) {
    const std::string p = "models." + to_string(k);
    if (is_dcnr(k)) {
        const auto& d = h.dcnr;
        check_at_least_one(errs, p + ".epochs", d.epochs);
        check_at_least_one(errs, p + ".batch", d.batch);
        check_positive(errs, p + ".lr", d.lr);
        check_positive(errs, p + ".lr_final", d.lr_final);
        check_beta(errs, p + ".beta1", d.beta1);
        check_beta(errs, p + ".beta2", d.beta2);
        check_channels(errs, p + ".channels", d.channels);
    } else if (is_gan(k)) {
        const auto& g = h.wgan;
        check_at_least_one(errs, p + ".epochs", g.epochs);
        check_at_least_one(errs, p + ".batch", g.batch);
        check_positive(errs, p + ".lr", g.lr);
        check_beta(errs, p + ".beta1", g.beta1);
        check_beta(errs, p + ".beta2", g.beta2);
        if (!(g.lambda_gp >= 0.0)) errs.push_back(p + ".lambda_gp: must be >= 0");
        check_at_least_one(errs, p + ".n_critic", g.n_critic);
        if (g.latent < 1) errs.push_back(p + ".latent: must be >= 1");
        if (g.critic_width < 1) errs.push_back(p + ".critic_width: must be >= 1");
        check_channels(errs, p + ".channels", g.channels);
    } else {
        const auto& r = h.pod_rf;
        if (!(r.energy_tol >= 0.0 && r.energy_tol < 1.0)) errs.push_back(p + ".energy_tol: must be in [0, 1)");
        check_at_least_one(errs, p + ".n_trees", r.forest.n_trees);
        check_at_least_one(errs, p + ".min_leaf", r.forest.min_leaf);
        if (!(r.forest.bootstrap_ratio > 0.0 && r.forest.bootstrap_ratio <= 1.0))
            errs.push_back(p + ".bootstrap_ratio: must be in (0, 1]");
        if (r.forest.max_features > 4) errs.push_back(p + ".max_features: at most 4 inputs (omega, x_s, y_s, t)");
    }
}

[[noreturn]] void fail(const std::vector<std::string>& errs) {
    std::string msg = "invalid configuration (" + std::to_string(errs.size()) + " problem" +
                      (errs.size() == 1 ? "" : "s") + "):";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
}

}  // namespace

json to_json(const RunConfig& c) {
    json models = json::object();
    for (const auto& [k, h] : c.hyper) models[to_string(k)] = variant_hyper_json(k, h);
    json variants = json::array();
    for (VariantKind k : c.variants) variants.push_back(to_string(k));
    return json{{"grid", {{"mode", to_string(c.sim.mode)}, {"full", c.sim.full}, {"sub", c.sim.sub}}},
                {"time", c.sim.time},
                {"wave_speed", c.sim.wave_speed},
                {"bounds", c.sim.bounds},
                {"exclusion", c.sim.exclusion},
                {"datasets", {{"train", c.sizes.train}, {"test", c.sizes.test}, {"mc", c.sizes.mc}}},
                {"seed", c.seed},
                {"variants", variants},
                {"models", models},
                {"uq", {{"draws", c.uq.draws}, {"bins", c.uq.bins}}},
                {"output", c.output.generic_string()}};
}

std::vector<std::string> run_config_errors(const RunConfig& c) {
    std::vector<std::string> errs = c.sim.validation_errors();
    check_at_least_one(errs, "datasets.train", c.sizes.train);
    check_at_least_one(errs, "datasets.test", c.sizes.test);
    check_at_least_one(errs, "datasets.mc", c.sizes.mc);
    if (c.variants.empty()) errs.push_back("variants: must name at least one variant");
    std::set<VariantKind> seen;
    for (VariantKind k : c.variants)
        if (!seen.insert(k).second) errs.push_back("variants: " + to_string(k) + " listed twice");
    for (const auto& [k, h] : c.hyper) hyper_errors(k, h, errs);
    check_at_least_one(errs, "uq.bins", c.uq.bins);
    if (c.output.empty()) errs.push_back("output: must not be empty");
    return errs;
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
    std::vector<std::string> errs;
    if (!j.is_object()) fail({"top level: expected an object, got " + describe(j)});

    GridMode mode = GridMode::Paper;
    if (j.contains("grid") && j["grid"].is_object() && j["grid"].contains("mode") && j["grid"]["mode"].is_string()) {
        try {
            mode = grid_mode_from_string(j["grid"]["mode"].get<std::string>());
        } catch (const ConfigError& e) {
            errs.push_back(e.what());
        }
    }
    RunConfig c;
    c.sim = mode == GridMode::Paper ? SimulationConfig::paper() : SimulationConfig::aligned();
    const json defaults = to_json(c);
    check_shape(defaults, j, "", errs);

    std::vector<VariantKind> variants;
    if (j.contains("variants") && j["variants"].is_array()) {
        for (const auto& v : j["variants"]) {
            if (!v.is_string()) continue;
            try {
                variants.push_back(variant_from_string(v.get<std::string>()));
            } catch (const ConfigError& e) {
                errs.push_back(std::string("variants: ") + e.what());
            }
        }
    }
    if (!errs.empty()) fail(errs);

    json merged = defaults;
    merged.merge_patch(j);
    // merge_patch replaces arrays wholesale, which is what we want for
    // channels, bounds and the variant list.
    try {
        c.sim = sim_json(merged).get<SimulationConfig>();
        c.sizes.train = merged["datasets"]["train"].get<std::size_t>();
        c.sizes.test = merged["datasets"]["test"].get<std::size_t>();
        c.sizes.mc = merged["datasets"]["mc"].get<std::size_t>();
        c.seed = merged["seed"].get<std::uint64_t>();
        if (j.contains("variants")) c.variants = variants;
        for (VariantKind k : all_variants()) variant_hyper_from_json(k, merged["models"][to_string(k)], c.hyper[k]);
        c.uq.draws = merged["uq"]["draws"].get<std::size_t>();
        c.uq.bins = merged["uq"]["bins"].get<std::size_t>();
        c.output = merged["output"].get<std::string>();
    } catch (const json::exception& e) {
        fail({std::string("type error: ") + e.what()});
    }
    errs = run_config_errors(c);
    if (!errs.empty()) fail(errs);
    if (c.output.is_relative() && !base_dir.empty()) c.output = base_dir / c.output;
    return c;
}

RunConfig load_run_config(const fs::path& file) {
    if (!fs::is_regular_file(file)) throw ConfigError("config file not found: " + file.string());
    json j;
    try {
        j = json::parse(read_text(file));
    } catch (const json::exception& e) {
        throw ConfigError("config file " + file.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(j, file.parent_path());
}

}  // namespace wz
