#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "wavezoom/array_io.hpp"
#include "wavezoom/errors.hpp"
#include "wavezoom/pipeline.hpp"

using namespace wz;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wz_test_pipeline_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunConfig smoke_config(const fs::path& out) {
    json j = json::parse(R"({
        "datasets": {"train": 4, "test": 2, "mc": 8},
        "seed": 3,
        "time": {"n_t": 30},
        "models": {"NN": {"epochs": 2}, "NN_BC": {"epochs": 2}, "NN_t": {"epochs": 2}, "NN_BC_t": {"epochs": 2},
                   "WGAN": {"epochs": 2}, "WGAN_BC": {"epochs": 2}, "POD_RF": {"n_trees": 4}}
    })");
    j["output"] = out.string();
    return parse_run_config(j);
}

std::vector<FieldSeries> restricted(const Dataset& d) {
    std::vector<FieldSeries> out;
    for (const auto& f : d.fields) out.push_back(sample_on_subgrid(f, d.config.sub));
    return out;
}

}  // namespace

TEST_CASE("evaluate: oracle route is exact, offset route matches a direct loop") {
    auto cfg = SimulationConfig::aligned();
    cfg.time.n_t = 30;
    const Dataset test = generate_dataset(Split::Test, cfg, 3, 8);
    const Submodel sub(cfg.sub, cfg.time, cfg.wave_speed);
    const auto truth = restricted(test);
    std::vector<EvalEntry> entries{
        {"ORACLE", [&](std::size_t k, const ParamVector&) { return truth[k]; }, false},
        {"OFFSET",
         [&](std::size_t k, const ParamVector&) {
             FieldSeries f = truth[k];
             for (double& v : f.values) v += 1e-3;
             return f;
         },
         false},
        {"TRACE_ZOOM", [&](std::size_t k, const ParamVector&) { return sub.solve(boundary_trace(truth[k])); }, true},
    };
    const auto rs = evaluate_entries(test, entries, sub);
    REQUIRE(rs.size() == 3);
    for (std::size_t t = 0; t < rs[0].eps.size(); ++t)
        if (!rs[0].eps.skipped[t]) CHECK(rs[0].eps.value[t] == 0.0);
    for (double v : rs[0].error_map.values) CHECK(v == 0.0);

    // Direct-loop oracle for the offset route at one time index.
    const std::size_t t = cfg.time.n_t - 1;
    double want = 0.0;
    for (const auto& u : truth) {
        double m = 0.0;
        for (std::size_t i = 0; i < u.frame_size(); ++i) m = std::max(m, std::abs(u.frame(t)[i]));
        want += 1e-3 / m;
    }
    want /= 3.0;
    CHECK(rs[1].eps.value[t] == doctest::Approx(want).epsilon(1e-12));
    CHECK(rs[1].eps_ke.t_offset == 1);

    // Aligned mode: the submodel driven by the exact trace reproduces the field.
    CHECK(rs[2].max_residual <= 1e-10);
    for (std::size_t k = 0; k < rs[2].eps.size(); ++k)
        if (!rs[2].eps.skipped[k]) CHECK(rs[2].eps.value[k] <= 1e-8);
}

TEST_CASE("uq: oracle replay, degenerate and two-point generators") {
    auto cfg = SimulationConfig::paper();
    cfg.time.n_t = 20;
    const auto train = restricted(generate_dataset(Split::Train, cfg, 4, 1));
    const auto mc = restricted(generate_dataset(Split::Mc, cfg, 6, 2));
    const FieldSeries e_train = pointwise_mean(train);
    const double a = 0.25;
    auto field = [](FieldSeries f) {
        Prediction p;
        p.field = std::move(f);
        return p;
    };
    std::vector<UqSource> sources{
        {"REPLAY", [&](std::size_t d) { return field(mc[d]); }, mc.size()},
        {"MEAN", [&](std::size_t) { return field(e_train); }, 5},
        {"TWO_POINT",
         [&](std::size_t d) {
             FieldSeries f = e_train;
             for (double& v : f.values) v += d % 2 ? a : -a;
             return field(f);
         },
         10},
    };
    const auto rep = uq_report(train, [&](std::size_t k) { return mc[k]; }, mc.size(), sources, 12);
    REQUIRE(rep.sources.size() == 4);
    const auto& truth = rep.sources[0];
    const auto& replay = rep.sources[1];
    CHECK(replay.amplitude == truth.amplitude);
    CHECK(histogram(replay.amplitude, rep.edges).counts == histogram(truth.amplitude, rep.edges).counts);
    for (std::size_t t = 0; t < replay.eps_mean.size(); ++t)
        if (!replay.eps_mean.skipped[t]) CHECK(replay.eps_mean.value[t] == 0.0);
    for (double v : rep.sources[2].sigma.values) CHECK(v == 0.0);
    for (double v : rep.sources[3].sigma.values) CHECK(v == doctest::Approx(a).epsilon(1e-12));
    for (const auto& s : rep.sources) CHECK(histogram(s.amplitude, rep.edges).total() == s.amplitude.size());

    // The truth baseline against a direct loop at one node and time.
    const std::size_t t = 15, i = 40;
    double s = 0.0;
    for (const auto& u : mc) s += std::pow(u.frame(t)[i] - e_train.frame(t)[i], 2);
    CHECK(truth.sigma.frame(t)[i] == doctest::Approx(std::sqrt(s / 6.0)).epsilon(1e-12));
}

TEST_CASE("commands report missing and stale prerequisites") {
    const auto dir = scratch("missing");
    RunConfig cfg = smoke_config(dir / "run");
    std::ostringstream log;
    CHECK_THROWS_AS(cmd_train(cfg, VariantKind::NN_BC, 1, log), MissingPrerequisite);
    CHECK_THROWS_AS(cmd_uq(cfg, std::nullopt, 1, log), MissingPrerequisite);
    cmd_generate(cfg, 1, log);
    CHECK_THROWS_AS(cmd_evaluate(cfg, VariantKind::NN_BC, 1, log), MissingPrerequisite);
    CHECK_THROWS_AS(cmd_evaluate(cfg, VariantKind::WGAN, 1, log), ConfigError);
    CHECK_THROWS_AS(cmd_uq(cfg, VariantKind::NN, 1, log), ConfigError);
    RunConfig other = cfg;
    other.sim.wave_speed = 1500.0;
    CHECK_THROWS_AS(cmd_train(other, VariantKind::NN_BC, 1, log), MissingPrerequisite);
    other = cfg;
    other.seed = 4;
    CHECK_THROWS_AS(cmd_train(other, VariantKind::NN_BC, 1, log), MissingPrerequisite);
    fs::remove_all(dir);
}

TEST_CASE("smoke pipeline is byte-identical across runs") {
    const auto dir = scratch("determinism");
    std::string hashes[2][2];
    for (int r = 0; r < 2; ++r) {
        const RunConfig cfg = smoke_config(dir / ("run" + std::to_string(r)));
        std::ostringstream log;
        cmd_generate(cfg, 1, log);
        cmd_train(cfg, std::nullopt, 1, log);
        cmd_evaluate(cfg, std::nullopt, 1, log);
        cmd_uq(cfg, std::nullopt, 1, log);
        hashes[r][0] = bundle_hash(cfg.report_dir("evaluate"));
        hashes[r][1] = bundle_hash(cfg.report_dir("uq"));
        CHECK(read_text(cfg.report_dir("uq") / "BUNDLE.sha256") == hashes[r][1] + "\n");
        const auto hist = read_text(cfg.report_dir("uq") / "amplitude_hist.csv");
        for (const char* src : {"mc_truth,", "WGAN,", "WGAN_ZOOM,", "WGAN_BC,", "WGAN_BC_ZOOM,"})
            CHECK(hist.find(std::string("\n") + src) != std::string::npos);
        const auto eps = read_text(cfg.report_dir("evaluate") / "epsilon.csv");
        CHECK(eps.rfind("variant,t_index,value,skipped\n", 0) == 0);
        for (const char* v : {"\nORACLE,", "\nNN,", "\nNN_BC_ZOOM,", "\nPOD_RF,"}) CHECK(eps.find(v) != std::string::npos);
    }
    CHECK(hashes[0][0] == hashes[1][0]);
    CHECK(hashes[0][1] == hashes[1][1]);
    fs::remove_all(dir);
}
