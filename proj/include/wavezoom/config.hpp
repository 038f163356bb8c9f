#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "wavezoom/dataset.hpp"
#include "wavezoom/models.hpp"
#include "wavezoom/simulation.hpp"

namespace wz {

struct DatasetSizes {
    std::size_t train = 100;
    std::size_t test = 10;
    std::size_t mc = 1000;

    std::size_t of(Split s) const;
};

struct UqSettings {
    std::size_t draws = 0;  // latent draws per generative variant; 0 means the MC dataset size
    std::size_t bins = 20;
};

/// Everything a pipeline command needs. Relative output paths are resolved
/// against the directory of the config file.
struct RunConfig {
    SimulationConfig sim = SimulationConfig::paper();
    DatasetSizes sizes;
    std::uint64_t seed = 1;
    std::vector<VariantKind> variants = all_variants();
    std::map<VariantKind, VariantHyper> hyper;
    UqSettings uq;
    std::filesystem::path output = "wavezoom-run";

    RunConfig();

    const VariantHyper& hyper_for(VariantKind k) const { return hyper.at(k); }
    bool has_variant(VariantKind k) const;

    std::uint64_t dataset_seed(Split s) const;
    std::uint64_t model_seed(VariantKind k) const;
    std::uint64_t uq_seed() const { return seed + 4; }

    std::filesystem::path dataset_dir(Split s) const;
    std::filesystem::path model_dir(VariantKind k) const;
    std::filesystem::path report_dir(const std::string& command) const;
};

/// The hyperparameter block of one variant (DcNR, WGAN or POD_RF fields).
nlohmann::json variant_hyper_json(VariantKind k, const VariantHyper& h);

nlohmann::json to_json(const RunConfig& c);

/// Defaults for every missing key. Unknown keys, wrong types and
/// inconsistent values are all collected; a ConfigError lists every one.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& file);

/// Semantic problems of an already-typed config (empty if valid).
std::vector<std::string> run_config_errors(const RunConfig& c);

}  // namespace wz
