#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wavezoom/array_io.hpp"
#include "wavezoom/grid.hpp"
#include "wavezoom/params.hpp"
#include "wavezoom/simulation.hpp"

namespace wz {

enum class Split { Train, Test, Mc };

std::string to_string(Split s);
Split split_from_string(const std::string& s);
/// Reference sample counts: 100 / 10 / 1000.
std::size_t default_count(Split s);

/// Latin hypercube design: along every axis the n samples fall one per
/// equal-width stratum, uniformly within the stratum.
std::vector<ParamVector> lhs_sample(std::size_t n, const ParamBounds& bounds, std::uint64_t seed);

struct Dataset {
    Split split = Split::Train;
    std::uint64_t seed = 0;
    SimulationConfig config;
    std::vector<ParamVector> params;
    std::vector<FieldSeries> fields;  // on the full grid

    std::size_t size() const { return params.size(); }
};

/// Parameter vectors whose source would sit in the closure of the zone of interest.
std::vector<std::size_t> exclusion_violations(const SimulationConfig& config,
                                              const std::vector<ParamVector>& params);

Dataset generate_dataset(Split split, const SimulationConfig& config, std::size_t count,
                         std::uint64_t seed, std::size_t jobs = 1);

/// Writes manifest.json, params.f64 and fields/<k>.f64 under `dir`.
void save_dataset(const Dataset& d, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

/// Same files as generate_dataset + save_dataset, solved and written a few
/// samples at a time so large splits never sit in memory. Returns the count.
std::size_t write_dataset(Split split, const SimulationConfig& config, std::size_t count, std::uint64_t seed,
                          const std::filesystem::path& dir, std::size_t jobs = 1);

/// Reads the manifest eagerly and fields on demand, verifying checksums.
class DatasetReader {
public:
    explicit DatasetReader(const std::filesystem::path& dir);

    Split split() const { return split_; }
    std::uint64_t seed() const { return seed_; }
    const SimulationConfig& config() const { return config_; }
    const std::vector<ParamVector>& params() const { return params_; }
    std::size_t size() const { return params_.size(); }
    FieldSeries field(std::size_t k) const;
    Dataset load() const;

private:
    Array load_checked(const std::string& rel, const std::string& sha) const;

    std::filesystem::path dir_;
    Split split_ = Split::Train;
    std::uint64_t seed_ = 0;
    SimulationConfig config_;
    std::vector<ParamVector> params_;
    std::vector<std::string> files_, sums_;
};

}  // namespace wz
