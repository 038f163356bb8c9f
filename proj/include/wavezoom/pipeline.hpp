#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wavezoom/config.hpp"
#include "wavezoom/metrics.hpp"
#include "wavezoom/models.hpp"

namespace wz {

/// Writes train, test and mc datasets under <output>/datasets.
void cmd_generate(const RunConfig& cfg, std::size_t jobs, std::ostream& log);

/// Trains one variant, or every configured variant when none is given.
void cmd_train(const RunConfig& cfg, std::optional<VariantKind> variant, std::size_t jobs, std::ostream& log);

/// Test-set error curves for the parametric variants -> <output>/reports/evaluate.
void cmd_evaluate(const RunConfig& cfg, std::optional<VariantKind> variant, std::size_t jobs, std::ostream& log);

/// Monte-Carlo statistics of the generative variants -> <output>/reports/uq.
void cmd_uq(const RunConfig& cfg, std::optional<VariantKind> variant, std::size_t jobs, std::ostream& log);

// Building blocks, exposed for tests.

/// One evaluated model route: the prediction on Omega' for test sample k.
struct EvalEntry {
    std::string label;
    std::function<FieldSeries(std::size_t k, const ParamVector& p)> predict;
    bool zoomed = false;
};

struct EvalResult {
    std::string label;
    Curve eps;     // on the field
    Curve eps_ke;  // on the kinetic energy
    FieldSeries error_map;  // single frame: mean over samples and t of |M - U| / max |U|
    double max_residual = 0.0;  // submodel step residual over all samples (zoomed routes)
};

std::vector<EvalResult> evaluate_entries(const Dataset& test, const std::vector<EvalEntry>& entries,
                                         const Submodel& sub, std::size_t jobs = 1);

/// One generative source: draw d -> a field on Omega' or a boundary trace.
struct UqSource {
    std::string label;
    std::function<Prediction(std::size_t d)> draw;
    std::size_t draws = 0;
    bool zoomed = false;
};

struct UqResult {
    std::string label;
    bool has_field = false;
    FieldSeries mean;
    FieldSeries sigma;  // sqrt(E[(M - E_Train)^2])
    Curve eps_mean;     // against the truth MC mean
    Curve sigma_rel;
    std::vector<double> amplitude;  // per draw: spatial max of A
    double max_residual = 0.0;
};

struct UqReport {
    FieldSeries train_mean, train_std;
    std::vector<UqResult> sources;  // sources[0] is the truth MC set
    std::vector<double> edges;
};

/// `truth(k)` returns MC sample k on Omega' for k < n_truth.
UqReport uq_report(const std::vector<FieldSeries>& train_sub, const std::function<FieldSeries(std::size_t)>& truth,
                   std::size_t n_truth, const std::vector<UqSource>& sources, std::size_t bins,
                   const Submodel* residual_check = nullptr);

void write_eval_report(const std::vector<EvalResult>& results, const std::filesystem::path& dir);
void write_uq_report(const UqReport& report, const std::filesystem::path& dir);

/// SHA-256 over the sorted relative paths and contents of every file in
/// `dir` except BUNDLE.sha256 itself.
std::string bundle_hash(const std::filesystem::path& dir);

/// "t_index,value,skipped" rows; skipped entries hold nan.
std::string curve_rows(const std::string& label, const Curve& c);

}  // namespace wz
