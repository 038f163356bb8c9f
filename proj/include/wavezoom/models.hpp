#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wavezoom/dataset.hpp"
#include "wavezoom/fem.hpp"
#include "wavezoom/nn.hpp"
#include "wavezoom/pod_rf.hpp"
#include "wavezoom/rng.hpp"

namespace wz {

enum class VariantKind { NN, NN_BC, NN_t, NN_BC_t, WGAN, WGAN_BC, POD_RF };

std::string to_string(VariantKind k);
/// Throws ConfigError listing the valid names.
VariantKind variant_from_string(const std::string& s);
const std::vector<VariantKind>& all_variants();
std::string variant_list();

bool is_dcnr(VariantKind k);
bool is_gan(VariantKind k);
bool is_boundary(VariantKind k);
bool is_time_input(VariantKind k);

struct DcnrHyper {
    std::size_t epochs = 1000;
    std::size_t batch = 16;
    double lr = 3e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    // Cosine decay from lr to lr_final over the epochs.
    double lr_final = 1e-5;
    std::vector<int> channels{32, 16, 8};
    // Feed the source position after snapping to its grid node, which is all the solver sees.
    bool snap_source = true;
};

struct WganHyper {
    std::size_t epochs = 100;
    std::size_t batch = 16;
    double lr = 1e-4;
    double beta1 = 0.0;
    double beta2 = 0.9;
    double lambda_gp = 10.0;
    std::size_t n_critic = 5;
    int latent = 32;
    std::vector<int> channels{32, 16, 8};
    int critic_width = 8;
    bool exact_penalty = true;
};

struct VariantHyper {
    DcnrHyper dcnr;
    WganHyper wgan;
    PodRfParams pod_rf;
};

VariantHyper default_hyper(VariantKind k);

void to_json(nlohmann::json& j, const DcnrHyper& h);
void from_json(const nlohmann::json& j, DcnrHyper& h);
void to_json(nlohmann::json& j, const WganHyper& h);
void from_json(const nlohmann::json& j, WganHyper& h);
void to_json(nlohmann::json& j, const PodRfParams& h);
void from_json(const nlohmann::json& j, PodRfParams& h);

/// Layout of one sample's target: [n_t][h][w]. Boundary kinds use h = 1, w = n_b.
struct TargetShape {
    std::size_t n_t = 0, h = 0, w = 0;
    std::size_t frame() const { return h * w; }
    std::size_t size() const { return n_t * h * w; }
};

TargetShape target_shape(VariantKind k, const SimulationConfig& c);
/// Unnormalized target of one full-grid field: the trace on the boundary of
/// Omega' or the field interpolated onto Omega'.
std::vector<double> extract_target(VariantKind k, const FieldSeries& full, const GridSpec& sub);

/// Deconvolutional regressor: dense -> reshape -> 3 transposed convolutions -> crop.
nn::NetSpec dcnr_spec(int inputs, int channels, int h, int w, const std::vector<int>& stages);
/// 3 strided convolutions -> dense -> scalar.
nn::NetSpec critic_spec(int channels, int h, int w, int width);

struct EpochLog {
    std::size_t epoch = 0;
    double loss = 0.0;  // DcNR: mean minibatch RMSE
    double critic_loss = 0.0;
    double generator_loss = 0.0;
    double penalty = 0.0;
    double wasserstein = 0.0;
};

/// A model output on Omega' (full-field kinds) or on its boundary.
struct Prediction {
    bool is_trace = false;
    FieldSeries field;
    BoundaryTrace trace;
};

class Model {
public:
    Model() = default;

    VariantKind kind() const { return kind_; }
    bool trained() const { return trained_; }
    const SimulationConfig& config() const { return config_; }
    double scale() const { return scale_; }
    const std::vector<EpochLog>& log() const { return log_; }
    double initial_loss() const { return initial_loss_; }
    double final_loss() const { return final_loss_; }
    const nn::NetSpec& net() const { return net_; }
    const std::vector<double>& theta() const { return theta_; }
    const nn::NetSpec& critic() const { return critic_; }
    const std::vector<double>& critic_theta() const { return critic_theta_; }
    const PodRfModel& surrogate() const { return pod_; }
    int latent_dim() const { return latent_; }

    double normalize(double u) const { return u / scale_; }
    double denormalize(double v) const { return v * scale_; }

    /// Parametric kinds (DcNR and POD_RF).
    Prediction predict(const ParamVector& p) const;
    /// Generative kinds: one sample per latent vector.
    Prediction generate(const std::vector<double>& z) const;
    std::vector<double> draw_latent(Rng& rng) const;

    void save(const std::filesystem::path& dir) const;
    static Model load(const std::filesystem::path& dir);
    std::string loss_csv() const;

    friend Model train_model(VariantKind, const Dataset&, const VariantHyper&, std::uint64_t, std::size_t);
    friend Model make_model(VariantKind, const SimulationConfig&, double, nn::NetSpec, std::vector<double>, int);

private:
    Prediction wrap(const std::vector<double>& values) const;
    nlohmann::json hyper_json() const;

    VariantKind kind_ = VariantKind::NN;
    bool trained_ = false;
    SimulationConfig config_;
    double scale_ = 1.0;
    nn::NetSpec net_;
    std::vector<double> theta_;
    nn::NetSpec critic_;
    std::vector<double> critic_theta_;
    int latent_ = 0;
    PodRfModel pod_;
    VariantHyper hyper_;
    std::vector<EpochLog> log_;
    double initial_loss_ = 0.0;
    double final_loss_ = 0.0;
};

/// Trains any variant on a training dataset. Non-finite losses throw NumericalError.
Model train_model(VariantKind kind, const Dataset& train, const VariantHyper& hyper, std::uint64_t seed,
                  std::size_t jobs = 1);

/// Wraps fixed network weights as a trained model (DcNR or generator kinds).
Model make_model(VariantKind kind, const SimulationConfig& config, double scale, nn::NetSpec net,
                 std::vector<double> theta, int latent = 0);

/// Drives the submodel with the boundary values of a prediction.
FieldSeries zoom(const Prediction& p, const Submodel& sub);

/// Normalized network input for p; optionally with the source moved to its nearest node.
std::array<double, 3> dcnr_input(const SimulationConfig& c, const ParamVector& p, bool snap_source);

/// Largest max-abs over the unnormalized training targets.
double target_scale(VariantKind k, const Dataset& train);

}  // namespace wz
