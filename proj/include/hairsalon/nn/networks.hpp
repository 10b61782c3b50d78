#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

namespace hs::nn {

struct NetConfig {
    int size = 512;
    int base_channels = 16;
    int levels = 7;                            // encoder downsamplings; size / 2^levels >= 1
    std::vector<int> attention_levels{0, 1, 2};  // decoder stage indices, 0 = innermost
    int blend_levels = 4;                      // final decoder stages blended with background features
    int disc_layers = 3;
    int attention_cap = 64 * 64;               // max h*w at an attention block

    // Default config for a canvas: levels capped at log2(size).
    static NetConfig for_size(int size, int base_channels = 16);

    // Throws hs::Error("invalid_config").
    void validate() const;
    int channels_at(int encoder_level) const;
    // Spatial size of decoder stage d's output.
    int decoder_size(int stage) const;

    nlohmann::json to_json() const;
    static NetConfig from_json(const nlohmann::json& j);
};

// Parallel position and channel self-attention added residually:
// out = x + gamma_p * PAM(x) + gamma_c * CAM(x), both gammas zero at construction.
class DualAttentionImpl : public torch::nn::Module {
public:
    DualAttentionImpl(int channels, int cap);

    torch::Tensor forward(const torch::Tensor& x);
    torch::Tensor position_branch(const torch::Tensor& x);
    torch::Tensor channel_branch(const torch::Tensor& x);

    torch::nn::Conv2d query{nullptr}, key{nullptr}, value{nullptr};
    torch::Tensor gamma_p, gamma_c;

private:
    int cap_;
};
TORCH_MODULE(DualAttention);

// Nearest-neighbor resampling of a B x 1 x H x W matte to h x w (floor index mapping).
torch::Tensor nearest_downsample(const torch::Tensor& matte, std::int64_t h, std::int64_t w);
// F = F_hair * M_i + F_bg * (1 - M_i), M_i the nearest-downsampled matte.
torch::Tensor blend_features(const torch::Tensor& f_hair, const torch::Tensor& f_bg, const torch::Tensor& matte);

// U-shaped encoder-decoder with skip connections and attention after the configured
// decoder stages. Optional per-stage background features are blended in after attention.
class UNetImpl : public torch::nn::Module {
public:
    UNetImpl(const NetConfig& cfg, int in_channels, int out_channels);

    // bg_features[k] is blended at decoder stage levels - blend_levels + k; empty disables blending.
    // Returns pre-activation output. `trace` receives each blended stage's result when non-null.
    torch::Tensor forward(const torch::Tensor& x, const std::vector<torch::Tensor>& bg_features = {},
                          const torch::Tensor& matte = {}, std::vector<torch::Tensor>* trace = nullptr);

    const NetConfig& config() const { return cfg_; }

private:
    NetConfig cfg_;
    std::vector<torch::nn::Sequential> down_;
    std::vector<torch::nn::Sequential> up_;
    std::vector<DualAttention> attention_;  // indexed by decoder stage; null where absent
};
TORCH_MODULE(UNet);

// Sketch-to-matte: S_m (B x 1 x H x W, values -1/0/1) -> matte (tanh + 1) / 2 in [0, 1].
class S2MNetImpl : public torch::nn::Module {
public:
    explicit S2MNetImpl(const NetConfig& cfg);
    torch::Tensor forward(const torch::Tensor& sketch_mono);
    const NetConfig& config() const { return unet->config(); }

    UNet unet{nullptr};
};
TORCH_MODULE(S2MNet);

// Background encoder producing F^BG for the blended decoder stages.
class BackgroundBranchImpl : public torch::nn::Module {
public:
    explicit BackgroundBranchImpl(const NetConfig& cfg);
    // Features ordered from the coarsest blended stage to full resolution (3 output channels).
    std::vector<torch::Tensor> forward(const torch::Tensor& background);

private:
    std::vector<torch::nn::Sequential> stages_;
    torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(BackgroundBranch);

// Sketch-to-image: (S, M, noise-filled BG) -> image in [0, 1].
class S2INetImpl : public torch::nn::Module {
public:
    explicit S2INetImpl(const NetConfig& cfg);
    torch::Tensor forward(const torch::Tensor& sketch_color, const torch::Tensor& matte, const torch::Tensor& background,
                          std::vector<torch::Tensor>* trace = nullptr);
    // Background features as blended, for inspection.
    std::vector<torch::Tensor> background_features(const torch::Tensor& background) { return bg->forward(background); }
    const NetConfig& config() const { return unet->config(); }

    UNet unet{nullptr};
    BackgroundBranch bg{nullptr};
};
TORCH_MODULE(S2INet);

// Conditional patch discriminator: conditioning map concatenated with the image.
class PatchDiscriminatorImpl : public torch::nn::Module {
public:
    PatchDiscriminatorImpl(int in_channels, int base_channels, int layers);
    torch::Tensor forward(const torch::Tensor& x);

    torch::nn::Sequential body{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

// Logit grid size for a square input of side `size`.
int patch_grid_size(int size, int layers);

enum class NetKind { s2m, s2i };
std::string to_string(NetKind kind);

inline constexpr int kCheckpointVersion = 1;

struct CheckpointInfo {
    int version = kCheckpointVersion;
    NetKind kind = NetKind::s2m;
    std::string stage;
    std::int64_t step = 0;
    NetConfig config;
    nlohmann::json extra = nlohmann::json::object();
};

// Single archive: metadata, config JSON and named parameters of the generator, and
// optionally discriminator and optimizer state for resuming.
void save_checkpoint(const std::filesystem::path& path, const CheckpointInfo& info, torch::nn::Module& generator,
                     torch::nn::Module* discriminator = nullptr, torch::optim::Optimizer* opt_g = nullptr,
                     torch::optim::Optimizer* opt_d = nullptr);
CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);
// Loads parameters into modules built from the stored config.
void load_checkpoint(const std::filesystem::path& path, torch::nn::Module& generator,
                     torch::nn::Module* discriminator = nullptr, torch::optim::Optimizer* opt_g = nullptr,
                     torch::optim::Optimizer* opt_d = nullptr);

}  // namespace hs::nn
