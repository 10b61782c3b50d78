#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "hairsalon/data_synth.hpp"
#include "hairsalon/nn/losses.hpp"
#include "hairsalon/nn/networks.hpp"

namespace hs::nn {

enum class Stage { s2m, s2i_unbraided, s2i_braided_finetune };

Stage stage_from_string(const std::string& name);
std::string to_string(Stage stage);
NetKind net_kind(Stage stage);

struct TrainConfig {
    Stage stage = Stage::s2m;
    NetConfig net;
    LossWeights weights;
    GanMode gan = GanMode::bce;
    double lr_g = 2e-4;
    double lr_d = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int batch_size = 4;
    std::int64_t iterations = 100;
    std::uint64_t seed = 0;
    std::int64_t checkpoint_every = 0;  // 0: final checkpoint only
    bool augment = true;
    bool nonhair = true;
    // Required for s2i_braided_finetune: an s2i_unbraided checkpoint.
    std::filesystem::path init_checkpoint;
    std::uint64_t perceptual_seed = 1234;

    nlohmann::json to_json() const;
};

// Tensors for one optimization step, B x C x H x W.
struct TensorBatch {
    torch::Tensor sketch_mono, sketch_color, matte, image, background;
    std::vector<Style> styles;
};

// Converts a data_synth batch; the background's hair region is filled with seeded noise.
TensorBatch to_tensors(const TrainingBatch& batch, std::uint64_t noise_seed);

class Trainer {
public:
    // `pairs` is filtered to the stage's styles. Throws when the subset is empty or the
    // stage prerequisites are missing.
    Trainer(TrainConfig config, const std::vector<SamplePair>& pairs);

    // Batch used for step `step`: a pure function of (seed, step).
    TensorBatch batch_for_step(std::int64_t step) const;
    // The first `count` samples of the subset, unaugmented, with non-hair strokes from `seed`.
    TensorBatch fixed_batch(std::size_t count, std::uint64_t seed) const;
    // One discriminator update followed by one generator update.
    LossBreakdown train_step(const TensorBatch& batch);
    LossBreakdown step();

    // Generator forward and reconstruction L1 without updating anything.
    double eval_l1(const TensorBatch& batch);
    LossBreakdown eval_losses(const TensorBatch& batch);

    void save(const std::filesystem::path& path);
    // Restores parameters, optimizer state and the step counter.
    void resume(const std::filesystem::path& path);

    std::int64_t current_step() const { return step_; }
    const TrainConfig& config() const { return cfg_; }
    torch::nn::Module& generator();
    torch::nn::Module& discriminator() { return *disc_; }
    std::size_t subset_size() const { return subset_.size(); }

private:
    torch::Tensor generate(const TensorBatch& b);
    torch::Tensor disc_input(const TensorBatch& b, const torch::Tensor& output);
    GeneratorLoss generator_loss(const TensorBatch& b, const torch::Tensor& output, const torch::Tensor& logits_fake);

    TrainConfig cfg_;
    std::vector<SamplePair> subset_;
    S2MNet s2m_{nullptr};
    S2INet s2i_{nullptr};
    PatchDiscriminator disc_{nullptr};
    std::unique_ptr<torch::optim::Adam> opt_g_, opt_d_;
    RandomFeatureExtractor extractor_;
    std::int64_t step_ = 0;
};

struct StageResult {
    std::filesystem::path final_checkpoint;
    std::vector<LossBreakdown> trace;
    double eval_l1_initial = 0.0;
    double eval_l1_final = 0.0;
};

// Runs the stage loop: JSON-lines log at out_dir/train_log.jsonl, periodic checkpoints
// ckpt_%06d.pt, final.pt and train_report.json. Resumes from out_dir/latest.pt when
// `resume` is set.
StageResult run_stage(const TrainConfig& config, const std::filesystem::path& dataset_dir,
                      const std::filesystem::path& out_dir, bool resume = false);
StageResult run_stage(const TrainConfig& config, const std::vector<SamplePair>& pairs,
                      const std::filesystem::path& out_dir, bool resume = false);

}  // namespace hs::nn
