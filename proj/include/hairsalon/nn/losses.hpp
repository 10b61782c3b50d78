#pragma once

#include <memory>

#include <json.hpp>
#include <torch/torch.h>

namespace hs::nn {

struct LossWeights {
    double l1 = 100.0;
    double adv = 1.0;
    double perceptual = 100.0;
    double shape = 100.0;
};

torch::Tensor l1_loss(const torch::Tensor& a, const torch::Tensor& b);

enum class GanMode { bce, lsgan };

struct AdversarialLosses {
    torch::Tensor gen;
    torch::Tensor disc;
};

// Patch-averaged objectives; the generator term is the non-saturating form.
AdversarialLosses adversarial_losses(const torch::Tensor& logits_real, const torch::Tensor& logits_fake,
                                     GanMode mode = GanMode::bce);
torch::Tensor generator_adversarial_loss(const torch::Tensor& logits_fake, GanMode mode = GanMode::bce);
torch::Tensor discriminator_loss(const torch::Tensor& logits_real, const torch::Tensor& logits_fake,
                                 GanMode mode = GanMode::bce);

// Normalized 1D Gaussian taps.
torch::Tensor gaussian_kernel(int size, double sigma, torch::ScalarType dtype = torch::kFloat32);
// Separable depthwise blur with replicate padding; even sizes pad (size/2, size/2 - 1).
torch::Tensor gaussian_blur(const torch::Tensor& x, int kernel_size = 10, double sigma = 10.0);

// L1(M * g(H'), M * g(H)).
torch::Tensor shape_loss(const torch::Tensor& h_pred, const torch::Tensor& h_true, const torch::Tensor& matte);

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::vector<torch::Tensor> features(const torch::Tensor& image) = 0;
};

// Fixed, seeded, randomly initialized stack of five strided convolutions. Parameters
// never receive gradients.
class RandomFeatureExtractor : public FeatureExtractor {
public:
    explicit RandomFeatureExtractor(std::uint64_t seed = 1234, torch::ScalarType dtype = torch::kFloat32);
    std::vector<torch::Tensor> features(const torch::Tensor& image) override;

private:
    std::vector<torch::Tensor> weights_;
    std::vector<torch::Tensor> biases_;
};

// Sum over layers of mean absolute feature differences.
torch::Tensor perceptual_loss(const torch::Tensor& h_pred, const torch::Tensor& h_true, FeatureExtractor& extractor);

struct LossBreakdown {
    double l1 = 0.0;
    double adv_g = 0.0;
    double adv_d = 0.0;
    double per = 0.0;
    double shape = 0.0;
    double total = 0.0;

    nlohmann::json to_json() const;
};

struct GeneratorLoss {
    torch::Tensor total;
    torch::Tensor l1, adv, per, shape;
};

// lambda1 * L1 + lambda2 * adv.
GeneratorLoss total_s2m_loss(const torch::Tensor& l1, const torch::Tensor& adv, const LossWeights& w);
// lambda1 * L1 + lambda2 * adv + lambda3 * per + lambda4 * shape.
GeneratorLoss total_s2i_loss(const torch::Tensor& l1, const torch::Tensor& adv, const torch::Tensor& per,
                             const torch::Tensor& shape, const LossWeights& w);

}  // namespace hs::nn
