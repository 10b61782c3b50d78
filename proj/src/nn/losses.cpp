#include "hairsalon/nn/losses.hpp"

#include <cmath>

#include "hairsalon/errors.hpp"

namespace hs::nn {

torch::Tensor l1_loss(const torch::Tensor& a, const torch::Tensor& b) {
    if (a.sizes() != b.sizes()) throw Error("shape_mismatch", "l1 operands differ in shape");
    return (a - b).abs().mean();
}

torch::Tensor generator_adversarial_loss(const torch::Tensor& logits_fake, GanMode mode) {
    if (mode == GanMode::lsgan) return (logits_fake - 1).pow(2).mean();
    return torch::binary_cross_entropy_with_logits(logits_fake, torch::ones_like(logits_fake));
}

torch::Tensor discriminator_loss(const torch::Tensor& logits_real, const torch::Tensor& logits_fake, GanMode mode) {
    if (mode == GanMode::lsgan) return 0.5 * ((logits_real - 1).pow(2).mean() + logits_fake.pow(2).mean());
    return 0.5 * (torch::binary_cross_entropy_with_logits(logits_real, torch::ones_like(logits_real)) +
                  torch::binary_cross_entropy_with_logits(logits_fake, torch::zeros_like(logits_fake)));
}

AdversarialLosses adversarial_losses(const torch::Tensor& logits_real, const torch::Tensor& logits_fake, GanMode mode) {
    return {generator_adversarial_loss(logits_fake, mode), discriminator_loss(logits_real, logits_fake, mode)};
}

torch::Tensor gaussian_kernel(int size, double sigma, torch::ScalarType dtype) {
    if (size < 1 || !(sigma > 0)) throw Error("invalid_argument", "kernel size and sigma must be positive");
    const double center = (size - 1) / 2.0;
    std::vector<double> taps(static_cast<std::size_t>(size));
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        taps[static_cast<std::size_t>(i)] = std::exp(-0.5 * ((i - center) / sigma) * ((i - center) / sigma));
        sum += taps[static_cast<std::size_t>(i)];
    }
    for (auto& t : taps) t /= sum;
    return torch::tensor(taps, torch::kFloat64).to(dtype);
}

torch::Tensor gaussian_blur(const torch::Tensor& x, int kernel_size, double sigma) {
    if (x.dim() != 4) throw Error("shape_mismatch", "blur expects B x C x H x W");
    const auto c = x.size(1);
    const auto k = gaussian_kernel(kernel_size, sigma, x.scalar_type()).to(x.device());
    const int lead = kernel_size / 2;
    const int trail = kernel_size - 1 - lead;
    namespace F = torch::nn::functional;
    auto padded = F::pad(x, F::PadFuncOptions({lead, trail, lead, trail}).mode(torch::kReplicate));
    const auto kx = k.view({1, 1, 1, kernel_size}).expand({c, 1, 1, kernel_size}).contiguous();
    const auto ky = k.view({1, 1, kernel_size, 1}).expand({c, 1, kernel_size, 1}).contiguous();
    auto out = F::conv2d(padded, kx, F::Conv2dFuncOptions().groups(c));
    return F::conv2d(out, ky, F::Conv2dFuncOptions().groups(c));
}

torch::Tensor shape_loss(const torch::Tensor& h_pred, const torch::Tensor& h_true, const torch::Tensor& matte) {
    if (h_pred.sizes() != h_true.sizes()) throw Error("shape_mismatch", "shape loss operands differ in shape");
    return nn::l1_loss(matte * gaussian_blur(h_pred), matte * gaussian_blur(h_true));
}

RandomFeatureExtractor::RandomFeatureExtractor(std::uint64_t seed, torch::ScalarType dtype) {
    torch::NoGradGuard guard;
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    const int channels[] = {3, 16, 32, 48, 64, 64};
    for (int i = 0; i < 5; ++i) {
        const int in = channels[i], out = channels[i + 1];
        const double bound = std::sqrt(6.0 / (in * 9));
        weights_.push_back((torch::rand({out, in, 3, 3}, gen, torch::kFloat64) * 2 - 1).mul(bound).to(dtype));
        biases_.push_back((torch::rand({out}, gen, torch::kFloat64) * 0.2 - 0.1).to(dtype));
    }
}

std::vector<torch::Tensor> RandomFeatureExtractor::features(const torch::Tensor& image) {
    namespace F = torch::nn::functional;
    std::vector<torch::Tensor> out;
    torch::Tensor h = image * 2 - 1;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const int stride = i == 0 ? 1 : 2;
        const auto w = weights_[i].to(h.scalar_type());
        const auto b = biases_[i].to(h.scalar_type());
        h = F::leaky_relu(F::conv2d(h, w, F::Conv2dFuncOptions().bias(b).stride(stride).padding(1)),
                          F::LeakyReLUFuncOptions().negative_slope(0.2));
        out.push_back(h);
    }
    return out;
}

torch::Tensor perceptual_loss(const torch::Tensor& h_pred, const torch::Tensor& h_true, FeatureExtractor& extractor) {
    if (h_pred.sizes() != h_true.sizes()) throw Error("shape_mismatch", "perceptual loss operands differ in shape");
    const auto fp = extractor.features(h_pred);
    const auto ft = extractor.features(h_true);
    torch::Tensor total = torch::zeros({}, h_pred.options());
    for (std::size_t i = 0; i < fp.size(); ++i) total = total + (fp[i] - ft[i]).abs().mean();
    return total;
}

nlohmann::json LossBreakdown::to_json() const {
    return {{"l1", l1}, {"adv_g", adv_g}, {"adv_d", adv_d}, {"per", per}, {"shape", shape}, {"total", total}};
}

GeneratorLoss total_s2m_loss(const torch::Tensor& l1, const torch::Tensor& adv, const LossWeights& w) {
    return {w.l1 * l1 + w.adv * adv, l1, adv, {}, {}};
}

GeneratorLoss total_s2i_loss(const torch::Tensor& l1, const torch::Tensor& adv, const torch::Tensor& per,
                             const torch::Tensor& shape, const LossWeights& w) {
    return {w.l1 * l1 + w.adv * adv + w.perceptual * per + w.shape * shape, l1, adv, per, shape};
}

}  // namespace hs::nn
