#include "hairsalon/nn/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "hairsalon/errors.hpp"
#include "hairsalon/image_io.hpp"
#include "hairsalon/nn/tensor_bridge.hpp"

namespace hs::nn {

Stage stage_from_string(const std::string& name) {
    if (name == "s2m") return Stage::s2m;
    if (name == "s2i_unbraided") return Stage::s2i_unbraided;
    if (name == "s2i_braided_finetune") return Stage::s2i_braided_finetune;
    throw Error("invalid_argument", "unknown stage '" + name + "'");
}

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::s2m: return "s2m";
        case Stage::s2i_unbraided: return "s2i_unbraided";
        case Stage::s2i_braided_finetune: return "s2i_braided_finetune";
    }
    return "s2m";
}

NetKind net_kind(Stage stage) { return stage == Stage::s2m ? NetKind::s2m : NetKind::s2i; }

nlohmann::json TrainConfig::to_json() const {
    return {{"stage", to_string(stage)},
            {"net", net.to_json()},
            {"weights", {{"l1", weights.l1}, {"adv", weights.adv}, {"perceptual", weights.perceptual}, {"shape", weights.shape}}},
            {"gan", gan == GanMode::bce ? "bce" : "lsgan"},
            {"lr_g", lr_g},
            {"lr_d", lr_d},
            {"betas", {beta1, beta2}},
            {"batch_size", batch_size},
            {"iterations", iterations},
            {"seed", seed},
            {"checkpoint_every", checkpoint_every},
            {"augment", augment},
            {"nonhair", nonhair},
            {"init_checkpoint", init_checkpoint.string()}};
}

TensorBatch to_tensors(const TrainingBatch& batch, std::uint64_t noise_seed) {
    std::vector<RgbImage> bg;
    for (std::size_t i = 0; i < batch.size(); ++i)
        bg.push_back(noise_fill_background(batch.background[i], batch.matte[i], derive_seed(noise_seed, i)));
    return {stack(batch.sketch_mono), stack(batch.sketch_color), stack(batch.matte), stack(batch.image), stack(bg),
            batch.styles};
}

namespace {

bool stage_accepts(Stage stage, Style style) {
    switch (stage) {
        case Stage::s2m: return true;
        case Stage::s2i_unbraided: return style != Style::braided;
        case Stage::s2i_braided_finetune: return style == Style::braided;
    }
    return false;
}

void check_finite(const char* name, const torch::Tensor& t, std::int64_t step) {
    if (t.defined() && !std::isfinite(t.item<double>()))
        throw Error("non_finite_loss", std::string("loss term '") + name + "' is not finite at step " + std::to_string(step));
}

double value(const torch::Tensor& t) { return t.defined() ? t.item<double>() : 0.0; }

}  // namespace

Trainer::Trainer(TrainConfig config, const std::vector<SamplePair>& pairs)
    : cfg_(std::move(config)), extractor_(cfg_.perceptual_seed) {
    cfg_.net.validate();
    if (cfg_.batch_size < 1) throw Error("invalid_config", "batch size must be positive");
    for (const auto& p : pairs)
        if (stage_accepts(cfg_.stage, p.meta.style)) subset_.push_back(p);
    if (subset_.empty()) throw Error("empty_dataset", "no samples match stage " + to_string(cfg_.stage));
    for (const auto& p : subset_)
        if (p.matte.height() != cfg_.net.size || p.matte.width() != cfg_.net.size)
            throw Error("shape_mismatch", "dataset canvas does not match the network size " + std::to_string(cfg_.net.size));

    torch::manual_seed(cfg_.seed);
    const int base = cfg_.net.base_channels;
    if (cfg_.stage == Stage::s2m) {
        s2m_ = S2MNet(cfg_.net);
        disc_ = PatchDiscriminator(2, base, cfg_.net.disc_layers);
    } else {
        s2i_ = S2INet(cfg_.net);
        disc_ = PatchDiscriminator(7, base, cfg_.net.disc_layers);
    }
    if (cfg_.stage == Stage::s2i_braided_finetune) {
        if (cfg_.init_checkpoint.empty() || !std::filesystem::exists(cfg_.init_checkpoint))
            throw Error("missing_prerequisite", "braided fine-tuning needs an s2i_unbraided checkpoint");
        const auto info = read_checkpoint_info(cfg_.init_checkpoint);
        if (info.kind != NetKind::s2i || info.stage != to_string(Stage::s2i_unbraided))
            throw Error("missing_prerequisite", "init checkpoint is not an s2i_unbraided checkpoint");
        if (info.config.to_json() != cfg_.net.to_json())
            throw Error("invalid_config", "init checkpoint network config differs from the requested one");
        load_checkpoint(cfg_.init_checkpoint, *s2i_);
    }
    const auto opts_g = torch::optim::AdamOptions(cfg_.lr_g).betas({cfg_.beta1, cfg_.beta2});
    const auto opts_d = torch::optim::AdamOptions(cfg_.lr_d).betas({cfg_.beta1, cfg_.beta2});
    opt_g_ = std::make_unique<torch::optim::Adam>(generator().parameters(), opts_g);
    opt_d_ = std::make_unique<torch::optim::Adam>(disc_->parameters(), opts_d);
}

torch::nn::Module& Trainer::generator() {
    if (s2m_) return *s2m_;
    return *s2i_;
}

TensorBatch Trainer::batch_for_step(std::int64_t step) const {
    const auto s = static_cast<std::uint64_t>(step);
    Rng rng(derive_seed(cfg_.seed, s, 1));
    std::vector<std::size_t> order(subset_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<SamplePair> picked;
    for (int i = 0; i < cfg_.batch_size; ++i) picked.push_back(subset_[order[static_cast<std::size_t>(i) % order.size()]]);
    const auto batch = make_training_batch(picked, derive_seed(cfg_.seed, s, 2), {cfg_.augment, cfg_.nonhair});
    return to_tensors(batch, derive_seed(cfg_.seed, s, 3));
}

TensorBatch Trainer::fixed_batch(std::size_t count, std::uint64_t seed) const {
    std::vector<SamplePair> picked(subset_.begin(), subset_.begin() + static_cast<std::ptrdiff_t>(std::min(count, subset_.size())));
    return to_tensors(make_training_batch(picked, seed, {false, cfg_.nonhair}), derive_seed(seed, 3));
}

torch::Tensor Trainer::generate(const TensorBatch& b) {
    if (s2m_) return s2m_->forward(b.sketch_mono);
    return s2i_->forward(b.sketch_color, b.matte, b.background);
}

torch::Tensor Trainer::disc_input(const TensorBatch& b, const torch::Tensor& output) {
    if (s2m_) return torch::cat({b.sketch_mono, output}, 1);
    return torch::cat({b.sketch_color, b.matte, output}, 1);
}

GeneratorLoss Trainer::generator_loss(const TensorBatch& b, const torch::Tensor& output, const torch::Tensor& logits_fake) {
    const auto adv = generator_adversarial_loss(logits_fake, cfg_.gan);
    if (s2m_) return total_s2m_loss(nn::l1_loss(output, b.matte), adv, cfg_.weights);
    return total_s2i_loss(nn::l1_loss(output, b.image), adv, perceptual_loss(output, b.image, extractor_),
                          shape_loss(output, b.image, b.matte), cfg_.weights);
}

LossBreakdown Trainer::train_step(const TensorBatch& b) {
    generator().train();
    disc_->train();
    const auto target = s2m_ ? b.matte : b.image;
    const auto output = generate(b);

    opt_d_->zero_grad();
    const auto d_loss = discriminator_loss(disc_->forward(disc_input(b, target)),
                                           disc_->forward(disc_input(b, output.detach())), cfg_.gan);
    check_finite("adv_d", d_loss, step_);
    d_loss.backward();
    opt_d_->step();

    opt_g_->zero_grad();
    const auto g = generator_loss(b, output, disc_->forward(disc_input(b, output)));
    check_finite("l1", g.l1, step_);
    check_finite("adv_g", g.adv, step_);
    check_finite("per", g.per, step_);
    check_finite("shape", g.shape, step_);
    check_finite("total", g.total, step_);
    g.total.backward();
    opt_g_->step();
    ++step_;
    return {value(g.l1), value(g.adv), value(d_loss), value(g.per), value(g.shape), value(g.total)};
}

LossBreakdown Trainer::step() { return train_step(batch_for_step(step_)); }

LossBreakdown Trainer::eval_losses(const TensorBatch& b) {
    torch::NoGradGuard guard;
    const auto target = s2m_ ? b.matte : b.image;
    const auto output = generate(b);
    const auto logits_fake = disc_->forward(disc_input(b, output));
    const auto d_loss = discriminator_loss(disc_->forward(disc_input(b, target)), logits_fake, cfg_.gan);
    const auto g = generator_loss(b, output, logits_fake);
    return {value(g.l1), value(g.adv), value(d_loss), value(g.per), value(g.shape), value(g.total)};
}

double Trainer::eval_l1(const TensorBatch& b) {
    torch::NoGradGuard guard;
    return nn::l1_loss(generate(b), s2m_ ? b.matte : b.image).item<double>();
}

void Trainer::save(const std::filesystem::path& path) {
    CheckpointInfo info;
    info.kind = net_kind(cfg_.stage);
    info.stage = to_string(cfg_.stage);
    info.step = step_;
    info.config = cfg_.net;
    info.extra = {{"train", cfg_.to_json()}};
    save_checkpoint(path, info, generator(), disc_.get(), opt_g_.get(), opt_d_.get());
}

void Trainer::resume(const std::filesystem::path& path) {
    const auto info = read_checkpoint_info(path);
    if (info.stage != to_string(cfg_.stage)) throw Error("invalid_checkpoint", "checkpoint belongs to stage " + info.stage);
    load_checkpoint(path, generator(), disc_.get(), opt_g_.get(), opt_d_.get());
    step_ = info.step;
}

StageResult run_stage(const TrainConfig& config, const std::filesystem::path& dataset_dir,
                      const std::filesystem::path& out_dir, bool resume) {
    if (!std::filesystem::is_directory(dataset_dir)) throw Error("io_error", "dataset directory not found: " + dataset_dir.string());
    return run_stage(config, load_dataset(dataset_dir), out_dir, resume);
}

StageResult run_stage(const TrainConfig& config, const std::vector<SamplePair>& pairs,
                      const std::filesystem::path& out_dir, bool resume) {
    std::filesystem::create_directories(out_dir);
    Trainer trainer(config, pairs);
    const auto latest = out_dir / "latest.pt";
    if (resume && std::filesystem::exists(latest)) trainer.resume(latest);

    StageResult result;
    const auto eval_batch = trainer.fixed_batch(4, derive_seed(config.seed, 0xe7a1));
    result.eval_l1_initial = trainer.eval_l1(eval_batch);

    std::ofstream log(out_dir / "train_log.jsonl", resume ? std::ios::app : std::ios::trunc);
    while (trainer.current_step() < config.iterations) {
        const auto lb = trainer.step();
        result.trace.push_back(lb);
        auto line = lb.to_json();
        line["step"] = trainer.current_step();
        log << line.dump() << '\n';
        if (config.checkpoint_every > 0 && trainer.current_step() % config.checkpoint_every == 0 &&
            trainer.current_step() < config.iterations) {
            char name[32];
            std::snprintf(name, sizeof(name), "ckpt_%06lld.pt", static_cast<long long>(trainer.current_step()));
            trainer.save(out_dir / name);
            trainer.save(latest);
        }
    }
    log.flush();
    result.final_checkpoint = out_dir / "final.pt";
    trainer.save(result.final_checkpoint);
    trainer.save(latest);
    result.eval_l1_final = trainer.eval_l1(eval_batch);

    nlohmann::json report = {{"stage", to_string(config.stage)},
                             {"iterations", config.iterations},
                             {"seed", config.seed},
                             {"samples", trainer.subset_size()},
                             {"eval_l1_initial", result.eval_l1_initial},
                             {"eval_l1_final", result.eval_l1_final},
                             {"final_checkpoint", result.final_checkpoint.string()},
                             {"config", config.to_json()}};
    if (!result.trace.empty()) {
        report["first_step"] = result.trace.front().to_json();
        report["last_step"] = result.trace.back().to_json();
    }
    io::write_text(out_dir / "train_report.json", report.dump(2) + "\n");
    return result;
}

}  // namespace hs::nn
