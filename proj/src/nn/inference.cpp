#include "hairsalon/nn/inference.hpp"

#include "hairsalon/data_synth.hpp"
#include "hairsalon/errors.hpp"
#include "hairsalon/nn/tensor_bridge.hpp"

namespace hs::nn {

namespace {

void check_canvas(const Sketch& sketch, int size) {
    if (sketch.canvas.height != size || sketch.canvas.width != size)
        throw Error("shape_mismatch", "sketch canvas " + std::to_string(sketch.canvas.height) + "x" +
                                          std::to_string(sketch.canvas.width) + " does not match model size " +
                                          std::to_string(size));
    if (sketch.hair_count() == 0) throw Error("no_hair_strokes", "at least one hair stroke is required");
}

}  // namespace

MatteModel MatteModel::load(const std::filesystem::path& checkpoint) {
    const auto info = read_checkpoint_info(checkpoint);
    if (info.kind != NetKind::s2m) throw Error("invalid_checkpoint", checkpoint.string() + " is not a matte checkpoint");
    S2MNet net(info.config);
    load_checkpoint(checkpoint, *net);
    return MatteModel(net);
}

MatteModel::MatteModel(S2MNet net) : net_(std::move(net)) { net_->eval(); }

Matte MatteModel::predict(const Sketch& sketch) const {
    check_canvas(sketch, size());
    const SketchMapMono mono = rasterize_mono(sketch);
    Grid<float> input(mono.height(), mono.width(), 1);
    for (std::size_t i = 0; i < mono.size(); ++i) input.raw()[i] = mono.raw()[i];
    torch::NoGradGuard guard;
    return to_grid(net_.ptr()->forward(to_tensor(input)));
}

ImageModel ImageModel::load(const std::filesystem::path& checkpoint) {
    const auto info = read_checkpoint_info(checkpoint);
    if (info.kind != NetKind::s2i) throw Error("invalid_checkpoint", checkpoint.string() + " is not an image checkpoint");
    S2INet net(info.config);
    load_checkpoint(checkpoint, *net);
    return ImageModel(net);
}

ImageModel::ImageModel(S2INet net) : net_(std::move(net)) { net_->eval(); }

RgbImage ImageModel::synthesize(const Sketch& sketch, const Matte& matte, const RgbImage& background,
                                std::uint64_t noise_seed) const {
    check_canvas(sketch, size());
    if (matte.canvas() != sketch.canvas || matte.channels() != 1)
        throw Error("shape_mismatch", "matte must be single-channel at the sketch canvas size");
    if (background.canvas() != sketch.canvas || background.channels() != 3)
        throw Error("shape_mismatch", "background must be RGB at the sketch canvas size");
    const RgbImage color = rasterize_color(sketch);
    const RgbImage bg = noise_fill_background(background, matte, noise_seed);
    torch::NoGradGuard guard;
    return to_grid(net_.ptr()->forward(to_tensor(color), to_tensor(matte), to_tensor(bg)));
}

}  // namespace hs::nn
