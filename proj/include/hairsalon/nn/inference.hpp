#pragma once

#include <filesystem>
#include <memory>

#include "hairsalon/grid.hpp"
#include "hairsalon/nn/networks.hpp"
#include "hairsalon/sketch.hpp"

namespace hs::nn {

// Read-only after load; predict may be called from several threads.
class MatteModel {
public:
    static MatteModel load(const std::filesystem::path& checkpoint);
    explicit MatteModel(S2MNet net);

    // Sketch canvas must equal the network size. Throws hs::Error("no_hair_strokes").
    Matte predict(const Sketch& sketch) const;
    int size() const { return net_->config().size; }

private:
    S2MNet net_{nullptr};
};

class ImageModel {
public:
    static ImageModel load(const std::filesystem::path& checkpoint);
    explicit ImageModel(S2INet net);

    // Non-hair strokes are ignored. The background's hair region is replaced by noise
    // drawn from `noise_seed`.
    RgbImage synthesize(const Sketch& sketch, const Matte& matte, const RgbImage& background,
                        std::uint64_t noise_seed) const;
    int size() const { return net_->config().size; }

private:
    S2INet net_{nullptr};
};

}  // namespace hs::nn
