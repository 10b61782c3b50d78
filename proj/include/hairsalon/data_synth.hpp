#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hairsalon/grid.hpp"
#include "hairsalon/random.hpp"
#include "hairsalon/sketch.hpp"

namespace hs {

enum class Style { straight, wavy, braided };

Style style_from_string(const std::string& name);
std::string to_string(Style style);

struct SampleMeta {
    Style style = Style::straight;
    std::uint64_t seed = 0;
};

// Hair strokes carry their ground-truth color: the footprint mean of `image`.
struct SamplePair {
    Sketch sketch;
    Matte matte;
    RgbImage image;
    RgbImage background;
    SampleMeta meta;
};

struct AugmentParams {
    double dx = 0.0;
    double dy = 0.0;
    double rotate_deg = 0.0;  // within [-15, 15], about the matte centroid
    bool hflip = false;

    bool is_identity() const { return dx == 0.0 && dy == 0.0 && rotate_deg == 0.0 && !hflip; }
};

SamplePair synth_sample(Style style, Canvas canvas, std::uint64_t seed);

// Throws hs::Error("augment_offcanvas") when more than half of the matte mass leaves the canvas.
SamplePair augment(const SamplePair& pair, const AugmentParams& params);
// Translation within +-32 px (scaled to the canvas), rotation within +-15 deg, 50% flips.
AugmentParams sample_augment(Rng& rng, Canvas canvas);

// Background whose hair region (0.5-mask grown by 3 px) is replaced by unit Gaussian noise.
RgbImage noise_fill_background(const RgbImage& background, const Matte& matte, std::uint64_t seed);

struct BatchOptions {
    bool augment = true;
    bool nonhair = true;
};

// Per-sample tensors in H x W x C layout: S_m (1, values -1/0/1), S (3), M (1), H (3), BG (3).
struct TrainingBatch {
    std::vector<Grid<float>> sketch_mono;
    std::vector<RgbImage> sketch_color;
    std::vector<Matte> matte;
    std::vector<RgbImage> image;
    std::vector<RgbImage> background;
    std::vector<Style> styles;

    std::size_t size() const { return matte.size(); }
};

TrainingBatch make_training_batch(const std::vector<SamplePair>& pairs, std::uint64_t seed,
                                  const BatchOptions& options = {});

// Dataset layout: <root>/sample_%06d/{sketch.json, matte.png, image.png, background.png, meta.json}
void save_sample(const std::filesystem::path& dir, const SamplePair& pair);
SamplePair load_sample(const std::filesystem::path& dir);
std::vector<SamplePair> load_dataset(const std::filesystem::path& root);
std::string sample_dir_name(std::size_t index);

void generate_dataset(const std::filesystem::path& root, std::size_t count, std::uint64_t seed, Canvas canvas,
                      const std::vector<Style>& styles, int workers = 1);

}  // namespace hs
