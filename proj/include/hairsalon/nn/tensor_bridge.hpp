#pragma once

#include <vector>

#include <torch/torch.h>

#include "hairsalon/grid.hpp"

namespace hs::nn {

// H x W x C grid -> 1 x C x H x W float tensor.
torch::Tensor to_tensor(const Grid<float>& g);
// Stacks same-shaped grids into B x C x H x W.
torch::Tensor stack(const std::vector<Grid<float>>& grids);
// One sample (B index) of a B x C x H x W tensor back to H x W x C.
Grid<float> to_grid(const torch::Tensor& t, std::int64_t index = 0);

}  // namespace hs::nn
