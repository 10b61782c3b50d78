#include "hairsalon/nn/tensor_bridge.hpp"

#include <cstring>

#include "hairsalon/errors.hpp"

namespace hs::nn {

torch::Tensor to_tensor(const Grid<float>& g) {
    auto t = torch::from_blob(const_cast<float*>(g.raw().data()), {g.height(), g.width(), g.channels()}, torch::kFloat32);
    return t.permute({2, 0, 1}).unsqueeze(0).contiguous().clone();
}

torch::Tensor stack(const std::vector<Grid<float>>& grids) {
    if (grids.empty()) throw Error("invalid_argument", "cannot stack an empty list");
    std::vector<torch::Tensor> parts;
    parts.reserve(grids.size());
    for (const auto& g : grids) {
        if (!g.same_shape(grids.front())) throw Error("shape_mismatch", "grids in a batch must share a shape");
        parts.push_back(to_tensor(g));
    }
    return torch::cat(parts, 0);
}

Grid<float> to_grid(const torch::Tensor& t, std::int64_t index) {
    if (t.dim() != 4) throw Error("shape_mismatch", "expected a B x C x H x W tensor");
    const auto c = t.size(1), h = t.size(2), w = t.size(3);
    const auto hwc = t[index].detach().to(torch::kCPU, torch::kFloat32).permute({1, 2, 0}).contiguous();
    Grid<float> g(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    std::memcpy(g.raw().data(), hwc.data_ptr<float>(), g.size() * sizeof(float));
    return g;
}

}  // namespace hs::nn
