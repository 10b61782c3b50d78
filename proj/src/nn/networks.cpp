#include "hairsalon/nn/networks.hpp"

#include <algorithm>
#include <bit>
#include <type_traits>

#include "hairsalon/errors.hpp"

namespace hs::nn {

namespace tnn = torch::nn;

NetConfig NetConfig::for_size(int size, int base_channels) {
    NetConfig c;
    c.size = size;
    c.base_channels = base_channels;
    c.levels = std::min(7, size > 0 ? static_cast<int>(std::bit_width(static_cast<unsigned>(size))) - 1 : 0);
    return c;
}

void NetConfig::validate() const {
    if (size < 64 || !std::has_single_bit(static_cast<unsigned>(size)))
        throw Error("invalid_config", "input size must be a power of two >= 64, got " + std::to_string(size));
    if (base_channels < 1) throw Error("invalid_config", "base_channels must be positive");
    if (levels < blend_levels || (size >> levels) < 1)
        throw Error("invalid_config", "levels must lie in [blend_levels, log2(size)]");
    if (blend_levels != 4) throw Error("invalid_config", "blending applies to exactly the last four decoder stages");
    if (disc_layers < 1 || (size >> disc_layers) < 3) throw Error("invalid_config", "too many discriminator layers");
    for (int a : attention_levels) {
        if (a < 0 || a >= levels) throw Error("invalid_config", "attention stage outside the decoder");
        const int s = decoder_size(a);
        if (s * s > attention_cap)
            throw Error("attention_too_shallow", "attention at decoder stage " + std::to_string(a) + " would cover " +
                                                     std::to_string(s) + "x" + std::to_string(s) + " locations");
    }
}

int NetConfig::channels_at(int encoder_level) const { return base_channels * std::min(1 << encoder_level, 8); }

int NetConfig::decoder_size(int stage) const { return size >> (levels - 1 - stage); }

nlohmann::json NetConfig::to_json() const {
    return {{"size", size},
            {"base_channels", base_channels},
            {"levels", levels},
            {"attention_levels", attention_levels},
            {"blend_levels", blend_levels},
            {"disc_layers", disc_layers},
            {"attention_cap", attention_cap}};
}

NetConfig NetConfig::from_json(const nlohmann::json& j) {
    NetConfig c;
    c.size = j.at("size").get<int>();
    c.base_channels = j.at("base_channels").get<int>();
    c.levels = j.at("levels").get<int>();
    c.attention_levels = j.at("attention_levels").get<std::vector<int>>();
    c.blend_levels = j.at("blend_levels").get<int>();
    c.disc_layers = j.at("disc_layers").get<int>();
    c.attention_cap = j.value("attention_cap", 64 * 64);
    return c;
}

DualAttentionImpl::DualAttentionImpl(int channels, int cap) : cap_(cap) {
    const int qk = std::max(1, channels / 8);
    query = register_module("query", tnn::Conv2d(tnn::Conv2dOptions(channels, qk, 1)));
    key = register_module("key", tnn::Conv2d(tnn::Conv2dOptions(channels, qk, 1)));
    value = register_module("value", tnn::Conv2d(tnn::Conv2dOptions(channels, channels, 1)));
    gamma_p = register_parameter("gamma_p", torch::zeros({1}));
    gamma_c = register_parameter("gamma_c", torch::zeros({1}));
}

torch::Tensor DualAttentionImpl::position_branch(const torch::Tensor& x) {
    const auto b = x.size(0), c = x.size(1), n = x.size(2) * x.size(3);
    const auto q = query->forward(x).view({b, -1, n}).permute({0, 2, 1});  // B x N x C'
    const auto k = key->forward(x).view({b, -1, n});                       // B x C' x N
    const auto attn = torch::softmax(torch::bmm(q, k), -1);               // B x N x N
    const auto v = value->forward(x).view({b, c, n});
    return torch::bmm(v, attn.permute({0, 2, 1})).view_as(x);
}

torch::Tensor DualAttentionImpl::channel_branch(const torch::Tensor& x) {
    const auto b = x.size(0), c = x.size(1), n = x.size(2) * x.size(3);
    const auto flat = x.view({b, c, n});
    const auto energy = torch::bmm(flat, flat.permute({0, 2, 1}));
    const auto shifted = std::get<0>(energy.max(-1, true)).expand_as(energy) - energy;
    return torch::bmm(torch::softmax(shifted, -1), flat).view_as(x);
}

torch::Tensor DualAttentionImpl::forward(const torch::Tensor& x) {
    if (x.size(2) * x.size(3) > cap_)
        throw Error("attention_too_shallow", "attention over " + std::to_string(x.size(2)) + "x" +
                                                 std::to_string(x.size(3)) + " exceeds the configured cap");
    return x + gamma_p * position_branch(x) + gamma_c * channel_branch(x);
}

torch::Tensor nearest_downsample(const torch::Tensor& matte, std::int64_t h, std::int64_t w) {
    const auto H = matte.size(2), W = matte.size(3);
    if (h == H && w == W) return matte;
    const auto opts = torch::TensorOptions().dtype(torch::kLong).device(matte.device());
    const auto ys = torch::floor_divide(torch::arange(h, opts) * H, h);
    const auto xs = torch::floor_divide(torch::arange(w, opts) * W, w);
    return matte.index_select(2, ys).index_select(3, xs);
}

torch::Tensor blend_features(const torch::Tensor& f_hair, const torch::Tensor& f_bg, const torch::Tensor& matte) {
    if (f_hair.sizes() != f_bg.sizes()) throw Error("shape_mismatch", "hair and background features differ in shape");
    if (matte.dim() != 4 || matte.size(1) != 1 || matte.size(0) != f_hair.size(0))
        throw Error("shape_mismatch", "matte must be B x 1 x H x W with the feature batch size");
    const auto m = nearest_downsample(matte, f_hair.size(2), f_hair.size(3));
    return f_hair * m + f_bg * (1 - m);
}

namespace {

tnn::Conv2d conv4(int in, int out, int stride) {
    return tnn::Conv2d(tnn::Conv2dOptions(in, out, 4).stride(stride).padding(1));
}

tnn::InstanceNorm2d inorm(int c) { return tnn::InstanceNorm2d(tnn::InstanceNorm2dOptions(c)); }

tnn::LeakyReLU lrelu() { return tnn::LeakyReLU(tnn::LeakyReLUOptions().negative_slope(0.2)); }

}  // namespace

UNetImpl::UNetImpl(const NetConfig& cfg, int in_channels, int out_channels) : cfg_(cfg) {
    cfg_.validate();
    const int L = cfg_.levels;
    for (int i = 0; i < L; ++i) {
        tnn::Sequential s;
        if (i == 0) {
            s->push_back(conv4(in_channels, cfg_.channels_at(0), 2));
        } else {
            s->push_back(lrelu());
            s->push_back(conv4(cfg_.channels_at(i - 1), cfg_.channels_at(i), 2));
            if (i < L - 1) s->push_back(inorm(cfg_.channels_at(i)));
        }
        down_.push_back(register_module("down" + std::to_string(i), s));
    }
    attention_.resize(static_cast<std::size_t>(L), nullptr);
    for (int d = 0; d < L; ++d) {
        const int in = d == 0 ? cfg_.channels_at(L - 1) : 2 * cfg_.channels_at(L - 1 - d);
        const int out = d < L - 1 ? cfg_.channels_at(L - 2 - d) : out_channels;
        tnn::Sequential s;
        s->push_back(tnn::ReLU());
        s->push_back(tnn::ConvTranspose2d(tnn::ConvTranspose2dOptions(in, out, 4).stride(2).padding(1)));
        if (d < L - 1) s->push_back(inorm(out));
        up_.push_back(register_module("up" + std::to_string(d), s));
        if (std::find(cfg_.attention_levels.begin(), cfg_.attention_levels.end(), d) != cfg_.attention_levels.end())
            attention_[static_cast<std::size_t>(d)] =
                register_module("attention" + std::to_string(d), DualAttention(out, cfg_.attention_cap));
    }
}

torch::Tensor UNetImpl::forward(const torch::Tensor& x, const std::vector<torch::Tensor>& bg_features,
                                const torch::Tensor& matte, std::vector<torch::Tensor>* trace) {
    const int L = cfg_.levels;
    if (x.dim() != 4 || x.size(2) != cfg_.size || x.size(3) != cfg_.size)
        throw Error("shape_mismatch", "generator expects B x C x " + std::to_string(cfg_.size) + " x " +
                                          std::to_string(cfg_.size) + " input");
    if (!bg_features.empty() && static_cast<int>(bg_features.size()) != cfg_.blend_levels)
        throw Error("shape_mismatch", "one background feature map is needed per blended stage");
    std::vector<torch::Tensor> enc;
    torch::Tensor h = x;
    for (auto& d : down_) {
        h = d->forward(h);
        enc.push_back(h);
    }
    for (int d = 0; d < L; ++d) {
        if (d > 0) h = torch::cat({h, enc[static_cast<std::size_t>(L - 1 - d)]}, 1);
        h = up_[static_cast<std::size_t>(d)]->forward(h);
        if (auto& a = attention_[static_cast<std::size_t>(d)]) h = a->forward(h);
        const int k = d - (L - cfg_.blend_levels);
        if (!bg_features.empty() && k >= 0) {
            h = blend_features(h, bg_features[static_cast<std::size_t>(k)], matte);
            if (trace) trace->push_back(h);
        }
    }
    return h;
}

S2MNetImpl::S2MNetImpl(const NetConfig& cfg) {
    unet = register_module("unet", UNet(cfg, 1, 1));
}

torch::Tensor S2MNetImpl::forward(const torch::Tensor& sketch_mono) { return (torch::tanh(unet->forward(sketch_mono)) + 1) / 2; }

BackgroundBranchImpl::BackgroundBranchImpl(const NetConfig& cfg) {
    cfg.validate();
    const int B = cfg.blend_levels;
    tnn::Sequential s0;
    s0->push_back(tnn::Conv2d(tnn::Conv2dOptions(3, cfg.base_channels, 3).padding(1)));
    s0->push_back(lrelu());
    stages_.push_back(register_module("bg0", s0));
    int ch = cfg.base_channels;
    for (int j = 1; j < B; ++j) {
        tnn::Sequential s;
        s->push_back(conv4(ch, cfg.channels_at(j - 1), 2));
        s->push_back(inorm(cfg.channels_at(j - 1)));
        s->push_back(lrelu());
        ch = cfg.channels_at(j - 1);
        stages_.push_back(register_module("bg" + std::to_string(j), s));
    }
    head_ = register_module("bg_out", tnn::Conv2d(tnn::Conv2dOptions(cfg.base_channels, 3, 3).padding(1)));
}

std::vector<torch::Tensor> BackgroundBranchImpl::forward(const torch::Tensor& background) {
    std::vector<torch::Tensor> feats;  // full resolution first
    torch::Tensor h = background;
    for (auto& s : stages_) {
        h = s->forward(h);
        feats.push_back(h);
    }
    std::vector<torch::Tensor> out(feats.rbegin(), feats.rend() - 1);
    out.push_back(head_->forward(feats.front()));
    return out;
}

S2INetImpl::S2INetImpl(const NetConfig& cfg) {
    unet = register_module("unet", UNet(cfg, 4, 3));
    bg = register_module("background", BackgroundBranch(cfg));
}

torch::Tensor S2INetImpl::forward(const torch::Tensor& sketch_color, const torch::Tensor& matte,
                                  const torch::Tensor& background, std::vector<torch::Tensor>* trace) {
    if (!matte.defined()) throw Error("missing_matte", "the image generator requires a matte");
    if (matte.dim() != 4 || matte.size(1) != 1 || matte.size(2) != sketch_color.size(2) ||
        matte.size(3) != sketch_color.size(3))
        throw Error("shape_mismatch", "matte must be B x 1 x H x W at the sketch resolution");
    if (background.sizes() != sketch_color.sizes()) throw Error("shape_mismatch", "background must match the sketch map");
    const auto out = unet->forward(torch::cat({sketch_color, matte}, 1), bg->forward(background), matte, trace);
    return (torch::tanh(out) + 1) * 0.5;
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(int in_channels, int base_channels, int layers) {
    body = tnn::Sequential();
    body->push_back(conv4(in_channels, base_channels, 2));
    body->push_back(lrelu());
    int ch = base_channels;
    for (int n = 1; n < layers; ++n) {
        const int next = base_channels * std::min(1 << n, 8);
        body->push_back(conv4(ch, next, 2));
        body->push_back(inorm(next));
        body->push_back(lrelu());
        ch = next;
    }
    const int next = base_channels * std::min(1 << layers, 8);
    body->push_back(conv4(ch, next, 1));
    body->push_back(inorm(next));
    body->push_back(lrelu());
    body->push_back(conv4(next, 1, 1));
    register_module("body", body);
}

torch::Tensor PatchDiscriminatorImpl::forward(const torch::Tensor& x) { return body->forward(x); }

int patch_grid_size(int size, int layers) { return (size >> layers) - 2; }

std::string to_string(NetKind kind) { return kind == NetKind::s2m ? "s2m" : "s2i"; }

namespace {

// Adam state keyed by parameter position; libtorch's own serializer keys it by address,
// which makes checkpoint bytes differ between otherwise identical runs.
void save_optimizer(torch::serialize::OutputArchive& out, torch::optim::Optimizer& opt) {
    auto* adam = dynamic_cast<torch::optim::Adam*>(&opt);
    if (!adam) return opt.save(out);
    std::int64_t index = 0;
    for (auto& group : adam->param_groups())
        for (auto& p : group.params()) {
            const auto it = adam->state().find(p.unsafeGetTensorImpl());
            if (it != adam->state().end()) {
                const auto& st = static_cast<const torch::optim::AdamParamState&>(*it->second);
                const auto key = "p" + std::to_string(index);
                out.write(key + "_step", torch::tensor(st.step(), torch::kInt64));
                out.write(key + "_exp_avg", st.exp_avg());
                out.write(key + "_exp_avg_sq", st.exp_avg_sq());
                if (st.max_exp_avg_sq().defined()) out.write(key + "_max_exp_avg_sq", st.max_exp_avg_sq());
            }
            ++index;
        }
    out.write("param_count", torch::tensor(index, torch::kInt64));
}

void load_optimizer(torch::serialize::InputArchive& in, torch::optim::Optimizer& opt) {
    auto* adam = dynamic_cast<torch::optim::Adam*>(&opt);
    if (!adam) return opt.load(in);
    torch::Tensor count;
    if (!in.try_read("param_count", count)) throw Error("invalid_checkpoint", "optimizer state has no parameter count");
    std::int64_t index = 0;
    for (auto& group : adam->param_groups())
        for (auto& p : group.params()) {
            const auto key = "p" + std::to_string(index++);
            torch::Tensor step, m, v, vmax;
            if (!in.try_read(key + "_step", step)) continue;
            if (!in.try_read(key + "_exp_avg", m) || !in.try_read(key + "_exp_avg_sq", v) ||
                !m.sizes().equals(p.sizes()) || !v.sizes().equals(p.sizes()))
                throw Error("invalid_checkpoint", "optimizer state does not match the model");
            auto st = std::make_unique<torch::optim::AdamParamState>();
            st->step(step.item<std::int64_t>());
            st->exp_avg(m);
            st->exp_avg_sq(v);
            if (in.try_read(key + "_max_exp_avg_sq", vmax)) st->max_exp_avg_sq(vmax);
            adam->state()[p.unsafeGetTensorImpl()] = std::move(st);
        }
    if (count.item<std::int64_t>() != index) throw Error("invalid_checkpoint", "optimizer state does not match the model");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CheckpointInfo& info, torch::nn::Module& generator,
                     torch::nn::Module* discriminator, torch::optim::Optimizer* opt_g, torch::optim::Optimizer* opt_d) {
    torch::serialize::OutputArchive archive;
    const nlohmann::json meta = {{"version", info.version},
                                 {"kind", to_string(info.kind)},
                                 {"stage", info.stage},
                                 {"step", info.step},
                                 {"config", info.config.to_json()},
                                 {"extra", info.extra}};
    archive.write("meta", c10::IValue(meta.dump()));
    auto put = [&](const char* key, auto* obj) {
        if (!obj) return;
        torch::serialize::OutputArchive sub;
        if constexpr (std::is_base_of_v<torch::optim::Optimizer, std::remove_pointer_t<decltype(obj)>>)
            save_optimizer(sub, *obj);
        else
            obj->save(sub);
        archive.write(key, sub);
    };
    put("generator", &generator);
    put("discriminator", discriminator);
    put("optimizer_g", opt_g);
    put("optimizer_d", opt_d);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    archive.save_to(tmp);
    std::filesystem::rename(tmp, path);
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error("io_error", "checkpoint not found: " + path.string());
    torch::serialize::InputArchive archive;
    try {
        archive.load_from(path.string());
    } catch (const c10::Error& e) {
        throw Error("io_error", "unreadable checkpoint " + path.string());
    }
    c10::IValue v;
    if (!archive.try_read("meta", v) || !v.isString()) throw Error("invalid_checkpoint", "checkpoint has no metadata");
    const auto meta = nlohmann::json::parse(v.toStringRef());
    CheckpointInfo info;
    info.version = meta.at("version").get<int>();
    if (info.version != kCheckpointVersion)
        throw Error("invalid_checkpoint", "unsupported checkpoint version " + std::to_string(info.version));
    info.kind = meta.at("kind").get<std::string>() == "s2m" ? NetKind::s2m : NetKind::s2i;
    info.stage = meta.value("stage", std::string());
    info.step = meta.value("step", std::int64_t{0});
    info.config = NetConfig::from_json(meta.at("config"));
    info.extra = meta.value("extra", nlohmann::json::object());
    return info;
}

void load_checkpoint(const std::filesystem::path& path, torch::nn::Module& generator, torch::nn::Module* discriminator,
                     torch::optim::Optimizer* opt_g, torch::optim::Optimizer* opt_d) {
    const auto info = read_checkpoint_info(path);
    const bool is_s2m = dynamic_cast<S2MNetImpl*>(&generator) != nullptr;
    const bool is_s2i = dynamic_cast<S2INetImpl*>(&generator) != nullptr;
    if ((is_s2m && info.kind != NetKind::s2m) || (is_s2i && info.kind != NetKind::s2i))
        throw Error("invalid_checkpoint", "checkpoint holds a " + to_string(info.kind) + " generator");
    torch::serialize::InputArchive archive;
    archive.load_from(path.string());
    auto get = [&](const char* key, auto* obj) {
        if (!obj) return;
        torch::serialize::InputArchive sub;
        if (!archive.try_read(key, sub)) throw Error("invalid_checkpoint", std::string("checkpoint lacks ") + key);
        std::vector<std::vector<std::int64_t>> shapes;
        if constexpr (std::is_base_of_v<torch::nn::Module, std::remove_pointer_t<decltype(obj)>>)
            for (const auto& t : obj->parameters()) shapes.push_back(t.sizes().vec());
        try {
            if constexpr (std::is_base_of_v<torch::optim::Optimizer, std::remove_pointer_t<decltype(obj)>>)
                load_optimizer(sub, *obj);
            else
                obj->load(sub);
        } catch (const c10::Error& e) {
            throw Error("invalid_checkpoint", std::string("checkpoint ") + key + " does not match the model");
        }
        if constexpr (std::is_base_of_v<torch::nn::Module, std::remove_pointer_t<decltype(obj)>>) {
            const auto params = obj->parameters();
            bool ok = params.size() == shapes.size();
            for (std::size_t i = 0; ok && i < params.size(); ++i) ok = params[i].sizes().vec() == shapes[i];
            if (!ok) throw Error("invalid_checkpoint", std::string("checkpoint ") + key + " does not match the model");
        }
    };
    get("generator", &generator);
    get("discriminator", discriminator);
    get("optimizer_g", opt_g);
    get("optimizer_d", opt_d);
}

}  // namespace hs::nn
