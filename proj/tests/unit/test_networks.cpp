#include "torch_doctest.hpp"

#include <filesystem>
#include <random>

#include "hairsalon/errors.hpp"
#include "hairsalon/nn/networks.hpp"

using namespace hs;
using namespace hs::nn;

namespace {

NetConfig small(int size, int base) { return NetConfig::for_size(size, base); }

}  // namespace

TEST_CASE("config sizing") {
    CHECK(NetConfig::for_size(512).levels == 7);
    CHECK(NetConfig::for_size(64).levels == 6);
    CHECK_NOTHROW(NetConfig::for_size(512).validate());
    CHECK_NOTHROW(NetConfig::for_size(64).validate());
    NetConfig bad = NetConfig::for_size(64);
    bad.size = 96;
    CHECK_THROWS_AS(bad.validate(), Error);
    NetConfig deep = NetConfig::for_size(512);
    deep.attention_levels = {0, 1, 2, 3, 4};
    try {
        deep.validate();
        FAIL("expected attention placement error");
    } catch (const Error& e) {
        CHECK(e.code() == "attention_too_shallow");
    }
    const auto j = NetConfig::for_size(128, 8).to_json();
    CHECK(NetConfig::from_json(j).to_json() == j);
}

TEST_CASE("attention is the identity at initialization") {
    torch::manual_seed(1);
    DualAttention att(16, 64 * 64);
    for (int i = 0; i < 20; ++i) {
        const auto x = torch::randn({2, 16, 8, 8});
        CHECK(torch::equal(att->forward(x), x));
    }
}

TEST_CASE("position attention of a constant map is spatially constant") {
    torch::manual_seed(2);
    DualAttention att(8, 64 * 64);
    const auto x = torch::full({1, 8, 6, 6}, 0.7f);
    const auto p = att->position_branch(x);
    const auto ref = p.index({torch::indexing::Slice(), torch::indexing::Slice(), 0, 0}).unsqueeze(-1).unsqueeze(-1);
    CHECK((p - ref).abs().max().item<float>() <= 1e-6f);
}

TEST_CASE("attention matches a dense matrix oracle") {
    torch::manual_seed(3);
    DualAttention att(4, 64 * 64);
    {
        torch::NoGradGuard g;
        att->gamma_p.fill_(0.7);
        att->gamma_c.fill_(-0.3);
    }
    const auto x = torch::randn({1, 4, 8, 8});
    const auto out = att->forward(x);
    const int C = 4, N = 64, Q = 1;
    auto X = x.view({C, N}).to(torch::kFloat64);
    auto Wq = att->query->weight.view({Q, C}).to(torch::kFloat64), bq = att->query->bias.to(torch::kFloat64);
    auto Wk = att->key->weight.view({Q, C}).to(torch::kFloat64), bk = att->key->bias.to(torch::kFloat64);
    auto Wv = att->value->weight.view({C, C}).to(torch::kFloat64), bv = att->value->bias.to(torch::kFloat64);
    auto at = [](const torch::Tensor& t, int i, int j) { return t[i][j].item<double>(); };
    std::vector<double> q(N), k(N), v(C * N);
    for (int n = 0; n < N; ++n) {
        double sq = bq[0].item<double>(), sk = bk[0].item<double>();
        for (int c = 0; c < C; ++c) {
            sq += at(Wq, 0, c) * at(X, c, n);
            sk += at(Wk, 0, c) * at(X, c, n);
        }
        q[n] = sq;
        k[n] = sk;
        for (int o = 0; o < C; ++o) {
            double s = bv[o].item<double>();
            for (int c = 0; c < C; ++c) s += at(Wv, o, c) * at(X, c, n);
            v[o * N + n] = s;
        }
    }
    std::vector<double> pam(C * N, 0.0);
    for (int i = 0; i < N; ++i) {
        double mx = -1e300;
        for (int j = 0; j < N; ++j) mx = std::max(mx, q[i] * k[j]);
        std::vector<double> a(N);
        double z = 0;
        for (int j = 0; j < N; ++j) z += a[j] = std::exp(q[i] * k[j] - mx);
        for (int c = 0; c < C; ++c)
            for (int j = 0; j < N; ++j) pam[c * N + i] += v[c * N + j] * a[j] / z;
    }
    std::vector<double> cam(C * N, 0.0);
    for (int a = 0; a < C; ++a) {
        std::vector<double> e(C);
        for (int b = 0; b < C; ++b)
            for (int n = 0; n < N; ++n) e[b] += at(X, a, n) * at(X, b, n);
        const double mx = *std::max_element(e.begin(), e.end());
        std::vector<double> s(C);
        double z = 0, smax = -1e300;
        for (int b = 0; b < C; ++b) smax = std::max(smax, mx - e[b]);
        for (int b = 0; b < C; ++b) z += s[b] = std::exp(mx - e[b] - smax);
        for (int n = 0; n < N; ++n)
            for (int b = 0; b < C; ++b) cam[a * N + n] += s[b] / z * at(X, b, n);
    }
    const auto o = out.view({C, N}).to(torch::kFloat64);
    double worst = 0;
    for (int c = 0; c < C; ++c)
        for (int n = 0; n < N; ++n)
            worst = std::max(worst, std::abs(at(o, c, n) - (at(X, c, n) + 0.7 * pam[c * N + n] - 0.3 * cam[c * N + n])));
    CHECK(worst <= 1e-4);
}

TEST_CASE("attention refuses large maps") {
    DualAttention att(4, 16 * 16);
    CHECK_THROWS_AS(att->forward(torch::zeros({1, 4, 32, 32})), Error);
}

TEST_CASE("blending is exact") {
    const auto fh = torch::randn({2, 5, 8, 8});
    const auto fb = torch::randn({2, 5, 8, 8});
    CHECK(torch::equal(blend_features(fh, fb, torch::ones({2, 1, 64, 64})), fh));
    CHECK(torch::equal(blend_features(fh, fb, torch::zeros({2, 1, 64, 64})), fb));
    const auto mid = blend_features(torch::full({1, 3, 4, 4}, 2.f), torch::full({1, 3, 4, 4}, 4.f), torch::full({1, 1, 16, 16}, 0.5f));
    CHECK(torch::equal(mid, torch::full({1, 3, 4, 4}, 3.f)));
    CHECK_THROWS_AS(blend_features(fh, torch::zeros({2, 5, 4, 4}), torch::ones({2, 1, 64, 64})), Error);
}

TEST_CASE("matte downsampling is nearest-neighbor") {
    const auto m = torch::rand({1, 1, 64, 64});
    const auto d = nearest_downsample(m, 8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(d[0][0][y][x].item<float>() == m[0][0][y * 8][x * 8].item<float>());
}

TEST_CASE("matte generator contracts") {
    torch::manual_seed(4);
    S2MNet net(small(64, 8));
    const auto out = net->forward(torch::zeros({1, 1, 64, 64}));
    CHECK(out.sizes() == torch::IntArrayRef({1, 1, 64, 64}));
    CHECK(out.min().item<float>() >= 0.f);
    CHECK(out.max().item<float>() <= 1.f);
    CHECK(torch::isfinite(out).all().item<bool>());
    S2MNet big(small(512, 2));
    CHECK(big->forward(torch::zeros({1, 1, 512, 512})).sizes() == torch::IntArrayRef({1, 1, 512, 512}));
    CHECK_THROWS_AS(net->forward(torch::zeros({1, 1, 48, 48})), Error);
}

TEST_CASE("matte generator input gradient matches finite differences") {
    torch::manual_seed(5);
    S2MNet net(small(64, 4));
    net->to(torch::kFloat64);
    const auto x0 = torch::randn({1, 1, 64, 64}, torch::kFloat64);
    for (int trial = 0; trial < 3; ++trial) {
        const int py = 10 + 17 * trial, px = 30 - 7 * trial;
        auto x = x0.clone().set_requires_grad(true);
        const auto g = torch::autograd::grad({net->forward(x).mean()}, {x})[0][0][0][py][px].item<double>();
        const double eps = 1e-5;
        torch::NoGradGuard guard;
        auto xp = x0.clone(), xm = x0.clone();
        xp[0][0][py][px] += eps;
        xm[0][0][py][px] -= eps;
        const double fd = (net->forward(xp).mean().item<double>() - net->forward(xm).mean().item<double>()) / (2 * eps);
        CHECK(std::abs(g - fd) <= 1e-3 * std::max({std::abs(g), std::abs(fd), 1e-8}));
    }
}

TEST_CASE("image generator contracts") {
    torch::manual_seed(6);
    S2INet net(small(64, 4));
    const auto s = torch::rand({1, 3, 64, 64});
    const auto bg = torch::randn({1, 3, 64, 64});
    const auto out = net->forward(s, torch::rand({1, 1, 64, 64}), bg);
    CHECK(out.sizes() == torch::IntArrayRef({1, 3, 64, 64}));
    CHECK(out.min().item<float>() >= 0.f);
    CHECK(out.max().item<float>() <= 1.f);
    CHECK_THROWS_AS(net->forward(s, torch::Tensor(), bg), Error);

    std::vector<torch::Tensor> trace;
    net->forward(s, torch::zeros({1, 1, 64, 64}), bg, &trace);
    const auto feats = net->background_features(bg);
    REQUIRE(trace.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(torch::equal(trace[static_cast<std::size_t>(i)], feats[static_cast<std::size_t>(i)]));
    CHECK(trace.back().size(2) == 64);
    CHECK(trace.front().size(2) == 8);

    S2INet big(small(512, 2));
    CHECK(big->forward(torch::rand({1, 3, 512, 512}), torch::rand({1, 1, 512, 512}), torch::rand({1, 3, 512, 512})).sizes() ==
          torch::IntArrayRef({1, 3, 512, 512}));
}

TEST_CASE("image generator parameter gradients match finite differences") {
    torch::manual_seed(7);
    S2INet net(small(64, 4));
    net->to(torch::kFloat64);
    const auto s = torch::rand({1, 3, 64, 64}, torch::kFloat64);
    const auto m = torch::rand({1, 1, 64, 64}, torch::kFloat64);
    const auto bg = torch::randn({1, 3, 64, 64}, torch::kFloat64);
    const auto w = torch::randn({1, 3, 64, 64}, torch::kFloat64);
    auto loss = [&] { return (net->forward(s, m, bg) * w).mean(); };
    auto params = net->parameters();
    net->zero_grad();
    loss().backward();
    std::mt19937_64 rng(8);
    int checked = 0;
    while (checked < 10) {
        auto& p = params[rng() % params.size()];
        const auto idx = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(p.numel()));
        const double analytic = p.grad().view(-1)[idx].item<double>();
        const double eps = 1e-6;
        double fp, fm;
        {
            torch::NoGradGuard guard;
            auto flat = p.view(-1);
            const double orig = flat[idx].item<double>();
            flat[idx] = orig + eps;
            fp = loss().item<double>();
            flat[idx] = orig - eps;
            fm = loss().item<double>();
            flat[idx] = orig;
        }
        const double numeric = (fp - fm) / (2 * eps);
        CHECK(std::abs(analytic - numeric) <= 1e-3 * std::max({std::abs(analytic), std::abs(numeric), 1e-7}));
        ++checked;
    }
}

TEST_CASE("patch discriminator geometry") {
    torch::manual_seed(9);
    PatchDiscriminator d512(7, 2, 3);
    CHECK(d512->forward(torch::randn({1, 7, 512, 512})).sizes() == torch::IntArrayRef({1, 1, 62, 62}));
    CHECK(patch_grid_size(512, 3) == 62);
    PatchDiscriminator d(2, 8, 3);
    CHECK(d->forward(torch::randn({1, 2, 64, 64})).sizes() == torch::IntArrayRef({1, 1, 6, 6}));
    CHECK(patch_grid_size(64, 3) == 6);
}

TEST_CASE("patch discriminator is shift-equivariant and translation invariant") {
    torch::manual_seed(10);
    PatchDiscriminator d(2, 8, 3);
    torch::NoGradGuard guard;
    const auto x = torch::randn({1, 2, 256, 256});
    const auto a = d->forward(x);
    const auto b = d->forward(torch::roll(x, {8, 8}, {2, 3}));
    using torch::indexing::Slice;
    const auto pa = a.index({0, 0, Slice(2, -3), Slice(2, -3)}).flatten();
    const auto pb = b.index({0, 0, Slice(3, -2), Slice(3, -2)}).flatten();
    const auto ca = pa - pa.mean(), cb = pb - pb.mean();
    const double corr = ((ca * cb).sum() / (ca.norm() * cb.norm())).item<double>();
    CHECK(corr > 0.9);

    const auto c = d->forward(torch::full({1, 2, 256, 256}, 0.3f));
    const auto inner = c.index({0, 0, Slice(5, -5), Slice(5, -5)});
    CHECK((inner - inner.mean()).abs().max().item<float>() <= 1e-5f);
}

TEST_CASE("checkpoint round trip is bitwise") {
    torch::manual_seed(11);
    const auto path = std::filesystem::temp_directory_path() / "hs_ckpt_test.pt";
    S2INet net(small(64, 4));
    CheckpointInfo info;
    info.kind = NetKind::s2i;
    info.stage = "s2i_unbraided";
    info.step = 17;
    info.config = small(64, 4);
    save_checkpoint(path, info, *net);
    const auto back = read_checkpoint_info(path);
    CHECK(back.version == kCheckpointVersion);
    CHECK(back.step == 17);
    CHECK(back.kind == NetKind::s2i);
    torch::manual_seed(99);
    S2INet other(back.config);
    load_checkpoint(path, *other);
    const auto s = torch::rand({1, 3, 64, 64}), m = torch::rand({1, 1, 64, 64}), bg = torch::rand({1, 3, 64, 64});
    torch::NoGradGuard guard;
    CHECK(torch::equal(net->forward(s, m, bg), other->forward(s, m, bg)));
    S2MNet wrong(small(64, 4));
    CHECK_THROWS_AS(load_checkpoint(path, *wrong), Error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_checkpoint_info(path), Error);
}
