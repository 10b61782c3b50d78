#include "hairsalon/morphology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace hs::morph {
namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();

// Felzenszwalb-Huttenlocher 1D squared distance transform of a sampled function.
constexpr double kFar = 1e20;

void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

const std::array<std::array<int, 2>, 8> kRing = {{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

}  // namespace

Grid<float> distance_to(const BinaryMask& features) {
    const int h = features.height();
    const int w = features.width();
    const int n = std::max(h, w);
    std::vector<double> sq(static_cast<std::size_t>(h) * w);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    for (int x = 0; x < w; ++x) {
        f.resize(h);
        d.resize(h);
        for (int y = 0; y < h; ++y) f[y] = features.at(x, y) ? 0.0 : kFar;
        edt_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) sq[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    Grid<float> out(h, w, 1, kInf);
    f.resize(w);
    d.resize(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = sq[static_cast<std::size_t>(y) * w + x];
        edt_1d(f, d, v, z);
        for (int x = 0; x < w; ++x) out.at(x, y) = d[x] < kFar * 0.5 ? static_cast<float>(std::sqrt(d[x])) : kInf;
    }
    return out;
}

BinaryMask invert(const BinaryMask& mask) {
    BinaryMask out = mask;
    for (auto& v : out.raw()) v = v ? 0 : 1;
    return out;
}

BinaryMask dilate_square(const BinaryMask& mask, int size) {
    const int r = size / 2;
    const int h = mask.height();
    const int w = mask.width();
    BinaryMask tmp(h, w, 1, 0);
    for (int y = 0; y < h; ++y) {
        int last = -1 - r * 4;  // most recent set column
        for (int x = 0; x < w + r; ++x) {
            if (x < w && mask.at(x, y)) last = x;
            const int ox = x - r;
            if (ox >= 0 && ox < w) tmp.at(ox, y) = (x - last) <= 2 * r ? 1 : 0;
        }
    }
    BinaryMask out(h, w, 1, 0);
    for (int x = 0; x < w; ++x) {
        int last = -1 - r * 4;
        for (int y = 0; y < h + r; ++y) {
            if (y < h && tmp.at(x, y)) last = y;
            const int oy = y - r;
            if (oy >= 0 && oy < h) out.at(x, oy) = (y - last) <= 2 * r ? 1 : 0;
        }
    }
    return out;
}

BinaryMask erode_square(const BinaryMask& mask, int size) {
    // Outside the canvas counts as background.
    const int r = size / 2;
    BinaryMask padded(mask.height() + 2 * r, mask.width() + 2 * r, 1, 1);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) padded.at(x + r, y + r) = mask.at(x, y) ? 0 : 1;
    for (int y = 0; y < padded.height(); ++y)
        for (int x = 0; x < padded.width(); ++x)
            if (x < r || y < r || x >= mask.width() + r || y >= mask.height() + r) padded.at(x, y) = 1;
    const BinaryMask grown = dilate_square(padded, size);
    BinaryMask out(mask.height(), mask.width(), 1, 0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) out.at(x, y) = grown.at(x + r, y + r) ? 0 : 1;
    return out;
}

Components label_components(const BinaryMask& mask) {
    Components c{Grid<std::int32_t>(mask.height(), mask.width(), 1, -1), 0};
    std::vector<std::int32_t> stack;
    const int w = mask.width();
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || c.labels.at(x, y) >= 0) continue;
            const int label = c.count++;
            c.labels.at(x, y) = label;
            stack.push_back(y * w + x);
            while (!stack.empty()) {
                const int i = stack.back();
                stack.pop_back();
                const int px = i % w;
                const int py = i / w;
                for (const auto& o : kRing) {
                    const int nx = px + o[0];
                    const int ny = py + o[1];
                    if (!mask.contains(nx, ny) || !mask.at(nx, ny) || c.labels.at(nx, ny) >= 0) continue;
                    c.labels.at(nx, ny) = label;
                    stack.push_back(ny * w + nx);
                }
            }
        }
    return c;
}

BinaryMask thin(const BinaryMask& mask) {
    BinaryMask img = mask;
    const int h = img.height();
    const int w = img.width();
    auto px = [&](int x, int y) -> int { return img.contains(x, y) && img.at(x, y) ? 1 : 0; };
    std::vector<std::int32_t> del;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            del.clear();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (!img.at(x, y)) continue;
                    // P2..P9 clockwise from north.
                    const int p2 = px(x, y - 1), p3 = px(x + 1, y - 1), p4 = px(x + 1, y), p5 = px(x + 1, y + 1);
                    const int p6 = px(x, y + 1), p7 = px(x - 1, y + 1), p8 = px(x - 1, y), p9 = px(x - 1, y - 1);
                    const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
                    if (b < 2 || b > 6) continue;
                    const int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
                    int a = 0;
                    for (int i = 0; i < 8; ++i) a += (seq[i] == 0 && seq[i + 1] == 1);
                    if (a != 1) continue;
                    if (pass == 0 && (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0)) continue;
                    if (pass == 1 && (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0)) continue;
                    del.push_back(y * w + x);
                }
            for (auto i : del) img.raw()[static_cast<std::size_t>(i)] = 0;
            changed = changed || !del.empty();
        }
    }
    return img;
}

namespace {

// Neighbors under m-adjacency: diagonal links only where no shared 4-neighbor is set.
int m_neighbors(const BinaryMask& m, int x, int y, std::array<std::int32_t, 8>& out) {
    auto on = [&](int ax, int ay) { return m.contains(ax, ay) && m.at(ax, ay) != 0; };
    int n = 0;
    for (const auto& o : kRing) {
        const int nx = x + o[0];
        const int ny = y + o[1];
        if (!on(nx, ny)) continue;
        if (o[0] != 0 && o[1] != 0 && (on(x + o[0], y) || on(x, y + o[1]))) continue;
        out[n++] = ny * m.width() + nx;
    }
    return n;
}

std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

std::vector<PixelChain> trace_chains(const BinaryMask& m) {
    const int w = m.width();
    std::vector<PixelChain> chains;
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::uint8_t> touched(m.size(), 0);
    std::array<std::int32_t, 8> nb{};
    auto degree = [&](std::int32_t i) { return m_neighbors(m, i % w, i / w, nb); };

    auto walk = [&](std::int32_t start, std::int32_t first) {
        PixelChain chain{start, first};
        seen.insert(edge_key(start, first));
        touched[start] = touched[first] = 1;
        std::int32_t prev = start;
        std::int32_t cur = first;
        while (cur != start) {
            std::array<std::int32_t, 8> local{};
            const int d = m_neighbors(m, cur % w, cur / w, local);
            if (d != 2) break;
            std::int32_t next = local[0] == prev ? local[1] : local[0];
            if (seen.count(edge_key(cur, next))) break;
            seen.insert(edge_key(cur, next));
            chain.push_back(next);
            touched[next] = 1;
            prev = cur;
            cur = next;
        }
        return chain;
    };

    for (std::int32_t i = 0; i < static_cast<std::int32_t>(m.size()); ++i) {
        if (!m.raw()[i]) continue;
        const int d = degree(i);
        if (d == 2) continue;
        touched[i] = 1;
        if (d == 0) {
            chains.push_back({i});
            continue;
        }
        const auto local = nb;
        for (int k = 0; k < d; ++k)
            if (!seen.count(edge_key(i, local[k]))) chains.push_back(walk(i, local[k]));
    }
    // Remaining pixels lie on closed loops.
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(m.size()); ++i) {
        if (!m.raw()[i] || touched[i]) continue;
        if (degree(i) != 2) continue;
        chains.push_back(walk(i, nb[0]));
    }
    return chains;
}

BinaryMask prune_spurs(const BinaryMask& thin_mask, int min_length) {
    BinaryMask m = thin_mask;
    const int w = m.width();
    std::array<std::int32_t, 8> nb{};
    for (int round = 0; round < 8; ++round) {
        bool changed = false;
        for (const auto& chain : trace_chains(m)) {
            if (chain.size() < 2 || chain.front() == chain.back()) continue;
            const int da = m_neighbors(m, chain.front() % w, chain.front() / w, nb);
            const int db = m_neighbors(m, chain.back() % w, chain.back() / w, nb);
            const bool spur = (da == 1 && db >= 3) || (db == 1 && da >= 3);
            if (!spur || static_cast<int>(chain.size()) >= min_length) continue;
            for (std::size_t k = 0; k < chain.size(); ++k) {
                const auto idx = chain[k];
                const bool junction = (k == 0 && da >= 3) || (k + 1 == chain.size() && db >= 3);
                if (!junction) m.raw()[static_cast<std::size_t>(idx)] = 0;
            }
            changed = true;
        }
        if (!changed) break;
    }
    return m;
}

Polyline to_polyline(const PixelChain& chain, int width) {
    Polyline out;
    out.reserve(chain.size());
    for (auto i : chain) out.push_back({static_cast<double>(i % width), static_cast<double>(i / width)});
    return out;
}

double polyline_length(const Polyline& line) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) len += std::hypot(line[i + 1].x - line[i].x, line[i + 1].y - line[i].y);
    return len;
}

namespace {

void douglas_peucker(const Polyline& line, std::size_t a, std::size_t b, double tol, std::vector<bool>& keep) {
    if (b <= a + 1) return;
    const Point pa = line[a];
    const Point ab = line[b] - pa;
    const double len2 = dot(ab, ab);
    double best = -1.0;
    std::size_t arg = a;
    for (std::size_t i = a + 1; i < b; ++i) {
        const Point ap = line[i] - pa;
        double d2;
        if (len2 > 0) {
            const double t = std::clamp(dot(ap, ab) / len2, 0.0, 1.0);
            const Point e = ap - ab * t;
            d2 = dot(e, e);
        } else {
            d2 = dot(ap, ap);
        }
        if (d2 > best) {
            best = d2;
            arg = i;
        }
    }
    if (best > tol * tol) {
        keep[arg] = true;
        douglas_peucker(line, a, arg, tol, keep);
        douglas_peucker(line, arg, b, tol, keep);
    }
}

}  // namespace

Polyline simplify(const Polyline& line, double tolerance) {
    if (line.size() < 3) return line;
    std::vector<bool> keep(line.size(), false);
    keep.front() = keep.back() = true;
    douglas_peucker(line, 0, line.size() - 1, tolerance, keep);
    Polyline out;
    for (std::size_t i = 0; i < line.size(); ++i)
        if (keep[i]) out.push_back(line[i]);
    return out;
}

}  // namespace hs::morph
