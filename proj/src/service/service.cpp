#include "hairsalon/service.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>

#include <httplib.h>

#include "hairsalon/braid.hpp"
#include "hairsalon/errors.hpp"
#include "hairsalon/image_io.hpp"
#include "hairsalon/stroke_diffusion.hpp"

namespace hs::service {

namespace {

using nlohmann::json;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

int status_for(const std::string& code) {
    if (code == "model_unavailable" || code == "colors_unavailable") return 503;
    if (code == "style_unavailable" || code == "degenerate_braid") return 422;
    if (code == "internal") return 500;
    return 400;
}

Response failure(const std::string& code, const std::string& message) {
    return {status_for(code), {{"error", code}, {"message", message}}};
}

template <typename Fn>
Response guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return failure(e.code(), e.what());
    } catch (const json::exception& e) {
        return failure("invalid_request", e.what());
    } catch (const std::exception& e) {
        return failure("internal", e.what());
    }
}

json parse_body(const std::string& body) {
    try {
        auto doc = json::parse(body);
        if (!doc.is_object()) throw Error("invalid_request", "request body must be a JSON object");
        return doc;
    } catch (const json::parse_error& e) {
        throw Error("invalid_json", e.what());
    }
}

Sketch sketch_of(const json& doc) { return sketch_from_json(doc.contains("sketch") ? doc.at("sketch") : doc); }

Grid<float> decode_image(const std::string& b64, Canvas canvas, int channels, const char* what) {
    Grid<float> img;
    try {
        img = io::decode_png(io::base64_decode(b64));
    } catch (const Error& e) {
        throw Error(std::string("invalid_") + what, std::string(what) + " is not a base64 PNG: " + e.what());
    }
    if (img.height() != canvas.height || img.width() != canvas.width)
        throw Error(std::string("invalid_") + what, std::string(what) + " size does not match the sketch canvas");
    if (channels == 1) return io::to_single_channel(img);
    if (img.channels() == 1) {
        RgbImage rgb(img.height(), img.width(), 3);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = img.at(x, y, 0);
        return rgb;
    }
    if (img.channels() < 3) throw Error(std::string("invalid_") + what, std::string(what) + " must be RGB");
    if (img.channels() == 3) return img;
    RgbImage rgb(img.height(), img.width(), 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = img.at(x, y, c);
    return rgb;
}

std::string encode_b64(const Grid<float>& img) { return io::base64_encode(io::encode_png(img)); }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

Rgb parse_hex(std::string s) {
    if (!s.empty() && s[0] == '#') s.erase(0, 1);
    if (s.size() != 6 || s.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
        throw Error("invalid_argument", "rgb must be six hex digits RRGGBB");
    const auto v = std::stoul(s, nullptr, 16);
    return {((v >> 16) & 0xff) / 255.f, ((v >> 8) & 0xff) / 255.f, (v & 0xff) / 255.f};
}

std::string to_hex(Rgb c) {
    auto q = [](float v) { return static_cast<unsigned>(std::lround(std::clamp(v, 0.f, 1.f) * 255.f)); };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02X%02X%02X", q(c.r), q(c.g), q(c.b));
    return buf;
}

Rgb parse_color(const json& j) {
    if (j.is_string()) return parse_hex(j.get<std::string>());
    if (!j.is_array() || j.size() != 3) throw Error("invalid_argument", "colors are RRGGBB strings or [r, g, b] in [0, 1]");
    return {j.at(0).get<float>(), j.at(1).get<float>(), j.at(2).get<float>()};
}

Polyline parse_polyline(const json& j) {
    Polyline out;
    for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return out;
}

// Per-strand shades of one base color, spread in CIELab lightness.
std::vector<Rgb> shaded_palette(Rgb base, int n) {
    const auto lab = color::rgb_to_lab(base);
    std::vector<Rgb> out;
    for (int k = 0; k < n; ++k) {
        auto shade = lab;
        shade.l = std::clamp(lab.l + 8.0 * (k - (n - 1) / 2.0), 0.0, 100.0);
        out.push_back(color::lab_to_rgb(shade));
    }
    return out;
}

}  // namespace

SessionConfig SessionConfig::from_env(SessionConfig base) {
    base.s2m_checkpoint = env_or("HS_S2M_CKPT", base.s2m_checkpoint.string());
    base.s2i_unbraided_checkpoint = env_or("HS_S2I_UNBRAIDED_CKPT", base.s2i_unbraided_checkpoint.string());
    base.s2i_braided_checkpoint = env_or("HS_S2I_BRAIDED_CKPT", base.s2i_braided_checkpoint.string());
    base.color_db = env_or("HS_COLOR_DB", base.color_db.string());
    base.canvas = std::stoi(env_or("HS_CANVAS", std::to_string(base.canvas)));
    base.noise_seed = std::stoull(env_or("HS_NOISE_SEED", std::to_string(base.noise_seed)));
    base.max_inflight = std::stoi(env_or("HS_MAX_INFLIGHT", std::to_string(base.max_inflight)));
    base.host = env_or("HS_HOST", base.host);
    base.port = std::stoi(env_or("HS_PORT", std::to_string(base.port)));
    return base;
}

SessionConfig SessionConfig::from_env() { return from_env(SessionConfig{}); }

json SessionConfig::to_json() const {
    return {{"s2m_checkpoint", s2m_checkpoint.string()},
            {"s2i_unbraided_checkpoint", s2i_unbraided_checkpoint.string()},
            {"s2i_braided_checkpoint", s2i_braided_checkpoint.string()},
            {"color_db", color_db.string()},
            {"canvas", canvas},
            {"noise_seed", noise_seed},
            {"max_inflight", max_inflight},
            {"host", host},
            {"port", port}};
}

class Service::Slot {
public:
    explicit Slot(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
    ~Slot() { s_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    std::counting_semaphore<>& s_;
};

Service::Service(SessionConfig config, std::optional<nn::MatteModel> matte, std::optional<nn::ImageModel> unbraided,
                 std::optional<nn::ImageModel> braided, std::optional<color::ColorDatabase> colors)
    : config_(std::move(config)),
      matte_model_(std::move(matte)),
      unbraided_model_(std::move(unbraided)),
      braided_model_(std::move(braided)),
      colors_(std::move(colors)) {
    if (config_.max_inflight < 1) throw Error("invalid_config", "max_inflight must be positive");
    inflight_ = std::make_unique<std::counting_semaphore<>>(config_.max_inflight);
    auto check_size = [&](const char* name, int size) {
        if (size != config_.canvas)
            load_errors_[name] = "model size " + std::to_string(size) + " differs from canvas " + std::to_string(config_.canvas);
    };
    if (matte_model_) check_size("s2m", matte_model_->size());
    if (unbraided_model_) check_size("s2i_unbraided", unbraided_model_->size());
    if (braided_model_) check_size("s2i_braided", braided_model_->size());
}

Service::Service(SessionConfig config) : Service(config, std::nullopt, std::nullopt, std::nullopt, std::nullopt) {
    auto attempt = [&](const char* name, const std::filesystem::path& path, auto load) {
        if (path.empty()) return;
        try {
            load(path);
        } catch (const std::exception& e) {
            load_errors_[name] = e.what();
        }
    };
    attempt("s2m", config_.s2m_checkpoint, [&](const auto& p) { matte_model_ = nn::MatteModel::load(p); });
    attempt("s2i_unbraided", config_.s2i_unbraided_checkpoint,
            [&](const auto& p) { unbraided_model_ = nn::ImageModel::load(p); });
    attempt("s2i_braided", config_.s2i_braided_checkpoint,
            [&](const auto& p) { braided_model_ = nn::ImageModel::load(p); });
    attempt("color_db", config_.color_db, [&](const auto& p) { colors_ = color::ColorDatabase::load(p); });
    auto check_size = [&](const char* name, auto& model) {
        if (model && model->size() != config_.canvas) {
            load_errors_[name] = "model size " + std::to_string(model->size()) + " differs from canvas " +
                                 std::to_string(config_.canvas);
            model.reset();
        }
    };
    check_size("s2m", matte_model_);
    check_size("s2i_unbraided", unbraided_model_);
    check_size("s2i_braided", braided_model_);
}

Response Service::health() const {
    const bool ready = load_errors_.empty() && matte_model_.has_value();
    json errors = json::object();
    for (const auto& [k, v] : load_errors_) errors[k] = v;
    return {ready ? 200 : 503,
            {{"status", ready ? "ok" : "degraded"},
             {"loaded",
              {{"s2m", matte_model_.has_value()},
               {"s2i_unbraided", unbraided_model_.has_value()},
               {"s2i_braided", braided_model_.has_value()},
               {"color_db", colors_.has_value()}}},
             {"errors", errors}}};
}

Response Service::config() const {
    json body = config_.to_json();
    body["styles"] = json::array();
    if (unbraided_model_) body["styles"].push_back("unbraided");
    if (braided_model_) body["styles"].push_back("braided");
    body["braid_kinds"] = json::array();
    for (auto k : {braid::Kind::fishtail, braid::Kind::rope, braid::Kind::three_strand, braid::Kind::four_strand,
                   braid::Kind::five_strand})
        body["braid_kinds"].push_back({{"name", braid::to_string(k)}, {"strands", braid::strand_count(k)}});
    body["color_db_size"] = colors_ ? colors_->size() : 0;
    return {200, body};
}

Matte Service::predict_matte(const Sketch& sketch) const {
    if (!matte_model_) throw Error("model_unavailable", "no matte checkpoint is loaded");
    if (sketch.hair_count() == 0) throw Error("no_hair_strokes", "at least one hair stroke is required");
    Slot slot(*inflight_);
    return matte_model_->predict(sketch);
}

Response Service::matte(const std::string& body) const {
    return guarded([&] {
        const auto start = std::chrono::steady_clock::now();
        const Sketch sketch = sketch_of(parse_body(body));
        const Matte m = predict_matte(sketch);
        return Response{200,
                        {{"matte", encode_b64(m)},
                         {"height", m.height()},
                         {"width", m.width()},
                         {"latency_ms", elapsed_ms(start)}}};
    });
}

Response Service::image(const std::string& body) const {
    return guarded([&] {
        const auto start = std::chrono::steady_clock::now();
        const json doc = parse_body(body);
        const Sketch sketch = sketch_of(doc);
        if (sketch.hair_count() == 0) throw Error("no_hair_strokes", "at least one hair stroke is required");
        const std::string style = doc.value("style", std::string("unbraided"));
        if (style != "braided" && style != "unbraided") throw Error("invalid_argument", "style must be braided or unbraided");
        const auto& model = style == "braided" ? braided_model_ : unbraided_model_;
        if (!model) throw Error("style_unavailable", "no " + style + " image checkpoint is loaded");

        const bool freeze = doc.value("freeze_matte", false);
        Matte m;
        std::string matte_b64;
        if (freeze) {
            if (!doc.contains("matte") || !doc.at("matte").is_string())
                throw Error("invalid_matte", "freeze_matte requires a base64 PNG matte");
            matte_b64 = doc.at("matte").get<std::string>();
            m = decode_image(matte_b64, sketch.canvas, 1, "matte");
        } else {
            m = predict_matte(sketch);
            matte_b64 = encode_b64(m);
        }

        RgbImage background;
        if (doc.contains("background") && doc.at("background").is_string())
            background = decode_image(doc.at("background").get<std::string>(), sketch.canvas, 3, "background");
        else
            background = RgbImage(sketch.canvas.height, sketch.canvas.width, 3, 0.5f);

        std::uint64_t seed = config_.noise_seed;
        if (doc.value("vary", false)) seed = std::random_device{}() * 0x100000000ull + std::random_device{}();
        else if (doc.contains("seed")) seed = doc.at("seed").get<std::uint64_t>();

        RgbImage out;
        {
            Slot slot(*inflight_);
            out = model->synthesize(hair_only(sketch), m, background, seed);
        }
        return Response{200,
                        {{"image", encode_b64(out)},
                         {"matte", matte_b64},
                         {"style", style},
                         {"noise_seed", seed},
                         {"latency_ms", elapsed_ms(start)}}};
    });
}

Response Service::autocomplete_braid(const std::string& body) const {
    return guarded([&] {
        const json doc = parse_body(body);
        Sketch sketch;
        sketch.canvas = {config_.canvas, config_.canvas};
        if (doc.contains("sketch")) sketch = sketch_from_json(doc.at("sketch"));

        braid::BoundaryPair boundaries;
        std::vector<Rgb> boundary_colors;
        if (doc.contains("boundary_ids")) {
            const auto ids = doc.at("boundary_ids").get<std::vector<int>>();
            if (ids.size() != 2) throw Error("invalid_argument", "boundary_ids must name two strokes");
            Polyline* slots[2] = {&boundaries.b0, &boundaries.b1};
            for (int i = 0; i < 2; ++i) {
                const auto it = std::find_if(sketch.strokes.begin(), sketch.strokes.end(),
                                             [&](const Stroke& s) { return s.id == ids[static_cast<std::size_t>(i)]; });
                if (it == sketch.strokes.end())
                    throw Error("invalid_argument", "no stroke with id " + std::to_string(ids[static_cast<std::size_t>(i)]));
                *slots[i] = it->points;
                boundary_colors.push_back(it->color);
            }
        } else if (doc.contains("boundaries")) {
            const auto& b = doc.at("boundaries");
            if (!b.is_array() || b.size() != 2) throw Error("invalid_argument", "boundaries must hold two polylines");
            boundaries.b0 = parse_polyline(b.at(0));
            boundaries.b1 = parse_polyline(b.at(1));
        } else {
            throw Error("invalid_argument", "either boundaries or boundary_ids is required");
        }

        const auto kind = braid::kind_from_string(doc.value("kind", std::string("three_strand")));
        const double w = doc.value("w", 1.0);
        const int n = braid::strand_count(kind);
        std::vector<Rgb> palette;
        if (doc.contains("palette")) {
            for (const auto& c : doc.at("palette")) palette.push_back(parse_color(c));
            if (palette.size() == 1) palette = shaded_palette(palette.front(), n);
        } else {
            Rgb base{0.36f, 0.24f, 0.15f};
            if (!boundary_colors.empty())
                base = {(boundary_colors[0].r + boundary_colors[1].r) / 2, (boundary_colors[0].g + boundary_colors[1].g) / 2,
                        (boundary_colors[0].b + boundary_colors[1].b) / 2};
            palette = shaded_palette(base, n);
        }

        const Sketch generated = braid::complete_braid(boundaries, kind, w, palette, sketch.canvas);
        int next = next_stroke_id(sketch);
        for (auto s : generated.strokes) {
            s.id = next++;
            sketch.strokes.push_back(std::move(s));
        }
        return Response{200, {{"sketch", to_json(sketch)}, {"generated", generated.strokes.size()}}};
    });
}

Response Service::autocomplete_unbraided(const std::string& body) const {
    return guarded([&] {
        const json doc = parse_body(body);
        const Sketch sketch = sketch_of(doc);
        Matte m;
        if (doc.contains("matte") && doc.at("matte").is_string())
            m = decode_image(doc.at("matte").get<std::string>(), sketch.canvas, 1, "matte");
        else
            m = predict_matte(sketch);
        diffusion::CompletionOptions opts;
        const auto policy = doc.value("color_policy", std::string("nearest_user_stroke"));
        if (policy == "fixed") {
            opts.policy = diffusion::ColorPolicy::fixed;
            if (doc.contains("fixed_color")) opts.fixed_color = parse_color(doc.at("fixed_color"));
        } else if (policy != "nearest_user_stroke") {
            throw Error("invalid_argument", "color_policy must be nearest_user_stroke or fixed");
        }
        const Sketch out = diffusion::autocomplete_unbraided(sketch, m, opts);
        return Response{200, {{"sketch", to_json(out)}, {"generated", out.strokes.size() - sketch.strokes.size()}}};
    });
}

Response Service::colors_nearest(const std::map<std::string, std::string>& query) const {
    return guarded([&] {
        if (!colors_) throw Error("colors_unavailable", "no color database is loaded");
        const auto it = query.find("rgb");
        if (it == query.end()) throw Error("invalid_argument", "missing rgb query parameter");
        const Rgb q = parse_hex(it->second);
        int k = 20;
        if (const auto kt = query.find("k"); kt != query.end()) {
            try {
                std::size_t used = 0;
                k = std::stoi(kt->second, &used);
                if (used != kt->second.size()) throw std::invalid_argument("k");
            } catch (const std::exception&) {
                throw Error("invalid_argument", "k must be an integer");
            }
        }
        if (k < 1 || k > 1000) throw Error("invalid_argument", "k must lie in [1, 1000]");
        json neighbors = json::array();
        for (const auto& n : color::nearest_colors(*colors_, q, k)) {
            const auto& lab = colors_->entries()[n.index].lab;
            neighbors.push_back({{"index", n.index},
                                 {"rgb", to_hex(n.rgb)},
                                 {"rgb_float", {n.rgb.r, n.rgb.g, n.rgb.b}},
                                 {"lab", {lab.l, lab.a, lab.b}},
                                 {"distance", n.distance}});
        }
        return Response{200, {{"query", to_hex(q)}, {"k", k}, {"neighbors", neighbors}}};
    });
}

Response Service::dispatch(const std::string& method, const std::string& path, const std::string& body,
                           const std::map<std::string, std::string>& query) const {
    if (method == "GET") {
        if (path == "/health") return health();
        if (path == "/config") return config();
        if (path == "/colors/nearest") return colors_nearest(query);
    } else if (method == "POST") {
        if (path == "/matte") return matte(body);
        if (path == "/image") return image(body);
        if (path == "/autocomplete/braid") return autocomplete_braid(body);
        if (path == "/autocomplete/unbraided") return autocomplete_unbraided(body);
    }
    return {404, {{"error", "not_found"}, {"message", method + " " + path + " is not an endpoint"}}};
}

struct HttpServer::Impl {
    const Service& service;
    httplib::Server server;
};

HttpServer::HttpServer(const Service& service) : impl_(new Impl{service}) {
    auto handle = [this](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        const auto r = impl_->service.dispatch(req.method, req.path, req.body, query);
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_content(r.body.dump(), "application/json");
    };
    for (const char* p : {"/health", "/config", "/colors/nearest"}) impl_->server.Get(p, handle);
    for (const char* p : {"/matte", "/image", "/autocomplete/braid", "/autocomplete/unbraided"}) impl_->server.Post(p, handle);
    impl_->server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    impl_->server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        res.set_content(json{{"error", res.status == 404 ? "not_found" : "http_error"}, {"message", req.method + " " + req.path}}.dump(),
                        "application/json");
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("io_error", "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace hs::service
