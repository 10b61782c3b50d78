#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <torch/torch.h>

#include "hairsalon/braid.hpp"
#include "hairsalon/color_retrieval.hpp"
#include "hairsalon/data_synth.hpp"
#include "hairsalon/errors.hpp"
#include "hairsalon/image_io.hpp"
#include "hairsalon/matte_ops.hpp"
#include "hairsalon/nn/inference.hpp"
#include "hairsalon/nn/trainer.hpp"
#include "hairsalon/service.hpp"
#include "hairsalon/stroke_diffusion.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hs;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty()) out.push_back(item);
    return out;
}

Rgb parse_hex(std::string s) {
    if (!s.empty() && s[0] == '#') s.erase(0, 1);
    if (s.size() != 6 || s.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
        throw Error("invalid_argument", "color '" + s + "' is not RRGGBB");
    const auto v = std::stoul(s, nullptr, 16);
    return {((v >> 16) & 0xff) / 255.f, ((v >> 8) & 0xff) / 255.f, (v & 0xff) / 255.f};
}

Sketch read_sketch(const fs::path& path) {
    try {
        return sketch_from_json(json::parse(io::read_text(path)));
    } catch (const json::parse_error& e) {
        throw Error("invalid_sketch", path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    io::write_text(path, j.dump(2) + "\n");
}

// Sample directories below `root`, sorted by name.
std::vector<fs::path> sample_dirs(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error("io_error", "not a directory: " + root.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "sketch.json")) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

struct Stats {
    double mean = 0.0;
    double sd = 0.0;
};

Stats stats(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(s.sd / static_cast<double>(v.size()));
    return s;
}

// Matte files under `root` keyed by path relative to it.
std::map<std::string, fs::path> matte_files(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error("io_error", "not a directory: " + root.string());
    std::map<std::string, fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().filename() == "matte.png")
            out.emplace(fs::relative(e.path(), root).generic_string(), e.path());
    return out;
}

struct GenData {
    fs::path out;
    std::size_t n = 8;
    std::uint64_t seed = 0;
    int size = 512;
    std::string styles = "straight,wavy,braided";
    int workers = 1;

    void run() const {
        std::vector<Style> st;
        for (const auto& s : split(styles, ',')) st.push_back(style_from_string(s));
        generate_dataset(out, n, seed, {size, size}, st, workers);
        std::cout << json{{"samples", n}, {"out", out.string()}}.dump() << "\n";
    }
};

struct Train {
    std::string stage = "s2m";
    fs::path data, out, init;
    std::int64_t iterations = 100;
    std::int64_t checkpoint_every = 0;
    int base = 16;
    int batch = 4;
    double lr = 2e-4;
    std::string gan = "bce";
    std::uint64_t seed = 0;
    bool resume = false, no_augment = false, no_nonhair = false;

    void run() const {
        const auto pairs = load_dataset(data);
        if (pairs.empty()) throw Error("empty_dataset", "no samples under " + data.string());
        nn::TrainConfig c;
        c.stage = nn::stage_from_string(stage);
        c.net = nn::NetConfig::for_size(pairs.front().matte.height(), base);
        c.batch_size = batch;
        c.iterations = iterations;
        c.checkpoint_every = checkpoint_every;
        c.lr_g = c.lr_d = lr;
        if (gan != "bce" && gan != "lsgan") throw Error("invalid_argument", "gan must be bce or lsgan");
        c.gan = gan == "bce" ? nn::GanMode::bce : nn::GanMode::lsgan;
        c.seed = seed;
        c.augment = !no_augment;
        c.nonhair = !no_nonhair;
        c.init_checkpoint = init;
        const auto r = nn::run_stage(c, pairs, out, resume);
        std::cout << json{{"final_checkpoint", r.final_checkpoint.string()},
                          {"eval_l1_initial", r.eval_l1_initial},
                          {"eval_l1_final", r.eval_l1_final}}
                         .dump()
                  << "\n";
    }
};

struct Infer {
    fs::path s2m, s2i, sketch, matte, background, data, out;
    std::uint64_t seed = 0;
    bool true_matte = false;

    void run() const {
        if (s2m.empty() && s2i.empty()) throw Error("invalid_argument", "at least one of --s2m or --s2i is required");
        std::optional<nn::MatteModel> mm;
        std::optional<nn::ImageModel> im;
        if (!s2m.empty()) mm = nn::MatteModel::load(s2m);
        if (!s2i.empty()) im = nn::ImageModel::load(s2i);
        fs::create_directories(out);
        if (!data.empty()) return run_dataset(mm, im);
        if (sketch.empty()) throw Error("invalid_argument", "either --sketch or --data is required");
        const Sketch sk = read_sketch(sketch);
        Matte m;
        if (!matte.empty()) m = io::to_single_channel(io::read_png(matte));
        else if (mm) m = mm->predict(sk);
        else throw Error("missing_matte", "image synthesis needs --matte or --s2m");
        io::write_png(out / "matte.png", m);
        if (im) {
            const RgbImage bg = background.empty() ? RgbImage(sk.canvas.height, sk.canvas.width, 3, 0.5f)
                                                   : io::read_png(background);
            io::write_png(out / "image.png", im->synthesize(hair_only(sk), m, bg, seed));
        }
        std::cout << json{{"out", out.string()}}.dump() << "\n";
    }

    void run_dataset(const std::optional<nn::MatteModel>& mm, const std::optional<nn::ImageModel>& im) const {
        json per = json::array();
        std::vector<double> sads, l1s;
        std::size_t index = 0;
        for (const auto& dir : sample_dirs(data)) {
            const SamplePair p = load_sample(dir);
            const auto target = out / dir.filename();
            fs::create_directories(target);
            json row = {{"sample", dir.filename().string()}};
            Matte m = p.matte;
            if (mm) {
                const Matte pred = mm->predict(p.sketch);
                io::write_png(target / "matte.png", pred);
                row["sad"] = sad(pred, p.matte);
                sads.push_back(row["sad"]);
                if (!true_matte) m = pred;
            }
            if (im) {
                const RgbImage img = im->synthesize(hair_only(p.sketch), m, p.background, derive_seed(seed, index));
                io::write_png(target / "image.png", img);
                double l1 = 0.0;
                for (std::size_t i = 0; i < img.size(); ++i) l1 += std::abs(img.raw()[i] - p.image.raw()[i]);
                row["image_l1"] = l1 / static_cast<double>(img.size());
                l1s.push_back(row["image_l1"]);
            }
            per.push_back(row);
            ++index;
        }
        json report = {{"samples", index}, {"per_sample", per}};
        if (!sads.empty()) report["sad_mean"] = stats(sads).mean;
        if (!l1s.empty()) report["image_l1_mean"] = stats(l1s).mean;
        write_json(out / "infer_report.json", report);
        std::cout << json{{"samples", index}, {"out", out.string()}}.dump() << "\n";
    }
};

struct Eval {
    fs::path pred, truth, out;

    void run() const {
        const auto truths = matte_files(truth);
        const auto preds = matte_files(pred);
        std::vector<double> sads, ious;
        json per = json::array();
        for (const auto& [rel, path] : truths) {
            const auto it = preds.find(rel);
            if (it == preds.end()) continue;
            const Matte t = io::to_single_channel(io::read_png(path));
            const Matte p = io::to_single_channel(io::read_png(it->second));
            if (t.canvas() != p.canvas()) throw Error("shape_mismatch", rel + ": predicted and true mattes differ in size");
            sads.push_back(sad(p, t));
            ious.push_back(iou(p, t));
            per.push_back({{"matte", rel}, {"sad", sads.back()}, {"iou", ious.back()}});
        }
        if (sads.empty()) throw Error("empty_dataset", "no matching matte.png pairs");
        const auto s = stats(sads), i = stats(ious);
        const json report = {{"count", sads.size()}, {"sad_mean", s.mean}, {"sad_sd", s.sd},
                             {"iou_mean", i.mean},   {"iou_sd", i.sd},     {"per_sample", per}};
        if (!out.empty()) write_json(out, report);
        std::cout << json{{"count", sads.size()}, {"sad_mean", s.mean}, {"sad_sd", s.sd}, {"iou_mean", i.mean}}.dump()
                  << "\n";
    }
};

struct BuildColorDb {
    fs::path data, out;

    void run() const {
        const auto db = color::build_database(load_dataset(data));
        db.save(out);
        std::cout << json{{"entries", db.size()}, {"out", out.string()}}.dump() << "\n";
    }
};

struct Serve {
    service::SessionConfig cfg;

    void run() {
        cfg = service::SessionConfig::from_env(cfg);
        const service::Service svc(cfg);
        const auto health = svc.health();
        std::cerr << health.body.dump() << "\n";
        service::HttpServer server(svc);
        const int port = server.bind(cfg.host, cfg.port);
        std::cout << json{{"listening", cfg.host + ":" + std::to_string(port)}}.dump() << std::endl;
        server.listen();
    }
};

struct Autocomplete {
    std::string mode = "unbraided";
    fs::path sketch, matte, out;
    std::vector<int> boundary_ids;
    std::string kind = "three_strand";
    double w = 1.0;
    std::string palette;
    std::string policy = "nearest_user_stroke";
    std::string color;
    std::uint64_t seed = 0;

    void run() const {
        Sketch sk = read_sketch(sketch);
        const std::size_t before = sk.strokes.size();
        if (mode == "braid") {
            if (boundary_ids.size() != 2) throw Error("invalid_argument", "--boundary-ids needs two stroke ids");
            braid::BoundaryPair b;
            Polyline* slots[2] = {&b.b0, &b.b1};
            for (int i = 0; i < 2; ++i) {
                const auto it = std::find_if(sk.strokes.begin(), sk.strokes.end(),
                                             [&](const Stroke& s) { return s.id == boundary_ids[static_cast<std::size_t>(i)]; });
                if (it == sk.strokes.end()) throw Error("invalid_argument", "unknown stroke id");
                *slots[i] = it->points;
            }
            const auto k = braid::kind_from_string(kind);
            std::vector<Rgb> pal;
            for (const auto& h : split(palette, ',')) pal.push_back(parse_hex(h));
            if (pal.empty()) pal.assign(static_cast<std::size_t>(braid::strand_count(k)), Rgb{0.36f, 0.24f, 0.15f});
            const Sketch gen = braid::complete_braid(b, k, w, pal, sk.canvas);
            int next = next_stroke_id(sk);
            for (auto s : gen.strokes) {
                s.id = next++;
                sk.strokes.push_back(std::move(s));
            }
        } else if (mode == "unbraided") {
            if (matte.empty()) throw Error("missing_matte", "unbraided completion needs --matte");
            diffusion::CompletionOptions opts;
            if (policy == "fixed") {
                opts.policy = diffusion::ColorPolicy::fixed;
                if (!color.empty()) opts.fixed_color = parse_hex(color);
            } else if (policy != "nearest_user_stroke") {
                throw Error("invalid_argument", "policy must be nearest_user_stroke or fixed");
            }
            sk = diffusion::autocomplete_unbraided(sk, io::to_single_channel(io::read_png(matte)), opts);
        } else {
            throw Error("invalid_argument", "mode must be braid or unbraided");
        }
        write_json(out, to_json(sk));
        std::cout << json{{"generated", sk.strokes.size() - before}, {"out", out.string()}}.dump() << "\n";
    }
};

void fail(const std::string& code, const std::string& message) {
    std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sketch-based hair synthesis: data, training, inference, evaluation and serving"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "Intra-op threads for tensor math")->capture_default_str();

    GenData gen;
    auto* g = app.add_subcommand("gen-data", "Write synthetic sketch/matte/image samples");
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--n", gen.n, "Number of samples")->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--size", gen.size, "Canvas side in pixels")->capture_default_str();
    g->add_option("--styles", gen.styles, "Comma-separated styles, cycled by sample index")->capture_default_str();
    g->add_option("--workers", gen.workers)->capture_default_str();

    Train tr;
    auto* t = app.add_subcommand("train", "Run one training stage");
    t->add_option("--stage", tr.stage, "s2m | s2i_unbraided | s2i_braided_finetune")->capture_default_str();
    t->add_option("--data", tr.data, "Dataset directory")->required();
    t->add_option("--out", tr.out, "Run directory")->required();
    t->add_option("--init", tr.init, "s2i_unbraided checkpoint for braided fine-tuning");
    t->add_option("--iterations", tr.iterations)->capture_default_str();
    t->add_option("--checkpoint-every", tr.checkpoint_every)->capture_default_str();
    t->add_option("--base", tr.base, "Base channel count")->capture_default_str();
    t->add_option("--batch", tr.batch)->capture_default_str();
    t->add_option("--lr", tr.lr)->capture_default_str();
    t->add_option("--gan", tr.gan, "bce | lsgan")->capture_default_str();
    t->add_option("--seed", tr.seed)->capture_default_str();
    t->add_flag("--resume", tr.resume, "Continue from <out>/latest.pt");
    t->add_flag("--no-augment", tr.no_augment);
    t->add_flag("--no-nonhair", tr.no_nonhair);

    Infer inf;
    auto* i = app.add_subcommand("infer", "Predict mattes and images");
    i->add_option("--s2m", inf.s2m, "Matte checkpoint");
    i->add_option("--s2i", inf.s2i, "Image checkpoint");
    i->add_option("--sketch", inf.sketch, "Sketch JSON");
    i->add_option("--matte", inf.matte, "Matte PNG; skips matte prediction");
    i->add_option("--background", inf.background, "Background PNG");
    i->add_option("--data", inf.data, "Dataset directory; predicts every sample");
    i->add_option("--out", inf.out, "Output directory")->required();
    i->add_option("--seed", inf.seed, "Background noise seed")->capture_default_str();
    i->add_flag("--true-matte", inf.true_matte, "Synthesize images from ground-truth mattes");

    Eval ev;
    auto* e = app.add_subcommand("eval", "SAD and IoU over predicted/true matte.png pairs");
    e->add_option("--pred", ev.pred)->required();
    e->add_option("--truth", ev.truth)->required();
    e->add_option("--out", ev.out, "JSON report path");

    BuildColorDb cdb;
    auto* c = app.add_subcommand("build-colordb", "Build the stroke color database from a dataset");
    c->add_option("--data", cdb.data)->required();
    c->add_option("--out", cdb.out)->required();

    Serve sv;
    auto* s = app.add_subcommand("serve", "HTTP service; HS_* environment variables fill unset options");
    s->add_option("--s2m", sv.cfg.s2m_checkpoint);
    s->add_option("--s2i-unbraided", sv.cfg.s2i_unbraided_checkpoint);
    s->add_option("--s2i-braided", sv.cfg.s2i_braided_checkpoint);
    s->add_option("--color-db", sv.cfg.color_db);
    s->add_option("--canvas", sv.cfg.canvas)->capture_default_str();
    s->add_option("--seed", sv.cfg.noise_seed, "Default noise seed")->capture_default_str();
    s->add_option("--max-inflight", sv.cfg.max_inflight)->capture_default_str();
    s->add_option("--host", sv.cfg.host)->capture_default_str();
    s->add_option("--port", sv.cfg.port)->capture_default_str();

    Autocomplete ac;
    auto* a = app.add_subcommand("autocomplete", "Braid or unbraided stroke completion on files");
    a->add_option("mode", ac.mode, "braid | unbraided")->required();
    a->add_option("--sketch", ac.sketch)->required();
    a->add_option("--out", ac.out)->required();
    a->add_option("--matte", ac.matte, "Matte PNG (unbraided)");
    a->add_option("--boundary-ids", ac.boundary_ids, "Two boundary stroke ids (braid)")->delimiter(',');
    a->add_option("--kind", ac.kind)->capture_default_str();
    a->add_option("--w", ac.w, "Knot density in [-3, 3]")->capture_default_str();
    a->add_option("--palette", ac.palette, "Comma-separated RRGGBB per strand");
    a->add_option("--policy", ac.policy, "nearest_user_stroke | fixed")->capture_default_str();
    a->add_option("--color", ac.color, "RRGGBB for the fixed policy");
    a->add_option("--seed", ac.seed, "Accepted for uniformity; completion is deterministic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        fail("usage", ex.what());
        return 2;
    }

    try {
        at::set_num_threads(std::max(1, threads));
        if (*g) gen.run();
        else if (*t) tr.run();
        else if (*i) inf.run();
        else if (*e) ev.run();
        else if (*c) cdb.run();
        else if (*s) sv.run();
        else if (*a) ac.run();
    } catch (const Error& ex) {
        fail(ex.code(), ex.what());
        return 1;
    } catch (const std::exception& ex) {
        fail("internal", ex.what());
        return 1;
    }
    return 0;
}
