#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "hairsalon/color_retrieval.hpp"
#include "hairsalon/nn/inference.hpp"

namespace hs::service {

struct SessionConfig {
    std::filesystem::path s2m_checkpoint;
    std::filesystem::path s2i_unbraided_checkpoint;
    std::filesystem::path s2i_braided_checkpoint;
    std::filesystem::path color_db;
    int canvas = 512;
    // Noise seed used unless a request sets "vary".
    std::uint64_t noise_seed = 0;
    int max_inflight = 2;
    std::string host = "127.0.0.1";
    int port = 8080;

    // HS_S2M_CKPT, HS_S2I_UNBRAIDED_CKPT, HS_S2I_BRAIDED_CKPT, HS_COLOR_DB, HS_CANVAS,
    // HS_NOISE_SEED, HS_MAX_INFLIGHT, HS_HOST, HS_PORT; unset variables keep `base` values.
    static SessionConfig from_env(SessionConfig base);
    static SessionConfig from_env();
    nlohmann::json to_json() const;
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

// Request handling without the transport. Artifacts load in the constructor; failures are
// recorded and reported by health() instead of thrown. All handlers are const and may run
// concurrently.
class Service {
public:
    explicit Service(SessionConfig config);
    Service(SessionConfig config, std::optional<nn::MatteModel> matte, std::optional<nn::ImageModel> unbraided,
            std::optional<nn::ImageModel> braided, std::optional<color::ColorDatabase> colors);

    Response health() const;
    Response config() const;
    Response matte(const std::string& body) const;
    Response image(const std::string& body) const;
    Response autocomplete_braid(const std::string& body) const;
    Response autocomplete_unbraided(const std::string& body) const;
    Response colors_nearest(const std::map<std::string, std::string>& query) const;

    // Routes by method and path; unknown routes give 404.
    Response dispatch(const std::string& method, const std::string& path, const std::string& body,
                      const std::map<std::string, std::string>& query = {}) const;

    const SessionConfig& session() const { return config_; }

private:
    class Slot;
    Matte predict_matte(const Sketch& sketch) const;

    SessionConfig config_;
    std::optional<nn::MatteModel> matte_model_;
    std::optional<nn::ImageModel> unbraided_model_;
    std::optional<nn::ImageModel> braided_model_;
    std::optional<color::ColorDatabase> colors_;
    std::map<std::string, std::string> load_errors_;
    std::unique_ptr<std::counting_semaphore<>> inflight_;
};

// HTTP transport over a Service.
class HttpServer {
public:
    explicit HttpServer(const Service& service);
    ~HttpServer();

    // Binds to `port` (0 picks a free port) and returns the bound port; throws hs::Error("io_error").
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hs::service
