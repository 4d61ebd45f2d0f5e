#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "oscar/alignment.hpp"
#include "oscar/digest.hpp"

namespace oscar {

inline constexpr const char* kProviderUrlEnv = "OSCAR_PROVIDER_URL";

struct HealthStatus {
  std::string status;
  std::vector<std::string> models;
};

/// Client for the HTTP/JSON embedding service:
///   POST /v1/embed/text  {"model", "texts"}     -> {"model", "dim", "embeddings"}
///   POST /v1/embed/image {"model", "image_b64"} -> same shape, one embedding
///   GET  /v1/health                              -> {"status", "models"}
/// A fresh connection is opened per request, so one instance may be shared
/// across threads.
class RemoteProvider final : public EmbeddingProvider {
 public:
  RemoteProvider(std::string base_url, std::string model, std::size_t dim = 0)
      : base_url_(std::move(base_url)), model_(std::move(model)), dim_(dim) {}

  std::size_t dimension() const override { return dim_; }
  std::string model_id() const override { return model_; }

  HealthStatus health() const {
    auto res = client().Get("/v1/health");
    auto body = check(res, "/v1/health");
    HealthStatus h;
    try {
      h.status = body.at("status").get<std::string>();
      h.models = body.at("models").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ProviderViolation, std::string("/v1/health: ") + e.what());
    }
    return h;
  }

  std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) override {
    nlohmann::json req{{"model", model_}, {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    auto res = client().Post("/v1/embed/text", req.dump(), "application/json");
    return parse_embeddings(check(res, "/v1/embed/text"), texts.size(), "/v1/embed/text");
  }

  EmbeddingVector embed_image(const FrameRef& frame) override {
    auto bytes = read_file_bytes(frame.path);
    if (!bytes) throw Error(ErrorCode::Io, "cannot read frame image " + frame.path);
    nlohmann::json req{{"model", model_}, {"image_b64", base64_encode(*bytes)}};
    auto res = client().Post("/v1/embed/image", req.dump(), "application/json");
    return parse_embeddings(check(res, "/v1/embed/image"), 1, "/v1/embed/image").front();
  }

 private:
  httplib::Client client() const {
    httplib::Client c(base_url_);
    c.set_connection_timeout(5, 0);
    c.set_read_timeout(60, 0);
    return c;
  }

  nlohmann::json check(const httplib::Result& res, const std::string& route) const {
    if (!res)
      throw Error(ErrorCode::ProviderUnavailable,
                  base_url_ + route + ": " + httplib::to_string(res.error()));
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    std::string detail = body.is_object() && body.contains("error") && body["error"].is_string()
                             ? body["error"].get<std::string>()
                             : res->body;
    if (res->status == 400)
      throw Error(ErrorCode::InvalidArgument, route + " (400): " + detail);
    if (res->status != 200)
      throw Error(ErrorCode::ProviderUnavailable,
                  route + " (" + std::to_string(res->status) + "): " + detail);
    if (body.is_discarded() || !body.is_object())
      throw Error(ErrorCode::ProviderViolation, route + ": response is not a JSON object");
    return body;
  }

  std::vector<EmbeddingVector> parse_embeddings(const nlohmann::json& body, std::size_t expected,
                                                const std::string& route) {
    std::vector<EmbeddingVector> out;
    try {
      const auto model = body.at("model").get<std::string>();
      const auto dim = body.at("dim").get<std::size_t>();
      if (model != model_)
        throw Error(ErrorCode::ProviderViolation, route + ": answered for model " + model);
      std::size_t known = 0;
      dim_.compare_exchange_strong(known, dim);
      if (dim != dim_.load())
        throw Error(ErrorCode::ProviderViolation,
                    route + ": dim " + std::to_string(dim) + ", expected " + std::to_string(dim_.load()));
      for (const auto& e : body.at("embeddings")) {
        EmbeddingVector v{e.get<std::vector<float>>(), model};
        if (v.dim() != dim)
          throw Error(ErrorCode::ProviderViolation, route + ": embedding length differs from dim");
        for (float x : v.values)
          if (!std::isfinite(x)) throw Error(ErrorCode::ProviderViolation, route + ": non-finite value");
        out.push_back(std::move(v));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ProviderViolation, route + ": " + e.what());
    }
    if (out.size() != expected)
      throw Error(ErrorCode::ProviderViolation, route + ": expected " + std::to_string(expected) +
                                                    " embeddings, got " + std::to_string(out.size()));
    return out;
  }

  std::string base_url_;
  std::string model_;
  std::atomic<std::size_t> dim_;
};

}  // namespace oscar
