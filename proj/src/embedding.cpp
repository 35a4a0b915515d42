#include "mgtkit/embedding.hpp"

#include <cmath>
#include <random>

#include <httplib.h>
#include <json.hpp>

#include "mgtkit/errors.hpp"
#include "mgtkit/unicode.hpp"

namespace mgtkit {

HashProjectionEmbedder::HashProjectionEmbedder(int dimension, std::uint64_t seed)
    : dim_(dimension), seed_(seed) {
    if (dimension < 1) throw ValidationError("embedder dimension must be at least 1");
}

Eigen::MatrixXd HashProjectionEmbedder::embed(const Tokens& tokens) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(tokens.size()), dim_);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        std::mt19937_64 rng(fnv1a64(tokens[t]) ^ seed_);
        for (int d = 0; d < dim_; ++d) {
            // top 53 bits -> [0,1) -> [-1,1); pinned draw, no distribution object
            const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
            out(static_cast<Eigen::Index>(t), d) = 2.0 * u - 1.0;
        }
        const double norm = out.row(static_cast<Eigen::Index>(t)).norm();
        if (norm > 1e-12)
            out.row(static_cast<Eigen::Index>(t)) /= norm;
        else
            out(static_cast<Eigen::Index>(t), 0) = 1.0;
    }
    return out;
}

OneHotEmbedder::OneHotEmbedder(int dimension) : dim_(dimension) {
    if (dimension < 1) throw ValidationError("embedder dimension must be at least 1");
}

int OneHotEmbedder::index_of(const std::string& token) const {
    return static_cast<int>(fnv1a64(token) % static_cast<std::uint64_t>(dim_));
}

Eigen::MatrixXd OneHotEmbedder::embed(const Tokens& tokens) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tokens.size()), dim_);
    for (std::size_t t = 0; t < tokens.size(); ++t)
        out(static_cast<Eigen::Index>(t), index_of(tokens[t])) = 1.0;
    return out;
}

HttpEmbedder::HttpEmbedder(EmbedderConfig config, int expected_dimension)
    : config_(std::move(config)), dim_(expected_dimension) {
    if (expected_dimension < 1) throw ValidationError("embedder dimension must be at least 1");
}

Eigen::MatrixXd HttpEmbedder::embed(const Tokens& tokens) const {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    nlohmann::json request;
    request["tokens"] = tokens;
    const auto res = client.Post(config_.path, request.dump(), "application/json");
    if (!res) throw NetworkError("embedding endpoint unreachable: " + config_.endpoint);
    if (res->status != 200)
        throw NetworkError("embedding endpoint returned status " + std::to_string(res->status));

    nlohmann::json body;
    try {
        body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ShapeError(std::string("embedding response is not JSON: ") + e.what());
    }
    if (!body.contains("dim") || !body.contains("vectors") || !body["vectors"].is_array())
        throw ShapeError("embedding response missing 'dim' or 'vectors'");
    if (body["dim"].get<int>() != dim_)
        throw ShapeError("embedding dimension mismatch: expected " + std::to_string(dim_) +
                         ", got " + std::to_string(body["dim"].get<int>()));
    const auto& vectors = body["vectors"];
    if (vectors.size() != tokens.size())
        throw ShapeError("embedding count mismatch: expected " + std::to_string(tokens.size()) +
                         " vectors, got " + std::to_string(vectors.size()));

    Eigen::MatrixXd out(static_cast<Eigen::Index>(tokens.size()), dim_);
    for (std::size_t t = 0; t < vectors.size(); ++t) {
        const auto& row = vectors[t];
        if (!row.is_array() || static_cast<int>(row.size()) != dim_)
            throw ShapeError("embedding vector " + std::to_string(t) + " has wrong length");
        for (int d = 0; d < dim_; ++d) {
            const double v = row[static_cast<std::size_t>(d)].get<double>();
            if (!std::isfinite(v))
                throw ShapeError("embedding vector " + std::to_string(t) + " has non-finite value");
            out(static_cast<Eigen::Index>(t), d) = v;
        }
        const double norm = out.row(static_cast<Eigen::Index>(t)).norm();
        if (std::abs(norm - 1.0) > 1e-3)
            throw ShapeError("embedding vector " + std::to_string(t) + " is not unit-norm");
    }
    return out;
}

}  // namespace mgtkit
