#pragma once

#include <string>

#include "mgtkit/refmetrics.hpp"

namespace mgtkit {

/// Deterministic pseudo-random unit vectors seeded from the token bytes.
/// Needs no network; distinct tokens get near-orthogonal directions.
class HashProjectionEmbedder : public EmbeddingProvider {
  public:
    explicit HashProjectionEmbedder(int dimension = 64, std::uint64_t seed = 0);
    int dimension() const override { return dim_; }
    Eigen::MatrixXd embed(const Tokens& tokens) const override;

  private:
    int dim_;
    std::uint64_t seed_;
};

/// One basis vector per token (index = token hash); identical tokens match
/// with cosine 1, distinct tokens are orthogonal up to hash collisions.
class OneHotEmbedder : public EmbeddingProvider {
  public:
    explicit OneHotEmbedder(int dimension = 4096);
    int dimension() const override { return dim_; }
    Eigen::MatrixXd embed(const Tokens& tokens) const override;
    int index_of(const std::string& token) const;

  private:
    int dim_;
};

struct EmbedderConfig {
    std::string endpoint;  // e.g. "http://localhost:8090"
    std::string path = "/embed";
    int timeout_ms = 10000;
};

/// Remote embedding provider. Request: {"tokens": [...]}; response:
/// {"dim": d, "vectors": [[...], ...]} with one unit-norm row per token.
class HttpEmbedder : public EmbeddingProvider {
  public:
    explicit HttpEmbedder(EmbedderConfig config, int expected_dimension);
    int dimension() const override { return dim_; }
    Eigen::MatrixXd embed(const Tokens& tokens) const override;

  private:
    EmbedderConfig config_;
    int dim_;
};

}  // namespace mgtkit
