#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ekb/kb.hpp"

namespace ekb {

struct EmbeddingConfig {
  int dimension = 1;
  /// Radius of the satisfaction ball around an exact translation.
  double positive_tolerance = 1e-2;
  /// Hinge margin a negative triple's residual must clear.
  double negative_margin = 1.0;
  /// Cumulative error at or below which a fit counts as converged.
  double fit_tolerance = 1e-4;

  /// Throws Error unless margin > tolerance >= 0 and dimension >= 1.
  void validate() const;

  friend bool operator==(const EmbeddingConfig&, const EmbeddingConfig&) = default;
};

/// One possible denotation: a point per entity and a translation vector per
/// relation. Coordinates are stored column-wise, one column per term, in
/// sorted-name order.
class Embedding {
 public:
  Embedding() = default;
  Embedding(std::vector<std::string> entities, std::vector<std::string> relations, EmbeddingConfig config,
            std::uint64_t seed);
  Embedding(const KnowledgeBase& kb, EmbeddingConfig config, std::uint64_t seed);

  [[nodiscard]] int dimension() const noexcept { return config_.dimension; }
  [[nodiscard]] const EmbeddingConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  [[nodiscard]] const std::vector<std::string>& entities() const noexcept { return entities_; }
  [[nodiscard]] const std::vector<std::string>& relations() const noexcept { return relations_; }

  [[nodiscard]] std::size_t entity_index(std::string_view name) const;
  [[nodiscard]] std::size_t relation_index(std::string_view name) const;

  [[nodiscard]] const Eigen::MatrixXd& entity_points() const noexcept { return entity_points_; }
  [[nodiscard]] const Eigen::MatrixXd& relation_vectors() const noexcept { return relation_vectors_; }
  [[nodiscard]] Eigen::MatrixXd& entity_points() noexcept { return entity_points_; }
  [[nodiscard]] Eigen::MatrixXd& relation_vectors() noexcept { return relation_vectors_; }

  [[nodiscard]] Eigen::VectorXd entity_point(std::string_view name) const {
    return entity_points_.col(static_cast<Eigen::Index>(entity_index(name)));
  }
  [[nodiscard]] Eigen::VectorXd relation_vector(std::string_view name) const {
    return relation_vectors_.col(static_cast<Eigen::Index>(relation_index(name)));
  }

  void set_entity_point(std::string_view name, const Eigen::VectorXd& p);
  void set_relation_vector(std::string_view name, const Eigen::VectorXd& v);

  /// Same vocabulary and dimension.
  [[nodiscard]] bool compatible_with(const Embedding& other) const;

  /// All coordinates finite.
  [[nodiscard]] bool finite() const;

  friend bool operator==(const Embedding& a, const Embedding& b);

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  Eigen::MatrixXd entity_points_;
  Eigen::MatrixXd relation_vectors_;
  EmbeddingConfig config_;
  std::uint64_t seed_ = 0;
};

/// A triple resolved to column indices of a particular embedding.
struct IndexedTriple {
  Eigen::Index relation;
  Eigen::Index subject;
  Eigen::Index object;
  Polarity polarity;
};

[[nodiscard]] std::vector<IndexedTriple> index_triples(const Embedding& e, const KnowledgeBase& kb);

/// (subject - object) - relation.
[[nodiscard]] Eigen::VectorXd residual(const Embedding& e, const Query& q);
[[nodiscard]] Eigen::VectorXd residual(const Embedding& e, const SignedTriple& t);

/// Positive: |eps|^2. Negative: max(0, margin - |eps|)^2.
[[nodiscard]] double triple_error(const Embedding& e, const SignedTriple& t);

[[nodiscard]] double triple_error(Polarity polarity, double residual_norm, double margin) noexcept;

[[nodiscard]] double cumulative_error(const Embedding& e, const KnowledgeBase& kb);
[[nodiscard]] double cumulative_error(const Embedding& e, const std::vector<IndexedTriple>& triples);

/// True iff |residual| <= positive_tolerance.
[[nodiscard]] bool satisfies(const Embedding& e, const Query& q);

/// Same test against an explicit tolerance.
[[nodiscard]] bool satisfies(const Embedding& e, const Query& q, double tolerance);

}  // namespace ekb
