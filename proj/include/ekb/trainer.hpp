#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ekb/embedding.hpp"
#include "ekb/kb.hpp"
#include "ekb/random.hpp"

namespace ekb {

struct TrainConfig {
  double learning_rate = 0.05;
  int max_epochs = 20000;
  /// Half-width of the uniform initialization box.
  double init_scale = 5.0;
  /// Extra reseeded attempts after the first one fails.
  int retry_budget = 3;
  std::string rng_algorithm_id{kRngAlgorithm};

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct FitReport {
  double final_error = 0.0;
  int epochs_used = 0;
  bool converged = false;
  /// Seed the returned embedding was initialized from.
  std::uint64_t seed = 0;
  /// Zero-based attempt index within the retry budget.
  int attempt = 0;
  std::string rng_algorithm{kRngAlgorithm};

  friend bool operator==(const FitReport&, const FitReport&) = default;
};

/// Gradient of the cumulative error, laid out like the embedding's columns.
struct Gradient {
  Eigen::MatrixXd entities;
  Eigen::MatrixXd relations;
};

/// Every coordinate uniform on [-init_scale, init_scale], drawn from a
/// stream keyed by (seed, term name).
[[nodiscard]] Embedding init_embedding(const KnowledgeBase& kb, const EmbeddingConfig& cfg, const TrainConfig& tcfg,
                                       std::uint64_t seed);

/// Deterministic unit vector used as the hinge subgradient direction when a
/// negative triple's residual is exactly zero.
[[nodiscard]] Eigen::VectorXd kink_direction(std::uint64_t seed, const std::string& relation,
                                             const std::string& subject, const std::string& object, int dimension);

[[nodiscard]] Gradient gradients(const Embedding& e, const KnowledgeBase& kb);
[[nodiscard]] Gradient gradients(const Embedding& e, const std::vector<IndexedTriple>& triples,
                                 const std::vector<Eigen::VectorXd>& kink_dirs);

struct TrainResult {
  Embedding embedding;
  FitReport report;
  /// Cumulative error after every epoch (index 0 is the initial error).
  std::vector<double> error_trace;
};

/// Full-batch gradient descent from one seeded initialization. A step that
/// would increase the error is rejected and the learning rate halved.
[[nodiscard]] TrainResult train(const KnowledgeBase& kb, const EmbeddingConfig& cfg, const TrainConfig& tcfg,
                                std::uint64_t seed, bool keep_trace = false);

/// train() with up to retry_budget reseeded attempts (seed ^ attempt).
/// Returns the first converged attempt, otherwise the lowest-error one.
[[nodiscard]] TrainResult train_with_retries(const KnowledgeBase& kb, const EmbeddingConfig& cfg,
                                             const TrainConfig& tcfg, std::uint64_t seed);

enum class Satisfiability { Satisfiable, Unsatisfiable, Inconclusive };

struct SatisfiabilityResult {
  Satisfiability status = Satisfiability::Inconclusive;
  /// Zero-error embedding when status is Satisfiable.
  std::optional<Embedding> certificate;
  /// Index into kb.triples() of a negative triple whose residual vanishes on
  /// every exact solution of the positive triples.
  std::optional<std::size_t> blocking_triple;
};

/// Exact check of whether a zero-error embedding exists at cfg.dimension.
/// Positive triples are a homogeneous linear system; a negative triple can
/// be satisfied iff its residual is not identically zero on that system's
/// solution space, and scaling a generic solution clears every margin.
[[nodiscard]] SatisfiabilityResult satisfiability_oracle(const KnowledgeBase& kb, const EmbeddingConfig& cfg);

struct DimensionProbe {
  int dimension;
  bool converged;
  double best_error;
};

struct DimensionSearchResult {
  int dimension = 0;
  TrainResult fit;
  std::vector<DimensionProbe> probes;
};

/// Least dimension in [1, max_dimension] at which train_with_retries
/// converges: doubling until success, then bisection below it. A
/// max_dimension of 0 means |entities| + |relations|.
[[nodiscard]] DimensionSearchResult min_dimension_search(const KnowledgeBase& kb, const EmbeddingConfig& cfg,
                                                         const TrainConfig& tcfg, std::uint64_t seed,
                                                         int max_dimension = 0);

}  // namespace ekb
