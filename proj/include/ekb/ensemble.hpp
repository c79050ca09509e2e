#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ekb/embedding.hpp"
#include "ekb/kb.hpp"
#include "ekb/trainer.hpp"

namespace ekb {

struct EnsembleOptions {
  std::uint64_t base_seed = 0;
  int members = 32;
  /// Probability that a member decides each unstated fact, asserting or
  /// denying it with equal odds. Decisions are kept only while the KB plus
  /// the kept decisions stays exactly satisfiable, so every member is fitted
  /// to a randomly sampled consistent completion of the KB. Zero leaves the
  /// random initialization as the only source of diversity.
  double completion_rate = 1.0;
  /// Worker threads for member fitting; results do not depend on it.
  int jobs = 1;

  void validate() const;
};

/// A set of converged embeddings from distinct seeds, bound to the KB they
/// were fitted on by its digest.
struct Ensemble {
  std::string kb_digest;
  EmbeddingConfig config;
  TrainConfig train_config;
  std::uint64_t base_seed = 0;
  double completion_rate = 0.0;
  std::vector<Embedding> members;
  std::vector<FitReport> reports;
  /// Sampled decisions on unstated facts each member was also fitted to.
  std::vector<std::vector<SignedTriple>> completions;

  [[nodiscard]] std::size_t size() const noexcept { return members.size(); }

  /// Throws DigestMismatchError if kb is not the KB this ensemble was fitted on.
  void check_kb(const KnowledgeBase& kb) const;

  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// Completion decisions for one member seed, sorted. Deterministic in
/// (kb, seed, rate).
[[nodiscard]] std::vector<SignedTriple> sample_completion(const KnowledgeBase& kb, const EmbeddingConfig& cfg,
                                                   std::uint64_t seed, double rate);

/// Fits members from seeds base_seed, base_seed + 1, ... skipping seeds
/// that fail to converge, until `members` have converged. Throws
/// EnsembleFitError if 4 * members seeds are not enough.
[[nodiscard]] Ensemble fit_ensemble(const KnowledgeBase& kb, const EmbeddingConfig& cfg, const TrainConfig& tcfg,
                                    const EnsembleOptions& opts);

struct TernaryVerdict {
  Truth value = Truth::Unknown;
  double satisfied_fraction = 0.0;
  int member_count = 0;

  friend bool operator==(const TernaryVerdict&, const TernaryVerdict&) = default;
};

struct QueryOptions {
  /// Quorum slack: TRUE when f >= 1 - delta, FALSE when f <= delta.
  double delta = 0.0;
  /// Overrides each member's own satisfaction radius.
  std::optional<double> tolerance;
};

/// Verdict from a satisfied count. With delta = 0 this is strict unanimity.
[[nodiscard]] TernaryVerdict verdict_from_count(int satisfied, int total, double delta = 0.0);

/// Unanimity verdict over an arbitrary set of members.
[[nodiscard]] TernaryVerdict verdict_over(std::span<const Embedding> members, const Query& q,
                                          const QueryOptions& opts = {});

[[nodiscard]] TernaryVerdict query_truth(const Ensemble& ens, const Query& q, const QueryOptions& opts = {});

struct AssertedRow {
  SignedTriple triple;
  TernaryVerdict verdict;
  bool consistent = false;
};

struct UnstatedRow {
  Query query;
  TernaryVerdict verdict;
};

struct KnowledgeReport {
  int member_count = 0;
  std::vector<AssertedRow> asserted;
  std::vector<UnstatedRow> unstated;
  int true_count = 0;
  int false_count = 0;
  int unknown_count = 0;

  [[nodiscard]] bool all_consistent() const;
};

struct ReportOptions {
  bool include_self_pairs = false;
  double delta = 0.0;
};

/// Verdicts for every asserted triple (checked against assertion_oracle)
/// and every unstated query. Summary counts cover the unstated rows.
[[nodiscard]] KnowledgeReport knowledge_report(const Ensemble& ens, const KnowledgeBase& kb,
                                               const ReportOptions& opts = {});

/// `#` summary header followed by `relation subject object verdict fraction` rows.
[[nodiscard]] std::string format_report(const KnowledgeReport& report);

/// `VERDICT<TAB>fraction` with six decimals.
[[nodiscard]] std::string format_verdict(const TernaryVerdict& v);

}  // namespace ekb
