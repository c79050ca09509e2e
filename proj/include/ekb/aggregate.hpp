#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ekb/embedding.hpp"
#include "ekb/ensemble.hpp"

namespace ekb {

/// Affine map x -> A x + t taking one embedding's frame onto another's.
struct Alignment {
  Eigen::MatrixXd linear_map;
  Eigen::VectorXd translation;
  /// RMS mismatch over every term after mapping: entity points through
  /// (A, t), relation vectors through A alone.
  double residual = 0.0;
};

/// Least-squares affine map from source entity points onto reference
/// entity points (minimum-norm when the points do not span the space).
[[nodiscard]] Alignment align(const Embedding& source, const Embedding& reference);

/// True iff either direction aligns within tolerance.
[[nodiscard]] bool is_affine_duplicate(const Embedding& a, const Embedding& b, double tolerance);

struct AggregateConfig {
  double dedup_tolerance = 1e-6;
  /// No cutoff by default.
  double max_cloud_diameter = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// Per-term point clouds over ensemble members that are pairwise not
/// affine transforms of each other. Clouds live in the reference member's
/// frame; verdicts use each member's own coordinates.
struct AggregateModel {
  AggregateConfig config;
  int dimension = 0;
  /// Positions in the source ensemble; the first is the reference frame.
  std::vector<std::size_t> member_indices;
  /// Retained members in their native frames.
  std::vector<Embedding> members;
  /// Map of each retained member onto the reference.
  std::vector<Alignment> alignments;
  /// One column per retained member.
  std::map<std::string, Eigen::MatrixXd> entity_clouds;
  std::map<std::string, Eigen::MatrixXd> relation_clouds;
  std::map<std::string, double> diameters;

  [[nodiscard]] std::size_t reference_index() const { return member_indices.front(); }
};

/// Greedy scan in member order. Throws DegenerateAggregateError when fewer
/// than two members survive deduplication and the diameter cap.
[[nodiscard]] AggregateModel build_aggregate(const Ensemble& ens, const AggregateConfig& cfg = {});

[[nodiscard]] TernaryVerdict aggregate_query(const AggregateModel& agg, const Query& q,
                                             const QueryOptions& opts = {});

/// Largest pairwise distance inside a term's cloud.
[[nodiscard]] double cloud_diameter(const AggregateModel& agg, std::string_view term);

/// Largest pairwise column distance.
[[nodiscard]] double point_set_diameter(const Eigen::MatrixXd& points);

}  // namespace ekb
