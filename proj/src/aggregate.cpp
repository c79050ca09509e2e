#include "ekb/aggregate.hpp"

#include <algorithm>
#include <cmath>

#include "ekb/error.hpp"

namespace ekb {

Alignment align(const Embedding& source, const Embedding& reference) {
  if (!source.compatible_with(reference)) {
    throw DimensionMismatchError("cannot align embeddings with different vocabulary or dimension");
  }
  const Eigen::Index n = source.dimension();
  const Eigen::MatrixXd& x = source.entity_points();
  const Eigen::MatrixXd& y = reference.entity_points();
  const Eigen::Index count = x.cols();

  // Rows [x_i^T 1] * [A^T; t^T] = y_i^T, solved for all N^2 + N unknowns.
  Eigen::MatrixXd design(count, n + 1);
  design.leftCols(n) = x.transpose();
  design.col(n).setOnes();
  const Eigen::MatrixXd solution = design.completeOrthogonalDecomposition().solve(y.transpose());

  Alignment a;
  a.linear_map = solution.topRows(n).transpose();
  a.translation = solution.row(n).transpose();

  const Eigen::MatrixXd entity_err = (a.linear_map * x).colwise() + a.translation - y;
  const Eigen::MatrixXd relation_err = a.linear_map * source.relation_vectors() - reference.relation_vectors();
  const auto terms = static_cast<double>(count + relation_err.cols());
  a.residual = terms > 0 ? std::sqrt((entity_err.squaredNorm() + relation_err.squaredNorm()) / terms) : 0.0;
  return a;
}

bool is_affine_duplicate(const Embedding& a, const Embedding& b, double tolerance) {
  return std::min(align(a, b).residual, align(b, a).residual) <= tolerance;
}

void AggregateConfig::validate() const {
  if (!(dedup_tolerance >= 0.0)) {
    throw Error("dedup tolerance must be non-negative");
  }
  if (!(max_cloud_diameter >= 0.0)) {
    throw Error("max cloud diameter must be non-negative");
  }
}

double point_set_diameter(const Eigen::MatrixXd& points) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < points.cols(); ++j) {
      best = std::max(best, (points.col(i) - points.col(j)).norm());
    }
  }
  return best;
}

namespace {

Eigen::MatrixXd append_column(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) {
  Eigen::MatrixXd out(v.size(), m.cols() + 1);
  out.leftCols(m.cols()) = m;
  out.col(m.cols()) = v;
  return out;
}

}  // namespace

AggregateModel build_aggregate(const Ensemble& ens, const AggregateConfig& cfg) {
  cfg.validate();
  if (ens.members.empty()) {
    throw DegenerateAggregateError("ensemble is empty");
  }
  AggregateModel agg;
  agg.config = cfg;
  agg.dimension = ens.members.front().dimension();
  const Embedding& first = ens.members.front();
  for (const auto& name : first.entities()) {
    agg.entity_clouds[name] = Eigen::MatrixXd(agg.dimension, 0);
  }
  for (const auto& name : first.relations()) {
    agg.relation_clouds[name] = Eigen::MatrixXd(agg.dimension, 0);
  }

  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    const Embedding& m = ens.members[i];
    const bool duplicate = std::any_of(agg.members.begin(), agg.members.end(), [&](const Embedding& kept) {
      return is_affine_duplicate(m, kept, cfg.dedup_tolerance);
    });
    if (duplicate) {
      continue;
    }

    Alignment to_ref = agg.members.empty() ? align(m, m) : align(m, agg.members.front());
    if (agg.members.empty()) {
      // The reference frame is the first member itself.
      to_ref.linear_map = Eigen::MatrixXd::Identity(agg.dimension, agg.dimension);
      to_ref.translation = Eigen::VectorXd::Zero(agg.dimension);
      to_ref.residual = 0.0;
    }

    std::map<std::string, Eigen::MatrixXd> entity_clouds = agg.entity_clouds;
    std::map<std::string, Eigen::MatrixXd> relation_clouds = agg.relation_clouds;
    std::map<std::string, double> diameters;
    bool too_wide = false;
    for (std::size_t j = 0; j < m.entities().size(); ++j) {
      const auto& name = m.entities()[j];
      const Eigen::VectorXd p =
          to_ref.linear_map * m.entity_points().col(static_cast<Eigen::Index>(j)) + to_ref.translation;
      auto& cloud = entity_clouds[name];
      cloud = append_column(cloud, p);
      diameters[name] = point_set_diameter(cloud);
      too_wide = too_wide || diameters[name] > cfg.max_cloud_diameter;
    }
    for (std::size_t j = 0; j < m.relations().size(); ++j) {
      const auto& name = m.relations()[j];
      const Eigen::VectorXd v = to_ref.linear_map * m.relation_vectors().col(static_cast<Eigen::Index>(j));
      auto& cloud = relation_clouds[name];
      cloud = append_column(cloud, v);
      diameters[name] = point_set_diameter(cloud);
      too_wide = too_wide || diameters[name] > cfg.max_cloud_diameter;
    }
    if (too_wide) {
      continue;
    }

    agg.member_indices.push_back(i);
    agg.members.push_back(m);
    agg.alignments.push_back(std::move(to_ref));
    agg.entity_clouds = std::move(entity_clouds);
    agg.relation_clouds = std::move(relation_clouds);
    agg.diameters = std::move(diameters);
  }

  if (agg.members.size() < 2) {
    throw DegenerateAggregateError("aggregate retained " + std::to_string(agg.members.size()) +
                                   " member(s); at least 2 non-duplicate members are required");
  }
  return agg;
}

TernaryVerdict aggregate_query(const AggregateModel& agg, const Query& q, const QueryOptions& opts) {
  return verdict_over(agg.members, q, opts);
}

double cloud_diameter(const AggregateModel& agg, std::string_view term) {
  auto it = agg.diameters.find(std::string(term));
  if (it == agg.diameters.end()) {
    throw UnknownTermError(std::string(term));
  }
  return it->second;
}

}  // namespace ekb
