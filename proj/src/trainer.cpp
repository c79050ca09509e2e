#include "ekb/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ekb/error.hpp"

namespace ekb {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw Error("learning rate must be positive");
  }
  if (max_epochs < 1) {
    throw Error("max_epochs must be >= 1");
  }
  if (!(init_scale > 0.0)) {
    throw Error("init_scale must be positive");
  }
  if (retry_budget < 0) {
    throw Error("retry_budget must be non-negative");
  }
}

Embedding init_embedding(const KnowledgeBase& kb, const EmbeddingConfig& cfg, const TrainConfig& tcfg,
                         std::uint64_t seed) {
  Embedding e(kb, cfg, seed);
  const double s = tcfg.init_scale;
  const auto fill = [&](Eigen::MatrixXd& m, const std::vector<std::string>& names, std::string_view prefix) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      Stream rng(seed, std::string(prefix) + names[j]);
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, static_cast<Eigen::Index>(j)) = rng.uniform(-s, s);
      }
    }
  };
  fill(e.entity_points(), e.entities(), "entity:");
  fill(e.relation_vectors(), e.relations(), "relation:");
  return e;
}

Eigen::VectorXd kink_direction(std::uint64_t seed, const std::string& relation, const std::string& subject,
                               const std::string& object, int dimension) {
  Stream rng(seed, "kink:" + relation + '\t' + subject + '\t' + object);
  Eigen::VectorXd v(dimension);
  // Rejection sampling in the unit ball keeps the draw free of libm calls.
  while (true) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v(i) = rng.uniform(-1.0, 1.0);
    }
    const double n2 = v.squaredNorm();
    if (n2 > 1e-12 && n2 <= 1.0) {
      return v / std::sqrt(n2);
    }
  }
}

Gradient gradients(const Embedding& e, const std::vector<IndexedTriple>& triples,
                   const std::vector<Eigen::VectorXd>& kink_dirs) {
  const auto& pts = e.entity_points();
  const auto& rel = e.relation_vectors();
  const double margin = e.config().negative_margin;
  Gradient g{Eigen::MatrixXd::Zero(pts.rows(), pts.cols()), Eigen::MatrixXd::Zero(rel.rows(), rel.cols())};
  Eigen::VectorXd eps(pts.rows());
  Eigen::VectorXd d(pts.rows());
  for (std::size_t k = 0; k < triples.size(); ++k) {
    const auto& t = triples[k];
    eps = (pts.col(t.subject) - pts.col(t.object)) - rel.col(t.relation);
    if (t.polarity == Polarity::Positive) {
      d = 2.0 * eps;
    } else {
      const double norm = eps.norm();
      if (norm >= margin) {
        continue;
      }
      if (norm > 0.0) {
        d = (-2.0 * (margin - norm) / norm) * eps;
      } else {
        d = (-2.0 * margin) * kink_dirs[k];
      }
    }
    // d is the derivative with respect to the residual.
    g.entities.col(t.subject) += d;
    g.entities.col(t.object) -= d;
    g.relations.col(t.relation) -= d;
  }
  return g;
}

namespace {

std::vector<Eigen::VectorXd> kink_directions(const Embedding& e, const KnowledgeBase& kb) {
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(kb.triples().size());
  for (const auto& t : kb.triples()) {
    if (t.polarity == Polarity::Negative) {
      dirs.push_back(kink_direction(e.seed(), t.relation, t.subject, t.object, e.dimension()));
    } else {
      dirs.emplace_back();
    }
  }
  return dirs;
}

}  // namespace

Gradient gradients(const Embedding& e, const KnowledgeBase& kb) {
  return gradients(e, index_triples(e, kb), kink_directions(e, kb));
}

TrainResult train(const KnowledgeBase& kb, const EmbeddingConfig& cfg, const TrainConfig& tcfg, std::uint64_t seed,
                  bool keep_trace) {
  cfg.validate();
  tcfg.validate();
  TrainResult out{init_embedding(kb, cfg, tcfg, seed), FitReport{}, {}};
  out.report.seed = seed;
  out.report.rng_algorithm = tcfg.rng_algorithm_id;

  Embedding& e = out.embedding;
  const auto triples = index_triples(e, kb);
  const auto kinks = kink_directions(e, kb);

  double err = cumulative_error(e, triples);
  if (keep_trace) {
    out.error_trace.push_back(err);
  }
  double lr = tcfg.learning_rate;
  Embedding candidate = e;
  int epoch = 0;
  while (err > cfg.fit_tolerance && epoch < tcfg.max_epochs) {
    ++epoch;
    const Gradient g = gradients(e, triples, kinks);
    candidate.entity_points() = e.entity_points() - lr * g.entities;
    candidate.relation_vectors() = e.relation_vectors() - lr * g.relations;
    const double next = cumulative_error(candidate, triples);
    if (std::isfinite(next) && next <= err) {
      std::swap(e, candidate);
      err = next;
    } else {
      lr *= 0.5;
      if (lr < std::numeric_limits<double>::min()) {
        break;
      }
    }
    if (keep_trace) {
      out.error_trace.push_back(err);
    }
  }
  out.report.final_error = err;
  out.report.epochs_used = epoch;
  out.report.converged = err <= cfg.fit_tolerance;
  return out;
}

TrainResult train_with_retries(const KnowledgeBase& kb, const EmbeddingConfig& cfg, const TrainConfig& tcfg,
                               std::uint64_t seed) {
  std::optional<TrainResult> best;
  for (int attempt = 0; attempt <= tcfg.retry_budget; ++attempt) {
    TrainResult r = train(kb, cfg, tcfg, seed ^ static_cast<std::uint64_t>(attempt));
    r.report.attempt = attempt;
    if (r.report.converged) {
      return r;
    }
    if (!best || r.report.final_error < best->report.final_error) {
      best = std::move(r);
    }
  }
  return std::move(*best);
}

SatisfiabilityResult satisfiability_oracle(const KnowledgeBase& kb, const EmbeddingConfig& cfg) {
  cfg.validate();
  const auto n_ent = static_cast<Eigen::Index>(kb.entities().size());
  const auto n_rel = static_cast<Eigen::Index>(kb.relations().size());
  const Eigen::Index n_unknowns = n_ent + n_rel;

  // Each coordinate obeys the same scalar system, so the unknowns are one
  // scalar per term: entities first, then relations.
  const auto coefficients = [&](const SignedTriple& t) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n_unknowns);
    row(static_cast<Eigen::Index>(*kb.entity_index(t.subject))) += 1.0;
    row(static_cast<Eigen::Index>(*kb.entity_index(t.object))) -= 1.0;
    row(n_ent + static_cast<Eigen::Index>(*kb.relation_index(t.relation))) -= 1.0;
    return row;
  };

  std::vector<Eigen::VectorXd> positive_rows;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < kb.triples().size(); ++i) {
    const auto& t = kb.triples()[i];
    if (t.polarity == Polarity::Positive) {
      positive_rows.push_back(coefficients(t));
    } else {
      negatives.push_back(i);
    }
  }

  // Null space of the positive system from a full SVD.
  Eigen::MatrixXd basis;
  if (positive_rows.empty()) {
    basis = Eigen::MatrixXd::Identity(n_unknowns, n_unknowns);
  } else {
    Eigen::MatrixXd system(static_cast<Eigen::Index>(positive_rows.size()), n_unknowns);
    for (std::size_t i = 0; i < positive_rows.size(); ++i) {
      system.row(static_cast<Eigen::Index>(i)) = positive_rows[i].transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) {
      ++rank;
    }
    basis = svd.matrixV().rightCols(n_unknowns - rank);
  }

  SatisfiabilityResult result;
  bool borderline = false;
  for (std::size_t i : negatives) {
    const double reach = (basis.transpose() * coefficients(kb.triples()[i])).norm();
    if (reach < 1e-12) {
      result.status = Satisfiability::Unsatisfiable;
      result.blocking_triple = i;
      return result;
    }
    if (reach < 1e-8) {
      borderline = true;
    }
  }
  if (borderline) {
    return result;
  }

  Embedding cert(kb, cfg, 0);
  Stream rng(0, "satisfiability-certificate");
  const Eigen::Index dim = cfg.dimension;
  for (int draw = 0; draw < 16; ++draw) {
    Eigen::MatrixXd weights(basis.cols(), dim);
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < weights.cols(); ++c) {
        weights(r, c) = rng.normal();
      }
    }
    Eigen::MatrixXd coords = basis * weights;  // n_unknowns x dim
    double min_norm = std::numeric_limits<double>::infinity();
    for (std::size_t i : negatives) {
      const Eigen::VectorXd res = coords.transpose() * coefficients(kb.triples()[i]);
      min_norm = std::min(min_norm, res.norm());
    }
    if (!negatives.empty()) {
      if (min_norm < 1e-9) {
        continue;
      }
      coords *= 2.0 * cfg.negative_margin / min_norm;
    }
    cert.entity_points() = coords.topRows(n_ent).transpose();
    cert.relation_vectors() = coords.bottomRows(n_rel).transpose();
    if (cumulative_error(cert, kb) <= 1e-12) {
      result.status = Satisfiability::Satisfiable;
      result.certificate = std::move(cert);
      return result;
    }
  }
  return result;
}

namespace {

DimensionProbe probe(const KnowledgeBase& kb, EmbeddingConfig cfg, const TrainConfig& tcfg, std::uint64_t seed,
                     int dimension, std::optional<TrainResult>& fit) {
  cfg.dimension = dimension;
  TrainResult r = train_with_retries(kb, cfg, tcfg, seed);
  DimensionProbe p{dimension, r.report.converged, r.report.final_error};
  if (r.report.converged) {
    fit = std::move(r);
  }
  return p;
}

}  // namespace

DimensionSearchResult min_dimension_search(const KnowledgeBase& kb, const EmbeddingConfig& cfg,
                                           const TrainConfig& tcfg, std::uint64_t seed, int max_dimension) {
  if (max_dimension <= 0) {
    max_dimension = std::max<int>(1, static_cast<int>(kb.entities().size() + kb.relations().size()));
  }
  DimensionSearchResult out;
  std::optional<TrainResult> best;
  int failed_below = 0;  // largest dimension known to fail
  int succeeded = 0;

  for (int n = 1;; n = std::min(2 * n, max_dimension)) {
    std::optional<TrainResult> fit;
    out.probes.push_back(probe(kb, cfg, tcfg, seed, n, fit));
    if (fit) {
      succeeded = n;
      best = std::move(fit);
      break;
    }
    failed_below = n;
    if (n == max_dimension) {
      throw NoConvergentDimensionError("no dimension up to " + std::to_string(max_dimension) +
                                       " reached the fit tolerance");
    }
  }

  while (succeeded - failed_below > 1) {
    const int mid = failed_below + (succeeded - failed_below) / 2;
    std::optional<TrainResult> fit;
    out.probes.push_back(probe(kb, cfg, tcfg, seed, mid, fit));
    if (fit) {
      succeeded = mid;
      best = std::move(fit);
    } else {
      failed_below = mid;
    }
  }
  out.dimension = succeeded;
  out.fit = std::move(*best);
  return out;
}

}  // namespace ekb
