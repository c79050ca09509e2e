#pragma once

// Test-only helpers: KB generators and a reference loss written against the
// public accessors only, used as the finite-difference oracle.

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ekb/embedding.hpp"
#include "ekb/kb.hpp"
#include "ekb/random.hpp"
#include "ekb/trainer.hpp"

namespace ekb::testing {

inline const char* kFriendKbText =
    "# five people, one relation\n"
    "friend\tJoe\tBob\t+\n"
    "friend\tAlice\tJohn\t+\n"
    "friend\tMary\tJohn\t-\n";

inline KnowledgeBase friend_kb() { return parse_kb(kFriendKbText); }

inline std::string entity_name(int i) { return "e" + std::to_string(i); }
inline std::string relation_name(int i) { return "r" + std::to_string(i); }

/// Random signed KB with up to the given sizes; every entity index below
/// max_entities may appear.
inline KnowledgeBase random_kb(Stream& rng, int max_entities, int max_relations, int max_triples) {
  const int n_ent = 2 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_entities - 1));
  const int n_rel = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_relations));
  const int n_tri = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_triples));
  std::set<Query> used;
  std::vector<SignedTriple> triples;
  for (int k = 0; k < 4 * n_tri && static_cast<int>(triples.size()) < n_tri; ++k) {
    Query q{relation_name(static_cast<int>(rng.next() % static_cast<std::uint64_t>(n_rel))),
            entity_name(static_cast<int>(rng.next() % static_cast<std::uint64_t>(n_ent))),
            entity_name(static_cast<int>(rng.next() % static_cast<std::uint64_t>(n_ent)))};
    if (!used.insert(q).second) {
      continue;
    }
    const Polarity p = rng.uniform() < 0.6 ? Polarity::Positive : Polarity::Negative;
    triples.push_back({q.relation, q.subject, q.object, p});
  }
  return KnowledgeBase(std::move(triples));
}

/// Embedding over kb's vocabulary with coordinates uniform in [-scale, scale].
inline Embedding random_embedding(const KnowledgeBase& kb, int dimension, Stream& rng, double scale = 1.5,
                                  double margin = 1.0) {
  EmbeddingConfig cfg;
  cfg.dimension = dimension;
  cfg.negative_margin = margin;
  Embedding e(kb, cfg, rng.next());
  for (Eigen::Index c = 0; c < e.entity_points().cols(); ++c) {
    for (Eigen::Index r = 0; r < dimension; ++r) {
      e.entity_points()(r, c) = rng.uniform(-scale, scale);
    }
  }
  for (Eigen::Index c = 0; c < e.relation_vectors().cols(); ++c) {
    for (Eigen::Index r = 0; r < dimension; ++r) {
      e.relation_vectors()(r, c) = rng.uniform(-scale, scale);
    }
  }
  return e;
}

/// Cumulative error computed term by term through name lookups.
inline double reference_loss(const Embedding& e, const KnowledgeBase& kb) {
  const double margin = e.config().negative_margin;
  double total = 0.0;
  for (const auto& t : kb.triples()) {
    const Eigen::VectorXd a = e.entity_point(t.subject);
    const Eigen::VectorXd b = e.entity_point(t.object);
    const Eigen::VectorXd r = e.relation_vector(t.relation);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double d = a(i) - b(i) - r(i);
      sq += d * d;
    }
    if (t.polarity == Polarity::Positive) {
      total += sq;
    } else {
      const double gap = margin - std::sqrt(sq);
      total += gap > 0.0 ? gap * gap : 0.0;
    }
  }
  return total;
}

struct FlatGradient {
  Eigen::MatrixXd entities;
  Eigen::MatrixXd relations;
};

/// Central differences of reference_loss with step h.
inline FlatGradient finite_difference_gradient(Embedding e, const KnowledgeBase& kb, double h = 1e-5) {
  FlatGradient g{Eigen::MatrixXd::Zero(e.entity_points().rows(), e.entity_points().cols()),
                 Eigen::MatrixXd::Zero(e.relation_vectors().rows(), e.relation_vectors().cols())};
  const auto sweep = [&](Eigen::MatrixXd& coords, Eigen::MatrixXd& out) {
    for (Eigen::Index c = 0; c < coords.cols(); ++c) {
      for (Eigen::Index r = 0; r < coords.rows(); ++r) {
        const double saved = coords(r, c);
        coords(r, c) = saved + h;
        const double up = reference_loss(e, kb);
        coords(r, c) = saved - h;
        const double down = reference_loss(e, kb);
        coords(r, c) = saved;
        out(r, c) = (up - down) / (2.0 * h);
      }
    }
  };
  sweep(e.entity_points(), g.entities);
  sweep(e.relation_vectors(), g.relations);
  return g;
}

/// Norm of the difference over the sum of norms; absolute below 1e-12.
inline double relative_gap(const Gradient& g, const FlatGradient& fd) {
  const double diff =
      std::sqrt((g.entities - fd.entities).squaredNorm() + (g.relations - fd.relations).squaredNorm());
  const double scale = std::sqrt(g.entities.squaredNorm() + g.relations.squaredNorm()) +
                       std::sqrt(fd.entities.squaredNorm() + fd.relations.squaredNorm());
  return scale < 1e-12 ? diff : diff / scale;
}

/// Smallest distance of any negative triple's residual norm from the hinge
/// kink at the margin or the singularity at zero.
inline double kink_distance(const Embedding& e, const KnowledgeBase& kb) {
  double best = INFINITY;
  for (const auto& t : kb.triples()) {
    if (t.polarity != Polarity::Negative) {
      continue;
    }
    const double n = (e.entity_point(t.subject) - e.entity_point(t.object) - e.relation_vector(t.relation)).norm();
    best = std::min({best, std::abs(n - e.config().negative_margin), n});
  }
  return best;
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(int n, Stream& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// Applies x -> A x + t to entities and r -> A r to relations.
inline Embedding transformed(const Embedding& e, const Eigen::MatrixXd& a, const Eigen::VectorXd& t) {
  Embedding out = e;
  out.entity_points() = (a * e.entity_points()).colwise() + t;
  out.relation_vectors() = a * e.relation_vectors();
  return out;
}

/// KBs whose positive triples force some negative triple's residual to zero.
inline KnowledgeBase unsatisfiable_kb(Stream& rng, int variant) {
  std::vector<SignedTriple> triples;
  if (variant % 2 == 0) {
    // A directed cycle forces r = 0 and collapses every node on it.
    const int len = 2 + static_cast<int>(rng.next() % 3);
    for (int i = 0; i < len; ++i) {
      triples.push_back({"r", "c" + std::to_string(i), "c" + std::to_string((i + 1) % len), Polarity::Positive});
    }
    const int a = static_cast<int>(rng.next() % static_cast<std::uint64_t>(len));
    triples.push_back({"r", "c" + std::to_string(a), "c" + std::to_string(a), Polarity::Negative});
  } else {
    // Two relations on the same pair must be equal, so they cannot differ elsewhere.
    triples.push_back({"p", "a", "b", Polarity::Positive});
    triples.push_back({"q", "a", "b", Polarity::Positive});
    triples.push_back({"p", "c", "d", Polarity::Positive});
    triples.push_back({"q", "c", "d", Polarity::Negative});
  }
  // Unrelated satisfiable noise.
  const int extra = static_cast<int>(rng.next() % 3);
  for (int i = 0; i < extra; ++i) {
    triples.push_back({"s", "x" + std::to_string(i), "y" + std::to_string(i),
                       rng.uniform() < 0.5 ? Polarity::Positive : Polarity::Negative});
  }
  return KnowledgeBase(std::move(triples));
}

}  // namespace ekb::testing
