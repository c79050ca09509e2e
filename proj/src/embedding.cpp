#include "ekb/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "ekb/error.hpp"

namespace ekb {

void EmbeddingConfig::validate() const {
  if (dimension < 1) {
    throw Error("dimension must be >= 1");
  }
  if (!(positive_tolerance >= 0.0)) {
    throw Error("positive tolerance must be non-negative");
  }
  if (!(negative_margin > positive_tolerance)) {
    throw Error("negative margin must exceed the positive tolerance");
  }
  if (!(fit_tolerance >= 0.0)) {
    throw Error("fit tolerance must be non-negative");
  }
}

Embedding::Embedding(std::vector<std::string> entities, std::vector<std::string> relations,
                     EmbeddingConfig config, std::uint64_t seed)
    : entities_(std::move(entities)), relations_(std::move(relations)), config_(config), seed_(seed) {
  config_.validate();
  if (!std::is_sorted(entities_.begin(), entities_.end()) ||
      !std::is_sorted(relations_.begin(), relations_.end())) {
    throw Error("embedding vocabulary must be sorted");
  }
  entity_points_ = Eigen::MatrixXd::Zero(config_.dimension, static_cast<Eigen::Index>(entities_.size()));
  relation_vectors_ = Eigen::MatrixXd::Zero(config_.dimension, static_cast<Eigen::Index>(relations_.size()));
}

Embedding::Embedding(const KnowledgeBase& kb, EmbeddingConfig config, std::uint64_t seed)
    : Embedding(kb.entities(), kb.relations(), config, seed) {}

namespace {

std::size_t find_name(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::lower_bound(names.begin(), names.end(), name);
  if (it == names.end() || *it != name) {
    throw UnknownTermError(std::string(name));
  }
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

std::size_t Embedding::entity_index(std::string_view name) const { return find_name(entities_, name); }

std::size_t Embedding::relation_index(std::string_view name) const { return find_name(relations_, name); }

void Embedding::set_entity_point(std::string_view name, const Eigen::VectorXd& p) {
  if (p.size() != config_.dimension) {
    throw DimensionMismatchError("entity point has wrong dimension");
  }
  entity_points_.col(static_cast<Eigen::Index>(entity_index(name))) = p;
}

void Embedding::set_relation_vector(std::string_view name, const Eigen::VectorXd& v) {
  if (v.size() != config_.dimension) {
    throw DimensionMismatchError("relation vector has wrong dimension");
  }
  relation_vectors_.col(static_cast<Eigen::Index>(relation_index(name))) = v;
}

bool Embedding::compatible_with(const Embedding& other) const {
  return dimension() == other.dimension() && entities_ == other.entities_ && relations_ == other.relations_;
}

bool Embedding::finite() const { return entity_points_.allFinite() && relation_vectors_.allFinite(); }

bool operator==(const Embedding& a, const Embedding& b) {
  return a.seed_ == b.seed_ && a.config_ == b.config_ && a.compatible_with(b) &&
         a.entity_points_ == b.entity_points_ && a.relation_vectors_ == b.relation_vectors_;
}

std::vector<IndexedTriple> index_triples(const Embedding& e, const KnowledgeBase& kb) {
  std::vector<IndexedTriple> out;
  out.reserve(kb.triples().size());
  for (const auto& t : kb.triples()) {
    out.push_back({static_cast<Eigen::Index>(e.relation_index(t.relation)),
                   static_cast<Eigen::Index>(e.entity_index(t.subject)),
                   static_cast<Eigen::Index>(e.entity_index(t.object)), t.polarity});
  }
  return out;
}

Eigen::VectorXd residual(const Embedding& e, const Query& q) {
  const auto r = static_cast<Eigen::Index>(e.relation_index(q.relation));
  const auto s = static_cast<Eigen::Index>(e.entity_index(q.subject));
  const auto o = static_cast<Eigen::Index>(e.entity_index(q.object));
  return (e.entity_points().col(s) - e.entity_points().col(o)) - e.relation_vectors().col(r);
}

Eigen::VectorXd residual(const Embedding& e, const SignedTriple& t) { return residual(e, t.query()); }

double triple_error(Polarity polarity, double residual_norm, double margin) noexcept {
  if (polarity == Polarity::Positive) {
    return residual_norm * residual_norm;
  }
  const double gap = std::max(0.0, margin - residual_norm);
  return gap * gap;
}

double triple_error(const Embedding& e, const SignedTriple& t) {
  return triple_error(t.polarity, residual(e, t).norm(), e.config().negative_margin);
}

double cumulative_error(const Embedding& e, const std::vector<IndexedTriple>& triples) {
  const auto& pts = e.entity_points();
  const auto& rel = e.relation_vectors();
  const double margin = e.config().negative_margin;
  double total = 0.0;
  for (const auto& t : triples) {
    const double norm = ((pts.col(t.subject) - pts.col(t.object)) - rel.col(t.relation)).norm();
    total += triple_error(t.polarity, norm, margin);
  }
  return total;
}

double cumulative_error(const Embedding& e, const KnowledgeBase& kb) {
  return cumulative_error(e, index_triples(e, kb));
}

bool satisfies(const Embedding& e, const Query& q, double tolerance) { return residual(e, q).norm() <= tolerance; }

bool satisfies(const Embedding& e, const Query& q) { return satisfies(e, q, e.config().positive_tolerance); }

}  // namespace ekb
