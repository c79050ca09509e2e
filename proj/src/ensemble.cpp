#include "ekb/ensemble.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <thread>

#include "ekb/error.hpp"
#include "ekb/random.hpp"

namespace ekb {

void EnsembleOptions::validate() const {
  if (members < 1) {
    throw Error("ensemble needs at least one member");
  }
  if (!(completion_rate >= 0.0 && completion_rate <= 1.0)) {
    throw Error("completion rate must lie in [0, 1]");
  }
  if (jobs < 1) {
    throw Error("jobs must be >= 1");
  }
}

void Ensemble::check_kb(const KnowledgeBase& kb) const {
  const std::string d = kb.digest();
  if (d != kb_digest) {
    throw DigestMismatchError("KB digest " + d + " does not match ensemble digest " + kb_digest);
  }
}

std::vector<SignedTriple> sample_completion(const KnowledgeBase& kb, const EmbeddingConfig& cfg, std::uint64_t seed,
                                     double rate) {
  if (rate <= 0.0) {
    return {};
  }
  struct Proposal {
    double key;
    SignedTriple triple;
  };
  std::vector<Proposal> proposals;
  for (auto& q : unstated_queries(kb)) {
    Stream rng(seed, "completion:" + q.relation + '\t' + q.subject + '\t' + q.object);
    const double draw = rng.uniform();
    const double key = rng.uniform();
    const bool positive = rng.uniform() < 0.5;
    if (draw < rate) {
      proposals.push_back({key, {q.relation, q.subject, q.object, positive ? Polarity::Positive : Polarity::Negative}});
    }
  }
  std::sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    return a.key != b.key ? a.key < b.key : a.triple < b.triple;
  });

  std::vector<SignedTriple> triples = kb.triples();
  std::vector<SignedTriple> kept;
  for (const auto& p : proposals) {
    triples.push_back(p.triple);
    if (satisfiability_oracle(KnowledgeBase(triples), cfg).status == Satisfiability::Satisfiable) {
      kept.push_back(p.triple);
    } else {
      triples.pop_back();
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

namespace {

struct Candidate {
  std::vector<SignedTriple> completions;
  TrainResult fit;
  double source_error = 0.0;
};

Candidate fit_candidate(const KnowledgeBase& kb, const EmbeddingConfig& cfg, const TrainConfig& tcfg,
                        std::uint64_t seed, double rate) {
  Candidate c;
  c.completions = sample_completion(kb, cfg, seed, rate);
  if (c.completions.empty()) {
    c.fit = train_with_retries(kb, cfg, tcfg, seed);
  } else {
    std::vector<SignedTriple> triples = kb.triples();
    triples.insert(triples.end(), c.completions.begin(), c.completions.end());
    c.fit = train_with_retries(KnowledgeBase(std::move(triples)), cfg, tcfg, seed);
  }
  c.source_error = cumulative_error(c.fit.embedding, kb);
  return c;
}

}  // namespace

Ensemble fit_ensemble(const KnowledgeBase& kb, const EmbeddingConfig& cfg, const TrainConfig& tcfg,
                      const EnsembleOptions& opts) {
  cfg.validate();
  tcfg.validate();
  opts.validate();

  Ensemble ens;
  ens.kb_digest = kb.digest();
  ens.config = cfg;
  ens.train_config = tcfg;
  ens.base_seed = opts.base_seed;
  ens.completion_rate = opts.completion_rate;

  const std::size_t wanted = static_cast<std::size_t>(opts.members);
  const std::size_t cap = 4 * wanted;
  const std::size_t window = static_cast<std::size_t>(opts.jobs);
  std::set<std::uint64_t> used_seeds;

  for (std::size_t start = 0; start < cap && ens.size() < wanted; start += window) {
    const std::size_t end = std::min(cap, start + window);
    std::vector<Candidate> batch(end - start);
    const auto work = [&](std::size_t k) {
      batch[k] = fit_candidate(kb, cfg, tcfg, opts.base_seed + start + k, opts.completion_rate);
    };
    if (batch.size() == 1) {
      work(0);
    } else {
      std::vector<std::jthread> threads;
      threads.reserve(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k) {
        threads.emplace_back(work, k);
      }
    }
    // Accept in seed order so the outcome is independent of the window size.
    for (auto& c : batch) {
      if (ens.size() == wanted) {
        break;
      }
      if (!c.fit.report.converged || c.source_error > cfg.fit_tolerance) {
        continue;
      }
      // A retry seed (seed ^ attempt) may coincide with a later base seed.
      if (!used_seeds.insert(c.fit.report.seed).second) {
        continue;
      }
      ens.members.push_back(std::move(c.fit.embedding));
      ens.reports.push_back(c.fit.report);
      ens.completions.push_back(std::move(c.completions));
    }
  }
  if (ens.size() < wanted) {
    throw EnsembleFitError("only " + std::to_string(ens.size()) + " of " + std::to_string(wanted) +
                           " members converged within " + std::to_string(cap) + " seeds");
  }
  return ens;
}

TernaryVerdict verdict_from_count(int satisfied, int total, double delta) {
  TernaryVerdict v;
  v.member_count = total;
  v.satisfied_fraction = total > 0 ? static_cast<double>(satisfied) / total : 0.0;
  if (total == 0) {
    v.value = Truth::Unknown;
  } else if (delta == 0.0) {
    v.value = satisfied == total ? Truth::True : (satisfied == 0 ? Truth::False : Truth::Unknown);
  } else if (v.satisfied_fraction >= 1.0 - delta) {
    v.value = Truth::True;
  } else if (v.satisfied_fraction <= delta) {
    v.value = Truth::False;
  } else {
    v.value = Truth::Unknown;
  }
  return v;
}

TernaryVerdict verdict_over(std::span<const Embedding> members, const Query& q, const QueryOptions& opts) {
  int satisfied = 0;
  for (const auto& m : members) {
    const bool holds = opts.tolerance ? satisfies(m, q, *opts.tolerance) : satisfies(m, q);
    satisfied += holds ? 1 : 0;
  }
  return verdict_from_count(satisfied, static_cast<int>(members.size()), opts.delta);
}

TernaryVerdict query_truth(const Ensemble& ens, const Query& q, const QueryOptions& opts) {
  return verdict_over(ens.members, q, opts);
}

bool KnowledgeReport::all_consistent() const {
  return std::all_of(asserted.begin(), asserted.end(), [](const AssertedRow& r) { return r.consistent; });
}

KnowledgeReport knowledge_report(const Ensemble& ens, const KnowledgeBase& kb, const ReportOptions& opts) {
  ens.check_kb(kb);
  KnowledgeReport report;
  report.member_count = static_cast<int>(ens.size());
  const QueryOptions qopts{opts.delta, std::nullopt};
  for (const auto& t : kb.triples()) {
    AssertedRow row{t, query_truth(ens, t.query(), qopts), false};
    row.consistent = row.verdict.value == assertion_oracle(kb, t.query());
    report.asserted.push_back(std::move(row));
  }
  for (auto& q : unstated_queries(kb, {opts.include_self_pairs})) {
    UnstatedRow row{std::move(q), {}};
    row.verdict = query_truth(ens, row.query, qopts);
    switch (row.verdict.value) {
      case Truth::True:
        ++report.true_count;
        break;
      case Truth::False:
        ++report.false_count;
        break;
      case Truth::Unknown:
        ++report.unknown_count;
        break;
    }
    report.unstated.push_back(std::move(row));
  }
  return report;
}

std::string format_verdict(const TernaryVerdict& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s\t%.6f", std::string(to_string(v.value)).c_str(), v.satisfied_fraction);
  return buf;
}

std::string format_report(const KnowledgeReport& report) {
  const auto consistent = std::count_if(report.asserted.begin(), report.asserted.end(),
                                        [](const AssertedRow& r) { return r.consistent; });
  std::string out = "# members=" + std::to_string(report.member_count) +
                    " asserted=" + std::to_string(report.asserted.size()) +
                    " consistent=" + std::to_string(consistent) +
                    " unstated=" + std::to_string(report.unstated.size()) +
                    " true=" + std::to_string(report.true_count) + " false=" + std::to_string(report.false_count) +
                    " unknown=" + std::to_string(report.unknown_count) + "\n";
  out += "# relation\tsubject\tobject\tverdict\tfraction\n";
  const auto row = [&](const Query& q, const TernaryVerdict& v) {
    out += q.relation + '\t' + q.subject + '\t' + q.object + '\t' + format_verdict(v) + '\n';
  };
  for (const auto& r : report.asserted) {
    row(r.triple.query(), r.verdict);
  }
  for (const auto& r : report.unstated) {
    row(r.query, r.verdict);
  }
  return out;
}

}  // namespace ekb
