#include <algorithm>
#include <set>

#include "doctest.h"
#include "ekb/ensemble.hpp"
#include "ekb/error.hpp"
#include "support.hpp"

using namespace ekb;

namespace {

Ensemble friend_ensemble(int members, std::uint64_t seed = 7, double completion_rate = 1.0, int jobs = 1) {
  EmbeddingConfig cfg;
  EnsembleOptions opts;
  opts.base_seed = seed;
  opts.members = members;
  opts.completion_rate = completion_rate;
  opts.jobs = jobs;
  return fit_ensemble(testing::friend_kb(), cfg, TrainConfig{}, opts);
}

}  // namespace

TEST_CASE("verdict from count") {
  CHECK(verdict_from_count(4, 4).value == Truth::True);
  CHECK(verdict_from_count(0, 4).value == Truth::False);
  CHECK(verdict_from_count(1, 4).value == Truth::Unknown);
  CHECK(verdict_from_count(3, 4).satisfied_fraction == 0.75);
  CHECK(verdict_from_count(31, 32, 0.05).value == Truth::True);
  CHECK(verdict_from_count(1, 32, 0.05).value == Truth::False);
  CHECK(verdict_from_count(8, 32, 0.05).value == Truth::Unknown);
}

TEST_CASE("fit the friend KB ensemble") {
  const Ensemble ens = friend_ensemble(32);
  const KnowledgeBase kb = testing::friend_kb();
  REQUIRE(ens.size() == 32);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    CHECK(ens.reports[i].converged);
    CHECK(cumulative_error(ens.members[i], kb) <= ens.config.fit_tolerance);
    CHECK(ens.members[i].compatible_with(ens.members[0]));
    CHECK(ens.members[i].config() == ens.config);
    seeds.insert(ens.members[i].seed());
    CHECK(ens.members[i].seed() == ens.reports[i].seed);
  }
  CHECK(seeds.size() == 32);
  CHECK(ens.kb_digest == kb.digest());

  CHECK(query_truth(ens, {"friend", "Joe", "Bob"}) == TernaryVerdict{Truth::True, 1.0, 32});
  CHECK(query_truth(ens, {"friend", "Alice", "John"}).value == Truth::True);
  CHECK(query_truth(ens, {"friend", "Mary", "John"}) == TernaryVerdict{Truth::False, 0.0, 32});
  const auto open = query_truth(ens, {"friend", "Mary", "Alice"});
  CHECK(open.value == Truth::Unknown);
  CHECK(open.satisfied_fraction > 0.0);
  CHECK(open.satisfied_fraction < 1.0);
  CHECK_THROWS_AS((void)query_truth(ens, {"friend", "Mary", "Zed"}), UnknownTermError);
}

TEST_CASE("initialization alone does not make unstated facts unknown") {
  // Contrast: without sampled completions every member lands on a
  // measure-zero miss for an unconstrained query.
  const Ensemble ens = friend_ensemble(16, 7, 0.0);
  for (const auto& c : ens.completions) {
    CHECK(c.empty());
  }
  CHECK(query_truth(ens, {"friend", "Mary", "Alice"}).value == Truth::False);
  CHECK(query_truth(ens, {"friend", "Joe", "Bob"}).value == Truth::True);
}

TEST_CASE("sampled completions are consistent and leave asserted facts alone") {
  const KnowledgeBase kb = testing::friend_kb();
  EmbeddingConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto decided = sample_completion(kb, cfg, seed, 1.0);
    CHECK(decided == sample_completion(kb, cfg, seed, 1.0));
    std::vector<SignedTriple> all = kb.triples();
    for (const auto& t : decided) {
      CHECK_FALSE(kb.lookup(t.query()).has_value());
      all.push_back(t);
    }
    CHECK(satisfiability_oracle(KnowledgeBase(all), cfg).status == Satisfiability::Satisfiable);
  }
  CHECK(sample_completion(kb, cfg, 3, 0.0).empty());
}

TEST_CASE("singleton and empty ensembles") {
  SUBCASE("M = 1 never answers UNKNOWN") {
    const Ensemble ens = friend_ensemble(1);
    const KnowledgeReport rep = knowledge_report(ens, testing::friend_kb());
    CHECK(rep.unknown_count == 0);
    for (const auto& q : unstated_queries(testing::friend_kb())) {
      CHECK(query_truth(ens, q).value != Truth::Unknown);
    }
  }
  SUBCASE("empty KB") {
    EnsembleOptions opts;
    opts.members = 4;
    const Ensemble ens = fit_ensemble(KnowledgeBase{}, EmbeddingConfig{}, TrainConfig{}, opts);
    CHECK(ens.size() == 4);
    for (const auto& r : ens.reports) {
      CHECK(r.final_error == 0.0);
    }
    const KnowledgeReport rep = knowledge_report(ens, KnowledgeBase{});
    CHECK(rep.asserted.empty());
    CHECK(rep.unstated.empty());
  }
}

TEST_CASE("fit failure") {
  const KnowledgeBase kb = parse_kb("r\ta\tb\t+\nr\tb\ta\t+\nr\tc\tc\t-\n");
  TrainConfig tcfg;
  tcfg.max_epochs = 200;
  tcfg.retry_budget = 0;
  EnsembleOptions opts;
  opts.members = 2;
  CHECK_THROWS_AS((void)fit_ensemble(kb, EmbeddingConfig{}, tcfg, opts), EnsembleFitError);
  opts.members = 0;
  CHECK_THROWS_AS((void)fit_ensemble(kb, EmbeddingConfig{}, tcfg, opts), Error);
}

TEST_CASE("results do not depend on the number of jobs") {
  CHECK(friend_ensemble(6, 3, 1.0, 1) == friend_ensemble(6, 3, 1.0, 4));
  CHECK(friend_ensemble(6, 3, 1.0, 1) == friend_ensemble(6, 3, 1.0, 1));
}

TEST_CASE("knowledge report") {
  const Ensemble ens = friend_ensemble(32);
  const KnowledgeBase kb = testing::friend_kb();
  const KnowledgeReport rep = knowledge_report(ens, kb);
  CHECK(rep.asserted.size() == 3);
  CHECK(rep.all_consistent());
  CHECK(rep.unstated.size() == 17);
  CHECK(rep.true_count + rep.false_count + rep.unknown_count == 17);
  CHECK(knowledge_report(ens, kb, {true, 0.0}).unstated.size() == 22);

  const std::string text = format_report(rep);
  CHECK(text.rfind("# members=32 asserted=3 consistent=3 unstated=17", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2 + 3 + 17);
  CHECK(text.find("friend\tJoe\tBob\tTRUE\t1.000000\n") != std::string::npos);
  CHECK(text.find("friend\tMary\tJohn\tFALSE\t0.000000\n") != std::string::npos);

  CHECK_THROWS_AS((void)knowledge_report(ens, parse_kb("friend\tJoe\tBob\t+\n")), DigestMismatchError);
  CHECK(format_report(knowledge_report(friend_ensemble(2), kb)) != text);
}

TEST_CASE("satisfied fraction is monotone in the tolerance") {
  const Ensemble ens = friend_ensemble(12, 21);
  Stream rng(9, "tau");
  const auto queries = unstated_queries(testing::friend_kb());
  for (int i = 0; i < 200; ++i) {
    const Query& q = queries[rng.next() % queries.size()];
    double t1 = rng.uniform(0.0, 3.0);
    double t2 = rng.uniform(0.0, 3.0);
    if (t1 > t2) {
      std::swap(t1, t2);
    }
    CHECK(query_truth(ens, q, {0.0, t1}).satisfied_fraction <= query_truth(ens, q, {0.0, t2}).satisfied_fraction);
  }
}

TEST_CASE("adding a member keeps the fraction between the old one and its own vote") {
  const Ensemble ens = friend_ensemble(16, 40);
  for (const auto& q : unstated_queries(testing::friend_kb())) {
    for (std::size_t k = 1; k < ens.size(); ++k) {
      const std::span<const Embedding> before(ens.members.data(), k);
      const std::span<const Embedding> after(ens.members.data(), k + 1);
      const double f_before = verdict_over(before, q).satisfied_fraction;
      const double vote = satisfies(ens.members[k], q) ? 1.0 : 0.0;
      const double f_after = verdict_over(after, q).satisfied_fraction;
      CHECK(f_after >= std::min(f_before, vote));
      CHECK(f_after <= std::max(f_before, vote));
      if (verdict_over(before, q).value == Truth::Unknown) {
        CHECK(verdict_over(after, q).value == Truth::Unknown);
      }
    }
  }
}
