#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "transa/errors.hpp"
#include "transa/ranking.hpp"

using namespace transa;

namespace {

// Line graph without wrap-around: relation r translates by r+1, and the
// 1-D embedding x_e = e realizes every training triple exactly.
struct PerfectFixture {
  KnowledgeGraph graph;
  EmbeddingModel model;

  PerfectFixture(int n = 12, int nr = 2)
      : graph(make_graph(n, nr)), model(static_cast<std::int32_t>(n), nr, 1, Dissimilarity::L1) {
    for (EntityId e = 0; e < n; ++e) model.entity(e)[0] = static_cast<double>(e);
    for (RelationId r = 0; r < nr; ++r) model.relation(r)[0] = static_cast<double>(r + 1);
  }

  static KnowledgeGraph make_graph(int n, int nr) {
    std::vector<Triple> train, test;
    for (RelationId r = 0; r < nr; ++r) {
      int off = r + 1;
      for (EntityId h = 0; h + off < n; ++h) {
        Triple t{h, r, static_cast<EntityId>(h + off)};
        ((h + r) % 4 == 0 ? test : train).push_back(t);
      }
    }
    return KnowledgeGraph::from_triples(n, nr, std::move(train), {}, std::move(test));
  }
};

}  // namespace

TEST_CASE("a dominating score yields rank one in both modes") {
  PerfectFixture f;
  for (const Triple& t : f.graph.test()) {
    for (CorruptSide side : {CorruptSide::Head, CorruptSide::Tail}) {
      CHECK(rank_entity(f.model, f.graph, t, side, false) == 1.0);
      CHECK(rank_entity(f.model, f.graph, t, side, true) == 1.0);
    }
  }
}

TEST_CASE("perfect model scores mean rank one and full hits") {
  PerfectFixture f;
  auto report = link_prediction(f.model, f.graph);
  CHECK(report.raw.mean_rank == 1.0);
  CHECK(report.filtered.mean_rank == 1.0);
  CHECK(report.raw.hits_at_1 == 1.0);
  CHECK(report.filtered.hits_at_10 == 1.0);
  CHECK(report.n_test == f.graph.test().size());
}

TEST_CASE("filtering removes exactly the known competitor") {
  // Three entities on a line; (0, r, 1) is the test triple and (0, r, 2)
  // is a training triple whose tail outscores the true tail.
  auto g = KnowledgeGraph::from_triples(3, 1, {{0, 0, 2}}, {}, {{0, 0, 1}});
  EmbeddingModel m(3, 1, 1, Dissimilarity::L1);
  m.entity(0)[0] = 0.0;
  m.entity(1)[0] = 2.0;
  m.entity(2)[0] = 1.0;
  m.relation(0)[0] = 1.0;
  // Tail candidate scores: e0 -> 1, e1 -> 1... e1 -> |0+1-2| = 1, e2 -> 0.
  Triple probe{0, 0, 1};
  double raw = rank_entity(m, g, probe, CorruptSide::Tail, false);
  double filtered = rank_entity(m, g, probe, CorruptSide::Tail, true);
  CHECK(raw == 2.5);  // tied with e0 behind e2: mean of ranks 2 and 3
  CHECK(filtered == raw - 1.0);  // e2 is filtered out, tie with e0 remains
}

TEST_CASE("ranks agree with the stable-sort oracle") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto g = oracle::random_graph(seed, 20, 4, 40, /*with_heldout=*/true);
    Dissimilarity dissims[] = {Dissimilarity::L1, Dissimilarity::L2, Dissimilarity::L2Squared};
    auto m = oracle::random_model(g.num_entities(), g.num_relations(), 3, dissims[seed % 3],
                                  seed + 7);
    auto check_split = [&](std::span<const Triple> triples) {
      for (const Triple& t : triples) {
        for (bool filtered : {false, true}) {
          CHECK(rank_entity(m, g, t, CorruptSide::Tail, filtered) ==
                oracle::brute_rank(m, g, t, /*corrupt_tail=*/true, filtered));
          CHECK(rank_entity(m, g, t, CorruptSide::Head, filtered) ==
                oracle::brute_rank(m, g, t, /*corrupt_tail=*/false, filtered));
        }
      }
    };
    check_split(g.train().subspan(0, std::min<std::size_t>(g.train().size(), 10)));
    check_split(g.valid());
    check_split(g.test());
  }
}

TEST_CASE("ties split the rank across the block") {
  // All entities at the same point: every candidate ties at the same score.
  auto g = KnowledgeGraph::from_triples(5, 1, {{0, 0, 1}}, {}, {{0, 0, 2}});
  EmbeddingModel m(5, 1, 2, Dissimilarity::L2);  // all zeros
  double r = rank_entity(m, g, g.test()[0], CorruptSide::Tail, false);
  CHECK(r == 3.0);  // mean of ranks 1..5
  CHECK(r == oracle::brute_rank(m, g, g.test()[0], true, false));
}

TEST_CASE("filtered rank never exceeds raw rank and both stay in range") {
  for (std::uint64_t seed = 40; seed <= 48; ++seed) {
    auto g = oracle::random_graph(seed, 25, 5, 45, /*with_heldout=*/true);
    auto m = oracle::random_model(g.num_entities(), g.num_relations(), 4, Dissimilarity::L2,
                                  seed);
    for (const Triple& t : g.test()) {
      for (CorruptSide side : {CorruptSide::Head, CorruptSide::Tail}) {
        double raw = rank_entity(m, g, t, side, false);
        double filtered = rank_entity(m, g, t, side, true);
        CHECK(filtered <= raw);
        CHECK(raw >= 1.0);
        CHECK(raw <= static_cast<double>(g.num_entities()));
        CHECK(filtered >= 1.0);
      }
    }
  }
}

TEST_CASE("random embeddings land near the null-model mean rank") {
  // 100 entities: expected raw mean rank |E|/2 + O(1).
  Rng rng(1234);
  std::vector<Triple> train, test;
  std::set<oracle::TripleKey> seen;
  while (train.size() < 150 || test.size() < 40) {
    Triple t{static_cast<EntityId>(uniform_index(rng, 100)),
             static_cast<RelationId>(uniform_index(rng, 3)),
             static_cast<EntityId>(uniform_index(rng, 100))};
    if (!seen.insert(oracle::key(t)).second) continue;
    (train.size() < 150 ? train : test).push_back(t);
  }
  auto g = KnowledgeGraph::from_triples(100, 3, train, {}, test);

  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = oracle::random_model(100, 3, 8, Dissimilarity::L2, seed * 11);
    total += link_prediction(m, g).raw.mean_rank;
  }
  double avg = total / 5.0;
  CHECK(avg >= 35.0);
  CHECK(avg <= 65.0);
}

TEST_CASE("empty inputs are rejected") {
  auto g = oracle::random_graph(3, 20, 3, 30);  // no held-out splits
  auto m = oracle::random_model(g.num_entities(), g.num_relations(), 3, Dissimilarity::L2, 2);
  CHECK_THROWS_AS(link_prediction(m, g), DataError);
  CHECK_THROWS_AS(mean_rank(m, g, g.test(), false), DataError);
}

TEST_CASE("evaluation is independent of the thread count") {
  auto g = oracle::random_graph(8, 28, 5, 50, /*with_heldout=*/true);
  auto m = oracle::random_model(g.num_entities(), g.num_relations(), 4, Dissimilarity::L1, 6);
  auto one = link_prediction(m, g, /*threads=*/1, /*per_relation=*/true);
  auto four = link_prediction(m, g, /*threads=*/4, /*per_relation=*/true);
  CHECK(one.raw.mean_rank == four.raw.mean_rank);
  CHECK(one.filtered.mean_rank == four.filtered.mean_rank);
  CHECK(one.raw.hits_at_10 == four.raw.hits_at_10);
  CHECK(one.per_relation_filtered.size() == four.per_relation_filtered.size());
  CHECK(mean_rank(m, g, g.test(), true, 1) == mean_rank(m, g, g.test(), true, 4));
}

TEST_CASE("per-relation breakdown covers exactly the test relations") {
  auto g = oracle::random_graph(9, 25, 5, 45, /*with_heldout=*/true);
  if (g.test().empty()) return;
  auto m = oracle::random_model(g.num_entities(), g.num_relations(), 3, Dissimilarity::L2, 13);
  auto plain = link_prediction(m, g);
  CHECK(plain.per_relation_filtered.empty());

  auto detailed = link_prediction(m, g, 1, /*per_relation=*/true);
  std::set<RelationId> test_rels;
  for (const Triple& t : g.test()) test_rels.insert(t.relation);
  CHECK(detailed.per_relation_filtered.size() == test_rels.size());
  for (const auto& [r, metrics] : detailed.per_relation_filtered) {
    CHECK(test_rels.count(r) == 1);
    CHECK(metrics.mean_rank >= 1.0);
  }
  // Hits are fractions and non-decreasing in k.
  for (const RankingMetrics* metrics : {&detailed.raw, &detailed.filtered}) {
    CHECK(metrics->hits_at_1 >= 0.0);
    CHECK(metrics->hits_at_1 <= metrics->hits_at_3);
    CHECK(metrics->hits_at_3 <= metrics->hits_at_10);
    CHECK(metrics->hits_at_10 <= 1.0);
  }
  CHECK(detailed.filtered.mean_rank <= detailed.raw.mean_rank);
}

TEST_CASE("reports render to json and a table") {
  PerfectFixture f;
  auto report = link_prediction(f.model, f.graph);
  auto json = to_json(report);
  CHECK(json.find("\"mean_rank\"") != std::string::npos);
  CHECK(json.find("\"filtered\"") != std::string::npos);
  auto table = to_table(report);
  CHECK(table.find("hits@10") != std::string::npos);
  CHECK(table.find("filtered") != std::string::npos);
}
