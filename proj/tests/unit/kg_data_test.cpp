#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "transa/errors.hpp"
#include "transa/knowledge_graph.hpp"
#include "transa/neighborhood_index.hpp"
#include "transa/rng.hpp"

using namespace transa;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "transa_test_XXXXXX").string();
    path = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& content) {
  auto p = dir / name;
  std::ofstream out(p);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("load assigns ids in first-appearance order across splits") {
  TempDir tmp;
  auto train = write_file(tmp.path, "train.tsv",
                          "paris\tcapital_of\tfrance\n"
                          "berlin\tcapital_of\tgermany\n"
                          "paris\tlocated_in\tfrance\n");
  auto valid = write_file(tmp.path, "valid.tsv", "rome\tcapital_of\titaly\n");
  auto test = write_file(tmp.path, "test.tsv", "berlin\tlocated_in\tgermany\n");

  auto g = KnowledgeGraph::load(train, valid, test, TripleFormat::TsvNames);
  CHECK(g.num_entities() == 6);
  CHECK(g.num_relations() == 2);
  CHECK(g.entities().id_of("paris") == 0);
  CHECK(g.entities().id_of("france") == 1);
  CHECK(g.entities().id_of("berlin") == 2);
  CHECK(g.entities().id_of("rome") == 4);  // valid/test entities still get ids
  CHECK(g.relations().id_of("capital_of") == 0);
  CHECK(g.relations().id_of("located_in") == 1);
  CHECK(g.train().size() == 3);
  CHECK(g.valid().size() == 1);
  CHECK(g.test().size() == 1);
  CHECK(g.train()[0] == Triple{0, 0, 1});
  CHECK(g.contains(Triple{2, 1, 3}));  // test triples are in the correct set
}

TEST_CASE("load reports malformed lines with their number") {
  TempDir tmp;
  auto train = write_file(tmp.path, "train.tsv", "a\tr\tb\nc\tr\n");
  auto valid = write_file(tmp.path, "valid.tsv", "");
  auto test = write_file(tmp.path, "test.tsv", "");
  try {
    KnowledgeGraph::load(train, valid, test, TripleFormat::TsvNames);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("empty train split is an error, empty held-out splits are fine") {
  TempDir tmp;
  auto empty = write_file(tmp.path, "empty.tsv", "");
  auto train = write_file(tmp.path, "train.tsv", "a\tr\tb\n");
  CHECK_THROWS_AS(KnowledgeGraph::load(empty, empty, empty, TripleFormat::TsvNames), DataError);
  auto g = KnowledgeGraph::load(train, empty, empty, TripleFormat::TsvNames);
  CHECK(g.test().empty());
  CHECK(g.valid().empty());
  CHECK(g.train().size() == 1);
  CHECK_THROWS_AS(KnowledgeGraph::load(tmp.path / "missing.tsv", empty, empty,
                                       TripleFormat::TsvNames),
                  DataError);
}

TEST_CASE("id format builds a dense vocabulary and rejects junk") {
  TempDir tmp;
  auto train = write_file(tmp.path, "train.tsv", "0\t0\t3\n2\t1\t0\n");
  auto empty = write_file(tmp.path, "empty.tsv", "");
  auto g = KnowledgeGraph::load(train, empty, empty, TripleFormat::TsvIds);
  CHECK(g.num_entities() == 4);  // ids 0..3 even though 1 never appears
  CHECK(g.num_relations() == 2);
  CHECK(g.entities().name_of(3) == "3");

  auto bad = write_file(tmp.path, "bad.tsv", "0\tx\t1\n");
  CHECK_THROWS_AS(KnowledgeGraph::load(bad, empty, empty, TripleFormat::TsvIds), DataError);
}

TEST_CASE("labeled splits separate negatives from the correct set") {
  TempDir tmp;
  auto train = write_file(tmp.path, "train.tsv", "a\tr\tb\nb\tr\tc\n");
  auto valid = write_file(tmp.path, "valid.tsv", "a\tr\tc\t1\nc\tr\ta\t-1\n");
  auto test = write_file(tmp.path, "test.tsv", "b\tr\ta\t+1\na\tr\ta\t-1\n");
  auto g = KnowledgeGraph::load(train, valid, test, TripleFormat::TsvNames, /*labeled=*/true);
  CHECK(g.valid().size() == 1);
  CHECK(g.valid_negatives().size() == 1);
  CHECK(g.test().size() == 1);
  CHECK(g.test_negatives().size() == 1);
  EntityId a = g.entities().id_of("a"), c = g.entities().id_of("c");
  CHECK(g.contains(Triple{a, 0, c}));
  CHECK(!g.contains(Triple{c, 0, a}));  // labeled negative stays out

  auto badlabel = write_file(tmp.path, "badlabel.tsv", "a\tr\tb\t2\n");
  CHECK_THROWS_AS(KnowledgeGraph::load(train, badlabel, test, TripleFormat::TsvNames, true),
                  DataError);
}

TEST_CASE("duplicate lines are dropped once") {
  TempDir tmp;
  auto train = write_file(tmp.path, "train.tsv", "a\tr\tb\na\tr\tb\nb\tr\ta\n");
  auto empty = write_file(tmp.path, "empty.tsv", "");
  auto g = KnowledgeGraph::load(train, empty, empty, TripleFormat::TsvNames);
  CHECK(g.train().size() == 2);
}

TEST_CASE("save then load_dir round-trips triples and vocabularies") {
  auto g = oracle::random_graph(11, 20, 4, 40, /*with_heldout=*/true);
  TempDir tmp;
  g.save(tmp.path / "graph");
  auto back = KnowledgeGraph::load_dir(tmp.path / "graph");
  REQUIRE(back.num_entities() == g.num_entities());
  REQUIRE(back.num_relations() == g.num_relations());
  for (std::int32_t i = 0; i < g.num_entities(); ++i) {
    CHECK(back.entities().name_of(i) == g.entities().name_of(i));
  }
  auto same = [](std::span<const Triple> a, std::span<const Triple> b) {
    return std::vector<Triple>(a.begin(), a.end()) == std::vector<Triple>(b.begin(), b.end());
  };
  CHECK(same(back.train(), g.train()));
  CHECK(same(back.valid(), g.valid()));
  CHECK(same(back.test(), g.test()));
}

TEST_CASE("corrupt changes exactly one slot and avoids correct triples") {
  auto g = oracle::random_graph(3, 25, 4, 40);
  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const Triple& pos = g.train()[static_cast<std::size_t>(i) % g.train().size()];
    Triple neg = g.corrupt(pos, rng);
    bool head_changed = neg.head != pos.head;
    bool tail_changed = neg.tail != pos.tail;
    CHECK(neg.relation == pos.relation);
    CHECK(head_changed != tail_changed);
    CHECK(!g.contains(neg));
  }
}

TEST_CASE("corrupt with two entities is forced onto the other entity") {
  auto g = KnowledgeGraph::from_triples(2, 1, {Triple{0, 0, 1}});
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Triple neg = g.corrupt(g.train()[0], rng);
    bool head_swap = neg == Triple{1, 0, 1};
    bool tail_swap = neg == Triple{0, 0, 0};
    CHECK((head_swap || tail_swap));
  }
}

TEST_CASE("corrupt is deterministic under a fixed seed") {
  auto g = oracle::random_graph(4, 20, 3, 30);
  Rng a(123), b(123);
  for (int i = 0; i < 200; ++i) {
    const Triple& pos = g.train()[static_cast<std::size_t>(i) % g.train().size()];
    CHECK(g.corrupt(pos, a) == g.corrupt(pos, b));
  }
}

TEST_CASE("corrupt splits sides evenly") {
  auto g = KnowledgeGraph::from_triples(50, 1, {Triple{0, 0, 1}});
  Rng rng(2024);
  int heads = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Triple neg = g.corrupt(g.train()[0], rng);
    if (neg.head != 0) ++heads;
  }
  double frac = static_cast<double>(heads) / n;
  CHECK(frac >= 0.47);
  CHECK(frac <= 0.53);
}

TEST_CASE("corrupt errors out when every corruption is correct") {
  std::vector<Triple> all;
  for (EntityId h = 0; h < 2; ++h) {
    for (EntityId t = 0; t < 2; ++t) all.push_back({h, 0, t});
  }
  auto g = KnowledgeGraph::from_triples(2, 1, all);
  Rng rng(1);
  CHECK_THROWS_AS(g.corrupt(g.train()[0], rng), DataError);
}

TEST_CASE("partition covers every triple exactly once and respects k") {
  // Sampling can leave some of the 6 relation slots unused; make sure k=3 fits.
  std::uint64_t seed = 17;
  auto g = oracle::random_graph(seed, 25, 6, 45, /*with_heldout=*/true);
  while (g.num_relations() < 3) g = oracle::random_graph(++seed, 25, 6, 45, true);
  Rng rng(31);
  std::vector<std::int32_t> assignment;
  auto parts = g.partition(3, rng, &assignment);
  REQUIRE(parts.size() == 3);
  REQUIRE(assignment.size() == static_cast<std::size_t>(g.num_relations()));

  // Group sizes differ by at most one.
  std::vector<int> sizes(3, 0);
  for (std::int32_t grp : assignment) ++sizes[static_cast<std::size_t>(grp)];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) -
            *std::min_element(sizes.begin(), sizes.end()) <=
        1);

  // Multiset of named triples across subgraphs equals the input's.
  auto named = [](const KnowledgeGraph& kg) {
    std::multiset<std::array<std::string, 4>> out;
    auto add = [&](std::span<const Triple> split, const char* tag) {
      for (const Triple& t : split) {
        out.insert({kg.entities().name_of(t.head), kg.relations().name_of(t.relation),
                    kg.entities().name_of(t.tail), tag});
      }
    };
    add(kg.train(), "train");
    add(kg.valid(), "valid");
    add(kg.test(), "test");
    return out;
  };
  std::multiset<std::array<std::string, 4>> whole = named(g), pieces;
  for (const auto& p : parts) {
    auto part_named = named(p);
    pieces.insert(part_named.begin(), part_named.end());
    // Each subgraph only references its own relations.
    for (std::int32_t r = 0; r < p.num_relations(); ++r) {
      std::int32_t orig = g.relations().id_of(p.relations().name_of(r));
      REQUIRE(orig >= 0);
    }
  }
  CHECK(whole == pieces);
}

TEST_CASE("partition identity and maximal cases") {
  auto g = oracle::random_graph(23, 20, 5, 40);
  Rng rng(7);
  auto one = g.partition(1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].train().size() == g.train().size());
  CHECK(one[0].num_relations() == g.num_relations());

  Rng rng2(7);
  auto each = g.partition(g.num_relations(), rng2);
  REQUIRE(static_cast<std::int32_t>(each.size()) == g.num_relations());
  for (const auto& p : each) CHECK(p.num_relations() == 1);

  Rng rng3(7);
  CHECK_THROWS_AS(g.partition(0, rng3), std::invalid_argument);
  CHECK_THROWS_AS(g.partition(g.num_relations() + 1, rng3), std::invalid_argument);
}

TEST_CASE("partition is deterministic for a fixed seed") {
  std::uint64_t seed = 29;
  auto g = oracle::random_graph(seed, 22, 6, 40);
  while (g.num_relations() < 4) g = oracle::random_graph(++seed, 22, 6, 40);
  Rng a(55), b(55);
  std::vector<std::int32_t> asg_a, asg_b;
  g.partition(4, a, &asg_a);
  g.partition(4, b, &asg_b);
  CHECK(asg_a == asg_b);
}

TEST_CASE("neighborhood index matches the brute-force set oracle") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto g = oracle::random_graph(seed, 30, 6, 50);
    NeighborhoodIndex index(g);
    for (EntityId e = 0; e < g.num_entities(); ++e) {
      auto view = oracle::brute_view(g, e);
      bool heads_something = view && view->forward;
      CHECK(index.head_anchored(e) == heads_something);
      if (!heads_something) continue;

      std::set<RelationId> rels;
      std::map<RelationId, std::set<EntityId>> pos;
      for (auto& [r, o] : view->edges) {
        rels.insert(r);
        pos[r].insert(o);
      }
      auto rel_span = index.head_relations(e);
      CHECK(std::set<RelationId>(rel_span.begin(), rel_span.end()) == rels);

      for (RelationId r : rels) {
        auto p = index.positive_tails(e, r);
        CHECK(std::set<EntityId>(p.begin(), p.end()) == pos[r]);
        CHECK(!p.empty());

        std::set<EntityId> expected_neg;
        std::set<EntityId> neighbors;
        for (auto& [rr, o] : view->edges) neighbors.insert(o);
        for (EntityId o : neighbors) {
          if (!g.contains(Triple{e, r, o})) expected_neg.insert(o);
        }
        auto n = index.negative_tails(e, r);
        CHECK(std::set<EntityId>(n.begin(), n.end()) == expected_neg);
      }
    }
  }
}

TEST_CASE("index splits neighbors into positives and negatives per relation") {
  // h connected to t1,t2 via r1 and t3 via r2.
  auto g = KnowledgeGraph::from_triples(4, 2, {{0, 0, 1}, {0, 0, 2}, {0, 1, 3}});
  NeighborhoodIndex index(g);
  auto rels = index.head_relations(0);
  CHECK(std::set<RelationId>(rels.begin(), rels.end()) == std::set<RelationId>{0, 1});

  auto p1 = index.positive_tails(0, 0);
  CHECK(std::set<EntityId>(p1.begin(), p1.end()) == std::set<EntityId>{1, 2});
  auto n1 = index.negative_tails(0, 0);
  CHECK(std::set<EntityId>(n1.begin(), n1.end()) == std::set<EntityId>{3});

  auto p2 = index.positive_tails(0, 1);
  CHECK(std::set<EntityId>(p2.begin(), p2.end()) == std::set<EntityId>{3});
  auto n2 = index.negative_tails(0, 1);
  CHECK(std::set<EntityId>(n2.begin(), n2.end()) == std::set<EntityId>{1, 2});
}

TEST_CASE("shared neighbor across relations is negative for neither") {
  // (h,r1,t1) and (h,r2,t1): t1 is positive for both relations, so both
  // negative sets are empty.
  auto g = KnowledgeGraph::from_triples(2, 2, {{0, 0, 1}, {0, 1, 1}});
  NeighborhoodIndex index(g);
  CHECK(index.negative_tails(0, 0).empty());
  CHECK(index.negative_tails(0, 1).empty());
  CHECK(index.positive_tails(0, 0).size() == 1);
  CHECK(index.positive_tails(0, 1).size() == 1);
}
