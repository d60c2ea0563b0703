// Release gate: eight independently checkable properties of the library, each
// verified against brute-force re-computation or closed forms. Prints one
// PASS/FAIL line per property and exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "transa/classification.hpp"
#include "transa/margin.hpp"
#include "transa/neighborhood_index.hpp"
#include "transa/ranking.hpp"
#include "transa/risk.hpp"
#include "transa/trainer.hpp"

using namespace transa;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Dissimilarity dissim_for(std::uint64_t seed) {
  switch (seed % 3) {
    case 0: return Dissimilarity::L1;
    case 1: return Dissimilarity::L2;
    default: return Dissimilarity::L2Squared;
  }
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

// --- 1. exact entity margins vs. independent double-loop enumeration ---
bool check_margin_oracle(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  double max_dev = 0.0;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    KnowledgeGraph g = oracle::random_graph(seed);
    int dim = 2 + static_cast<int>(seed % 7);
    EmbeddingModel m =
        oracle::random_model(g.num_entities(), g.num_relations(), dim, dissim_for(seed), seed * 31 + 1);
    NeighborhoodIndex index(g);
    for (EntityId e = 0; e < g.num_entities(); ++e) {
      auto brute = oracle::brute_entity_margin(g, m, e);
      if (!brute) continue;
      max_dev = std::max(max_dev, std::fabs(entity_margin_exact(e, index, m) - *brute));
      ++checked;
    }
  }
  double secs = seconds_since(t0);
  detail = "max deviation " + fmt(max_dev) + " over " + std::to_string(checked) + " entities in " +
           fmt(secs) + "s";
  return max_dev <= 1e-9 && secs < 10.0 && checked > 500;
}

// --- 2. sampled margins: degenerate settings exact, defaults statistically close ---
bool check_active_set(std::string& detail) {
  int exact_matches = 0, exact_total = 0, graphs_within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    KnowledgeGraph g = oracle::random_graph(seed);
    int dim = 2 + static_cast<int>(seed % 7);
    EmbeddingModel m =
        oracle::random_model(g.num_entities(), g.num_relations(), dim, dissim_for(seed), seed * 31 + 1);
    NeighborhoodIndex index(g);
    double sum_exact = 0.0, sum_diff = 0.0;
    for (EntityId e = 0; e < g.num_entities(); ++e) {
      if (!oracle::brute_view(g, e)) continue;
      double exact = entity_margin_exact(e, index, m);
      ++exact_total;
      exact_matches += entity_margin_active(e, index, m, {1.0, 1, seed}) == exact;
      double sampled = entity_margin_active(e, index, m, {0.25, 10, seed * 7 + 1});
      sum_exact += exact;
      sum_diff += std::fabs(sampled - exact);
    }
    graphs_within += sum_diff <= 0.25 * sum_exact + 1e-9;
  }
  detail = std::to_string(exact_matches) + "/" + std::to_string(exact_total) +
           " exact at fraction=1, " + std::to_string(graphs_within) + "/100 graphs within 25%";
  return exact_matches == exact_total && graphs_within >= 90;
}

// --- 3. hinge subgradients vs. central finite differences ---
bool check_gradients(std::string& detail) {
  std::mt19937_64 gen(123);
  const double h = 1e-5;
  double worst = 0.0;
  int done = 0, attempts = 0;
  while (done < 200 && ++attempts < 100000) {
    int dim = 2 + static_cast<int>(gen() % 6);
    auto ne = static_cast<std::int32_t>(4 + gen() % 8);
    auto nr = static_cast<std::int32_t>(1 + gen() % 3);
    EmbeddingModel m = oracle::random_model(ne, nr, dim, Dissimilarity::L2, gen());
    Triple pos{static_cast<EntityId>(gen() % ne), static_cast<RelationId>(gen() % nr),
               static_cast<EntityId>(gen() % ne)};
    Triple neg = pos;
    (gen() % 2 ? neg.head : neg.tail) = static_cast<EntityId>(gen() % ne);
    // Corruption never returns the original triple; mirror that here, since a
    // pos==neg "pair" has constant loss and only finite-difference noise.
    if (neg.head == pos.head && neg.tail == pos.tail) continue;
    double s_pos = oracle::triple_score(m, pos);
    double s_neg = oracle::triple_score(m, neg);
    if (s_pos < 0.05 || s_neg < 0.05) continue;  // keep clear of the norm kink at zero
    double margin = s_neg - s_pos + 0.5;         // active hinge with loss 0.5
    if (margin < 0.0) continue;
    if (hinge_loss(m, pos, neg, margin) < 0.01) continue;

    SparseGradient grad = hinge_subgradient(m, pos, neg, margin);
    if (!grad.active) continue;
    double err_sq = 0.0, norm_sq = 0.0;
    auto probe = [&](std::span<double> row, const std::vector<double>& analytic) {
      for (int c = 0; c < dim; ++c) {
        double save = row[c];
        row[c] = save + h;
        double up = hinge_loss(m, pos, neg, margin);
        row[c] = save - h;
        double down = hinge_loss(m, pos, neg, margin);
        row[c] = save;
        double numeric = (up - down) / (2.0 * h);
        err_sq += (analytic[static_cast<std::size_t>(c)] - numeric) *
                  (analytic[static_cast<std::size_t>(c)] - numeric);
        norm_sq += numeric * numeric;
      }
    };
    for (const auto& [id, vec] : grad.entities) probe(m.entity(id), vec);
    for (const auto& [id, vec] : grad.relations) probe(m.relation(id), vec);
    if (norm_sq == 0.0) continue;
    worst = std::max(worst, std::sqrt(err_sq / norm_sq));
    ++done;
  }
  detail = "worst relative error " + fmt(worst) + " over " + std::to_string(done) + " instances";
  return done == 200 && worst <= 1e-5;
}

// --- 4. risk bound closed form, monotonicity, beta identity ---
bool check_bound_arithmetic(std::string& detail) {
  double closed = generalization_bound(0.0, 2.0, 1.0, 100, 0.05);
  bool ok = std::fabs(closed - std::sqrt(720.9)) <= 1e-9;

  double prev = -1.0;
  for (double margin : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    double b = generalization_bound(0.3, 2.0, margin, 100, 0.05);
    ok = ok && b > prev;
    prev = b;
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KnowledgeGraph g = oracle::random_graph(seed + 300);
    EmbeddingModel m =
        oracle::random_model(g.num_entities(), g.num_relations(), 4, dissim_for(seed), seed + 1);
    double f_hat = 0.0;
    for (const Triple& t : g.train()) f_hat = std::max(f_hat, oracle::triple_score(m, t));
    ok = ok && stability_beta(m, g) == 2.0 * f_hat;
    RiskReport report = risk_report(m, g, MarginSource::constant(1.0), 0.05, seed);
    ok = ok && report.beta == 2.0 * report.f_hat;
  }
  detail = "closed form " + fmt(closed) + ", monotone in M, beta = 2*f_hat";
  return ok;
}

// --- 5. ranking protocol vs. brute-force oracle and a null model ---
bool check_ranking(std::string& detail) {
  bool ok = true;
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    KnowledgeGraph g = oracle::random_graph(seed, /*max_entities=*/20, 4, 40, /*with_heldout=*/true);
    EmbeddingModel m =
        oracle::random_model(g.num_entities(), g.num_relations(), 4, dissim_for(seed), seed + 5);
    for (const Triple& t : g.test()) {
      for (bool tail : {false, true}) {
        CorruptSide side = tail ? CorruptSide::Tail : CorruptSide::Head;
        double raw = rank_entity(m, g, t, side, false);
        double filtered = rank_entity(m, g, t, side, true);
        ok = ok && filtered <= raw;
        ok = ok && raw == oracle::brute_rank(m, g, t, tail, false);
        ok = ok && filtered == oracle::brute_rank(m, g, t, tail, true);
        ++compared;
      }
    }
  }

  // Random embeddings on a 100-entity graph should rank near the middle.
  std::mt19937_64 gen(42);
  std::vector<Triple> train, test;
  std::set<oracle::TripleKey> seen;
  while (train.size() < 150 || test.size() < 40) {
    Triple t{static_cast<EntityId>(gen() % 100), static_cast<RelationId>(gen() % 5),
             static_cast<EntityId>(gen() % 100)};
    if (!seen.insert(oracle::key(t)).second) continue;
    (train.size() < 150 ? train : test).push_back(t);
  }
  KnowledgeGraph g = KnowledgeGraph::from_triples(100, 5, train, {}, test);
  double avg = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EmbeddingModel m = oracle::random_model(100, 5, 16, Dissimilarity::L2, seed * 11 + 3);
    avg += link_prediction(m, g).raw.mean_rank;
  }
  avg /= 5.0;
  ok = ok && avg >= 35.0 && avg <= 65.0;
  detail = std::to_string(compared) + " ranks match brute force, null-model mean rank " + fmt(avg);
  return ok;
}

// --- 6. threshold fitting: separable scores, monotone-transform invariance ---
// d=1 line gadget: triple i uses its own entity pair at (0, s_i) and a zero
// relation vector, so its score is exactly the dial s_i.
struct ScoreGadget {
  EmbeddingModel model;
  std::vector<Triple> pos, neg;
  ScoreGadget(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores)
      : model(static_cast<std::int32_t>(2 * (pos_scores.size() + neg_scores.size())), 1, 1,
              Dissimilarity::L1) {
    EntityId next = 0;
    auto add = [&](double s, std::vector<Triple>& out) {
      model.entity(next)[0] = 0.0;
      model.entity(next + 1)[0] = s;
      out.push_back({next, 0, static_cast<EntityId>(next + 1)});
      next += 2;
    };
    for (double s : pos_scores) add(s, pos);
    for (double s : neg_scores) add(s, neg);
  }
};

bool check_thresholds(std::string& detail) {
  std::vector<double> pos_scores{0.2, 0.5, 0.9, 0.4};
  std::vector<double> neg_scores{3.0, 4.5, 3.2, 5.0};
  ScoreGadget valid(pos_scores, neg_scores);
  ClassifierThresholds fit = fit_thresholds(valid.model, valid.pos, valid.neg);
  bool ok = fit.validation_accuracy == 1.0;

  ClassificationResult res = triple_classification(valid.model, fit, valid.pos, valid.neg);
  ok = ok && res.accuracy == 1.0;

  // Strictly increasing transform of every score must not change any verdict.
  auto cube = [](double s) { return s * s * s + s; };
  std::vector<double> pos_t(pos_scores), neg_t(neg_scores);
  for (double& s : pos_t) s = cube(s);
  for (double& s : neg_t) s = cube(s);
  ScoreGadget transformed(pos_t, neg_t);
  ClassifierThresholds fit_t = fit_thresholds(transformed.model, transformed.pos, transformed.neg);
  ok = ok && fit_t.validation_accuracy == fit.validation_accuracy;
  for (std::size_t i = 0; i < valid.pos.size(); ++i) {
    bool before = oracle::triple_score(valid.model, valid.pos[i]) < fit.threshold_for(0);
    bool after =
        oracle::triple_score(transformed.model, transformed.pos[i]) < fit_t.threshold_for(0);
    ok = ok && before == after;
  }
  for (std::size_t i = 0; i < valid.neg.size(); ++i) {
    bool before = oracle::triple_score(valid.model, valid.neg[i]) < fit.threshold_for(0);
    bool after =
        oracle::triple_score(transformed.model, transformed.neg[i]) < fit_t.threshold_for(0);
    ok = ok && before == after;
  }
  detail = "separable accuracy 1.0, decisions invariant under x -> x^3 + x";
  return ok;
}

// --- 7. end-to-end learning on a planted-translation graph ---
bool check_end_to_end(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  KnowledgeGraph g = oracle::planted_graph(200, 10, 100, 100, 7);
  TrainConfig config;
  config.dim = 20;
  config.epochs = 200;
  config.learning_rate = 0.02;
  config.margin_mode = MarginMode::Adaptive;
  // Planted offsets leave entity gaps tiny, so lean fully on the relation
  // margins; they grow with the relation norms and keep the hinge working.
  config.mu = 0.0;
  config.dissimilarity = Dissimilarity::L1;
  config.margin_refresh_every = 10;
  config.early_stopping = false;
  config.threads = 1;
  config.seed = 1;
  TrainResult result = train(g, config);
  EvalReport report = link_prediction(result.model, g);
  double secs = seconds_since(t0);
  detail = "filtered hits@10 " + fmt(report.filtered.hits_at_10) + ", filtered mean rank " +
           fmt(report.filtered.mean_rank) + " in " + fmt(secs) + "s";
  return report.filtered.hits_at_10 >= 0.5 && report.filtered.mean_rank <= 20.0 && secs < 120.0;
}

// --- 8. fixed-margin mode vs. an independent plain-loop reference ---
bool check_reference_equivalence(std::string& detail) {
  KnowledgeGraph g = oracle::planted_graph(25, 2, 0, 0, 5);  // 50 training triples
  TrainConfig config;
  config.dim = 8;
  config.epochs = 3;
  config.learning_rate = 0.1;
  config.margin_mode = MarginMode::Fixed;
  config.fixed_margin = 1.0;
  config.dissimilarity = Dissimilarity::L1;
  config.early_stopping = false;
  config.seed = 17;
  TrainResult result = train(g, config);

  std::vector<Triple> train_vec(g.train().begin(), g.train().end());
  oracle::ReferenceModel ref =
      oracle::reference_train(train_vec, 25, 2, 8, Dissimilarity::L1, 1.0, 0.1, 3, 17);

  bool ok = true;
  for (EntityId e = 0; e < 25; ++e) {
    for (int c = 0; c < 8; ++c) {
      ok = ok && result.model.entity(e)[static_cast<std::size_t>(c)] ==
                     ref.ent[static_cast<std::size_t>(e)][static_cast<std::size_t>(c)];
    }
  }
  for (RelationId r = 0; r < 2; ++r) {
    for (int c = 0; c < 8; ++c) {
      ok = ok && result.model.relation(r)[static_cast<std::size_t>(c)] ==
                     ref.rel[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  detail = ok ? "all 216 coordinates identical after 3 epochs" : "coordinate mismatch";
  return ok;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Criterion criteria[] = {
      {"entity margins match brute-force enumeration", check_margin_oracle},
      {"active-set sampling: degenerate exactness and statistical accuracy", check_active_set},
      {"hinge subgradients match central finite differences", check_gradients},
      {"generalization bound closed form, monotonicity, beta identity", check_bound_arithmetic},
      {"ranking matches brute force; null model ranks mid-table", check_ranking},
      {"threshold fitting separates and ignores monotone rescoring", check_thresholds},
      {"planted-translation graph learned to hits@10 >= 0.5", check_end_to_end},
      {"fixed-margin training matches independent reference bit-for-bit",
       check_reference_equivalence},
  };

  int failures = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = false;
    std::string error;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::cout << (ok ? "PASS" : "FAIL") << "  [" << ++index << "] " << c.name;
    if (!detail.empty()) std::cout << " — " << detail;
    if (!error.empty()) std::cout << " — threw: " << error;
    std::cout << "\n";
    failures += !ok;
  }
  if (failures) std::cout << failures << " criteria failed\n";
  return failures == 0 ? 0 : 1;
}
