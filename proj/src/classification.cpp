#include "transa/classification.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "transa/errors.hpp"

namespace transa {

namespace {

struct Sample {
  double score;
  bool positive;
};

// Best cut by a single ascending sweep over distinct score values. Candidate
// thresholds are -inf, the midpoints between adjacent distinct values and
// +inf; equal accuracies keep the smaller threshold. A triple classifies
// positive iff score < threshold, so the -inf start calls everything negative.
std::pair<double, std::int64_t> best_threshold(std::vector<Sample>& samples) {
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.score < b.score; });
  std::int64_t correct = 0;
  for (const Sample& s : samples) correct += !s.positive;

  double best_cut = -std::numeric_limits<double>::infinity();
  std::int64_t best_correct = correct;
  std::size_t i = 0;
  while (i < samples.size()) {
    double value = samples[i].score;
    while (i < samples.size() && samples[i].score == value) {
      correct += samples[i].positive ? 1 : -1;
      ++i;
    }
    double cut = i < samples.size() ? (value + samples[i].score) / 2.0
                                    : std::numeric_limits<double>::infinity();
    if (correct > best_correct) {
      best_correct = correct;
      best_cut = cut;
    }
  }
  return {best_cut, best_correct};
}

}  // namespace

double ClassifierThresholds::threshold_for(RelationId r) const {
  auto it = per_relation.find(r);
  return it != per_relation.end() ? it->second : global_threshold;
}

ClassifierThresholds fit_thresholds(const EmbeddingModel& model, std::span<const Triple> valid_pos,
                                    std::span<const Triple> valid_neg) {
  if (valid_pos.empty() && valid_neg.empty()) throw DataError("no validation data for thresholds");

  std::map<RelationId, std::vector<Sample>> by_relation;
  std::vector<Sample> pooled;
  auto collect = [&](std::span<const Triple> triples, bool positive) {
    for (const Triple& t : triples) {
      Sample s{score(model, t), positive};
      by_relation[t.relation].push_back(s);
      pooled.push_back(s);
    }
  };
  collect(valid_pos, true);
  collect(valid_neg, false);

  ClassifierThresholds out;
  out.global_threshold = best_threshold(pooled).first;
  std::int64_t correct = 0;
  for (auto& [relation, samples] : by_relation) {
    auto [cut, right] = best_threshold(samples);
    out.per_relation[relation] = cut;
    correct += right;
  }
  out.validation_accuracy = static_cast<double>(correct) / static_cast<double>(pooled.size());
  return out;
}

ClassificationResult triple_classification(const EmbeddingModel& model,
                                           const ClassifierThresholds& thresholds,
                                           std::span<const Triple> test_pos,
                                           std::span<const Triple> test_neg) {
  ClassificationResult result;
  result.n_pos = test_pos.size();
  result.n_neg = test_neg.size();
  std::size_t total = test_pos.size() + test_neg.size();
  if (total == 0) throw DataError("no test data for classification");

  std::int64_t correct = 0;
  auto judge = [&](std::span<const Triple> triples, bool positive) {
    for (const Triple& t : triples) {
      if (!thresholds.fitted(t.relation)) {
        ++result.fallback_decisions;
        result.fallback_relations.insert(t.relation);
      }
      bool called_positive = score(model, t) < thresholds.threshold_for(t.relation);
      correct += called_positive == positive;
    }
  };
  judge(test_pos, true);
  judge(test_neg, false);
  result.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return result;
}

std::string to_json(const ClassificationResult& result) {
  nlohmann::json j{{"accuracy", result.accuracy},
                   {"n_pos", result.n_pos},
                   {"n_neg", result.n_neg},
                   {"fallback_decisions", result.fallback_decisions}};
  nlohmann::json rels = nlohmann::json::array();
  for (RelationId r : result.fallback_relations) rels.push_back(r);
  j["fallback_relations"] = rels;
  return j.dump(2);
}

std::string to_table(const ClassificationResult& result) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "accuracy" << std::fixed << std::setprecision(4)
     << result.accuracy << "\n"
     << std::setw(20) << "positives" << result.n_pos << "\n"
     << std::setw(20) << "negatives" << result.n_neg << "\n"
     << std::setw(20) << "fallback_decisions" << result.fallback_decisions << "\n";
  return os.str();
}

NegativeSet make_negatives(std::span<const Triple> positives, const KnowledgeGraph& graph,
                           Rng& rng, NegativeMode mode) {
  if (positives.empty()) throw DataError("no positives to corrupt");

  std::vector<std::vector<EntityId>> head_pool, tail_pool;
  if (mode == NegativeMode::PositionCompatible) {
    head_pool.resize(static_cast<std::size_t>(graph.num_relations()));
    tail_pool.resize(static_cast<std::size_t>(graph.num_relations()));
    auto absorb = [&](std::span<const Triple> triples) {
      for (const Triple& t : triples) {
        head_pool[static_cast<std::size_t>(t.relation)].push_back(t.head);
        tail_pool[static_cast<std::size_t>(t.relation)].push_back(t.tail);
      }
    };
    absorb(graph.train());
    absorb(graph.valid());
    absorb(graph.test());
    for (auto* pools : {&head_pool, &tail_pool}) {
      for (auto& pool : *pools) {
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
      }
    }
  }

  constexpr int kMaxAttempts = 100;
  NegativeSet out;
  out.negatives.reserve(positives.size());
  for (const Triple& pos : positives) {
    std::optional<Triple> accepted;
    if (mode == NegativeMode::PositionCompatible) {
      for (int attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
        bool corrupt_head = uniform_unit(rng) < 0.5;
        const auto& pool = (corrupt_head ? head_pool : tail_pool)[static_cast<std::size_t>(pos.relation)];
        if (pool.empty()) break;
        EntityId e = pool[uniform_index(rng, pool.size())];
        Triple candidate = pos;
        (corrupt_head ? candidate.head : candidate.tail) = e;
        if (candidate != pos && !graph.contains(candidate)) accepted = candidate;
      }
      if (!accepted) out.uniform_fallback.insert(pos.relation);
    }
    if (!accepted) {
      for (int attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
        bool corrupt_head = uniform_unit(rng) < 0.5;
        EntityId e = static_cast<EntityId>(uniform_index(rng, static_cast<std::size_t>(graph.num_entities())));
        Triple candidate = pos;
        (corrupt_head ? candidate.head : candidate.tail) = e;
        if (candidate != pos && !graph.contains(candidate)) accepted = candidate;
      }
    }
    if (!accepted) {
      throw DataError("could not corrupt a positive for relation " +
                      std::to_string(pos.relation));
    }
    out.negatives.push_back(*accepted);
  }
  return out;
}

}  // namespace transa
