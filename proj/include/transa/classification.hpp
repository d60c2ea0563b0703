#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "transa/embedding_model.hpp"
#include "transa/knowledge_graph.hpp"
#include "transa/rng.hpp"

namespace transa {

/// Per-relation decision thresholds for triple classification: a triple is
/// called positive when its score falls strictly below the threshold of its
/// relation. Relations never seen during fitting reuse the pooled global
/// threshold.
struct ClassifierThresholds {
  std::map<RelationId, double> per_relation;
  double global_threshold = 0.0;  // fitted on all validation scores pooled
  double validation_accuracy = 0.0;

  double threshold_for(RelationId r) const;
  bool fitted(RelationId r) const { return per_relation.count(r) != 0; }
};

/// Picks, per relation, the accuracy-maximizing threshold over candidate cuts
/// (midpoints of adjacent sorted validation scores plus the two infinities),
/// breaking ties toward the smaller threshold.
ClassifierThresholds fit_thresholds(const EmbeddingModel& model, std::span<const Triple> valid_pos,
                                    std::span<const Triple> valid_neg);

struct ClassificationResult {
  double accuracy = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t fallback_decisions = 0;          // triples decided by the global threshold
  std::set<RelationId> fallback_relations;     // their relations (had no validation data)
};

ClassificationResult triple_classification(const EmbeddingModel& model,
                                           const ClassifierThresholds& thresholds,
                                           std::span<const Triple> test_pos,
                                           std::span<const Triple> test_neg);

std::string to_json(const ClassificationResult& result);
std::string to_table(const ClassificationResult& result);

enum class NegativeMode { PositionCompatible, Uniform };

struct NegativeSet {
  std::vector<Triple> negatives;              // one per positive, same order
  std::set<RelationId> uniform_fallback;      // relations where the pool ran dry
};

/// One corrupted counterpart per positive, never a known-correct triple.
/// Position-compatible mode draws replacements from the entities observed in
/// the corrupted slot for that relation anywhere in the graph, falling back
/// to uniform draws when the pool has no usable entity.
NegativeSet make_negatives(std::span<const Triple> positives, const KnowledgeGraph& graph,
                           Rng& rng, NegativeMode mode);

}  // namespace transa
