#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "transa/embedding_model.hpp"
#include "transa/knowledge_graph.hpp"

namespace transa {

enum class CorruptSide { Head, Tail };

/// Rank of the true entity among all candidates for one corrupted slot,
/// counting from 1. Ties score fractionally: a block of k candidates with the
/// same score as the true entity (itself included) contributes the mean rank
/// of the block, so the result may be half-integral.
double rank_entity(const EmbeddingModel& model, const KnowledgeGraph& graph, const Triple& triple,
                   CorruptSide side, bool filtered);

struct RankingMetrics {
  double mean_rank = 0.0;
  double hits_at_1 = 0.0;
  double hits_at_3 = 0.0;
  double hits_at_10 = 0.0;
};

struct EvalReport {
  RankingMetrics raw;
  RankingMetrics filtered;
  std::size_t n_test = 0;  // triples evaluated; each contributes a head and a tail rank
  std::map<RelationId, RankingMetrics> per_relation_filtered;  // populated on request
};

/// Mean rank over both corruption sides of every triple in `triples`.
double mean_rank(const EmbeddingModel& model, const KnowledgeGraph& graph,
                 std::span<const Triple> triples, bool filtered, int threads = 1);

/// Link prediction over the test split: raw and filtered mean rank and
/// hits@{1,3,10} in a single pass.
EvalReport link_prediction(const EmbeddingModel& model, const KnowledgeGraph& graph,
                           int threads = 1, bool per_relation = false);

std::string to_json(const EvalReport& report);
/// Fixed-width text table of the same numbers.
std::string to_table(const EvalReport& report);

}  // namespace transa
