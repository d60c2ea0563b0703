#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "transa/knowledge_graph.hpp"
#include "transa/triple.hpp"

namespace transa {

/// Adjacency view of the training split, in both directions.
///
/// For a head anchor h and relation r:
///   positive_tails(h, r)  — tails t with (h, r, t) in train
///   negative_tails(h, r)  — training neighbors t of h with (h, r, t) not in
///                           correct_set; derived per call from the neighbor
///                           list instead of being materialized per pair
/// The tail-anchored accessors mirror this with heads as candidates.
/// The graph must outlive the index; both are safe for concurrent reads.
class NeighborhoodIndex {
 public:
  explicit NeighborhoodIndex(const KnowledgeGraph& graph);

  const KnowledgeGraph& graph() const { return *graph_; }

  bool head_anchored(EntityId e) const { return !head_rels_[static_cast<std::size_t>(e)].empty(); }
  bool tail_anchored(EntityId e) const { return !tail_rels_[static_cast<std::size_t>(e)].empty(); }

  // Relation lists are sorted ascending; nr_h is their size.
  std::span<const RelationId> head_relations(EntityId e) const {
    return head_rels_[static_cast<std::size_t>(e)];
  }
  std::span<const RelationId> tail_relations(EntityId e) const {
    return tail_rels_[static_cast<std::size_t>(e)];
  }

  std::span<const EntityId> positive_tails(EntityId h, RelationId r) const;
  std::span<const EntityId> positive_heads(EntityId t, RelationId r) const;

  // Unique sorted training neighbors of an entity, in the given direction.
  std::span<const EntityId> head_neighbors(EntityId h) const {
    return head_nbrs_[static_cast<std::size_t>(h)];
  }
  std::span<const EntityId> tail_neighbors(EntityId t) const {
    return tail_nbrs_[static_cast<std::size_t>(t)];
  }

  std::vector<EntityId> negative_tails(EntityId h, RelationId r) const;
  std::vector<EntityId> negative_heads(EntityId t, RelationId r) const;

 private:
  const KnowledgeGraph* graph_;
  std::vector<std::vector<RelationId>> head_rels_, tail_rels_;
  std::vector<std::vector<EntityId>> head_nbrs_, tail_nbrs_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> pos_tails_, pos_heads_;
};

}  // namespace transa
