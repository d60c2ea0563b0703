#include "transa/neighborhood_index.hpp"

#include <algorithm>

namespace transa {

namespace {

void sort_unique(std::vector<std::int32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

NeighborhoodIndex::NeighborhoodIndex(const KnowledgeGraph& graph) : graph_(&graph) {
  std::size_t n = static_cast<std::size_t>(graph.num_entities());
  head_rels_.resize(n);
  tail_rels_.resize(n);
  head_nbrs_.resize(n);
  tail_nbrs_.resize(n);

  for (const Triple& t : graph.train()) {
    head_rels_[static_cast<std::size_t>(t.head)].push_back(t.relation);
    tail_rels_[static_cast<std::size_t>(t.tail)].push_back(t.relation);
    head_nbrs_[static_cast<std::size_t>(t.head)].push_back(t.tail);
    tail_nbrs_[static_cast<std::size_t>(t.tail)].push_back(t.head);
    pos_tails_[pair_key(t.head, t.relation)].push_back(t.tail);
    pos_heads_[pair_key(t.tail, t.relation)].push_back(t.head);
  }
  for (auto* vecs : {&head_rels_, &tail_rels_, &head_nbrs_, &tail_nbrs_}) {
    for (auto& v : *vecs) sort_unique(v);
  }
  for (auto* maps : {&pos_tails_, &pos_heads_}) {
    for (auto& [key, v] : *maps) sort_unique(v);
  }
}

std::span<const EntityId> NeighborhoodIndex::positive_tails(EntityId h, RelationId r) const {
  auto it = pos_tails_.find(pair_key(h, r));
  if (it == pos_tails_.end()) return {};
  return it->second;
}

std::span<const EntityId> NeighborhoodIndex::positive_heads(EntityId t, RelationId r) const {
  auto it = pos_heads_.find(pair_key(t, r));
  if (it == pos_heads_.end()) return {};
  return it->second;
}

std::vector<EntityId> NeighborhoodIndex::negative_tails(EntityId h, RelationId r) const {
  std::vector<EntityId> out;
  for (EntityId t : head_neighbors(h)) {
    if (!graph_->contains(Triple{h, r, t})) out.push_back(t);
  }
  return out;
}

std::vector<EntityId> NeighborhoodIndex::negative_heads(EntityId t, RelationId r) const {
  std::vector<EntityId> out;
  for (EntityId h : tail_neighbors(t)) {
    if (!graph_->contains(Triple{h, r, t})) out.push_back(h);
  }
  return out;
}

}  // namespace transa
