#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "transa/embedding_model.hpp"
#include "transa/neighborhood_index.hpp"

namespace transa {

/// Sampling parameters for the accelerated entity-margin path.
struct ActiveSetConfig {
  double fraction = 0.1;  // share of each negative set examined per round, (0, 1]
  int rounds = 5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Cached per-locality margins: m_ent per entity, m_rel and the convex
/// combination m_opt per (entity, relation).
struct MarginTable {
  double mu = 0.5;
  int epoch_computed = 0;
  std::unordered_map<EntityId, double> m_ent;
  std::unordered_map<std::uint64_t, double> m_rel;
  std::unordered_map<std::uint64_t, double> m_opt;
  double global_mean_opt = 0.0;

  double ent(EntityId h) const;
  double rel(EntityId h, RelationId r) const;
  double opt(EntityId h, RelationId r) const;

  // `entity<TAB>m_ent` and `entity<TAB>relation<TAB>m_rel<TAB>m_opt`, sorted by id.
  void save_entity_tsv(const std::filesystem::path& path) const;
  void save_pair_tsv(const std::filesystem::path& path) const;
};

/// Smallest |dist(anchor, negative) - dist(anchor, positive)| over every
/// positive/negative pair; distances under the model's margin norm. The set
/// views may overlap, in which case the minimum is 0.
double min_absolute_gap(const EmbeddingModel& model, EntityId anchor,
                        std::span<const EntityId> positives, std::span<const EntityId> negatives);

/// Per-relation minimal absolute gap between negative and positive neighbor
/// distances, averaged over the entity's relations; relations with no
/// negatives contribute 0 while still counting in the denominator. Entities
/// that never head a training triple fall back to the tail-anchored mirror;
/// entities absent from training have no margin and raise invalid_argument.
double entity_margin_exact(EntityId h, const NeighborhoodIndex& index, const EmbeddingModel& model);

/// Sampled variant: per relation and round, the farthest positive is located
/// exactly and ceil(fraction * |N|) negatives are drawn without replacement,
/// weighted by exp(-dist to that positive); per-relation minima are averaged
/// over rounds. fraction = 1, rounds = 1 reproduces the exact path.
double entity_margin_active(EntityId h, const NeighborhoodIndex& index, const EmbeddingModel& model,
                            const ActiveSetConfig& cfg);

/// Smallest excess of a co-occurring relation's vector norm over |r|, or 0
/// when no co-occurring relation is at least as long.
double relation_margin(EntityId h, RelationId r, const NeighborhoodIndex& index,
                       const EmbeddingModel& model);

/// mu * m_ent + (1 - mu) * m_rel.
double combined_margin(double mu, double m_ent, double m_rel);

/// Recomputes m_ent for every training head and m_rel/m_opt for every
/// (head, relation) training pair from the current embeddings. With an
/// ActiveSetConfig the sampled path is used (per-entity streams derived from
/// cfg.rng_seed and epoch); otherwise the exact path. Deterministic for any
/// thread count.
MarginTable refresh_table(const NeighborhoodIndex& index, const EmbeddingModel& model, double mu,
                          const std::optional<ActiveSetConfig>& active, int epoch, int threads = 1);

}  // namespace transa
