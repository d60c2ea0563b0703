#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "transa/dissimilarity.hpp"
#include "transa/triple.hpp"

namespace transa {

/// Dense entity and relation vectors in R^d plus the dissimilarity choice.
class EmbeddingModel {
 public:
  EmbeddingModel(std::int32_t num_entities, std::int32_t num_relations, int dim,
                 Dissimilarity dissim);

  std::int32_t num_entities() const { return num_entities_; }
  std::int32_t num_relations() const { return num_relations_; }
  int dim() const { return dim_; }
  Dissimilarity dissimilarity() const { return dissim_; }

  std::span<double> entity(EntityId id) {
    return {entity_vecs_.data() + static_cast<std::size_t>(id) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> entity(EntityId id) const {
    return {entity_vecs_.data() + static_cast<std::size_t>(id) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> relation(RelationId id) {
    return {relation_vecs_.data() + static_cast<std::size_t>(id) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> relation(RelationId id) const {
    return {relation_vecs_.data() + static_cast<std::size_t>(id) * dim_, static_cast<std::size_t>(dim_)};
  }

  std::vector<double>& entity_data() { return entity_vecs_; }
  const std::vector<double>& entity_data() const { return entity_vecs_; }
  std::vector<double>& relation_data() { return relation_vecs_; }
  const std::vector<double>& relation_data() const { return relation_vecs_; }

  /// Scales the vector to unit L2 norm (no-op on the zero vector).
  static void normalize(std::span<double> v);
  /// Projects the vector into the unit L2 ball.
  static void project_to_unit_ball(std::span<double> v);

  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(const std::filesystem::path& path);

 private:
  std::int32_t num_entities_, num_relations_;
  int dim_;
  Dissimilarity dissim_;
  std::vector<double> entity_vecs_, relation_vecs_;
};

/// Components drawn uniformly from [-6/sqrt(d), 6/sqrt(d)] with mt19937_64(seed)
/// (entity rows first, then relation rows); relation vectors are normalized to
/// unit L2 norm once here. Entities are normalized by the trainer before the
/// first batch.
EmbeddingModel init_model(std::int32_t num_entities, std::int32_t num_relations, int dim,
                          Dissimilarity dissim, std::uint64_t seed);

/// f(h, r, t) = |h + r - t| under the model's dissimilarity.
double score(const EmbeddingModel& model, const Triple& triple);

}  // namespace transa
