#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "transa/rng.hpp"
#include "transa/triple.hpp"

namespace transa {

enum class TripleFormat { TsvNames, TsvIds };

std::string to_string(TripleFormat f);
TripleFormat triple_format_from_string(const std::string& name);  // "names" | "ids"

// Dense bidirectional string<->id map. Ids are assigned 0,1,2,... in
// first-appearance order.
class Vocab {
 public:
  std::int32_t get_or_add(const std::string& name);
  std::int32_t id_of(const std::string& name) const;  // -1 when absent
  const std::string& name_of(std::int32_t id) const;
  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

/// Immutable triple store: vocabularies, train/valid/test splits and the set
/// of all known-correct triples used for filtering and negative sampling.
class KnowledgeGraph {
 public:
  /// Reads the three split files. Each line is `head<TAB>relation<TAB>tail`;
  /// with `labeled` set, valid/test lines carry a fourth field in {1,-1} and
  /// the -1 triples are kept as labeled negatives outside correct_set.
  static KnowledgeGraph load(const std::filesystem::path& train_path,
                             const std::filesystem::path& valid_path,
                             const std::filesystem::path& test_path, TripleFormat format,
                             bool labeled = false);

  /// Builds a graph in memory; names are synthesized as e<i> / r<i>.
  static KnowledgeGraph from_triples(std::int32_t num_entities, std::int32_t num_relations,
                                     std::vector<Triple> train, std::vector<Triple> valid = {},
                                     std::vector<Triple> test = {});

  void save(const std::filesystem::path& dir) const;
  static KnowledgeGraph load_dir(const std::filesystem::path& dir);

  std::int32_t num_entities() const { return entities_.size(); }
  std::int32_t num_relations() const { return relations_.size(); }
  const Vocab& entities() const { return entities_; }
  const Vocab& relations() const { return relations_; }

  std::span<const Triple> train() const { return train_; }
  std::span<const Triple> valid() const { return valid_; }
  std::span<const Triple> test() const { return test_; }
  std::span<const Triple> valid_negatives() const { return valid_neg_; }
  std::span<const Triple> test_negatives() const { return test_neg_; }

  bool contains(const Triple& t) const { return correct_.count(t) != 0; }
  const TripleSet& correct_set() const { return correct_; }

  /// Uniformly corrupts head or tail, resampling (fresh side and entity each
  /// attempt) until the result is not a known-correct triple.
  Triple corrupt(const Triple& triple, Rng& rng, int max_retries = 100) const;

  /// Splits relations into k near-equal groups by seeded shuffle and restricts
  /// every split to each group; entity/relation vocabularies are rebuilt per
  /// subgraph. Returns the shuffled relation assignment via `assignment_out`
  /// (original relation id -> group) when non-null.
  std::vector<KnowledgeGraph> partition(std::int32_t k, Rng& rng,
                                        std::vector<std::int32_t>* assignment_out = nullptr) const;

 private:
  KnowledgeGraph() = default;
  void rebuild_correct_set();
  void validate() const;

  Vocab entities_;
  Vocab relations_;
  std::vector<Triple> train_, valid_, test_;
  std::vector<Triple> valid_neg_, test_neg_;  // labeled datasets only
  TripleSet correct_;
};

}  // namespace transa
