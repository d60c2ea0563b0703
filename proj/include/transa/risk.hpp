#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "transa/embedding_model.hpp"
#include "transa/knowledge_graph.hpp"
#include "transa/margin.hpp"
#include "transa/trainer.hpp"

namespace transa {

/// Where the hinge margin for a training pair comes from: a single constant,
/// the per-(head, relation) table entry, or the table's global mean.
class MarginSource {
 public:
  static MarginSource constant(double margin);
  static MarginSource per_triple(const MarginTable& table);  // caller keeps the table alive
  static MarginSource global_mean(const MarginTable& table);

  double margin_for(const Triple& t) const;
  /// Largest margin this source can hand out over the training split; the
  /// single M plugged into the risk bound (conservative for table sources).
  double max_margin(std::span<const Triple> train) const;
  std::string describe() const;

 private:
  enum class Kind { Constant, PerTriple, GlobalMean };
  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  const MarginTable* table_ = nullptr;
};

/// Hinge loss per training triple against one seeded corruption each;
/// empirical risk is the mean of these.
std::vector<double> per_triple_losses(const EmbeddingModel& model, const KnowledgeGraph& graph,
                                      const MarginSource& margins, std::uint64_t corruption_seed);
double empirical_risk(const EmbeddingModel& model, const KnowledgeGraph& graph,
                      const MarginSource& margins, std::uint64_t corruption_seed);

/// Largest training-triple score. Errors on an empty train split.
double max_train_score(const EmbeddingModel& model, const KnowledgeGraph& graph);

/// Replace-one stability constant: twice the largest training score.
double stability_beta(const EmbeddingModel& model, const KnowledgeGraph& graph);

/// High-probability risk bound
///   R <= R_emp + sqrt( (M + f)^2 / (2 n delta) + 6 f (M + f) / delta )
/// with f the largest training score.
double generalization_bound(double empirical_risk, double f_hat, double margin, std::int64_t n,
                            double delta);

struct RiskReport {
  double empirical_risk = 0.0;
  double f_hat = 0.0;
  double beta = 0.0;  // 2 * f_hat
  std::int64_t n = 0;
  double delta = 0.0;
  double margin = 0.0;  // the M used in the bound
  double bound = 0.0;
  std::optional<double> held_out_risk;  // mean hinge over validation, same convention
  std::uint64_t corruption_seed = 0;
  std::string margin_convention;
};

RiskReport risk_report(const EmbeddingModel& model, const KnowledgeGraph& graph,
                       const MarginSource& margins, double delta, std::uint64_t corruption_seed,
                       bool include_held_out = false);
std::string to_json(const RiskReport& report);

/// Trains the full pipeline on S and on S with the training triple at `index`
/// replaced, then reports the largest absolute per-pair loss change between
/// the two models over S's seeded (positive, corruption) pairs with constant
/// margin config.fixed_margin. Opt-in exact stability probe; refuses more
/// than 200 training triples.
double replace_one_stability_probe(const KnowledgeGraph& graph, const TrainConfig& config,
                                   std::size_t index, const Triple& replacement,
                                   std::uint64_t corruption_seed);

struct SweepRow {
  double margin = 0.0;
  double raw_mean_rank = 0.0;
  double filtered_mean_rank = 0.0;
  double empirical_risk = 0.0;
  double f_hat = 0.0;
  double beta = 0.0;
  double bound = 0.0;
  int epochs_run = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double delta = 0.0;
  std::uint64_t risk_seed = 0;
};

/// Trains one fixed-margin model per margin value and evaluates each: link
/// prediction over test plus the risk diagnostics above.
SweepReport margin_sweep(const KnowledgeGraph& graph, const std::vector<double>& margins,
                         const TrainConfig& base, double delta = 0.05,
                         std::uint64_t risk_seed = 12345);

/// Header: margin raw_mean_rank filtered_mean_rank empirical_risk f_hat beta bound
std::string to_tsv(const SweepReport& report);
std::string to_json(const SweepReport& report);

}  // namespace transa
