#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "transa/embedding_model.hpp"
#include "transa/knowledge_graph.hpp"
#include "transa/margin.hpp"

namespace transa {

enum class MarginMode { Adaptive, AdaptiveGlobal, Fixed };

std::string to_string(MarginMode m);
MarginMode margin_mode_from_string(const std::string& name);  // "adaptive" | "adaptive-global" | "fixed"

struct TrainConfig {
  double learning_rate = 0.01;
  int dim = 50;
  int batch_size = 120;
  double mu = 0.5;
  int epochs = 1000;
  MarginMode margin_mode = MarginMode::Adaptive;
  double fixed_margin = 1.0;      // Fixed mode only
  int margin_refresh_every = 1;   // epochs between margin table refreshes
  bool use_active_set = false;    // sampled entity margins instead of exact
  ActiveSetConfig active;
  Dissimilarity dissimilarity = Dissimilarity::L1;
  std::uint64_t seed = 0;
  int max_corruption_retries = 100;
  // Validation-based early stopping, checked every eval_every epochs.
  bool early_stopping = true;
  int eval_every = 50;
  int patience = 3;
  int threads = 1;  // margin refresh and validation ranking only; SGD is sequential

  void validate() const;
};

struct EpochLog {
  int epoch = 0;                // 1-based
  double mean_loss = 0.0;       // mean hinge over the epoch's sampled pairs
  double wall_seconds = 0.0;
  bool margin_refreshed = false;
};

enum class TrainStatus { Completed, EarlyStopped, AbortedNonFinite };

struct TrainResult {
  EmbeddingModel model;
  std::vector<EpochLog> log;
  TrainStatus status = TrainStatus::Completed;
  int epochs_run = 0;
  std::optional<double> best_valid_mean_rank;
  std::string diagnostic;  // set when aborted
  std::optional<MarginTable> margins;  // last table, adaptive modes only
};

/// max(0, score(pos) + margin - score(neg)).
double hinge_loss(const EmbeddingModel& model, const Triple& pos, const Triple& neg, double margin);

/// Subgradient of the hinge at the current model, aggregated per distinct
/// vector (a shared entity or the shared relation accumulates both terms).
struct SparseGradient {
  bool active = false;
  std::vector<std::pair<EntityId, std::vector<double>>> entities;
  std::vector<std::pair<RelationId, std::vector<double>>> relations;
};
SparseGradient hinge_subgradient(const EmbeddingModel& model, const Triple& pos, const Triple& neg,
                                 double margin);

/// One SGD step on the hinge; touched entity vectors are projected back into
/// the unit L2 ball. Returns the pre-step loss; an inactive hinge leaves the
/// model untouched.
double sgd_step(EmbeddingModel& model, const Triple& pos, const Triple& neg, double margin,
                double learning_rate);

/// Seeded SGD over shuffled epochs, one corruption per positive, per-triple
/// margins in the adaptive modes. Deterministic given the config (the epoch
/// wall times aside).
TrainResult train(const KnowledgeGraph& graph, const TrainConfig& config);

}  // namespace transa
