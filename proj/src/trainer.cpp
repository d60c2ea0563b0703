#include "transa/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "transa/errors.hpp"
#include "transa/neighborhood_index.hpp"
#include "transa/ranking.hpp"
#include "transa/rng.hpp"

namespace transa {

std::string to_string(MarginMode m) {
  switch (m) {
    case MarginMode::Adaptive:
      return "adaptive";
    case MarginMode::AdaptiveGlobal:
      return "adaptive-global";
    case MarginMode::Fixed:
      return "fixed";
  }
  return "adaptive";
}

MarginMode margin_mode_from_string(const std::string& name) {
  if (name == "adaptive") return MarginMode::Adaptive;
  if (name == "adaptive-global") return MarginMode::AdaptiveGlobal;
  if (name == "fixed") return MarginMode::Fixed;
  throw std::invalid_argument("unknown margin mode: " + name);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (dim < 1) throw std::invalid_argument("dim must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must be in [0, 1]");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (fixed_margin < 0.0) throw std::invalid_argument("fixed margin must be non-negative");
  if (margin_refresh_every < 1) throw std::invalid_argument("margin refresh cadence must be >= 1");
  if (max_corruption_retries < 1) throw std::invalid_argument("corruption retries must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("eval cadence must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (use_active_set) active.validate();
}

double hinge_loss(const EmbeddingModel& model, const Triple& pos, const Triple& neg,
                  double margin) {
  if (margin < 0.0) throw std::invalid_argument("margin must be non-negative");
  double value = score(model, pos) + margin - score(model, neg);
  return value > 0.0 ? value : 0.0;
}

namespace {

// d(norm)/d(residual): sign components for L1 (sign(0) = 0), normalized
// residual for L2 (zero at the singularity), 2v for squared L2.
void norm_gradient(std::span<const double> residual, Dissimilarity dissim,
                   std::span<double> out) {
  switch (dissim) {
    case Dissimilarity::L1:
      for (std::size_t i = 0; i < residual.size(); ++i) {
        out[i] = residual[i] > 0.0 ? 1.0 : (residual[i] < 0.0 ? -1.0 : 0.0);
      }
      return;
    case Dissimilarity::L2: {
      double sq = 0.0;
      for (double x : residual) sq += x * x;
      if (sq == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
      }
      double inv = 1.0 / std::sqrt(sq);
      for (std::size_t i = 0; i < residual.size(); ++i) out[i] = residual[i] * inv;
      return;
    }
    case Dissimilarity::L2Squared:
      for (std::size_t i = 0; i < residual.size(); ++i) out[i] = 2.0 * residual[i];
      return;
  }
}

struct PairGradient {
  double loss = 0.0;
  std::vector<double> pos_dir, neg_dir;  // empty when the hinge is inactive
};

PairGradient pair_gradient(const EmbeddingModel& model, const Triple& pos, const Triple& neg,
                           double margin) {
  if (margin < 0.0) throw std::invalid_argument("margin must be non-negative");
  int d = model.dim();
  std::vector<double> res_pos(static_cast<std::size_t>(d)), res_neg(static_cast<std::size_t>(d));
  auto fill_residual = [&](const Triple& t, std::vector<double>& out) {
    auto h = model.entity(t.head);
    auto r = model.relation(t.relation);
    auto tl = model.entity(t.tail);
    for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = h[i] + r[i] - tl[i];
  };
  fill_residual(pos, res_pos);
  fill_residual(neg, res_neg);

  PairGradient g;
  double s_pos = residual_norm(res_pos, model.dissimilarity());
  double s_neg = residual_norm(res_neg, model.dissimilarity());
  double value = s_pos + margin - s_neg;
  if (value <= 0.0) return g;
  g.loss = value;
  g.pos_dir.resize(static_cast<std::size_t>(d));
  g.neg_dir.resize(static_cast<std::size_t>(d));
  norm_gradient(res_pos, model.dissimilarity(), g.pos_dir);
  norm_gradient(res_neg, model.dissimilarity(), g.neg_dir);
  return g;
}

}  // namespace

SparseGradient hinge_subgradient(const EmbeddingModel& model, const Triple& pos, const Triple& neg,
                                 double margin) {
  PairGradient g = pair_gradient(model, pos, neg, margin);
  SparseGradient out;
  if (g.pos_dir.empty()) return out;
  out.active = true;
  int d = model.dim();

  auto add = [d](auto& entries, std::int32_t id, const std::vector<double>& dir, double sign) {
    for (auto& [existing, vec] : entries) {
      if (existing == id) {
        for (int i = 0; i < d; ++i) vec[static_cast<std::size_t>(i)] += sign * dir[static_cast<std::size_t>(i)];
        return;
      }
    }
    std::vector<double> vec(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) vec[static_cast<std::size_t>(i)] = sign * dir[static_cast<std::size_t>(i)];
    entries.emplace_back(id, std::move(vec));
  };

  // loss = |h + r - t| + M - |h' + r - t'|
  add(out.entities, pos.head, g.pos_dir, +1.0);
  add(out.entities, pos.tail, g.pos_dir, -1.0);
  add(out.relations, pos.relation, g.pos_dir, +1.0);
  add(out.entities, neg.head, g.neg_dir, -1.0);
  add(out.entities, neg.tail, g.neg_dir, +1.0);
  add(out.relations, neg.relation, g.neg_dir, -1.0);
  return out;
}

double sgd_step(EmbeddingModel& model, const Triple& pos, const Triple& neg, double margin,
                double learning_rate) {
  PairGradient g = pair_gradient(model, pos, neg, margin);
  if (g.pos_dir.empty()) return 0.0;
  int d = model.dim();

  auto pos_h = model.entity(pos.head);
  auto pos_t = model.entity(pos.tail);
  auto pos_r = model.relation(pos.relation);
  for (int i = 0; i < d; ++i) {
    double step = learning_rate * g.pos_dir[static_cast<std::size_t>(i)];
    pos_h[i] -= step;
    pos_t[i] += step;
    pos_r[i] -= step;
  }
  auto neg_h = model.entity(neg.head);
  auto neg_t = model.entity(neg.tail);
  auto neg_r = model.relation(neg.relation);
  for (int i = 0; i < d; ++i) {
    double step = learning_rate * g.neg_dir[static_cast<std::size_t>(i)];
    neg_h[i] += step;
    neg_t[i] -= step;
    neg_r[i] += step;
  }

  EntityId touched[4] = {pos.head, pos.tail, neg.head, neg.tail};
  for (int i = 0; i < 4; ++i) {
    bool seen = false;
    for (int j = 0; j < i; ++j) seen = seen || touched[j] == touched[i];
    if (!seen) EmbeddingModel::project_to_unit_ball(model.entity(touched[i]));
  }
  return g.loss;
}

TrainResult train(const KnowledgeGraph& graph, const TrainConfig& config) {
  config.validate();
  bool adaptive =
      config.margin_mode == MarginMode::Adaptive || config.margin_mode == MarginMode::AdaptiveGlobal;

  TrainResult result{init_model(graph.num_entities(), graph.num_relations(), config.dim,
                                config.dissimilarity, config.seed),
                     {}, {}, {}, {}, {}, {}};
  if (config.epochs == 0) return result;
  for (EntityId e = 0; e < graph.num_entities(); ++e) {
    EmbeddingModel::normalize(result.model.entity(e));
  }

  std::optional<NeighborhoodIndex> index;
  if (adaptive) index.emplace(graph);
  std::optional<ActiveSetConfig> active;
  if (config.use_active_set) {
    active = config.active;
    active->rng_seed = config.seed;
  }

  Rng rng(config.seed + 1);
  std::vector<std::size_t> order(graph.train().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  EmbeddingModel last_good = result.model;
  std::optional<EmbeddingModel> best_model;
  double best_rank = std::numeric_limits<double>::infinity();
  int stalls = 0;
  bool stop = false;
  MarginTable table;

  for (int epoch = 0; epoch < config.epochs && !stop; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    bool refreshed = false;
    if (adaptive && epoch % config.margin_refresh_every == 0) {
      table = refresh_table(*index, result.model, config.mu, active, epoch, config.threads);
      refreshed = true;
    }

    shuffle_in_place(order, rng);
    double loss_sum = 0.0;
    for (std::size_t k : order) {
      const Triple& pos = graph.train()[k];
      Triple neg = graph.corrupt(pos, rng, config.max_corruption_retries);
      double margin = config.fixed_margin;
      if (config.margin_mode == MarginMode::Adaptive) {
        margin = table.opt(pos.head, pos.relation);
      } else if (config.margin_mode == MarginMode::AdaptiveGlobal) {
        margin = table.global_mean_opt;
      }
      double loss = sgd_step(result.model, pos, neg, margin, config.learning_rate);
      if (!std::isfinite(loss)) {
        result.model = last_good;
        result.status = TrainStatus::AbortedNonFinite;
        result.diagnostic = "non-finite loss at epoch " + std::to_string(epoch + 1);
        result.epochs_run = epoch;
        if (adaptive) result.margins = std::move(table);
        return result;
      }
      loss_sum += loss;
    }

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(EpochLog{epoch + 1,
                                  loss_sum / static_cast<double>(std::max<std::size_t>(order.size(), 1)),
                                  secs, refreshed});
    result.epochs_run = epoch + 1;
    last_good = result.model;

    if (config.early_stopping && !graph.valid().empty() && (epoch + 1) % config.eval_every == 0 &&
        epoch + 1 < config.epochs) {
      double rank = mean_rank(result.model, graph, graph.valid(), /*filtered=*/false,
                              config.threads);
      if (rank < best_rank) {
        best_rank = rank;
        best_model = result.model;
        stalls = 0;
      } else if (++stalls >= config.patience) {
        stop = true;
      }
    }
  }

  if (best_model) {
    // Keep the best validation snapshot when early stopping was engaged.
    double final_rank =
        mean_rank(result.model, graph, graph.valid(), /*filtered=*/false, config.threads);
    if (final_rank < best_rank) {
      best_rank = final_rank;
    } else {
      result.model = std::move(*best_model);
    }
    result.best_valid_mean_rank = best_rank;
    if (stop) result.status = TrainStatus::EarlyStopped;
  }
  if (adaptive) result.margins = std::move(table);
  return result;
}

}  // namespace transa
