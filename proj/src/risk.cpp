#include "transa/risk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "transa/errors.hpp"
#include "transa/ranking.hpp"
#include "transa/rng.hpp"

namespace transa {

MarginSource MarginSource::constant(double margin) {
  if (margin < 0.0) throw std::invalid_argument("margin must be non-negative");
  MarginSource s;
  s.kind_ = Kind::Constant;
  s.value_ = margin;
  return s;
}

MarginSource MarginSource::per_triple(const MarginTable& table) {
  MarginSource s;
  s.kind_ = Kind::PerTriple;
  s.table_ = &table;
  return s;
}

MarginSource MarginSource::global_mean(const MarginTable& table) {
  MarginSource s;
  s.kind_ = Kind::GlobalMean;
  s.table_ = &table;
  s.value_ = table.global_mean_opt;
  return s;
}

double MarginSource::margin_for(const Triple& t) const {
  switch (kind_) {
    case Kind::Constant:
    case Kind::GlobalMean:
      return value_;
    case Kind::PerTriple: {
      // Held-out triples may pair a head with a relation it never leads in
      // train; those fall back to the table's pooled mean.
      auto it = table_->m_opt.find(pair_key(t.head, t.relation));
      return it != table_->m_opt.end() ? it->second : table_->global_mean_opt;
    }
  }
  return value_;
}

double MarginSource::max_margin(std::span<const Triple> train) const {
  if (kind_ != Kind::PerTriple) return value_;
  double best = 0.0;
  for (const Triple& t : train) best = std::max(best, table_->opt(t.head, t.relation));
  return best;
}

std::string MarginSource::describe() const {
  switch (kind_) {
    case Kind::Constant:
      return "constant";
    case Kind::PerTriple:
      return "per-pair table (pooled mean for pairs outside it)";
    case Kind::GlobalMean:
      return "table global mean";
  }
  return "constant";
}

std::vector<double> per_triple_losses(const EmbeddingModel& model, const KnowledgeGraph& graph,
                                      const MarginSource& margins, std::uint64_t corruption_seed) {
  Rng rng(corruption_seed);
  std::vector<double> losses;
  losses.reserve(graph.train().size());
  for (const Triple& pos : graph.train()) {
    Triple neg = graph.corrupt(pos, rng);
    losses.push_back(hinge_loss(model, pos, neg, margins.margin_for(pos)));
  }
  return losses;
}

double empirical_risk(const EmbeddingModel& model, const KnowledgeGraph& graph,
                      const MarginSource& margins, std::uint64_t corruption_seed) {
  if (graph.train().empty()) throw DataError("train split is empty");
  auto losses = per_triple_losses(model, graph, margins, corruption_seed);
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(losses.size());
}

double max_train_score(const EmbeddingModel& model, const KnowledgeGraph& graph) {
  if (graph.train().empty()) throw DataError("train split is empty");
  double best = 0.0;
  for (const Triple& t : graph.train()) best = std::max(best, score(model, t));
  return best;
}

double stability_beta(const EmbeddingModel& model, const KnowledgeGraph& graph) {
  return 2.0 * max_train_score(model, graph);
}

double generalization_bound(double empirical_risk, double f_hat, double margin, std::int64_t n,
                            double delta) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (margin < 0.0) throw std::invalid_argument("margin must be non-negative");
  if (f_hat < 0.0) throw std::invalid_argument("f_hat must be non-negative");
  double top = margin + f_hat;
  double radicand = top * top / (2.0 * static_cast<double>(n) * delta) + 6.0 * f_hat * top / delta;
  return empirical_risk + std::sqrt(radicand);
}

RiskReport risk_report(const EmbeddingModel& model, const KnowledgeGraph& graph,
                       const MarginSource& margins, double delta, std::uint64_t corruption_seed,
                       bool include_held_out) {
  RiskReport report;
  report.empirical_risk = empirical_risk(model, graph, margins, corruption_seed);
  report.f_hat = max_train_score(model, graph);
  report.beta = 2.0 * report.f_hat;
  report.n = static_cast<std::int64_t>(graph.train().size());
  report.delta = delta;
  report.margin = margins.max_margin(graph.train());
  report.bound = generalization_bound(report.empirical_risk, report.f_hat, report.margin, report.n,
                                      delta);
  report.corruption_seed = corruption_seed;
  report.margin_convention = margins.describe();
  if (include_held_out && !graph.valid().empty()) {
    Rng rng(corruption_seed);
    double sum = 0.0;
    for (const Triple& pos : graph.valid()) {
      Triple neg = graph.corrupt(pos, rng);
      sum += hinge_loss(model, pos, neg, margins.margin_for(pos));
    }
    report.held_out_risk = sum / static_cast<double>(graph.valid().size());
  }
  return report;
}

std::string to_json(const RiskReport& report) {
  nlohmann::json j{{"empirical_risk", report.empirical_risk},
                   {"f_hat", report.f_hat},
                   {"beta", report.beta},
                   {"n", report.n},
                   {"delta", report.delta},
                   {"margin", report.margin},
                   {"bound", report.bound},
                   {"corruption_seed", report.corruption_seed},
                   {"margin_convention", report.margin_convention},
                   {"risk_convention", "mean hinge over train, one seeded corruption per triple"}};
  if (report.held_out_risk) j["held_out_risk"] = *report.held_out_risk;
  return j.dump(2);
}

double replace_one_stability_probe(const KnowledgeGraph& graph, const TrainConfig& config,
                                   std::size_t index, const Triple& replacement,
                                   std::uint64_t corruption_seed) {
  if (graph.train().size() > 200) {
    throw std::invalid_argument("replace-one retrain probe is limited to <= 200 training triples");
  }
  if (index >= graph.train().size()) throw std::invalid_argument("replacement index out of range");

  std::vector<Triple> perturbed(graph.train().begin(), graph.train().end());
  perturbed[index] = replacement;
  KnowledgeGraph alt = KnowledgeGraph::from_triples(
      graph.num_entities(), graph.num_relations(), std::move(perturbed),
      {graph.valid().begin(), graph.valid().end()}, {graph.test().begin(), graph.test().end()});

  EmbeddingModel base_model = train(graph, config).model;
  EmbeddingModel alt_model = train(alt, config).model;

  // Same (positive, corruption, margin) terms for both models.
  Rng rng(corruption_seed);
  double worst = 0.0;
  for (const Triple& pos : graph.train()) {
    Triple neg = graph.corrupt(pos, rng);
    double a = hinge_loss(base_model, pos, neg, config.fixed_margin);
    double b = hinge_loss(alt_model, pos, neg, config.fixed_margin);
    worst = std::max(worst, std::fabs(a - b));
  }
  return worst;
}

SweepReport margin_sweep(const KnowledgeGraph& graph, const std::vector<double>& margins,
                         const TrainConfig& base, double delta, std::uint64_t risk_seed) {
  if (margins.empty()) throw std::invalid_argument("margin sweep needs at least one margin");
  SweepReport report;
  report.delta = delta;
  report.risk_seed = risk_seed;
  for (double m : margins) {
    TrainConfig config = base;
    config.margin_mode = MarginMode::Fixed;
    config.fixed_margin = m;
    TrainResult result = train(graph, config);
    EvalReport eval = link_prediction(result.model, graph, config.threads);
    MarginSource source = MarginSource::constant(m);
    SweepRow row;
    row.margin = m;
    row.raw_mean_rank = eval.raw.mean_rank;
    row.filtered_mean_rank = eval.filtered.mean_rank;
    row.empirical_risk = empirical_risk(result.model, graph, source, risk_seed);
    row.f_hat = max_train_score(result.model, graph);
    row.beta = 2.0 * row.f_hat;
    row.bound = generalization_bound(row.empirical_risk, row.f_hat, m,
                                     static_cast<std::int64_t>(graph.train().size()), delta);
    row.epochs_run = result.epochs_run;
    report.rows.push_back(row);
  }
  return report;
}

std::string to_tsv(const SweepReport& report) {
  std::ostringstream os;
  os << "margin\traw_mean_rank\tfiltered_mean_rank\tempirical_risk\tf_hat\tbeta\tbound\n";
  os.precision(17);
  for (const SweepRow& row : report.rows) {
    os << row.margin << '\t' << row.raw_mean_rank << '\t' << row.filtered_mean_rank << '\t'
       << row.empirical_risk << '\t' << row.f_hat << '\t' << row.beta << '\t' << row.bound << '\n';
  }
  return os.str();
}

std::string to_json(const SweepReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& row : report.rows) {
    rows.push_back({{"margin", row.margin},
                    {"raw_mean_rank", row.raw_mean_rank},
                    {"filtered_mean_rank", row.filtered_mean_rank},
                    {"empirical_risk", row.empirical_risk},
                    {"f_hat", row.f_hat},
                    {"beta", row.beta},
                    {"bound", row.bound},
                    {"epochs_run", row.epochs_run}});
  }
  nlohmann::json j{{"delta", report.delta}, {"risk_seed", report.risk_seed}, {"rows", rows}};
  return j.dump(2);
}

}  // namespace transa
