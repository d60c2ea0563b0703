// Command-line driver: ingest/partition datasets, train embeddings, evaluate
// link prediction and triple classification, compute risk-bound diagnostics,
// sweep fixed margins and export tables. Every run drops a re-runnable
// key=value config into its output directory.
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "transa/classification.hpp"
#include "transa/errors.hpp"
#include "transa/knowledge_graph.hpp"
#include "transa/margin.hpp"
#include "transa/neighborhood_index.hpp"
#include "transa/ranking.hpp"
#include "transa/risk.hpp"
#include "transa/trainer.hpp"

namespace fs = std::filesystem;
using namespace transa;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw DataError("failed writing " + path.string());
}

void write_config(const CLI::App* sub, const fs::path& out_dir) {
  // The section header lets `--config` replay the file from the root parser.
  write_text(out_dir / "config.txt",
             "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false));
}

// Shortest decimal form that round-trips through strtod.
std::string value_str(double x) { return nlohmann::json(x).dump(); }

std::string status_string(TrainStatus s) {
  switch (s) {
    case TrainStatus::Completed:
      return "completed";
    case TrainStatus::EarlyStopped:
      return "early-stopped";
    case TrainStatus::AbortedNonFinite:
      return "aborted-non-finite";
  }
  return "completed";
}

// Training options shared by `train` and (minus the margin mode) `sweep`.
struct TrainOpts {
  std::string graph_dir;
  std::string out_dir;
  double lr = 0.01;
  int dim = 50;
  int batch = 120;
  double mu = 0.5;
  int epochs = 1000;
  std::string margin_mode = "adaptive";
  std::string dissim = "l1";
  int refresh_every = 1;
  bool active = false;
  double active_fraction = 0.1;
  int active_rounds = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  int eval_every = 50;
  int patience = 3;
  bool no_early_stop = false;
  std::string preset;
  bool grid = false;

  CLI::Option* lr_opt = nullptr;
  CLI::Option* dim_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* dissim_opt = nullptr;
};

void add_train_options(CLI::App* cmd, TrainOpts& o, bool with_margin_mode) {
  cmd->add_option("--graph", o.graph_dir, "Serialized graph directory")->required();
  cmd->add_option("--out", o.out_dir, "Output directory")->required();
  o.lr_opt = cmd->add_option("--lr", o.lr, "Learning rate")->capture_default_str();
  o.dim_opt = cmd->add_option("--dim", o.dim, "Embedding dimension")->capture_default_str();
  o.batch_opt = cmd->add_option("--batch", o.batch, "Batch size")->capture_default_str();
  o.mu_opt = cmd->add_option("--mu", o.mu, "Entity/relation margin trade-off in [0,1]")->capture_default_str();
  cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  if (with_margin_mode) {
    cmd->add_option("--margin-mode", o.margin_mode,
                    "adaptive | adaptive-global | fixed:<M>")->capture_default_str();
  }
  o.dissim_opt = cmd->add_option("--dissim", o.dissim, "l1 | l2 | l2sq")->capture_default_str();
  cmd->add_option("--refresh-every", o.refresh_every, "Epochs between margin refreshes")->capture_default_str();
  cmd->add_flag("--active", o.active, "Sampled entity margins instead of exact");
  cmd->add_option("--active-fraction", o.active_fraction, "Negative fraction per round")->capture_default_str();
  cmd->add_option("--active-rounds", o.active_rounds, "Sampling rounds")->capture_default_str();
  cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (margins and ranking)")->capture_default_str();
  cmd->add_option("--eval-every", o.eval_every, "Epochs between validation checks")->capture_default_str();
  cmd->add_option("--patience", o.patience, "Stalled checks before stopping")->capture_default_str();
  cmd->add_flag("--no-early-stop", o.no_early_stop, "Disable validation-based early stopping");
}

// Emitted instead of CLI11's echo so presets and grid selection are baked in:
// re-running with `--config <out>/config.txt` reproduces the checkpoint.
std::string train_config_text(const TrainOpts& o, bool with_margin_mode) {
  std::ostringstream os;
  os << "[" << (with_margin_mode ? "train" : "sweep") << "]\n"
     << "graph=" << o.graph_dir << "\n"
     << "out=" << o.out_dir << "\n"
     << "lr=" << value_str(o.lr) << "\n"
     << "dim=" << o.dim << "\n"
     << "batch=" << o.batch << "\n"
     << "mu=" << value_str(o.mu) << "\n"
     << "epochs=" << o.epochs << "\n";
  if (with_margin_mode) os << "margin-mode=" << o.margin_mode << "\n";
  os << "dissim=" << o.dissim << "\n"
     << "refresh-every=" << o.refresh_every << "\n"
     << "active=" << (o.active ? "true" : "false") << "\n"
     << "active-fraction=" << value_str(o.active_fraction) << "\n"
     << "active-rounds=" << o.active_rounds << "\n"
     << "seed=" << o.seed << "\n"
     << "threads=" << o.threads << "\n"
     << "eval-every=" << o.eval_every << "\n"
     << "patience=" << o.patience << "\n"
     << "no-early-stop=" << (o.no_early_stop ? "true" : "false") << "\n";
  return os.str();
}

struct Preset {
  double lr;
  int dim;
  int batch;
  double mu;
  std::string dissim;
};

// Published optimal settings per benchmark.
const std::map<std::string, Preset>& presets() {
  static const std::map<std::string, Preset> table = {
      {"wn18-lp", {0.001, 100, 1440, 0.5, "l1"}},
      {"fb15k-lp", {0.001, 50, 4800, 0.5, "l1"}},
      {"wn11-tc", {0.001, 220, 120, 0.5, "l1"}},
      {"fb13-tc", {0.001, 50, 480, 0.5, "l1"}},
  };
  return table;
}

void apply_preset(TrainOpts& o) {
  if (o.preset.empty()) return;
  auto it = presets().find(o.preset);
  if (it == presets().end()) {
    throw std::invalid_argument("unknown preset: " + o.preset +
                                " (expected wn18-lp, fb15k-lp, wn11-tc or fb13-tc)");
  }
  const Preset& p = it->second;  // explicit flags win over the preset
  if (o.lr_opt->count() == 0) o.lr = p.lr;
  if (o.dim_opt->count() == 0) o.dim = p.dim;
  if (o.batch_opt->count() == 0) o.batch = p.batch;
  if (o.mu_opt->count() == 0) o.mu = p.mu;
  if (o.dissim_opt->count() == 0) o.dissim = p.dissim;
}

TrainConfig to_config(const TrainOpts& o, bool with_margin_mode) {
  TrainConfig config;
  config.learning_rate = o.lr;
  config.dim = o.dim;
  config.batch_size = o.batch;
  config.mu = o.mu;
  config.epochs = o.epochs;
  if (with_margin_mode) {
    std::string mode = o.margin_mode;
    if (auto colon = mode.find(':'); colon != std::string::npos) {
      std::string value = mode.substr(colon + 1);
      mode = mode.substr(0, colon);
      if (mode != "fixed") throw std::invalid_argument("only fixed:<M> takes a value");
      try {
        std::size_t used = 0;
        config.fixed_margin = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::invalid_argument("bad fixed margin: " + value);
      }
    }
    config.margin_mode = margin_mode_from_string(mode);
  }
  config.margin_refresh_every = o.refresh_every;
  config.use_active_set = o.active;
  config.active.fraction = o.active_fraction;
  config.active.rounds = o.active_rounds;
  config.dissimilarity = dissimilarity_from_string(o.dissim);
  config.seed = o.seed;
  config.threads = o.threads;
  config.eval_every = o.eval_every;
  config.patience = o.patience;
  config.early_stopping = !o.no_early_stop;
  config.validate();
  return config;
}

nlohmann::json config_json(const TrainConfig& c) {
  return {{"lr", c.learning_rate},
          {"dim", c.dim},
          {"batch", c.batch_size},
          {"mu", c.mu},
          {"epochs", c.epochs},
          {"margin_mode", to_string(c.margin_mode)},
          {"fixed_margin", c.fixed_margin},
          {"refresh_every", c.margin_refresh_every},
          {"active", c.use_active_set},
          {"active_fraction", c.active.fraction},
          {"active_rounds", c.active.rounds},
          {"dissim", to_string(c.dissimilarity)},
          {"seed", c.seed},
          {"threads", c.threads},
          {"eval_every", c.eval_every},
          {"patience", c.patience},
          {"early_stopping", c.early_stopping}};
}

nlohmann::json margin_summary_json(const MarginTable& table) {
  auto mean_of = [](const auto& map) {
    if (map.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [k, v] : map) sum += v;
    return sum / static_cast<double>(map.size());
  };
  return {{"mu", table.mu},
          {"epoch_computed", table.epoch_computed},
          {"entities", table.m_ent.size()},
          {"pairs", table.m_opt.size()},
          {"mean_m_ent", mean_of(table.m_ent)},
          {"mean_m_rel", mean_of(table.m_rel)},
          {"mean_m_opt", mean_of(table.m_opt)},
          {"global_mean_opt", table.global_mean_opt}};
}

void check_compatible(const EmbeddingModel& model, const KnowledgeGraph& graph) {
  if (model.num_entities() != graph.num_entities() ||
      model.num_relations() != graph.num_relations()) {
    throw DataError("checkpoint shape (" + std::to_string(model.num_entities()) + " entities, " +
                    std::to_string(model.num_relations()) + " relations) does not match graph (" +
                    std::to_string(graph.num_entities()) + " entities, " +
                    std::to_string(graph.num_relations()) + " relations)");
  }
}

std::string graph_summary(const KnowledgeGraph& g) {
  std::ostringstream os;
  os << "rels=" << g.num_relations() << " ents=" << g.num_entities() << " train="
     << g.train().size() << " valid=" << g.valid().size() << " test=" << g.test().size();
  return os.str();
}

// ---- subcommand bodies ----

struct IngestOpts {
  std::string train_path, valid_path, test_path;
  std::string format = "names";
  bool labeled = false;
  std::string out_dir;
};

void cmd_ingest(const CLI::App* sub, const IngestOpts& o) {
  KnowledgeGraph graph = KnowledgeGraph::load(o.train_path, o.valid_path, o.test_path,
                                              triple_format_from_string(o.format), o.labeled);
  graph.save(o.out_dir);
  write_config(sub, o.out_dir);
  std::cout << graph_summary(graph) << "\n";
}

struct PartitionOpts {
  std::string graph_dir;
  int k = 2;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void cmd_partition(const CLI::App* sub, const PartitionOpts& o) {
  KnowledgeGraph graph = KnowledgeGraph::load_dir(o.graph_dir);
  Rng rng(o.seed);
  std::vector<std::int32_t> assignment;
  std::vector<KnowledgeGraph> parts = graph.partition(o.k, rng, &assignment);

  fs::create_directories(o.out_dir);
  nlohmann::json manifest{{"k", o.k}, {"seed", o.seed}};
  nlohmann::json part_list = nlohmann::json::array();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::string name = "part_" + std::to_string(i);
    parts[i].save(fs::path(o.out_dir) / name);
    part_list.push_back({{"dir", name},
                         {"relations", parts[i].num_relations()},
                         {"entities", parts[i].num_entities()},
                         {"train", parts[i].train().size()},
                         {"valid", parts[i].valid().size()},
                         {"test", parts[i].test().size()}});
    std::cout << name << ": " << graph_summary(parts[i]) << "\n";
  }
  manifest["parts"] = part_list;
  nlohmann::json assign = nlohmann::json::object();
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    assign[graph.relations().name_of(static_cast<RelationId>(r))] = assignment[r];
  }
  manifest["assignment"] = assign;
  write_text(fs::path(o.out_dir) / "manifest.json", manifest.dump(2) + "\n");
  write_config(sub, o.out_dir);
}

void write_train_outputs(const fs::path& out, const KnowledgeGraph& graph,
                         const TrainConfig& config, const TrainResult& result,
                         const std::string& graph_dir) {
  result.model.save(out / "checkpoint.bin");

  std::ostringstream log;
  for (const EpochLog& e : result.log) {
    nlohmann::json line{{"epoch", e.epoch},
                        {"mean_loss", e.mean_loss},
                        {"wall_seconds", e.wall_seconds},
                        {"margin_refreshed", e.margin_refreshed}};
    log << line.dump() << "\n";
  }
  write_text(out / "train_log.jsonl", log.str());

  nlohmann::json sidecar{{"config", config_json(config)},
                         {"graph", graph_dir},
                         {"entities", graph.num_entities()},
                         {"relations", graph.num_relations()},
                         {"status", status_string(result.status)},
                         {"epochs_run", result.epochs_run}};
  if (result.best_valid_mean_rank) sidecar["best_valid_mean_rank"] = *result.best_valid_mean_rank;
  if (!result.diagnostic.empty()) sidecar["diagnostic"] = result.diagnostic;
  sidecar["margins"] = result.margins ? margin_summary_json(*result.margins) : nlohmann::json();
  write_text(out / "checkpoint.json", sidecar.dump(2) + "\n");
}

void cmd_train(TrainOpts& o) {
  apply_preset(o);
  TrainConfig config = to_config(o, true);
  KnowledgeGraph graph = KnowledgeGraph::load_dir(o.graph_dir);
  fs::path out(o.out_dir);
  fs::create_directories(out);

  std::optional<TrainResult> result;
  if (o.grid) {
    if (graph.valid().empty()) throw DataError("--grid needs a validation split for selection");
    const std::vector<double> lr_grid{0.1, 0.01, 0.001};
    std::vector<double> mu_grid{config.mu};
    if (config.margin_mode != MarginMode::Fixed) mu_grid = {0.0, 0.25, 0.5, 0.75, 1.0};

    std::ostringstream rows;
    rows << "lr\tmu\tvalid_mean_rank\tepochs_run\tselected\n";
    double best = std::numeric_limits<double>::infinity();
    TrainConfig best_config = config;
    std::vector<std::tuple<double, double, double, int>> tried;
    for (double lr : lr_grid) {
      for (double mu : mu_grid) {
        TrainConfig candidate = config;
        candidate.learning_rate = lr;
        candidate.mu = mu;
        TrainResult r = train(graph, candidate);
        double rank = mean_rank(r.model, graph, graph.valid(), false, config.threads);
        tried.emplace_back(lr, mu, rank, r.epochs_run);
        if (rank < best) {
          best = rank;
          best_config = candidate;
          result = std::move(r);
        }
      }
    }
    for (const auto& [lr, mu, rank, epochs] : tried) {
      rows << lr << '\t' << mu << '\t' << rank << '\t' << epochs << '\t'
           << (lr == best_config.learning_rate && mu == best_config.mu ? 1 : 0) << "\n";
    }
    write_text(out / "grid.tsv", rows.str());
    config = best_config;
    o.lr = best_config.learning_rate;
    o.mu = best_config.mu;
    std::cout << "grid selected lr=" << config.learning_rate << " mu=" << config.mu
              << " valid_mean_rank=" << best << "\n";
  } else {
    result = train(graph, config);
  }

  write_text(out / "config.txt", train_config_text(o, true));
  write_train_outputs(out, graph, config, *result, o.graph_dir);
  std::cout << "status=" << status_string(result->status) << " epochs=" << result->epochs_run;
  if (!result->log.empty()) std::cout << " mean_loss=" << result->log.back().mean_loss;
  std::cout << "\n";
  if (result->status == TrainStatus::AbortedNonFinite) {
    throw NumericError(result->diagnostic + " (last good checkpoint retained)");
  }
}

struct EvalOpts {
  std::string graph_dir, checkpoint;
  std::string task = "lp";
  int threads = 1;
  bool per_relation = false;
  std::string neg_mode = "position";
  std::uint64_t neg_seed = 7;
  std::string out_dir;
};

void cmd_eval(const CLI::App* sub, const EvalOpts& o) {
  KnowledgeGraph graph = KnowledgeGraph::load_dir(o.graph_dir);
  EmbeddingModel model = EmbeddingModel::load(o.checkpoint);
  check_compatible(model, graph);
  fs::path out(o.out_dir);
  fs::create_directories(out);

  if (o.task == "lp") {
    EvalReport report = link_prediction(model, graph, o.threads, o.per_relation);
    write_text(out / "eval.json", to_json(report) + "\n");
    write_text(out / "eval.txt", to_table(report));
    write_config(sub, out);
    std::cout << to_table(report);
    return;
  }
  if (o.task != "tc") throw std::invalid_argument("task must be lp or tc");

  NegativeMode mode;
  if (o.neg_mode == "position") {
    mode = NegativeMode::PositionCompatible;
  } else if (o.neg_mode == "uniform") {
    mode = NegativeMode::Uniform;
  } else {
    throw std::invalid_argument("neg-mode must be position or uniform");
  }

  // Labeled datasets ship their own negatives; otherwise corrupt one per
  // positive (separate streams for validation and test).
  std::vector<Triple> valid_neg(graph.valid_negatives().begin(), graph.valid_negatives().end());
  std::vector<Triple> test_neg(graph.test_negatives().begin(), graph.test_negatives().end());
  nlohmann::json generated{{"valid", false}, {"test", false}};
  if (valid_neg.empty()) {
    if (graph.valid().empty()) throw DataError("no validation split for threshold fitting");
    Rng rng(o.neg_seed);
    valid_neg = make_negatives(graph.valid(), graph, rng, mode).negatives;
    generated["valid"] = true;
  }
  if (test_neg.empty()) {
    if (graph.test().empty()) throw DataError("test split is empty");
    Rng rng(o.neg_seed + 1);
    test_neg = make_negatives(graph.test(), graph, rng, mode).negatives;
    generated["test"] = true;
  }

  ClassifierThresholds thresholds = fit_thresholds(model, graph.valid(), valid_neg);
  ClassificationResult result = triple_classification(model, thresholds, graph.test(), test_neg);

  std::ostringstream tsv;
  tsv << "relation\tname\tthreshold\tfitted\n";
  tsv.precision(17);
  for (RelationId r = 0; r < graph.num_relations(); ++r) {
    tsv << r << '\t' << graph.relations().name_of(r) << '\t' << thresholds.threshold_for(r)
        << '\t' << (thresholds.fitted(r) ? 1 : 0) << "\n";
  }
  write_text(out / "thresholds.tsv", tsv.str());

  nlohmann::json j = nlohmann::json::parse(to_json(result));
  j["validation_accuracy"] = thresholds.validation_accuracy;
  j["generated_negatives"] = generated;
  write_text(out / "tc.json", j.dump(2) + "\n");
  write_text(out / "tc.txt", to_table(result));
  write_config(sub, out);
  std::cout << to_table(result);
}

struct BoundOpts {
  std::string graph_dir, checkpoint;
  double margin = 1.0;
  bool use_table = false;
  double mu = 0.5;
  bool active = false;
  double active_fraction = 0.1;
  int active_rounds = 5;
  double delta = 0.05;
  std::uint64_t risk_seed = 12345;
  int threads = 1;
  std::string out_dir;
};

void cmd_bound(const CLI::App* sub, const BoundOpts& o) {
  KnowledgeGraph graph = KnowledgeGraph::load_dir(o.graph_dir);
  EmbeddingModel model = EmbeddingModel::load(o.checkpoint);
  check_compatible(model, graph);

  std::optional<MarginTable> table;
  MarginSource source = MarginSource::constant(o.margin);
  if (o.use_table) {
    NeighborhoodIndex index(graph);
    std::optional<ActiveSetConfig> active;
    if (o.active) active = ActiveSetConfig{o.active_fraction, o.active_rounds, o.risk_seed};
    table = refresh_table(index, model, o.mu, active, 0, o.threads);
    source = MarginSource::per_triple(*table);
  }
  RiskReport report = risk_report(model, graph, source, o.delta, o.risk_seed,
                                  /*include_held_out=*/true);

  fs::path out(o.out_dir);
  fs::create_directories(out);
  write_text(out / "bound.json", to_json(report) + "\n");
  std::ostringstream tsv;
  tsv << "empirical_risk\tf_hat\tbeta\tn\tdelta\tmargin\tbound\n";
  tsv.precision(17);
  tsv << report.empirical_risk << '\t' << report.f_hat << '\t' << report.beta << '\t' << report.n
      << '\t' << report.delta << '\t' << report.margin << '\t' << report.bound << "\n";
  write_text(out / "bound.tsv", tsv.str());
  write_config(sub, out);
  std::cout << "empirical_risk=" << report.empirical_risk << " f_hat=" << report.f_hat
            << " beta=" << report.beta << " bound=" << report.bound << "\n";
}

struct SweepOpts {
  TrainOpts train;
  std::vector<double> margins;
  double delta = 0.05;
  std::uint64_t risk_seed = 12345;
};

void cmd_sweep(SweepOpts& o) {
  apply_preset(o.train);
  TrainConfig config = to_config(o.train, false);
  KnowledgeGraph graph = KnowledgeGraph::load_dir(o.train.graph_dir);
  fs::path out(o.train.out_dir);
  fs::create_directories(out);

  std::ostringstream cfg;
  cfg << train_config_text(o.train, false) << "margins=";
  for (std::size_t i = 0; i < o.margins.size(); ++i) {
    cfg << (i ? "," : "") << value_str(o.margins[i]);
  }
  cfg << "\ndelta=" << value_str(o.delta) << "\nrisk-seed=" << o.risk_seed << "\n";
  write_text(out / "config.txt", cfg.str());

  SweepReport report = margin_sweep(graph, o.margins, config, o.delta, o.risk_seed);
  write_text(out / "sweep.tsv", to_tsv(report));
  write_text(out / "sweep.json", to_json(report) + "\n");
  std::cout << to_tsv(report);
}

struct ExportOpts {
  std::string graph_dir, checkpoint;
  double mu = 0.5;
  bool active = false;
  double active_fraction = 0.1;
  int active_rounds = 5;
  std::uint64_t active_seed = 0;
  int threads = 1;
  std::string out_dir;
};

void cmd_export(const CLI::App* sub, const ExportOpts& o) {
  KnowledgeGraph graph = KnowledgeGraph::load_dir(o.graph_dir);
  EmbeddingModel model = EmbeddingModel::load(o.checkpoint);
  check_compatible(model, graph);
  fs::path out(o.out_dir);
  fs::create_directories(out);

  auto dump_matrix = [&](const fs::path& path, std::int32_t count, const Vocab& vocab, bool entity) {
    std::ostringstream os;
    os.precision(17);
    for (std::int32_t id = 0; id < count; ++id) {
      os << id << '\t' << vocab.name_of(id);
      auto row = entity ? model.entity(id) : model.relation(id);
      for (double x : row) os << '\t' << x;
      os << "\n";
    }
    write_text(path, os.str());
  };
  dump_matrix(out / "entity_embeddings.tsv", graph.num_entities(), graph.entities(), true);
  dump_matrix(out / "relation_embeddings.tsv", graph.num_relations(), graph.relations(), false);

  NeighborhoodIndex index(graph);
  std::optional<ActiveSetConfig> active;
  if (o.active) active = ActiveSetConfig{o.active_fraction, o.active_rounds, o.active_seed};
  MarginTable table = refresh_table(index, model, o.mu, active, 0, o.threads);
  table.save_entity_tsv(out / "entity_margins.tsv");
  table.save_pair_tsv(out / "pair_margins.tsv");
  write_text(out / "margins.json", margin_summary_json(table).dump(2) + "\n");
  write_config(sub, out);
  std::cout << "exported " << graph.num_entities() << " entity and " << graph.num_relations()
            << " relation vectors, " << table.m_opt.size() << " margin pairs\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally adaptive translation embeddings for knowledge graphs"};
  app.require_subcommand(1);
  // Config files live on the root parser: CLI11 only reads them there. Each
  // subcommand is configurable so a `[train]`-style section reaches it, and
  // falls through so `--config` after the subcommand name still matches.
  app.set_config("--config", "", "Read options from an emitted config.txt");

  IngestOpts ingest;
  CLI::App* ingest_cmd = app.add_subcommand("ingest", "Load triple files into a graph directory");
  ingest_cmd->add_option("--train", ingest.train_path, "Training triples")->required();
  ingest_cmd->add_option("--valid", ingest.valid_path, "Validation triples")->required();
  ingest_cmd->add_option("--test", ingest.test_path, "Test triples")->required();
  ingest_cmd->add_option("--format", ingest.format, "names | ids")->capture_default_str();
  ingest_cmd->add_flag("--labeled", ingest.labeled,
                       "valid/test lines carry a 1/-1 label; -1 kept as negatives");
  ingest_cmd->add_option("--out", ingest.out_dir, "Output graph directory")->required();
  ingest_cmd->configurable()->fallthrough();

  PartitionOpts partition;
  CLI::App* partition_cmd =
      app.add_subcommand("partition", "Split a graph into k relation groups");
  partition_cmd->add_option("--graph", partition.graph_dir, "Serialized graph directory")
      ->required();
  partition_cmd->add_option("--k", partition.k, "Number of groups")->required();
  partition_cmd->add_option("--seed", partition.seed, "Shuffle seed")->capture_default_str();
  partition_cmd->add_option("--out", partition.out_dir, "Output directory")->required();
  partition_cmd->configurable()->fallthrough();

  TrainOpts train_opts;
  CLI::App* train_cmd = app.add_subcommand("train", "Train embeddings");
  add_train_options(train_cmd, train_opts, true);
  train_cmd->add_option("--preset", train_opts.preset,
                        "wn18-lp | fb15k-lp | wn11-tc | fb13-tc");
  train_cmd->add_flag("--grid", train_opts.grid,
                      "Validation-set selection over lr x mu instead of a single run");
  train_cmd->configurable()->fallthrough();

  EvalOpts eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--graph", eval.graph_dir, "Serialized graph directory")->required();
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Model checkpoint")->required();
  eval_cmd->add_option("--task", eval.task, "lp (link prediction) | tc (classification)")->capture_default_str();
  eval_cmd->add_option("--threads", eval.threads, "Worker threads")->capture_default_str();
  eval_cmd->add_flag("--per-relation", eval.per_relation, "Per-relation breakdown (lp)");
  eval_cmd->add_option("--neg-mode", eval.neg_mode, "position | uniform (tc)")->capture_default_str();
  eval_cmd->add_option("--neg-seed", eval.neg_seed, "Seed for generated negatives (tc)")->capture_default_str();
  eval_cmd->add_option("--out", eval.out_dir, "Output directory")->required();
  eval_cmd->configurable()->fallthrough();

  BoundOpts bound;
  CLI::App* bound_cmd = app.add_subcommand("bound", "Stability and risk-bound diagnostics");
  bound_cmd->add_option("--graph", bound.graph_dir, "Serialized graph directory")->required();
  bound_cmd->add_option("--checkpoint", bound.checkpoint, "Model checkpoint")->required();
  bound_cmd->add_option("--margin", bound.margin, "Constant margin M")->capture_default_str();
  bound_cmd->add_flag("--use-table", bound.use_table, "Per-pair margins from a fresh table");
  bound_cmd->add_option("--mu", bound.mu, "Trade-off for --use-table")->capture_default_str();
  bound_cmd->add_flag("--active", bound.active, "Sampled entity margins for --use-table");
  bound_cmd->add_option("--active-fraction", bound.active_fraction, "Negative fraction")->capture_default_str();
  bound_cmd->add_option("--active-rounds", bound.active_rounds, "Sampling rounds")->capture_default_str();
  bound_cmd->add_option("--delta", bound.delta, "Confidence parameter in (0,1)")->capture_default_str();
  bound_cmd->add_option("--risk-seed", bound.risk_seed, "Corruption seed")->capture_default_str();
  bound_cmd->add_option("--threads", bound.threads, "Worker threads")->capture_default_str();
  bound_cmd->add_option("--out", bound.out_dir, "Output directory")->required();
  bound_cmd->configurable()->fallthrough();

  SweepOpts sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate per fixed margin");
  add_train_options(sweep_cmd, sweep.train, false);
  sweep_cmd->add_option("--margins", sweep.margins, "Comma-separated margin list")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--preset", sweep.train.preset, "wn18-lp | fb15k-lp | wn11-tc | fb13-tc");
  sweep_cmd->add_option("--delta", sweep.delta, "Confidence parameter in (0,1)")->capture_default_str();
  sweep_cmd->add_option("--risk-seed", sweep.risk_seed, "Corruption seed")->capture_default_str();
  sweep_cmd->configurable()->fallthrough();

  ExportOpts exp;
  CLI::App* export_cmd = app.add_subcommand("export", "Dump embeddings and margin tables as TSV");
  export_cmd->add_option("--graph", exp.graph_dir, "Serialized graph directory")->required();
  export_cmd->add_option("--checkpoint", exp.checkpoint, "Model checkpoint")->required();
  export_cmd->add_option("--mu", exp.mu, "Trade-off for the margin table")->capture_default_str();
  export_cmd->add_flag("--active", exp.active, "Sampled entity margins");
  export_cmd->add_option("--active-fraction", exp.active_fraction, "Negative fraction")->capture_default_str();
  export_cmd->add_option("--active-rounds", exp.active_rounds, "Sampling rounds")->capture_default_str();
  export_cmd->add_option("--active-seed", exp.active_seed, "Sampling seed")->capture_default_str();
  export_cmd->add_option("--threads", exp.threads, "Worker threads")->capture_default_str();
  export_cmd->add_option("--out", exp.out_dir, "Output directory")->required();
  export_cmd->configurable()->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  // A config section can trigger its own subcommand; the command-line one
  // parses first, so names[0] is what the user asked for.
  std::vector<std::string> names;
  for (const CLI::App* s : app.get_subcommands()) {
    if (std::find(names.begin(), names.end(), s->get_name()) == names.end()) {
      names.push_back(s->get_name());
    }
  }
  if (names.size() > 1) {
    std::cerr << "usage error: config file section [" << names[1]
              << "] conflicts with subcommand '" << names[0] << "'\n";
    return 1;
  }

  try {
    if (app.got_subcommand(ingest_cmd)) {
      cmd_ingest(ingest_cmd, ingest);
    } else if (app.got_subcommand(partition_cmd)) {
      cmd_partition(partition_cmd, partition);
    } else if (app.got_subcommand(train_cmd)) {
      cmd_train(train_opts);
    } else if (app.got_subcommand(eval_cmd)) {
      cmd_eval(eval_cmd, eval);
    } else if (app.got_subcommand(bound_cmd)) {
      cmd_bound(bound_cmd, bound);
    } else if (app.got_subcommand(sweep_cmd)) {
      cmd_sweep(sweep);
    } else if (app.got_subcommand(export_cmd)) {
      cmd_export(export_cmd, exp);
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
