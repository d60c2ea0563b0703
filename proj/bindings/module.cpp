// Python surface: graph loading, training, margins, ranking, classification
// and the risk diagnostics. Matrices cross the boundary as numpy copies.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "transa/classification.hpp"
#include "transa/errors.hpp"
#include "transa/knowledge_graph.hpp"
#include "transa/margin.hpp"
#include "transa/neighborhood_index.hpp"
#include "transa/ranking.hpp"
#include "transa/risk.hpp"
#include "transa/trainer.hpp"

namespace py = pybind11;
using namespace transa;

namespace {

py::array_t<double> matrix_copy(const std::vector<double>& data, std::int32_t rows, int cols) {
  py::array_t<double> out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

std::vector<Triple> to_triples(std::span<const Triple> view) {
  return {view.begin(), view.end()};
}

TrainConfig make_config(double lr, int dim, int batch, double mu, int epochs,
                        const std::string& margin_mode, double fixed_margin, int refresh_every,
                        bool active, double active_fraction, int active_rounds,
                        const std::string& dissim, std::uint64_t seed, bool early_stopping,
                        int eval_every, int patience, int threads) {
  TrainConfig c;
  c.learning_rate = lr;
  c.dim = dim;
  c.batch_size = batch;
  c.mu = mu;
  c.epochs = epochs;
  c.margin_mode = margin_mode_from_string(margin_mode);
  c.fixed_margin = fixed_margin;
  c.margin_refresh_every = refresh_every;
  c.use_active_set = active;
  c.active.fraction = active_fraction;
  c.active.rounds = active_rounds;
  c.dissimilarity = dissimilarity_from_string(dissim);
  c.seed = seed;
  c.early_stopping = early_stopping;
  c.eval_every = eval_every;
  c.patience = patience;
  c.threads = threads;
  c.validate();
  return c;
}

py::dict metrics_dict(const RankingMetrics& m) {
  py::dict d;
  d["mean_rank"] = m.mean_rank;
  d["hits_at_1"] = m.hits_at_1;
  d["hits_at_3"] = m.hits_at_3;
  d["hits_at_10"] = m.hits_at_10;
  return d;
}

}  // namespace

PYBIND11_MODULE(_transa, m) {
  m.doc() = "Locally adaptive translation embeddings for knowledge graphs";
  m.attr("__version__") = "0.1.0";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<Triple>(m, "Triple")
      .def(py::init([](EntityId h, RelationId r, EntityId t) { return Triple{h, r, t}; }),
           py::arg("head"), py::arg("relation"), py::arg("tail"))
      .def_readwrite("head", &Triple::head)
      .def_readwrite("relation", &Triple::relation)
      .def_readwrite("tail", &Triple::tail)
      .def("__eq__", [](const Triple& a, const Triple& b) { return a == b; })
      .def("__hash__", [](const Triple& t) { return TripleHash{}(t); })
      .def("__repr__", [](const Triple& t) {
        return "Triple(" + std::to_string(t.head) + ", " + std::to_string(t.relation) + ", " +
               std::to_string(t.tail) + ")";
      });

  py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
      .def_static(
          "load",
          [](const std::string& train, const std::string& valid, const std::string& test,
             const std::string& format, bool labeled) {
            return KnowledgeGraph::load(train, valid, test, triple_format_from_string(format),
                                        labeled);
          },
          py::arg("train"), py::arg("valid"), py::arg("test"), py::arg("format") = "names",
          py::arg("labeled") = false)
      .def_static("from_triples", &KnowledgeGraph::from_triples, py::arg("num_entities"),
                  py::arg("num_relations"), py::arg("train"), py::arg("valid") = std::vector<Triple>{},
                  py::arg("test") = std::vector<Triple>{})
      .def_static("load_dir", &KnowledgeGraph::load_dir, py::arg("dir"))
      .def("save", &KnowledgeGraph::save, py::arg("dir"))
      .def_property_readonly("num_entities", &KnowledgeGraph::num_entities)
      .def_property_readonly("num_relations", &KnowledgeGraph::num_relations)
      .def("train_triples", [](const KnowledgeGraph& g) { return to_triples(g.train()); })
      .def("valid_triples", [](const KnowledgeGraph& g) { return to_triples(g.valid()); })
      .def("test_triples", [](const KnowledgeGraph& g) { return to_triples(g.test()); })
      .def("valid_negatives", [](const KnowledgeGraph& g) { return to_triples(g.valid_negatives()); })
      .def("test_negatives", [](const KnowledgeGraph& g) { return to_triples(g.test_negatives()); })
      .def("contains", &KnowledgeGraph::contains, py::arg("triple"))
      .def("entity_name",
           [](const KnowledgeGraph& g, EntityId id) { return g.entities().name_of(id); })
      .def("relation_name",
           [](const KnowledgeGraph& g, RelationId id) { return g.relations().name_of(id); })
      .def(
          "partition",
          [](const KnowledgeGraph& g, std::int32_t k, std::uint64_t seed) {
            Rng rng(seed);
            return g.partition(k, rng);
          },
          py::arg("k"), py::arg("seed") = 0);

  py::class_<EmbeddingModel>(m, "EmbeddingModel")
      .def_property_readonly("num_entities", &EmbeddingModel::num_entities)
      .def_property_readonly("num_relations", &EmbeddingModel::num_relations)
      .def_property_readonly("dim", &EmbeddingModel::dim)
      .def_property_readonly("dissimilarity",
                             [](const EmbeddingModel& m_) { return to_string(m_.dissimilarity()); })
      .def("entity_matrix",
           [](const EmbeddingModel& m_) {
             return matrix_copy(m_.entity_data(), m_.num_entities(), m_.dim());
           })
      .def("relation_matrix",
           [](const EmbeddingModel& m_) {
             return matrix_copy(m_.relation_data(), m_.num_relations(), m_.dim());
           })
      .def("score", [](const EmbeddingModel& m_, const Triple& t) { return score(m_, t); },
           py::arg("triple"))
      .def("save", &EmbeddingModel::save, py::arg("path"))
      .def_static("load", &EmbeddingModel::load, py::arg("path"));

  m.def(
      "init_model",
      [](std::int32_t num_entities, std::int32_t num_relations, int dim, const std::string& dissim,
         std::uint64_t seed) {
        return init_model(num_entities, num_relations, dim, dissimilarity_from_string(dissim),
                          seed);
      },
      py::arg("num_entities"), py::arg("num_relations"), py::arg("dim"), py::arg("dissim") = "l1",
      py::arg("seed") = 0);

  m.def("hinge_loss", &hinge_loss, py::arg("model"), py::arg("pos"), py::arg("neg"),
        py::arg("margin"));

  py::class_<EpochLog>(m, "EpochLog")
      .def_readonly("epoch", &EpochLog::epoch)
      .def_readonly("mean_loss", &EpochLog::mean_loss)
      .def_readonly("wall_seconds", &EpochLog::wall_seconds)
      .def_readonly("margin_refreshed", &EpochLog::margin_refreshed);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("log", &TrainResult::log)
      .def_property_readonly("status",
                             [](const TrainResult& r) {
                               switch (r.status) {
                                 case TrainStatus::Completed:
                                   return "completed";
                                 case TrainStatus::EarlyStopped:
                                   return "early-stopped";
                                 case TrainStatus::AbortedNonFinite:
                                   return "aborted-non-finite";
                               }
                               return "completed";
                             })
      .def_readonly("epochs_run", &TrainResult::epochs_run)
      .def_readonly("best_valid_mean_rank", &TrainResult::best_valid_mean_rank)
      .def_readonly("diagnostic", &TrainResult::diagnostic)
      .def_property_readonly("margins", [](const TrainResult& r) {
        return r.margins ? py::cast(*r.margins) : py::object(py::none());
      });

  m.def(
      "train",
      [](const KnowledgeGraph& graph, double lr, int dim, int batch, double mu, int epochs,
         const std::string& margin_mode, double fixed_margin, int refresh_every, bool active,
         double active_fraction, int active_rounds, const std::string& dissim, std::uint64_t seed,
         bool early_stopping, int eval_every, int patience, int threads) {
        TrainConfig c = make_config(lr, dim, batch, mu, epochs, margin_mode, fixed_margin,
                                    refresh_every, active, active_fraction, active_rounds, dissim,
                                    seed, early_stopping, eval_every, patience, threads);
        py::gil_scoped_release release;
        return train(graph, c);
      },
      py::arg("graph"), py::arg("lr") = 0.01, py::arg("dim") = 50, py::arg("batch") = 120,
      py::arg("mu") = 0.5, py::arg("epochs") = 1000, py::arg("margin_mode") = "adaptive",
      py::arg("fixed_margin") = 1.0, py::arg("refresh_every") = 1, py::arg("active") = false,
      py::arg("active_fraction") = 0.1, py::arg("active_rounds") = 5, py::arg("dissim") = "l1",
      py::arg("seed") = 0, py::arg("early_stopping") = true, py::arg("eval_every") = 50,
      py::arg("patience") = 3, py::arg("threads") = 1);

  py::class_<MarginTable>(m, "MarginTable")
      .def_readonly("mu", &MarginTable::mu)
      .def_readonly("epoch_computed", &MarginTable::epoch_computed)
      .def_readonly("global_mean_opt", &MarginTable::global_mean_opt)
      .def("ent", &MarginTable::ent, py::arg("entity"))
      .def("rel", &MarginTable::rel, py::arg("entity"), py::arg("relation"))
      .def("opt", &MarginTable::opt, py::arg("entity"), py::arg("relation"))
      .def_property_readonly("num_entities",
                             [](const MarginTable& t) { return t.m_ent.size(); })
      .def_property_readonly("num_pairs", [](const MarginTable& t) { return t.m_opt.size(); })
      .def("save_entity_tsv", &MarginTable::save_entity_tsv, py::arg("path"))
      .def("save_pair_tsv", &MarginTable::save_pair_tsv, py::arg("path"));

  m.def(
      "margin_table",
      [](const KnowledgeGraph& graph, const EmbeddingModel& model, double mu, bool active,
         double active_fraction, int active_rounds, std::uint64_t active_seed, int epoch,
         int threads) {
        NeighborhoodIndex index(graph);
        std::optional<ActiveSetConfig> cfg;
        if (active) cfg = ActiveSetConfig{active_fraction, active_rounds, active_seed};
        py::gil_scoped_release release;
        return refresh_table(index, model, mu, cfg, epoch, threads);
      },
      py::arg("graph"), py::arg("model"), py::arg("mu") = 0.5, py::arg("active") = false,
      py::arg("active_fraction") = 0.1, py::arg("active_rounds") = 5, py::arg("active_seed") = 0,
      py::arg("epoch") = 0, py::arg("threads") = 1);

  m.def(
      "entity_margin",
      [](EntityId h, const KnowledgeGraph& graph, const EmbeddingModel& model) {
        NeighborhoodIndex index(graph);
        return entity_margin_exact(h, index, model);
      },
      py::arg("entity"), py::arg("graph"), py::arg("model"));

  m.def(
      "relation_margin",
      [](EntityId h, RelationId r, const KnowledgeGraph& graph, const EmbeddingModel& model) {
        NeighborhoodIndex index(graph);
        return relation_margin(h, r, index, model);
      },
      py::arg("entity"), py::arg("relation"), py::arg("graph"), py::arg("model"));

  m.def("combined_margin", &combined_margin, py::arg("mu"), py::arg("m_ent"), py::arg("m_rel"));

  m.def(
      "link_prediction",
      [](const EmbeddingModel& model, const KnowledgeGraph& graph, int threads,
         bool per_relation) {
        EvalReport report = [&] {
          py::gil_scoped_release release;
          return link_prediction(model, graph, threads, per_relation);
        }();
        py::dict d;
        d["n_test"] = report.n_test;
        d["raw"] = metrics_dict(report.raw);
        d["filtered"] = metrics_dict(report.filtered);
        if (per_relation) {
          py::dict rels;
          for (const auto& [rel, metrics] : report.per_relation_filtered) {
            rels[py::int_(rel)] = metrics_dict(metrics);
          }
          d["per_relation_filtered"] = rels;
        }
        return d;
      },
      py::arg("model"), py::arg("graph"), py::arg("threads") = 1,
      py::arg("per_relation") = false);

  m.def(
      "mean_rank",
      [](const EmbeddingModel& model, const KnowledgeGraph& graph, const std::string& split,
         bool filtered, int threads) {
        std::span<const Triple> triples;
        if (split == "train") {
          triples = graph.train();
        } else if (split == "valid") {
          triples = graph.valid();
        } else if (split == "test") {
          triples = graph.test();
        } else {
          throw std::invalid_argument("split must be train, valid or test");
        }
        py::gil_scoped_release release;
        return mean_rank(model, graph, triples, filtered, threads);
      },
      py::arg("model"), py::arg("graph"), py::arg("split") = "test", py::arg("filtered") = true,
      py::arg("threads") = 1);

  m.def(
      "rank_entity",
      [](const EmbeddingModel& model, const KnowledgeGraph& graph, const Triple& triple,
         const std::string& side, bool filtered) {
        CorruptSide s;
        if (side == "head") {
          s = CorruptSide::Head;
        } else if (side == "tail") {
          s = CorruptSide::Tail;
        } else {
          throw std::invalid_argument("side must be head or tail");
        }
        return rank_entity(model, graph, triple, s, filtered);
      },
      py::arg("model"), py::arg("graph"), py::arg("triple"), py::arg("side") = "tail",
      py::arg("filtered") = true);

  m.def(
      "empirical_risk",
      [](const EmbeddingModel& model, const KnowledgeGraph& graph, double margin,
         std::uint64_t seed) {
        return empirical_risk(model, graph, MarginSource::constant(margin), seed);
      },
      py::arg("model"), py::arg("graph"), py::arg("margin") = 1.0, py::arg("seed") = 12345);

  m.def("stability_beta", &stability_beta, py::arg("model"), py::arg("graph"));
  m.def("max_train_score", &max_train_score, py::arg("model"), py::arg("graph"));
  m.def("generalization_bound", &generalization_bound, py::arg("empirical_risk"),
        py::arg("f_hat"), py::arg("margin"), py::arg("n"), py::arg("delta"));

  m.def(
      "risk_report",
      [](const EmbeddingModel& model, const KnowledgeGraph& graph, double margin, double delta,
         std::uint64_t seed) {
        RiskReport r =
            risk_report(model, graph, MarginSource::constant(margin), delta, seed, true);
        py::dict d;
        d["empirical_risk"] = r.empirical_risk;
        d["f_hat"] = r.f_hat;
        d["beta"] = r.beta;
        d["n"] = r.n;
        d["delta"] = r.delta;
        d["margin"] = r.margin;
        d["bound"] = r.bound;
        if (r.held_out_risk) d["held_out_risk"] = *r.held_out_risk;
        return d;
      },
      py::arg("model"), py::arg("graph"), py::arg("margin") = 1.0, py::arg("delta") = 0.05,
      py::arg("seed") = 12345);

  m.def(
      "triple_classification",
      [](const EmbeddingModel& model, const KnowledgeGraph& graph, std::uint64_t neg_seed,
         const std::string& neg_mode) {
        NegativeMode mode;
        if (neg_mode == "position") {
          mode = NegativeMode::PositionCompatible;
        } else if (neg_mode == "uniform") {
          mode = NegativeMode::Uniform;
        } else {
          throw std::invalid_argument("neg_mode must be position or uniform");
        }
        std::vector<Triple> valid_neg = to_triples(graph.valid_negatives());
        std::vector<Triple> test_neg = to_triples(graph.test_negatives());
        if (valid_neg.empty()) {
          Rng rng(neg_seed);
          valid_neg = make_negatives(graph.valid(), graph, rng, mode).negatives;
        }
        if (test_neg.empty()) {
          Rng rng(neg_seed + 1);
          test_neg = make_negatives(graph.test(), graph, rng, mode).negatives;
        }
        ClassifierThresholds thresholds = fit_thresholds(model, graph.valid(), valid_neg);
        ClassificationResult result =
            triple_classification(model, thresholds, graph.test(), test_neg);
        py::dict d;
        d["accuracy"] = result.accuracy;
        d["validation_accuracy"] = thresholds.validation_accuracy;
        d["n_pos"] = result.n_pos;
        d["n_neg"] = result.n_neg;
        d["fallback_decisions"] = result.fallback_decisions;
        return d;
      },
      py::arg("model"), py::arg("graph"), py::arg("neg_seed") = 7,
      py::arg("neg_mode") = "position");
}
