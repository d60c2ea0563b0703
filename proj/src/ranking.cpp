#include "transa/ranking.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "transa/errors.hpp"

namespace transa {

namespace {

struct SlotRanks {
  double raw = 0.0;
  double filtered = 0.0;
};

// Both corruption sides reduce to ranking ||x - base|| over all entity rows x:
// tail slots use base = h + r, head slots base = t - r.
SlotRanks rank_slot(const EmbeddingModel& model, const KnowledgeGraph& graph, const Triple& triple,
                    CorruptSide side) {
  int d = model.dim();
  std::vector<double> base(static_cast<std::size_t>(d));
  if (side == CorruptSide::Tail) {
    auto h = model.entity(triple.head);
    auto r = model.relation(triple.relation);
    for (int i = 0; i < d; ++i) base[static_cast<std::size_t>(i)] = h[i] + r[i];
  } else {
    auto t = model.entity(triple.tail);
    auto r = model.relation(triple.relation);
    for (int i = 0; i < d; ++i) base[static_cast<std::size_t>(i)] = t[i] - r[i];
  }
  auto candidate_score = [&](EntityId e) {
    auto x = model.entity(e);
    double acc = 0.0;
    switch (model.dissimilarity()) {
      case Dissimilarity::L1:
        for (int i = 0; i < d; ++i) acc += std::fabs(x[i] - base[static_cast<std::size_t>(i)]);
        return acc;
      case Dissimilarity::L2:
        for (int i = 0; i < d; ++i) {
          double diff = x[i] - base[static_cast<std::size_t>(i)];
          acc += diff * diff;
        }
        return std::sqrt(acc);
      case Dissimilarity::L2Squared:
        for (int i = 0; i < d; ++i) {
          double diff = x[i] - base[static_cast<std::size_t>(i)];
          acc += diff * diff;
        }
        return acc;
    }
    return acc;
  };

  EntityId true_entity = side == CorruptSide::Tail ? triple.tail : triple.head;
  double true_score = candidate_score(true_entity);

  std::int64_t raw_lt = 0, raw_eq = 0, filt_lt = 0, filt_eq = 0;
  Triple probe = triple;
  for (EntityId e = 0; e < graph.num_entities(); ++e) {
    double s = candidate_score(e);
    bool lt = s < true_score;
    bool eq = s == true_score;
    raw_lt += lt;
    raw_eq += eq;
    if (e != true_entity) {
      (side == CorruptSide::Tail ? probe.tail : probe.head) = e;
      if (graph.contains(probe)) continue;  // another correct answer: not penalized
    }
    filt_lt += lt;
    filt_eq += eq;
  }
  return {static_cast<double>(raw_lt) + (static_cast<double>(raw_eq) + 1.0) / 2.0,
          static_cast<double>(filt_lt) + (static_cast<double>(filt_eq) + 1.0) / 2.0};
}

// Per-triple slot ranks, threaded over triples. Reduction happens on the
// caller side in triple order so results do not depend on the thread count.
struct TripleRanks {
  SlotRanks head, tail;
};

std::vector<TripleRanks> rank_all(const EmbeddingModel& model, const KnowledgeGraph& graph,
                                  std::span<const Triple> triples, int threads) {
  std::vector<TripleRanks> out(triples.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i].head = rank_slot(model, graph, triples[i], CorruptSide::Head);
      out[i].tail = rank_slot(model, graph, triples[i], CorruptSide::Tail);
    }
  };
  std::size_t n = triples.size();
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    work(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = n * w / workers;
    std::size_t end = n * (w + 1) / workers;
    pool.emplace_back(work, begin, end);
  }
  for (auto& t : pool) t.join();
  return out;
}

struct Accumulator {
  double rank_sum = 0.0;
  std::int64_t hits1 = 0, hits3 = 0, hits10 = 0;
  std::int64_t slots = 0;

  void add(double rank) {
    rank_sum += rank;
    hits1 += rank <= 1.0;
    hits3 += rank <= 3.0;
    hits10 += rank <= 10.0;
    ++slots;
  }
  RankingMetrics metrics() const {
    double n = static_cast<double>(slots);
    return {rank_sum / n, static_cast<double>(hits1) / n, static_cast<double>(hits3) / n,
            static_cast<double>(hits10) / n};
  }
};

nlohmann::json metrics_json(const RankingMetrics& m) {
  return {{"mean_rank", m.mean_rank},
          {"hits_at_1", m.hits_at_1},
          {"hits_at_3", m.hits_at_3},
          {"hits_at_10", m.hits_at_10}};
}

}  // namespace

double rank_entity(const EmbeddingModel& model, const KnowledgeGraph& graph, const Triple& triple,
                   CorruptSide side, bool filtered) {
  SlotRanks r = rank_slot(model, graph, triple, side);
  return filtered ? r.filtered : r.raw;
}

double mean_rank(const EmbeddingModel& model, const KnowledgeGraph& graph,
                 std::span<const Triple> triples, bool filtered, int threads) {
  if (triples.empty()) throw DataError("no triples to rank");
  auto ranks = rank_all(model, graph, triples, threads);
  double sum = 0.0;
  for (const auto& r : ranks) {
    sum += filtered ? r.head.filtered + r.tail.filtered : r.head.raw + r.tail.raw;
  }
  return sum / (2.0 * static_cast<double>(ranks.size()));
}

EvalReport link_prediction(const EmbeddingModel& model, const KnowledgeGraph& graph, int threads,
                           bool per_relation) {
  if (graph.test().empty()) throw DataError("test split is empty");
  auto ranks = rank_all(model, graph, graph.test(), threads);

  EvalReport report;
  report.n_test = ranks.size();
  Accumulator raw, filtered;
  std::map<RelationId, Accumulator> by_relation;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    raw.add(ranks[i].head.raw);
    raw.add(ranks[i].tail.raw);
    filtered.add(ranks[i].head.filtered);
    filtered.add(ranks[i].tail.filtered);
    if (per_relation) {
      auto& acc = by_relation[graph.test()[i].relation];
      acc.add(ranks[i].head.filtered);
      acc.add(ranks[i].tail.filtered);
    }
  }
  report.raw = raw.metrics();
  report.filtered = filtered.metrics();
  for (const auto& [rel, acc] : by_relation) report.per_relation_filtered[rel] = acc.metrics();
  return report;
}

std::string to_json(const EvalReport& report) {
  nlohmann::json j{{"n_test", report.n_test},
                   {"raw", metrics_json(report.raw)},
                   {"filtered", metrics_json(report.filtered)}};
  if (!report.per_relation_filtered.empty()) {
    nlohmann::json rels = nlohmann::json::object();
    for (const auto& [rel, m] : report.per_relation_filtered) {
      rels[std::to_string(rel)] = metrics_json(m);
    }
    j["per_relation_filtered"] = rels;
  }
  return j.dump(2);
}

std::string to_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "" << std::right << std::setw(12) << "mean_rank"
     << std::setw(10) << "hits@1" << std::setw(10) << "hits@3" << std::setw(10) << "hits@10"
     << "\n";
  auto row = [&os](const char* name, const RankingMetrics& m) {
    os << std::left << std::setw(10) << name << std::right << std::fixed << std::setprecision(2)
       << std::setw(12) << m.mean_rank << std::setprecision(4) << std::setw(10) << m.hits_at_1
       << std::setw(10) << m.hits_at_3 << std::setw(10) << m.hits_at_10 << "\n";
    os.unsetf(std::ios::fixed);
  };
  row("raw", report.raw);
  row("filtered", report.filtered);
  os << "(" << report.n_test << " test triples, 2 slots each)\n";
  return os.str();
}

}  // namespace transa
