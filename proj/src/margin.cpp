#include "transa/margin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "transa/errors.hpp"
#include "transa/rng.hpp"

namespace transa {

void ActiveSetConfig::validate() const {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("active-set fraction must be in (0, 1]");
  }
  if (rounds < 1) throw std::invalid_argument("active-set rounds must be >= 1");
}

namespace {

double lookup(const std::unordered_map<std::uint64_t, double>& map, std::uint64_t key,
              const char* what) {
  auto it = map.find(key);
  if (it == map.end()) throw std::out_of_range(std::string(what) + ": pair not in margin table");
  return it->second;
}

// Anchor-side view of the training neighborhood: the relations of the entity
// and accessors for its positive/negative neighbor sets. Heads use the
// forward direction; entities that only ever appear as tails use the mirror.
struct AnchorView {
  std::span<const RelationId> relations;
  const NeighborhoodIndex* index;
  EntityId anchor;
  bool forward;

  std::span<const EntityId> positives(RelationId r) const {
    return forward ? index->positive_tails(anchor, r) : index->positive_heads(anchor, r);
  }
  std::vector<EntityId> negatives(RelationId r) const {
    return forward ? index->negative_tails(anchor, r) : index->negative_heads(anchor, r);
  }
};

AnchorView anchor_view(EntityId e, const NeighborhoodIndex& index) {
  if (e < 0 || e >= index.graph().num_entities()) {
    throw std::invalid_argument("entity id out of range");
  }
  if (index.head_anchored(e)) {
    return {index.head_relations(e), &index, e, true};
  }
  if (index.tail_anchored(e)) {
    return {index.tail_relations(e), &index, e, false};
  }
  throw std::invalid_argument("entity " + std::to_string(e) +
                              " does not appear in training; margin undefined");
}

std::vector<double> anchor_distances(const EmbeddingModel& model, EntityId anchor,
                                     std::span<const EntityId> others) {
  std::vector<double> d(others.size());
  auto a = model.entity(anchor);
  for (std::size_t i = 0; i < others.size(); ++i) {
    d[i] = margin_distance(a, model.entity(others[i]), model.dissimilarity());
  }
  return d;
}

// Min |n - p| over two distance lists via one merge pass over sorted copies.
double min_gap_sorted(std::vector<double> pos, std::vector<double> neg) {
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  double best = std::numeric_limits<double>::infinity();
  std::size_t i = 0, j = 0;
  while (i < pos.size() && j < neg.size()) {
    best = std::min(best, std::fabs(neg[j] - pos[i]));
    if (pos[i] < neg[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  while (i < pos.size()) best = std::min(best, std::fabs(neg.back() - pos[i++]));
  while (j < neg.size()) best = std::min(best, std::fabs(neg[j++] - pos.back()));
  return best;
}

// Weighted sampling without replacement: repeated categorical draws with
// removal, weights w_i = exp(-(dist_i - min_dist)).
std::vector<std::size_t> sample_near(const std::vector<double>& dist_to_target, std::size_t count,
                                     Rng& rng) {
  std::vector<std::size_t> pool(dist_to_target.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  double min_dist = *std::min_element(dist_to_target.begin(), dist_to_target.end());
  std::vector<double> weights(dist_to_target.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = std::exp(-(dist_to_target[i] - min_dist));
  }
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double total = 0.0;
    for (std::size_t i : pool) total += weights[i];
    double u = uniform_unit(rng) * total;
    std::size_t pick = pool.size() - 1;
    double acc = 0.0;
    for (std::size_t idx = 0; idx < pool.size(); ++idx) {
      acc += weights[pool[idx]];
      if (u < acc) {
        pick = idx;
        break;
      }
    }
    chosen.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return chosen;
}

}  // namespace

double min_absolute_gap(const EmbeddingModel& model, EntityId anchor,
                        std::span<const EntityId> positives, std::span<const EntityId> negatives) {
  if (positives.empty() || negatives.empty()) return 0.0;
  return min_gap_sorted(anchor_distances(model, anchor, positives),
                        anchor_distances(model, anchor, negatives));
}

double entity_margin_exact(EntityId h, const NeighborhoodIndex& index,
                           const EmbeddingModel& model) {
  AnchorView view = anchor_view(h, index);
  double sum = 0.0;
  for (RelationId r : view.relations) {
    std::vector<EntityId> negatives = view.negatives(r);
    if (negatives.empty()) continue;  // contributes 0, still counted below
    sum += min_gap_sorted(anchor_distances(model, h, view.positives(r)),
                          anchor_distances(model, h, negatives));
  }
  return sum / static_cast<double>(view.relations.size());
}

double entity_margin_active(EntityId h, const NeighborhoodIndex& index, const EmbeddingModel& model,
                            const ActiveSetConfig& cfg) {
  cfg.validate();
  AnchorView view = anchor_view(h, index);
  Rng rng(cfg.rng_seed);
  double sum = 0.0;
  for (RelationId r : view.relations) {
    std::vector<EntityId> negatives = view.negatives(r);
    if (negatives.empty()) continue;
    auto positives = view.positives(r);
    std::vector<double> pos_d = anchor_distances(model, h, positives);
    std::vector<double> neg_d = anchor_distances(model, h, negatives);
    std::size_t sample_size = static_cast<std::size_t>(
        std::ceil(cfg.fraction * static_cast<double>(negatives.size())));
    sample_size = std::max<std::size_t>(sample_size, 1);

    double round_sum = 0.0;
    for (int round = 0; round < cfg.rounds; ++round) {
      double best = std::numeric_limits<double>::infinity();
      if (sample_size >= negatives.size()) {
        // Full sample: plain pair scan, no draws consumed.
        for (double nd : neg_d) {
          for (double pd : pos_d) best = std::min(best, std::fabs(nd - pd));
        }
      } else {
        // "Nearby the farthest positive" is measured along distance-to-anchor:
        // the minimizing pair takes the farthest positive and the negative
        // whose anchor distance lands closest to it.
        double far_d = *std::max_element(pos_d.begin(), pos_d.end());
        std::vector<double> gap_to_far(negatives.size());
        for (std::size_t i = 0; i < negatives.size(); ++i) {
          gap_to_far[i] = std::fabs(neg_d[i] - far_d);
        }
        for (std::size_t i : sample_near(gap_to_far, sample_size, rng)) {
          for (double pd : pos_d) best = std::min(best, std::fabs(neg_d[i] - pd));
        }
      }
      round_sum += best;
    }
    sum += round_sum / static_cast<double>(cfg.rounds);
  }
  return sum / static_cast<double>(view.relations.size());
}

double relation_margin(EntityId h, RelationId r, const NeighborhoodIndex& index,
                       const EmbeddingModel& model) {
  AnchorView view = anchor_view(h, index);
  if (std::find(view.relations.begin(), view.relations.end(), r) == view.relations.end()) {
    throw std::invalid_argument("relation " + std::to_string(r) + " is not related to entity " +
                                std::to_string(h));
  }
  double base = margin_norm(model.relation(r), model.dissimilarity());
  double best = std::numeric_limits<double>::infinity();
  for (RelationId other : view.relations) {
    if (other == r) continue;
    double len = margin_norm(model.relation(other), model.dissimilarity());
    if (len >= base) best = std::min(best, len - base);
  }
  return std::isfinite(best) ? best : 0.0;
}

double combined_margin(double mu, double m_ent, double m_rel) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must be in [0, 1]");
  if (m_ent < 0.0 || m_rel < 0.0) throw std::invalid_argument("margins must be non-negative");
  return mu * m_ent + (1.0 - mu) * m_rel;
}

double MarginTable::ent(EntityId h) const {
  auto it = m_ent.find(h);
  if (it == m_ent.end()) throw std::out_of_range("entity not in margin table");
  return it->second;
}

double MarginTable::rel(EntityId h, RelationId r) const {
  return lookup(m_rel, pair_key(h, r), "m_rel");
}

double MarginTable::opt(EntityId h, RelationId r) const {
  return lookup(m_opt, pair_key(h, r), "m_opt");
}

MarginTable refresh_table(const NeighborhoodIndex& index, const EmbeddingModel& model, double mu,
                          const std::optional<ActiveSetConfig>& active, int epoch, int threads) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must be in [0, 1]");
  if (active) active->validate();

  std::vector<EntityId> heads;
  for (EntityId e = 0; e < index.graph().num_entities(); ++e) {
    if (index.head_anchored(e)) heads.push_back(e);
  }

  // Each slot is computed independently (per-entity rng streams), so the
  // result does not depend on the thread count.
  std::vector<double> ent_values(heads.size());
  auto compute_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (active) {
        ActiveSetConfig cfg = *active;
        cfg.rng_seed = active->rng_seed + static_cast<std::uint64_t>(epoch) * 1000003ULL +
                       static_cast<std::uint64_t>(heads[i]);
        ent_values[i] = entity_margin_active(heads[i], index, model, cfg);
      } else {
        ent_values[i] = entity_margin_exact(heads[i], index, model);
      }
    }
  };
  if (threads <= 1 || heads.size() < 64) {
    compute_range(0, heads.size());
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (heads.size() + static_cast<std::size_t>(threads) - 1) /
                        static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
      std::size_t begin = static_cast<std::size_t>(t) * chunk;
      std::size_t end = std::min(begin + chunk, heads.size());
      if (begin >= end) break;
      pool.emplace_back(compute_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  MarginTable table;
  table.mu = mu;
  table.epoch_computed = epoch;
  double opt_sum = 0.0;
  std::size_t opt_count = 0;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    EntityId h = heads[i];
    table.m_ent.emplace(h, ent_values[i]);
    for (RelationId r : index.head_relations(h)) {
      double mr = relation_margin(h, r, index, model);
      double mo = combined_margin(mu, ent_values[i], mr);
      table.m_rel.emplace(pair_key(h, r), mr);
      table.m_opt.emplace(pair_key(h, r), mo);
      opt_sum += mo;
      ++opt_count;
    }
  }
  table.global_mean_opt = opt_count > 0 ? opt_sum / static_cast<double>(opt_count) : 0.0;
  return table;
}

void MarginTable::save_entity_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  std::vector<EntityId> ids;
  ids.reserve(m_ent.size());
  for (const auto& [h, _] : m_ent) ids.push_back(h);
  std::sort(ids.begin(), ids.end());
  out.precision(17);
  for (EntityId h : ids) out << h << '\t' << m_ent.at(h) << '\n';
}

void MarginTable::save_pair_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  std::vector<std::uint64_t> keys;
  keys.reserve(m_rel.size());
  for (const auto& [k, _] : m_rel) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  out.precision(17);
  for (std::uint64_t k : keys) {
    out << static_cast<EntityId>(k >> 32) << '\t' << static_cast<RelationId>(k & 0xffffffffULL)
        << '\t' << m_rel.at(k) << '\t' << m_opt.at(k) << '\n';
  }
}

}  // namespace transa
