#include "transa/embedding_model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "transa/errors.hpp"
#include "transa/rng.hpp"

namespace transa {

EmbeddingModel::EmbeddingModel(std::int32_t num_entities, std::int32_t num_relations, int dim,
                               Dissimilarity dissim)
    : num_entities_(num_entities), num_relations_(num_relations), dim_(dim), dissim_(dissim) {
  if (num_entities <= 0 || num_relations <= 0 || dim <= 0) {
    throw std::invalid_argument("model sizes must be positive");
  }
  entity_vecs_.assign(static_cast<std::size_t>(num_entities) * dim, 0.0);
  relation_vecs_.assign(static_cast<std::size_t>(num_relations) * dim, 0.0);
}

void EmbeddingModel::normalize(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq <= 0.0) return;
  double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

void EmbeddingModel::project_to_unit_ball(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq <= 1.0) return;
  double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

EmbeddingModel init_model(std::int32_t num_entities, std::int32_t num_relations, int dim,
                          Dissimilarity dissim, std::uint64_t seed) {
  EmbeddingModel model(num_entities, num_relations, dim, dissim);
  Rng rng(seed);
  double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  for (double& x : model.entity_data()) x = uniform_real(rng, -bound, bound);
  for (double& x : model.relation_data()) x = uniform_real(rng, -bound, bound);
  for (std::int32_t r = 0; r < num_relations; ++r) {
    EmbeddingModel::normalize(model.relation(r));
  }
  return model;
}

double score(const EmbeddingModel& model, const Triple& triple) {
  if (triple.head < 0 || triple.head >= model.num_entities() || triple.tail < 0 ||
      triple.tail >= model.num_entities() || triple.relation < 0 ||
      triple.relation >= model.num_relations()) {
    throw std::invalid_argument("score: triple id out of range");
  }
  auto h = model.entity(triple.head);
  auto r = model.relation(triple.relation);
  auto t = model.entity(triple.tail);
  double acc = 0.0;
  switch (model.dissimilarity()) {
    case Dissimilarity::L1:
      for (int i = 0; i < model.dim(); ++i) acc += std::fabs(h[i] + r[i] - t[i]);
      return acc;
    case Dissimilarity::L2:
      for (int i = 0; i < model.dim(); ++i) {
        double d = h[i] + r[i] - t[i];
        acc += d * d;
      }
      return std::sqrt(acc);
    case Dissimilarity::L2Squared:
      for (int i = 0; i < model.dim(); ++i) {
        double d = h[i] + r[i] - t[i];
        acc += d * d;
      }
      return acc;
  }
  return acc;
}

std::string to_string(Dissimilarity d) {
  switch (d) {
    case Dissimilarity::L1:
      return "l1";
    case Dissimilarity::L2:
      return "l2";
    case Dissimilarity::L2Squared:
      return "l2sq";
  }
  return "l1";
}

Dissimilarity dissimilarity_from_string(const std::string& name) {
  if (name == "l1") return Dissimilarity::L1;
  if (name == "l2") return Dissimilarity::L2;
  if (name == "l2sq") return Dissimilarity::L2Squared;
  throw std::invalid_argument("unknown dissimilarity: " + name + " (expected l1, l2 or l2sq)");
}

namespace {
constexpr char kMagic[8] = {'T', 'R', 'A', 'N', 'S', 'A', '0', '1'};
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  std::int64_t ne = num_entities_, nr = num_relations_;
  std::int32_t d = dim_, dis = static_cast<std::int32_t>(dissim_);
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&ne), sizeof(ne));
  out.write(reinterpret_cast<const char*>(&nr), sizeof(nr));
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(&dis), sizeof(dis));
  out.write(reinterpret_cast<const char*>(entity_vecs_.data()),
            static_cast<std::streamsize>(entity_vecs_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(relation_vecs_.data()),
            static_cast<std::streamsize>(relation_vecs_.size() * sizeof(double)));
  if (!out) throw DataError("failed writing " + path.string());
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError(path.string() + " is not a model checkpoint");
  }
  std::int64_t ne = 0, nr = 0;
  std::int32_t d = 0, dis = 0;
  in.read(reinterpret_cast<char*>(&ne), sizeof(ne));
  in.read(reinterpret_cast<char*>(&nr), sizeof(nr));
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  in.read(reinterpret_cast<char*>(&dis), sizeof(dis));
  if (!in || ne <= 0 || nr <= 0 || d <= 0 || dis < 0 || dis > 2) {
    throw DataError(path.string() + ": corrupt checkpoint header");
  }
  EmbeddingModel model(static_cast<std::int32_t>(ne), static_cast<std::int32_t>(nr), d,
                       static_cast<Dissimilarity>(dis));
  in.read(reinterpret_cast<char*>(model.entity_data().data()),
          static_cast<std::streamsize>(model.entity_data().size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(model.relation_data().data()),
          static_cast<std::streamsize>(model.relation_data().size() * sizeof(double)));
  if (!in) throw DataError(path.string() + ": truncated checkpoint");
  return model;
}

}  // namespace transa
