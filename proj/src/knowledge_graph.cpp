#include "transa/knowledge_graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "transa/errors.hpp"

namespace transa {

std::string to_string(TripleFormat f) {
  return f == TripleFormat::TsvNames ? "names" : "ids";
}

TripleFormat triple_format_from_string(const std::string& name) {
  if (name == "names") return TripleFormat::TsvNames;
  if (name == "ids") return TripleFormat::TsvIds;
  throw std::invalid_argument("unknown triple format: " + name);
}

std::int32_t Vocab::get_or_add(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  std::int32_t id = static_cast<std::int32_t>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  return id;
}

std::int32_t Vocab::id_of(const std::string& name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? -1 : it->second;
}

const std::string& Vocab::name_of(std::int32_t id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("vocab id out of range");
  return names_[static_cast<std::size_t>(id)];
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::int64_t parse_id(const std::string& field, const std::filesystem::path& path,
                      std::size_t line_no) {
  std::int64_t value = -1;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
    throw DataError(path.string() + ":" + std::to_string(line_no) +
                    ": expected a non-negative integer id, got '" + field + "'");
  }
  // A huge id with few triples would allocate an absurd dense vocabulary.
  if (value > 50'000'000) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": id " + field +
                    " exceeds the supported vocabulary size");
  }
  return value;
}

struct RawTriple {
  std::string head, relation, tail;
  bool negative = false;
};

// Reads one split file. With `labeled`, a fourth field in {1,-1} marks
// positives/negatives; otherwise exactly three fields are required.
std::vector<RawTriple> read_split(const std::filesystem::path& path, bool labeled) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<RawTriple> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (!labeled && fields.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    if (labeled && fields.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    RawTriple row{fields[0], fields[1], fields[2], false};
    if (labeled) {
      if (fields[3] == "-1") {
        row.negative = true;
      } else if (fields[3] != "1" && fields[3] != "+1") {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected label 1 or -1, got '" +
                        fields[3] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

KnowledgeGraph KnowledgeGraph::load(const std::filesystem::path& train_path,
                                    const std::filesystem::path& valid_path,
                                    const std::filesystem::path& test_path, TripleFormat format,
                                    bool labeled) {
  KnowledgeGraph g;
  struct SplitSpec {
    std::filesystem::path path;
    std::vector<Triple>* pos;
    std::vector<Triple>* neg;
    bool labeled;
  };
  const SplitSpec specs[] = {
      {train_path, &g.train_, nullptr, false},
      {valid_path, &g.valid_, &g.valid_neg_, labeled},
      {test_path, &g.test_, &g.test_neg_, labeled},
  };

  // Ids are assigned in first-appearance order scanning train, valid, test.
  std::int64_t max_entity_id = -1, max_relation_id = -1;
  for (const auto& spec : specs) {
    auto rows = read_split(spec.path, spec.labeled);
    TripleSet seen;
    std::size_t dropped = 0;
    std::size_t line_no = 0;
    for (const auto& row : rows) {
      ++line_no;
      Triple t;
      if (format == TripleFormat::TsvNames) {
        t.head = g.entities_.get_or_add(row.head);
        t.relation = g.relations_.get_or_add(row.relation);
        t.tail = g.entities_.get_or_add(row.tail);
      } else {
        t.head = static_cast<EntityId>(parse_id(row.head, spec.path, line_no));
        t.relation = static_cast<RelationId>(parse_id(row.relation, spec.path, line_no));
        t.tail = static_cast<EntityId>(parse_id(row.tail, spec.path, line_no));
        max_entity_id = std::max({max_entity_id, static_cast<std::int64_t>(t.head),
                                  static_cast<std::int64_t>(t.tail)});
        max_relation_id = std::max(max_relation_id, static_cast<std::int64_t>(t.relation));
      }
      if (!seen.insert(t).second) {
        ++dropped;
        continue;
      }
      if (row.negative) {
        spec.neg->push_back(t);
      } else {
        spec.pos->push_back(t);
      }
    }
    if (dropped > 0) {
      std::cerr << "warning: dropped " << dropped << " duplicate line(s) in " << spec.path.string()
                << "\n";
    }
  }

  if (format == TripleFormat::TsvIds) {
    for (std::int64_t i = 0; i <= max_entity_id; ++i) g.entities_.get_or_add(std::to_string(i));
    for (std::int64_t i = 0; i <= max_relation_id; ++i) g.relations_.get_or_add(std::to_string(i));
  }

  g.rebuild_correct_set();
  g.validate();
  return g;
}

KnowledgeGraph KnowledgeGraph::from_triples(std::int32_t num_entities, std::int32_t num_relations,
                                            std::vector<Triple> train, std::vector<Triple> valid,
                                            std::vector<Triple> test) {
  KnowledgeGraph g;
  for (std::int32_t i = 0; i < num_entities; ++i) g.entities_.get_or_add("e" + std::to_string(i));
  for (std::int32_t i = 0; i < num_relations; ++i) g.relations_.get_or_add("r" + std::to_string(i));
  g.train_ = std::move(train);
  g.valid_ = std::move(valid);
  g.test_ = std::move(test);
  for (auto* split : {&g.train_, &g.valid_, &g.test_}) {
    TripleSet seen;
    std::vector<Triple> kept;
    kept.reserve(split->size());
    for (const Triple& t : *split) {
      if (seen.insert(t).second) kept.push_back(t);
    }
    *split = std::move(kept);
  }
  g.rebuild_correct_set();
  g.validate();
  return g;
}

void KnowledgeGraph::rebuild_correct_set() {
  correct_.clear();
  correct_.reserve(train_.size() + valid_.size() + test_.size());
  for (const auto* split : {&train_, &valid_, &test_}) {
    for (const Triple& t : *split) correct_.insert(t);
  }
}

void KnowledgeGraph::validate() const {
  if (train_.empty()) throw DataError("train split is empty");
  auto check = [this](const std::vector<Triple>& split, const char* name) {
    for (const Triple& t : split) {
      if (t.head < 0 || t.head >= num_entities() || t.tail < 0 || t.tail >= num_entities() ||
          t.relation < 0 || t.relation >= num_relations()) {
        throw DataError(std::string(name) + " split references an id outside the vocabulary");
      }
    }
  };
  check(train_, "train");
  check(valid_, "valid");
  check(test_, "test");
  check(valid_neg_, "valid-negative");
  check(test_neg_, "test-negative");
}

namespace {

void write_triples(const std::filesystem::path& path, std::span<const Triple> triples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const Triple& t : triples) {
    out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  }
}

void write_vocab(const std::filesystem::path& path, const Vocab& vocab) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::int32_t i = 0; i < vocab.size(); ++i) {
    out << i << '\t' << vocab.name_of(i) << '\n';
  }
}

void read_vocab(const std::filesystem::path& path, Vocab& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected `id<TAB>name`");
    }
    std::int64_t id = parse_id(line.substr(0, tab), path, line_no);
    std::int32_t assigned = vocab.get_or_add(line.substr(tab + 1));
    if (assigned != id) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": ids must be dense and in order (expected " + std::to_string(assigned) +
                      ", got " + std::to_string(id) + ")");
    }
  }
}

std::vector<Triple> read_id_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    triples.push_back(Triple{static_cast<EntityId>(parse_id(fields[0], path, line_no)),
                             static_cast<RelationId>(parse_id(fields[1], path, line_no)),
                             static_cast<EntityId>(parse_id(fields[2], path, line_no))});
  }
  return triples;
}

}  // namespace

void KnowledgeGraph::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_vocab(dir / "entities.tsv", entities_);
  write_vocab(dir / "relations.tsv", relations_);
  write_triples(dir / "train.tsv", train_);
  write_triples(dir / "valid.tsv", valid_);
  write_triples(dir / "test.tsv", test_);
  if (!valid_neg_.empty()) write_triples(dir / "valid_neg.tsv", valid_neg_);
  if (!test_neg_.empty()) write_triples(dir / "test_neg.tsv", test_neg_);
}

KnowledgeGraph KnowledgeGraph::load_dir(const std::filesystem::path& dir) {
  KnowledgeGraph g;
  read_vocab(dir / "entities.tsv", g.entities_);
  read_vocab(dir / "relations.tsv", g.relations_);
  g.train_ = read_id_triples(dir / "train.tsv");
  g.valid_ = read_id_triples(dir / "valid.tsv");
  g.test_ = read_id_triples(dir / "test.tsv");
  if (std::filesystem::exists(dir / "valid_neg.tsv")) {
    g.valid_neg_ = read_id_triples(dir / "valid_neg.tsv");
  }
  if (std::filesystem::exists(dir / "test_neg.tsv")) {
    g.test_neg_ = read_id_triples(dir / "test_neg.tsv");
  }
  g.rebuild_correct_set();
  g.validate();
  return g;
}

Triple KnowledgeGraph::corrupt(const Triple& triple, Rng& rng, int max_retries) const {
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Triple candidate = triple;
    bool replace_head = uniform_unit(rng) < 0.5;
    EntityId entity = static_cast<EntityId>(uniform_index(rng, static_cast<std::uint64_t>(num_entities())));
    if (replace_head) {
      candidate.head = entity;
    } else {
      candidate.tail = entity;
    }
    if (!contains(candidate)) return candidate;
  }
  throw DataError("corrupt: no negative triple found after " + std::to_string(max_retries) +
                  " attempts");
}

std::vector<KnowledgeGraph> KnowledgeGraph::partition(std::int32_t k, Rng& rng,
                                                      std::vector<std::int32_t>* assignment_out) const {
  if (k <= 0 || k > num_relations()) {
    throw std::invalid_argument("partition: k must be in [1, num_relations]");
  }
  std::vector<RelationId> order(static_cast<std::size_t>(num_relations()));
  for (std::int32_t i = 0; i < num_relations(); ++i) order[static_cast<std::size_t>(i)] = i;
  shuffle_in_place(order, rng);

  // First (|R| mod k) groups get one extra relation.
  std::vector<std::int32_t> assignment(order.size(), 0);
  std::int32_t base = num_relations() / k;
  std::int32_t extra = num_relations() % k;
  std::size_t cursor = 0;
  for (std::int32_t group = 0; group < k; ++group) {
    std::int32_t take = base + (group < extra ? 1 : 0);
    for (std::int32_t j = 0; j < take; ++j) {
      assignment[static_cast<std::size_t>(order[cursor++])] = group;
    }
  }
  if (assignment_out) *assignment_out = assignment;

  std::vector<KnowledgeGraph> parts;
  parts.reserve(static_cast<std::size_t>(k));
  for (std::int32_t group = 0; group < k; ++group) {
    KnowledgeGraph sub;
    auto remap = [&](std::span<const Triple> src, std::vector<Triple>& dst) {
      for (const Triple& t : src) {
        if (assignment[static_cast<std::size_t>(t.relation)] != group) continue;
        Triple mapped;
        mapped.head = sub.entities_.get_or_add(entities_.name_of(t.head));
        mapped.relation = sub.relations_.get_or_add(relations_.name_of(t.relation));
        mapped.tail = sub.entities_.get_or_add(entities_.name_of(t.tail));
        dst.push_back(mapped);
      }
    };
    remap(train_, sub.train_);
    remap(valid_, sub.valid_);
    remap(test_, sub.test_);
    remap(valid_neg_, sub.valid_neg_);
    remap(test_neg_, sub.test_neg_);
    sub.rebuild_correct_set();
    parts.push_back(std::move(sub));
  }
  return parts;
}

}  // namespace transa
