#pragma once

#include <cstdint>
#include <functional>
#include <unordered_set>

namespace transa {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const {
    std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.head)) << 32) ^
                      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.relation)) << 16) ^
                      static_cast<std::uint32_t>(t.tail);
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    return static_cast<std::size_t>(k);
  }
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

// Key for (entity, relation) keyed maps.
inline std::uint64_t pair_key(EntityId e, RelationId r) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e)) << 32) |
         static_cast<std::uint32_t>(r);
}

}  // namespace transa
