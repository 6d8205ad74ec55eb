#pragma once

#include <cstdint>
#include <shared_mutex>
#include <vector>

#include "gwre/errors.hpp"
#include "gwre/offspring.hpp"
#include "gwre/rng.hpp"

namespace gwre {

/// Dense handle of a realized tree node. 0 is the root; kSentinel is the
/// parent adjoined above the root.
using NodeId = std::int64_t;

inline constexpr NodeId kSentinel = -1;
inline constexpr NodeId kRoot = 0;

/// Child-index path from the root; the root has the empty address.
using VertexAddress = std::vector<std::uint32_t>;

/// Lazily realized Galton--Watson tree.
///
/// Offspring counts are drawn from a per-vertex stream keyed on the vertex
/// address and the tree seed, so the realization is a deterministic function
/// of (law, seed) regardless of expansion order or thread interleaving.
/// Reads are concurrent; expansion takes the write lock.
class LazyTree {
 public:
  LazyTree(OffspringLaw law, std::uint64_t seed);

  /// Children of `v`, realizing them on first call. Idempotent.
  std::vector<NodeId> expand(NodeId v);

  /// Address-based expansion; throws UnrealizedAncestorError if any strict
  /// ancestor of the addressed vertex has not been realized yet.
  std::vector<NodeId> expand_at(const VertexAddress& address);

  /// Looks up a realized vertex by address; throws if unrealized.
  NodeId at(const VertexAddress& address) const;

  NodeId parent(NodeId v) const;
  int depth(NodeId v) const;
  std::uint32_t child_index(NodeId v) const;
  VertexAddress address(NodeId v) const;
  bool is_ancestor(NodeId a, NodeId d) const;

  /// Offspring count of `v` if already realized, -1 otherwise.
  int realized_children(NodeId v) const;

  /// Key of the per-vertex RNG stream; also used by the walk environment
  /// to realize weights for this vertex.
  std::uint64_t vertex_key(NodeId v) const;

  const OffspringLaw& law() const { return law_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t node_count() const;

 private:
  struct Node {
    NodeId parent;
    std::uint32_t child_index;
    int depth;
    std::uint64_t addr_hash;
    NodeId first_child = -1;  // -1 while unexpanded
    int n_children = -1;
  };

  std::vector<NodeId> expand_locked(NodeId v);
  void check(NodeId v) const;

  OffspringLaw law_;
  std::uint64_t seed_;
  std::vector<Node> nodes_;
  mutable std::shared_mutex mutex_;
};

}  // namespace gwre
