#include "gwre/tree.hpp"

#include <algorithm>
#include <mutex>

#include "gwre/errors.hpp"

namespace gwre {

namespace {
std::uint64_t child_hash(std::uint64_t parent_hash, std::uint32_t index) {
  return CounterRng::derive(parent_hash, 0x7472ee00ull + index);
}
}  // namespace

LazyTree::LazyTree(OffspringLaw law, std::uint64_t seed)
    : law_(std::move(law)), seed_(seed) {
  // Root address hash folds in the tree seed so distinct seeds give
  // distinct vertex streams everywhere.
  nodes_.push_back(Node{kSentinel, 0, 0, CounterRng::derive(seed, 0x726f6f74ull)});
}

void LazyTree::check(NodeId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size())
    throw UnrealizedAncestorError("tree: vertex " + std::to_string(v) +
                                  " was never realized");
}

std::uint64_t LazyTree::vertex_key(NodeId v) const {
  std::shared_lock lock(mutex_);
  check(v);
  return nodes_[v].addr_hash;
}

std::vector<NodeId> LazyTree::expand(NodeId v) {
  {
    std::shared_lock lock(mutex_);
    check(v);
    if (nodes_[v].n_children >= 0) {
      std::vector<NodeId> out(nodes_[v].n_children);
      for (int i = 0; i < nodes_[v].n_children; ++i)
        out[i] = nodes_[v].first_child + i;
      return out;
    }
  }
  std::unique_lock lock(mutex_);
  return expand_locked(v);
}

std::vector<NodeId> LazyTree::expand_locked(NodeId v) {
  if (nodes_[v].n_children < 0) {
    // Copy before push_back: growing nodes_ invalidates references into it.
    const std::uint64_t addr_hash = nodes_[v].addr_hash;
    const int depth = nodes_[v].depth;
    CounterRng rng(CounterRng::derive(addr_hash, 0x6f666673ull));
    int k = law_.sample(rng);
    nodes_[v].first_child = static_cast<NodeId>(nodes_.size());
    nodes_[v].n_children = k;
    for (int i = 0; i < k; ++i) {
      nodes_.push_back(Node{v, static_cast<std::uint32_t>(i), depth + 1,
                            child_hash(addr_hash, i)});
    }
  }
  std::vector<NodeId> out(nodes_[v].n_children);
  for (int i = 0; i < nodes_[v].n_children; ++i)
    out[i] = nodes_[v].first_child + i;
  return out;
}

std::vector<NodeId> LazyTree::expand_at(const VertexAddress& address) {
  return expand(at(address));
}

NodeId LazyTree::at(const VertexAddress& address) const {
  std::shared_lock lock(mutex_);
  NodeId v = kRoot;
  for (std::uint32_t idx : address) {
    const Node& node = nodes_[v];
    if (node.n_children < 0)
      throw UnrealizedAncestorError("tree: address passes through unrealized vertex");
    if (static_cast<int>(idx) >= node.n_children)
      throw UnrealizedAncestorError("tree: child index out of range");
    v = node.first_child + idx;
  }
  return v;
}

NodeId LazyTree::parent(NodeId v) const {
  std::shared_lock lock(mutex_);
  check(v);
  return nodes_[v].parent;
}

int LazyTree::depth(NodeId v) const {
  std::shared_lock lock(mutex_);
  check(v);
  return nodes_[v].depth;
}

std::uint32_t LazyTree::child_index(NodeId v) const {
  std::shared_lock lock(mutex_);
  check(v);
  return nodes_[v].child_index;
}

VertexAddress LazyTree::address(NodeId v) const {
  std::shared_lock lock(mutex_);
  check(v);
  VertexAddress out;
  while (v != kRoot) {
    out.push_back(nodes_[v].child_index);
    v = nodes_[v].parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

bool LazyTree::is_ancestor(NodeId a, NodeId d) const {
  std::shared_lock lock(mutex_);
  check(a);
  check(d);
  while (nodes_[d].depth > nodes_[a].depth) d = nodes_[d].parent;
  return d == a;
}

int LazyTree::realized_children(NodeId v) const {
  std::shared_lock lock(mutex_);
  check(v);
  return nodes_[v].n_children;
}

std::size_t LazyTree::node_count() const {
  std::shared_lock lock(mutex_);
  return nodes_.size();
}

}  // namespace gwre
