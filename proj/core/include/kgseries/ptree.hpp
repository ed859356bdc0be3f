#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kgs {

/// Planar rooted tree in which every internal vertex carries exactly p
/// ordered children. Immutable value type with structural equality.
///
/// The order |b| of a tree is its number of internal vertices; a tree of
/// order N has N*(p-1)+1 leaves. Keys serialize the planar shape: a leaf is
/// "o", an internal vertex is "(" followed by its children's keys and ")".
class PTree {
public:
  /// The single leaf tree, order 0.
  PTree() = default;
  static PTree leaf() { return PTree{}; }

  /// Grafts p subtrees under a fresh root. Throws ArityError unless
  /// children.size() == p and every child is itself a p-tree.
  static PTree graft(int p, std::vector<PTree> children);

  bool is_leaf() const noexcept { return children_.empty(); }

  /// Number of internal vertices.
  int order() const noexcept { return order_; }

  /// Number of children of the root (0 for the leaf).
  int root_arity() const noexcept { return static_cast<int>(children_.size()); }

  /// The unique ordered child tuple of an internal tree.
  /// Throws RangeError on the leaf, which has no decomposition.
  const std::vector<PTree>& decompose() const;

  /// Planar serialization, e.g. "((oo)o)".
  std::string key() const;

  /// Inverse of key(). Throws FormatError on malformed input or when an
  /// internal vertex does not carry exactly p children.
  static PTree parse(std::string_view key, int p);

  bool operator==(const PTree& other) const noexcept;
  bool operator!=(const PTree& other) const noexcept { return !(*this == other); }

private:
  std::vector<PTree> children_;
  int order_ = 0;
};

/// All planar p-trees of order N, sorted lexicographically by key.
std::vector<PTree> enumerate_trees(int p, int N);

/// Number of planar p-trees of order N, computed by the convolution
/// recursion count(N+1) = sum over compositions q1+...+qp = N of
/// prod count(qi). Throws RangeError if the count overflows 64 bits.
std::uint64_t count_trees(int p, int N);

/// Growth bound (p^p / (p-1)^(p-1))^N on count_trees(p, N).
double count_bound(int p, int N);

/// Representative of the commutativity class of b: children sorted by
/// representative key, recursively. Two planar trees have equal
/// representatives iff they differ only by reordering children.
PTree commutative_rep(const PTree& b);

/// A commutativity class: its representative and the number of planar
/// trees it contains.
struct TreeClass {
  PTree rep;
  std::uint64_t multiplicity = 0;
};

/// Commutativity classes of order N, sorted by representative key.
/// Multiplicities sum to count_trees(p, N).
std::vector<TreeClass> enumerate_classes(int p, int N);

}  // namespace kgs
