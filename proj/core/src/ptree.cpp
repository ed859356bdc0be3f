#include "kgseries/ptree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "kgseries/errors.hpp"

namespace kgs {

namespace {

void require_valid_p(int p) {
  if (p < 2) throw ConfigError("tree arity p must be >= 2, got " + std::to_string(p));
}

void require_valid_order(int N) {
  if (N < 0) throw ConfigError("tree order must be >= 0, got " + std::to_string(N));
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, int p, int N) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r))
    throw RangeError("tree count overflows 64 bits at p=" + std::to_string(p) +
                     ", order=" + std::to_string(N));
  return r;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, int p, int N) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r))
    throw RangeError("tree count overflows 64 bits at p=" + std::to_string(p) +
                     ", order=" + std::to_string(N));
  return r;
}

}  // namespace

PTree PTree::graft(int p, std::vector<PTree> children) {
  require_valid_p(p);
  if (static_cast<int>(children.size()) != p)
    throw ArityError("graft needs exactly " + std::to_string(p) + " children, got " +
                     std::to_string(children.size()));
  PTree b;
  b.order_ = 1;
  for (const PTree& c : children) {
    if (!c.is_leaf() && c.root_arity() != p)
      throw ArityError("child has root arity " + std::to_string(c.root_arity()) +
                       ", expected " + std::to_string(p));
    b.order_ += c.order_;
  }
  b.children_ = std::move(children);
  return b;
}

const std::vector<PTree>& PTree::decompose() const {
  if (is_leaf()) throw RangeError("the leaf tree has no decomposition");
  return children_;
}

std::string PTree::key() const {
  if (is_leaf()) return "o";
  std::string s = "(";
  for (const PTree& c : children_) s += c.key();
  s += ")";
  return s;
}

namespace {

PTree parse_at(std::string_view key, std::size_t& pos, int p) {
  if (pos >= key.size()) throw FormatError("unexpected end of tree key");
  char c = key[pos];
  if (c == 'o') {
    ++pos;
    return PTree::leaf();
  }
  if (c != '(')
    throw FormatError("unexpected character '" + std::string(1, c) + "' at offset " +
                      std::to_string(pos) + " of tree key");
  ++pos;
  std::vector<PTree> children;
  while (pos < key.size() && key[pos] != ')') {
    children.push_back(parse_at(key, pos, p));
  }
  if (pos >= key.size()) throw FormatError("unbalanced '(' in tree key");
  ++pos;  // consume ')'
  if (static_cast<int>(children.size()) != p)
    throw FormatError("internal vertex carries " + std::to_string(children.size()) +
                      " children, expected " + std::to_string(p));
  return PTree::graft(p, std::move(children));
}

}  // namespace

PTree PTree::parse(std::string_view key, int p) {
  require_valid_p(p);
  std::size_t pos = 0;
  PTree b = parse_at(key, pos, p);
  if (pos != key.size())
    throw FormatError("trailing characters after tree key at offset " + std::to_string(pos));
  return b;
}

bool PTree::operator==(const PTree& other) const noexcept {
  if (order_ != other.order_ || children_.size() != other.children_.size()) return false;
  for (std::size_t i = 0; i < children_.size(); ++i)
    if (!(children_[i] == other.children_[i])) return false;
  return true;
}

namespace {

// Compositions of `total` into `parts` nonnegative integers, visited in
// lexicographic order via a simple odometer.
template <typename Fn>
void for_each_composition(int total, int parts, std::vector<int>& q, Fn&& fn) {
  if (parts == 1) {
    q.push_back(total);
    fn(q);
    q.pop_back();
    return;
  }
  for (int first = 0; first <= total; ++first) {
    q.push_back(first);
    for_each_composition(total - first, parts - 1, q, fn);
    q.pop_back();
  }
}

std::vector<std::vector<PTree>> enumerate_up_to(int p, int N) {
  std::vector<std::vector<PTree>> memo(static_cast<std::size_t>(N) + 1);
  memo[0] = {PTree::leaf()};
  for (int n = 1; n <= N; ++n) {
    std::vector<PTree>& out = memo[n];
    std::vector<int> q;
    for_each_composition(n - 1, p, q, [&](const std::vector<int>& comp) {
      // Odometer over the child choices for this composition.
      std::vector<std::size_t> idx(comp.size(), 0);
      while (true) {
        std::vector<PTree> children;
        children.reserve(comp.size());
        for (std::size_t i = 0; i < comp.size(); ++i)
          children.push_back(memo[comp[i]][idx[i]]);
        out.push_back(PTree::graft(p, std::move(children)));
        std::size_t i = comp.size();
        while (i > 0) {
          --i;
          if (++idx[i] < memo[comp[i]].size()) break;
          idx[i] = 0;
          if (i == 0) return;
        }
      }
    });
  }
  return memo;
}

}  // namespace

std::vector<PTree> enumerate_trees(int p, int N) {
  require_valid_p(p);
  require_valid_order(N);
  std::vector<PTree> out = enumerate_up_to(p, N)[N];
  std::sort(out.begin(), out.end(),
            [](const PTree& a, const PTree& b) { return a.key() < b.key(); });
  return out;
}

std::uint64_t count_trees(int p, int N) {
  require_valid_p(p);
  require_valid_order(N);
  std::vector<std::uint64_t> c(static_cast<std::size_t>(N) + 1, 0);
  c[0] = 1;
  for (int n = 1; n <= N; ++n) {
    // ways[j][t] = number of child tuples filling j slots with total order t.
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(n), 0);
    ways[0] = 1;
    std::vector<std::uint64_t> next(static_cast<std::size_t>(n), 0);
    for (int slot = 0; slot < p; ++slot) {
      std::fill(next.begin(), next.end(), 0);
      for (int t = 0; t < n; ++t) {
        if (ways[t] == 0) continue;
        for (int q = 0; t + q < n; ++q) {
          if (c[q] == 0) continue;
          next[t + q] =
              checked_add(next[t + q], checked_mul(ways[t], c[q], p, n), p, n);
        }
      }
      ways.swap(next);
    }
    c[n] = ways[n - 1];
  }
  return c[N];
}

double count_bound(int p, int N) {
  require_valid_p(p);
  require_valid_order(N);
  const double base =
      std::pow(static_cast<double>(p), p) / std::pow(static_cast<double>(p - 1), p - 1);
  return std::pow(base, N);
}

PTree commutative_rep(const PTree& b) {
  if (b.is_leaf()) return b;
  const int p = b.root_arity();
  std::vector<PTree> reps;
  reps.reserve(b.decompose().size());
  for (const PTree& c : b.decompose()) reps.push_back(commutative_rep(c));
  std::sort(reps.begin(), reps.end(),
            [](const PTree& a, const PTree& c) { return a.key() < c.key(); });
  return PTree::graft(p, std::move(reps));
}

std::vector<TreeClass> enumerate_classes(int p, int N) {
  std::map<std::string, TreeClass> classes;
  for (const PTree& b : enumerate_trees(p, N)) {
    PTree rep = commutative_rep(b);
    std::string k = rep.key();
    auto it = classes.find(k);
    if (it == classes.end()) {
      classes.emplace(std::move(k), TreeClass{std::move(rep), 1});
    } else {
      ++it->second.multiplicity;
    }
  }
  std::vector<TreeClass> out;
  out.reserve(classes.size());
  for (auto& [k, cls] : classes) out.push_back(std::move(cls));
  return out;
}

}  // namespace kgs
