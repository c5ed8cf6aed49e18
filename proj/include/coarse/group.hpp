#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/graph.hpp"

namespace coarse {

// Concrete coordinates of a group element (residues, matrix entries,
// permutation images).
using ElementKey = std::vector<int>;

// Finite group stored through the right-regular action of its generators.
// Generators come in pairs: index 2k is s_k, index 2k+1 is s_k^{-1}.
// Every element carries a shortest word from the identity, so general
// products are evaluated as x * y = x . word(y).
class FiniteGroup {
 public:
  using Multiply = std::function<ElementKey(const ElementKey&, const ElementKey&)>;

  // Closure of `generators` (paired with their inverses as above) under
  // `multiply`. Rejects once more than `bound` elements appear.
  static FiniteGroup closure(std::string name, const ElementKey& identity, const std::vector<ElementKey>& generators,
                             const Multiply& multiply, std::size_t bound);

  int order() const { return static_cast<int>(keys_.size()); }
  int identity() const { return 0; }
  int generator_count() const { return static_cast<int>(generator_elements_.size()); }
  // Element index of generator s.
  int generator(int s) const { return generator_elements_.at(static_cast<std::size_t>(s)); }
  const std::vector<int>& generators() const { return generator_elements_; }
  static int inverse_generator(int s) { return s ^ 1; }

  int right_multiply(int x, int s) const {
    return right_[static_cast<std::size_t>(s)][static_cast<std::size_t>(x)];
  }
  int apply_word(int x, const std::vector<int>& word) const {
    for (int s : word) x = right_multiply(x, s);
    return x;
  }
  int evaluate(const std::vector<int>& word) const { return apply_word(identity(), word); }

  int multiply(int x, int y) const { return apply_word(x, words_[static_cast<std::size_t>(y)]); }
  int inverse(int x) const {
    const auto& w = words_[static_cast<std::size_t>(x)];
    int r = identity();
    for (auto it = w.rbegin(); it != w.rend(); ++it) r = right_multiply(r, inverse_generator(*it));
    return r;
  }
  // Shortest word (generator indices) representing x.
  const std::vector<int>& word(int x) const { return words_.at(static_cast<std::size_t>(x)); }
  const ElementKey& key(int x) const { return keys_.at(static_cast<std::size_t>(x)); }
  int find(const ElementKey& k) const {
    auto it = index_.find(k);
    return it == index_.end() ? -1 : it->second;
  }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::vector<ElementKey> keys_;
  std::map<ElementKey, int> index_;
  std::vector<int> generator_elements_;
  std::vector<std::vector<int>> right_;
  std::vector<std::vector<int>> words_;
};

inline FiniteGroup FiniteGroup::closure(std::string name, const ElementKey& identity,
                                        const std::vector<ElementKey>& generators, const Multiply& multiply,
                                        std::size_t bound) {
  if (generators.empty() || generators.size() % 2 != 0) {
    throw Rejection("generators must come in (s, s^-1) pairs");
  }
  for (std::size_t k = 0; k < generators.size(); k += 2) {
    if (multiply(generators[k], generators[k + 1]) != identity) {
      throw Rejection("generator " + std::to_string(k + 1) + " is not the inverse of generator " + std::to_string(k));
    }
  }
  FiniteGroup g;
  g.name_ = std::move(name);
  g.keys_.push_back(identity);
  g.index_.emplace(identity, 0);
  g.words_.emplace_back();
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (std::size_t s = 0; s < generators.size(); ++s) {
      ElementKey y = multiply(g.keys_[static_cast<std::size_t>(x)], generators[s]);
      if (g.index_.count(y)) continue;
      if (g.keys_.size() >= bound) {
        throw Rejection("group closure of '" + g.name_ + "' exceeds the bound of " + std::to_string(bound) +
                        " elements");
      }
      int id = static_cast<int>(g.keys_.size());
      g.index_.emplace(y, id);
      g.keys_.push_back(y);
      auto w = g.words_[static_cast<std::size_t>(x)];
      w.push_back(static_cast<int>(s));
      g.words_.push_back(std::move(w));
      queue.push_back(id);
    }
  }
  g.right_.assign(generators.size(), std::vector<int>(g.keys_.size()));
  for (std::size_t s = 0; s < generators.size(); ++s) {
    for (std::size_t x = 0; x < g.keys_.size(); ++x) {
      g.right_[s][x] = g.index_.at(multiply(g.keys_[x], generators[s]));
    }
  }
  for (const auto& s : generators) g.generator_elements_.push_back(g.index_.at(s));
  return g;
}

// Result of checking identity, inverse and associativity laws.
struct GroupLawReport {
  bool ok = true;
  bool exhaustive = true;
  std::string failure;
};

// Identity and inverse laws for every element. Associativity by Light's
// test ((x*a)*y == x*(a*y) for every generator a) when order <= 512,
// otherwise on `samples` random triples.
inline GroupLawReport verify_group_laws(const FiniteGroup& g, std::size_t samples = 20000, std::uint64_t seed = 1) {
  GroupLawReport r;
  const int n = g.order();
  for (int x = 0; x < n; ++x) {
    if (g.multiply(x, g.identity()) != x || g.multiply(g.identity(), x) != x) {
      r.ok = false;
      r.failure = "identity law fails at element " + std::to_string(x);
      return r;
    }
    int xi = g.inverse(x);
    if (g.multiply(x, xi) != g.identity() || g.multiply(xi, x) != g.identity()) {
      r.ok = false;
      r.failure = "inverse law fails at element " + std::to_string(x);
      return r;
    }
  }
  if (n <= 512) {
    for (int a : g.generators())
      for (int x = 0; x < n; ++x) {
        int xa = g.multiply(x, a);
        for (int y = 0; y < n; ++y) {
          if (g.multiply(xa, y) != g.multiply(x, g.multiply(a, y))) {
            r.ok = false;
            r.failure = "associativity fails at (" + std::to_string(x) + "," + std::to_string(a) + "," +
                        std::to_string(y) + ")";
            return r;
          }
        }
      }
    return r;
  }
  r.exhaustive = false;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (std::size_t i = 0; i < samples; ++i) {
    int x = pick(rng), y = pick(rng), z = pick(rng);
    if (g.multiply(g.multiply(x, y), z) != g.multiply(x, g.multiply(y, z))) {
      r.ok = false;
      r.failure = "associativity fails at (" + std::to_string(x) + "," + std::to_string(y) + "," +
                  std::to_string(z) + ")";
      return r;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Group descriptors

struct GroupDesc {
  enum class Kind { Cyclic, Product, SL2, PermGens };
  Kind kind = Kind::Cyclic;
  int param = 0;                           // modulus or prime
  std::vector<GroupDesc> factors;          // Product
  std::vector<std::vector<int>> perms;     // PermGens, images of 0..n-1

  static GroupDesc cyclic(int m) { return {Kind::Cyclic, m, {}, {}}; }
  static GroupDesc sl2(int p) { return {Kind::SL2, p, {}, {}}; }
  static GroupDesc product(GroupDesc a, GroupDesc b) { return {Kind::Product, 0, {std::move(a), std::move(b)}, {}}; }
  static GroupDesc perm_gens(std::vector<std::vector<int>> p) { return {Kind::PermGens, 0, {}, std::move(p)}; }

  std::string to_string() const {
    switch (kind) {
      case Kind::Cyclic: return "cyclic:" + std::to_string(param);
      case Kind::SL2: return "sl2:" + std::to_string(param);
      case Kind::Product: return "product(" + factors[0].to_string() + "," + factors[1].to_string() + ")";
      case Kind::PermGens: {
        std::string s = "perm:";
        for (std::size_t i = 0; i < perms.size(); ++i) {
          if (i) s += ';';
          for (std::size_t j = 0; j < perms[i].size(); ++j) s += (j ? " " : "") + std::to_string(perms[i][j]);
        }
        return s;
      }
    }
    return {};
  }
};

namespace detail {

inline std::size_t matching_paren(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')' && --depth == 0) return i;
  }
  throw FormatError("unbalanced parentheses in '" + std::string(s) + "'");
}

inline int parse_int(std::string_view s, std::string_view context) {
  std::string t(s);
  try {
    std::size_t used = 0;
    int v = std::stoi(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad integer '" + t + "' in '" + std::string(context) + "'");
  }
}

}  // namespace detail

// Grammar: cyclic:M | sl2:P | product(D,D) | perm:i i i;i i i
inline GroupDesc parse_group_desc(std::string_view s) {
  if (s.rfind("product(", 0) == 0) {
    std::size_t close = detail::matching_paren(s, 7);
    if (close != s.size() - 1) throw FormatError("trailing text after product(...) in '" + std::string(s) + "'");
    std::string_view inner = s.substr(8, close - 8);
    int depth = 0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == '(') ++depth;
      if (inner[i] == ')') --depth;
      if (inner[i] == ',' && depth == 0) {
        return GroupDesc::product(parse_group_desc(inner.substr(0, i)), parse_group_desc(inner.substr(i + 1)));
      }
    }
    throw FormatError("product needs two factors: '" + std::string(s) + "'");
  }
  auto colon = s.find(':');
  if (colon == std::string_view::npos) throw FormatError("bad group descriptor '" + std::string(s) + "'");
  std::string_view kind = s.substr(0, colon), arg = s.substr(colon + 1);
  if (kind == "cyclic") return GroupDesc::cyclic(detail::parse_int(arg, s));
  if (kind == "sl2") return GroupDesc::sl2(detail::parse_int(arg, s));
  if (kind == "perm") {
    std::vector<std::vector<int>> perms;
    std::istringstream all{std::string(arg)};
    std::string one;
    while (std::getline(all, one, ';')) {
      std::istringstream in(one);
      std::vector<int> p;
      int v;
      while (in >> v) p.push_back(v);
      perms.push_back(std::move(p));
    }
    return GroupDesc::perm_gens(std::move(perms));
  }
  throw FormatError("unknown group kind '" + std::string(kind) + "'");
}

inline bool is_prime(int p) {
  if (p < 2) return false;
  for (int d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

namespace detail {

struct ConcreteGroup {
  ElementKey identity;
  std::vector<ElementKey> generators;  // (s, s^-1) pairs
  FiniteGroup::Multiply multiply;
};

inline ConcreteGroup concrete(const GroupDesc& d) {
  switch (d.kind) {
    case GroupDesc::Kind::Cyclic: {
      int m = d.param;
      if (m < 1) throw Rejection("cyclic group needs m >= 1, got " + std::to_string(m));
      return {{0}, {{1 % m}, {(m - 1) % m}}, [m](const ElementKey& a, const ElementKey& b) {
                return ElementKey{(a[0] + b[0]) % m};
              }};
    }
    case GroupDesc::Kind::SL2: {
      int p = d.param;
      if (!is_prime(p)) throw Rejection("sl2 needs a prime modulus, got " + std::to_string(p));
      if (p > 31) throw Rejection("sl2 supports primes p <= 31, got " + std::to_string(p));
      auto mul = [p](const ElementKey& x, const ElementKey& y) {
        return ElementKey{(x[0] * y[0] + x[1] * y[2]) % p, (x[0] * y[1] + x[1] * y[3]) % p,
                          (x[2] * y[0] + x[3] * y[2]) % p, (x[2] * y[1] + x[3] * y[3]) % p};
      };
      // A = [[1,1],[0,1]], B = [[1,0],[1,1]] and their inverses.
      return {{1, 0, 0, 1}, {{1, 1, 0, 1}, {1, p - 1, 0, 1}, {1, 0, 1, 1}, {1, 0, p - 1, 1}}, mul};
    }
    case GroupDesc::Kind::Product: {
      auto a = concrete(d.factors.at(0));
      auto b = concrete(d.factors.at(1));
      std::size_t na = a.identity.size();
      ConcreteGroup out;
      out.identity = a.identity;
      out.identity.insert(out.identity.end(), b.identity.begin(), b.identity.end());
      for (const auto& s : a.generators) {
        ElementKey k = s;
        k.insert(k.end(), b.identity.begin(), b.identity.end());
        out.generators.push_back(std::move(k));
      }
      for (const auto& s : b.generators) {
        ElementKey k = a.identity;
        k.insert(k.end(), s.begin(), s.end());
        out.generators.push_back(std::move(k));
      }
      out.multiply = [na, ma = a.multiply, mb = b.multiply](const ElementKey& x, const ElementKey& y) {
        ElementKey xa(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(na));
        ElementKey xb(x.begin() + static_cast<std::ptrdiff_t>(na), x.end());
        ElementKey ya(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(na));
        ElementKey yb(y.begin() + static_cast<std::ptrdiff_t>(na), y.end());
        ElementKey r = ma(xa, ya);
        ElementKey rb = mb(xb, yb);
        r.insert(r.end(), rb.begin(), rb.end());
        return r;
      };
      return out;
    }
    case GroupDesc::Kind::PermGens: {
      if (d.perms.empty()) throw Rejection("perm-gens needs at least one permutation");
      std::size_t n = d.perms[0].size();
      ElementKey id(n);
      for (std::size_t i = 0; i < n; ++i) id[i] = static_cast<int>(i);
      ConcreteGroup out{id, {}, {}};
      for (const auto& p : d.perms) {
        if (p.size() != n) throw Rejection("permutations of different degrees");
        ElementKey inv(n, -1);
        for (std::size_t i = 0; i < n; ++i) {
          if (p[i] < 0 || static_cast<std::size_t>(p[i]) >= n || inv[static_cast<std::size_t>(p[i])] >= 0) {
            throw Rejection("not a permutation: " + d.to_string());
          }
          inv[static_cast<std::size_t>(p[i])] = static_cast<int>(i);
        }
        out.generators.push_back(p);
        out.generators.push_back(inv);
      }
      // (x*y)(i) = y(x(i)): apply x first, matching right multiplication.
      out.multiply = [](const ElementKey& x, const ElementKey& y) {
        ElementKey r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = y[static_cast<std::size_t>(x[i])];
        return r;
      };
      return out;
    }
  }
  throw Rejection("unknown group descriptor");
}

}  // namespace detail

inline constexpr std::size_t kDefaultGroupBound = 100000;

inline FiniteGroup make_group(const GroupDesc& desc, std::size_t bound = kDefaultGroupBound) {
  auto c = detail::concrete(desc);
  return FiniteGroup::closure(desc.to_string(), c.identity, c.generators, c.multiply, bound);
}

inline FiniteGroup make_group(std::string_view desc, std::size_t bound = kDefaultGroupBound) {
  return make_group(parse_group_desc(desc), bound);
}

// Cayley graph with edges x -- x*s. Loops are impossible (identity
// generators are rejected); parallel edges collapse.
inline Graph cayley_graph(const FiniteGroup& g) {
  for (int s = 0; s < g.generator_count(); ++s) {
    if (g.generator(s) == g.identity()) {
      throw Rejection("generator " + std::to_string(s) + " of " + g.name() + " is the identity");
    }
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(g.order() * g.generator_count()));
  for (int x = 0; x < g.order(); ++x)
    for (int s = 0; s < g.generator_count(); ++s) edges.emplace_back(x, g.right_multiply(x, s));
  Graph out;
  try {
    out = Graph::from_edges(g.order(), edges, g.name());
  } catch (const Rejection& e) {
    throw Rejection("generators do not generate " + g.name() + ": " + e.what());
  }
  out.set_vertex_transitive(true);
  return out;
}

}  // namespace coarse
