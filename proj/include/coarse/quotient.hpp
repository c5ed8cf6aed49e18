#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/graph.hpp"
#include "coarse/group.hpp"
#include "coarse/metric.hpp"

namespace coarse {

// The infinite group a filtration lives in: Z^d with generators +-e_k, or
// the free group F_k with generators a_k^{+-1}. Generator 2k is the positive
// one, 2k+1 its inverse.
struct SourceGroup {
  enum class Kind { Zd, Free };
  Kind kind = Kind::Zd;
  int rank = 1;  // d for Z^d, k for F_k

  static SourceGroup zd(int d) { return {Kind::Zd, d}; }
  static SourceGroup free(int k) { return {Kind::Free, k}; }
  int generator_count() const { return 2 * rank; }
  std::string to_string() const { return (kind == Kind::Zd ? "zd(" : "free(") + std::to_string(rank) + ")"; }
};

// Freely reduced word: drops adjacent s, s^-1 pairs.
inline std::vector<int> reduce_word(const std::vector<int>& word) {
  std::vector<int> out;
  for (int s : word) {
    if (!out.empty() && out.back() == (s ^ 1)) {
      out.pop_back();
    } else {
      out.push_back(s);
    }
  }
  return out;
}

inline std::vector<int> inverse_word(const std::vector<int>& word) {
  std::vector<int> out(word.rbegin(), word.rend());
  for (int& s : out) s ^= 1;
  return out;
}

// Word-metric distance in the source group between two elements given as
// words. For Z^d this is the l1 distance of the exponent sums.
inline int source_distance(const SourceGroup& src, const std::vector<int>& u, const std::vector<int>& v) {
  if (src.kind == SourceGroup::Kind::Zd) {
    std::vector<long> diff(static_cast<std::size_t>(src.rank), 0);
    for (int s : u) diff[static_cast<std::size_t>(s / 2)] -= (s % 2 == 0 ? 1 : -1);
    for (int s : v) diff[static_cast<std::size_t>(s / 2)] += (s % 2 == 0 ? 1 : -1);
    long total = 0;
    for (long x : diff) total += std::labs(x);
    return static_cast<int>(total);
  }
  auto w = inverse_word(u);
  w.insert(w.end(), v.begin(), v.end());
  return static_cast<int>(reduce_word(w).size());
}

// Quotient homomorphism p: source -> target mapping source generator s to
// target generator s.
class QuotientMap {
 public:
  QuotientMap(SourceGroup source, std::shared_ptr<const FiniteGroup> target, std::string label = {})
      : source_(source), target_(std::move(target)), label_(std::move(label)) {
    if (!target_) throw Rejection("quotient map needs a target group");
    if (target_->generator_count() != source_.generator_count()) {
      throw Rejection("target " + target_->name() + " has " + std::to_string(target_->generator_count()) +
                      " generators, source " + source_.to_string() + " needs " +
                      std::to_string(source_.generator_count()));
    }
  }

  const SourceGroup& source() const { return source_; }
  const FiniteGroup& target() const { return *target_; }
  std::shared_ptr<const FiniteGroup> target_ptr() const { return target_; }
  const std::string& label() const { return label_; }

  int apply(const std::vector<int>& word) const {
    for (int s : word) {
      if (s < 0 || s >= source_.generator_count()) {
        throw Rejection("generator index " + std::to_string(s) + " invalid for " + source_.to_string());
      }
    }
    return target_->evaluate(word);
  }

 private:
  SourceGroup source_;
  std::shared_ptr<const FiniteGroup> target_;
  std::string label_;
};

inline int quotient_apply(const QuotientMap& q, const std::vector<int>& word) { return q.apply(word); }

// Z^d -> (Z/m)^d, generators +-e_k.
inline QuotientMap zd_quotient(int d, int modulus) {
  if (d < 1) throw Rejection("zd needs d >= 1");
  if (modulus < 2) throw Rejection("modulus must be >= 2, got " + std::to_string(modulus));
  GroupDesc desc = GroupDesc::cyclic(modulus);
  for (int k = 1; k < d; ++k) desc = GroupDesc::product(desc, GroupDesc::cyclic(modulus));
  auto target = std::make_shared<const FiniteGroup>(make_group(desc));
  return QuotientMap(SourceGroup::zd(d), std::move(target), "Z^" + std::to_string(d) + "/" + std::to_string(modulus));
}

// F_k -> G with a_j mapped to the j-th generator pair of G.
inline QuotientMap free_quotient(int k, const GroupDesc& target) {
  auto g = std::make_shared<const FiniteGroup>(make_group(target));
  return QuotientMap(SourceGroup::free(k), std::move(g), target.to_string());
}

// Ball of radius L around the identity of the source group, as words.
// Z^d: one word per lattice point of l1 norm <= L. F_k: all reduced words.
inline std::vector<std::vector<int>> source_ball(const SourceGroup& src, int radius, std::size_t bound) {
  std::vector<std::vector<int>> out;
  if (src.kind == SourceGroup::Kind::Zd) {
    std::vector<int> coords(static_cast<std::size_t>(src.rank), -radius);
    while (true) {
      long norm = 0;
      for (int c : coords) norm += std::abs(c);
      if (norm <= radius) {
        std::vector<int> w;
        for (std::size_t k = 0; k < coords.size(); ++k) {
          int s = static_cast<int>(2 * k) + (coords[k] < 0 ? 1 : 0);
          w.insert(w.end(), static_cast<std::size_t>(std::abs(coords[k])), s);
        }
        out.push_back(std::move(w));
        if (out.size() > bound) {
          throw Rejection("source ball of radius " + std::to_string(radius) + " exceeds the bound of " +
                          std::to_string(bound) + " elements");
        }
      }
      std::size_t k = 0;
      while (k < coords.size() && coords[k] == radius) coords[k++] = -radius;
      if (k == coords.size()) break;
      ++coords[k];
    }
    return out;
  }
  out.push_back({});
  for (std::size_t head = 0; head < out.size(); ++head) {
    if (static_cast<int>(out[head].size()) == radius) continue;
    for (int s = 0; s < src.generator_count(); ++s) {
      if (!out[head].empty() && out[head].back() == (s ^ 1)) continue;
      auto w = out[head];
      w.push_back(s);
      out.push_back(std::move(w));
      if (out.size() > bound) {
        throw Rejection("source ball of radius " + std::to_string(radius) + " exceeds the bound of " +
                        std::to_string(bound) + " elements");
      }
    }
  }
  return out;
}

inline constexpr std::size_t kDefaultBallBound = 200000;

// True iff q restricted to B_e(L) preserves all pairwise distances, the
// target carrying its Cayley graph metric.
inline bool is_L_isometric(const QuotientMap& q, int L, std::size_t bound = kDefaultBallBound) {
  if (L < 0) throw Rejection("L must be >= 0");
  if (L == 0) return true;
  auto words = source_ball(q.source(), L, bound);
  const FiniteGroup& g = q.target();
  Graph cay = cayley_graph(g);
  std::vector<int> image;
  image.reserve(words.size());
  for (const auto& w : words) image.push_back(q.apply(w));
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto row = bfs_distances(cay, image[i]);
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      if (row[static_cast<std::size_t>(image[j])] != source_distance(q.source(), words[i], words[j])) return false;
    }
  }
  return true;
}

// One Cayley block per level of a filtration (or of a family of quotients).
struct BoxSpaceFamily {
  SourceGroup source;
  std::vector<QuotientMap> maps;
  std::vector<int> moduli;              // Z^d families
  std::vector<GroupDesc> targets;       // free-group families
  std::vector<bool> level_nested;       // level i refines level i-1
  bool nested = false;
  std::vector<std::string> warnings;
  CoarseUnion space;
};

// Z^d box space with N_i = m_i Z^d. Moduli must strictly increase; a
// non-divisible step is accepted with nested = false and a warning.
inline BoxSpaceFamily box_space_zd(int d, const std::vector<int>& moduli) {
  if (moduli.empty()) throw Rejection("box space needs at least one modulus");
  BoxSpaceFamily fam;
  fam.source = SourceGroup::zd(d);
  fam.moduli = moduli;
  fam.nested = true;
  std::vector<Graph> blocks;
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    if (i > 0 && moduli[i] <= moduli[i - 1]) {
      throw Rejection("moduli must be strictly increasing: " + std::to_string(moduli[i - 1]) + " then " +
                      std::to_string(moduli[i]));
    }
    bool step = i == 0 || moduli[i] % moduli[i - 1] == 0;
    if (!step) {
      fam.nested = false;
      fam.warnings.push_back("modulus " + std::to_string(moduli[i]) + " is not a multiple of " +
                             std::to_string(moduli[i - 1]) + ": levels are not nested, this is a family of "
                             "quotients rather than a filtration");
    }
    fam.level_nested.push_back(step);
    fam.maps.push_back(zd_quotient(d, moduli[i]));
    Graph block = cayley_graph(fam.maps.back().target());
    block.set_label(fam.maps.back().label());
    blocks.push_back(std::move(block));
  }
  fam.space = CoarseUnion(std::move(blocks));
  return fam;
}

// F_k mapped onto each target in turn. Kernel nesting is not verified, so
// the family is reported as not nested.
inline BoxSpaceFamily box_space_free(int k, const std::vector<GroupDesc>& targets) {
  if (targets.empty()) throw Rejection("box space needs at least one target group");
  BoxSpaceFamily fam;
  fam.source = SourceGroup::free(k);
  fam.targets = targets;
  std::vector<Graph> blocks;
  for (const auto& t : targets) {
    fam.maps.push_back(free_quotient(k, t));
    fam.level_nested.push_back(false);
    Graph block = cayley_graph(fam.maps.back().target());
    block.set_label(t.to_string());
    blocks.push_back(std::move(block));
  }
  fam.space = CoarseUnion(std::move(blocks));
  return fam;
}

}  // namespace coarse
