#pragma once

#include "hierarchy1d.hpp"

#include <array>
#include <map>
#include <numeric>

namespace sgcdg
{
int constexpr max_dim = 4;

using level_vec = std::array<int, max_dim>;

// basis label s = (l, j, p): level, translation and degree per dimension
struct multi_index
{
  level_vec l{};
  level_vec j{};
  level_vec p{};
};

enum class truncation
{
  sparse, // |l|_1 <= N
  full    // |l|_inf <= N
};

// one tensor level block W_l
struct level_block
{
  level_vec lvl{};
  int offset = 0;             // first dof of the block
  int size = 0;               // total entries
  std::array<int, max_dim> esize{}; // 1D entries per dimension
};

// Tensor-product index layout over level blocks with |l|_1 <= N (sparse) or
// |l|_inf <= N (full). Dimensions may carry different 1D spaces; this is
// what the directional sweeps of the fast transform operate on. Within a
// block, entries are laid out row-major over the per-dimension composite
// digits s_i = j_i*(k+1)+p_i.
struct sparse_layout
{
  int d = 0;
  int N = 0;
  truncation rule = truncation::sparse;
  std::array<space1d, max_dim> dims{};
  std::vector<level_block> blocks;
  std::map<level_vec, int> block_of;
  int dofs = 0;

  bool contains(level_vec const &l) const
  {
    int sum = 0, mx = 0;
    for (int i = 0; i < d; ++i)
    {
      if (l[i] < 0 || l[i] > N)
        return false;
      sum += l[i];
      mx = std::max(mx, l[i]);
    }
    return rule == truncation::sparse ? sum <= N : mx <= N;
  }
};

inline sparse_layout make_layout(int d, std::array<space1d, max_dim> const &dims,
                                 truncation rule)
{
  if (d < 1 || d > max_dim)
    throw std::invalid_argument("make_layout: dimension outside [1,4]");
  sparse_layout lay;
  lay.d = d;
  lay.N = dims[0].N;
  lay.rule = rule;
  lay.dims = dims;

  // enumerate admissible level vectors, sorted by (|l|_1, lexicographic)
  std::vector<level_vec> levels;
  level_vec l{};
  auto recurse = [&](auto &&self, int dim) -> void {
    if (dim == d)
    {
      levels.push_back(l);
      return;
    }
    for (int v = 0; v <= lay.N; ++v)
    {
      l[dim] = v;
      if (lay.contains(l) ||
          (rule == truncation::full && v <= lay.N)) // partial prefix is fine
        self(self, dim + 1);
    }
    l[dim] = 0;
  };
  recurse(recurse, 0);
  std::erase_if(levels, [&](level_vec const &v) { return !lay.contains(v); });
  std::sort(levels.begin(), levels.end(),
            [&](level_vec const &a, level_vec const &b) {
              int const sa = std::accumulate(a.begin(), a.begin() + d, 0);
              int const sb = std::accumulate(b.begin(), b.begin() + d, 0);
              if (sa != sb)
                return sa < sb;
              return a < b;
            });

  int offset = 0;
  for (auto const &lv : levels)
  {
    level_block b;
    b.lvl = lv;
    b.offset = offset;
    b.size = 1;
    for (int i = 0; i < d; ++i)
    {
      b.esize[i] = level_dim(dims[i], lv[i]);
      b.size *= b.esize[i];
    }
    lay.block_of[lv] = static_cast<int>(lay.blocks.size());
    lay.blocks.push_back(b);
    offset += b.size;
  }
  lay.dofs = offset;
  return lay;
}

// d-dimensional sparse approximation space: a layout whose dimensions all
// share one 1D space, together with the public DoF numbering (sorted by
// level sum, then lexicographic l, j, p).
struct sparse_space
{
  int d = 0;
  space1d sp1;
  sparse_layout layout;
  // within each block, public "ordinal" order and internal "slot" order
  // differ only by a permutation
  std::vector<int> ord_to_slot;
  std::vector<int> slot_to_ord;

  int dofs() const { return layout.dofs; }
  int N() const { return sp1.N; }
  int k() const { return sp1.k; }
};

inline sparse_space enumerate(int d, space1d const &sp1,
                              truncation rule = truncation::sparse)
{
  sparse_space s;
  s.d = d;
  s.sp1 = sp1;
  std::array<space1d, max_dim> dims;
  dims.fill(sp1);
  s.layout = make_layout(d, dims, rule);

  s.ord_to_slot.resize(s.layout.dofs);
  s.slot_to_ord.resize(s.layout.dofs);
  int const kp1 = sp1.k + 1;
  for (auto const &b : s.layout.blocks)
  {
    std::array<int, max_dim> ncells{};
    for (int i = 0; i < d; ++i)
      ncells[i] = b.esize[i] / kp1;

    // loop over (j, p) digit combinations in ordinal order (j-major)
    std::array<int, max_dim> j{}, p{};
    int ord = 0;
    auto emit = [&]() {
      int slot = 0;
      for (int i = 0; i < d; ++i)
        slot = slot * b.esize[i] + (j[i] * kp1 + p[i]);
      s.ord_to_slot[b.offset + ord] = b.offset + slot;
      s.slot_to_ord[b.offset + slot] = b.offset + ord;
      ++ord;
    };
    auto loop_p = [&](auto &&self, int dim) -> void {
      if (dim == d)
      {
        emit();
        return;
      }
      for (p[dim] = 0; p[dim] < kp1; ++p[dim])
        self(self, dim + 1);
      p[dim] = 0;
    };
    auto loop_j = [&](auto &&self, int dim) -> void {
      if (dim == d)
      {
        loop_p(loop_p, 0);
        return;
      }
      for (j[dim] = 0; j[dim] < ncells[dim]; ++j[dim])
        self(self, dim + 1);
      j[dim] = 0;
    };
    loop_j(loop_j, 0);
  }
  return s;
}

inline void check_multi_index(sparse_space const &s, multi_index const &mi)
{
  if (!s.layout.contains(mi.l))
    throw std::out_of_range("multi_index: level vector outside the index set");
  for (int i = 0; i < s.d; ++i)
    check_index(s.sp1, {mi.l[i], mi.j[i], mi.p[i]});
}

// position of a multi-index in the public numbering; throws on invalid input
inline int ordinal(sparse_space const &s, multi_index const &mi)
{
  check_multi_index(s, mi);
  level_block const &b = s.layout.blocks[s.layout.block_of.at(mi.l)];
  int const kp1 = s.sp1.k + 1;
  int jflat = 0, pflat = 0;
  for (int i = 0; i < s.d; ++i)
  {
    jflat = jflat * (b.esize[i] / kp1) + mi.j[i];
    pflat = pflat * kp1 + mi.p[i];
  }
  int kpow = 1;
  for (int i = 0; i < s.d; ++i)
    kpow *= kp1;
  return b.offset + jflat * kpow + pflat;
}

inline multi_index index_at(sparse_space const &s, int ordinal_pos)
{
  if (ordinal_pos < 0 || ordinal_pos >= s.dofs())
    throw std::out_of_range("index_at: ordinal outside [0, dofs)");
  // blocks are contiguous in ordinal order
  auto it = std::upper_bound(
      s.layout.blocks.begin(), s.layout.blocks.end(), ordinal_pos,
      [](int v, level_block const &b) { return v < b.offset; });
  level_block const &b = *std::prev(it);
  int local = ordinal_pos - b.offset;

  multi_index mi;
  mi.l = b.lvl;
  int const kp1 = s.sp1.k + 1;
  int kpow = 1;
  for (int i = 0; i < s.d; ++i)
    kpow *= kp1;
  int jflat = local / kpow, pflat = local % kpow;
  for (int i = s.d - 1; i >= 0; --i)
  {
    mi.p[i] = pflat % kp1;
    pflat /= kp1;
    int const nc = b.esize[i] / kp1;
    mi.j[i] = jflat % nc;
    jflat /= nc;
  }
  return mi;
}

// reshuffle a coefficient vector between the public numbering and the
// internal row-major block layout used by the directional sweeps
inline Eigen::VectorXd to_slot(sparse_space const &s, Eigen::VectorXd const &v)
{
  Eigen::VectorXd r(v.size());
  for (int i = 0; i < v.size(); ++i)
    r(s.ord_to_slot[i]) = v(i);
  return r;
}

inline Eigen::VectorXd to_ordinal(sparse_space const &s,
                                  Eigen::VectorXd const &v)
{
  Eigen::VectorXd r(v.size());
  for (int i = 0; i < v.size(); ++i)
    r(s.slot_to_ord[i]) = v(i);
  return r;
}

// number of degrees of freedom without materializing the index set
inline long dof_count(int d, space1d const &sp1,
                      truncation rule = truncation::sparse)
{
  int const N = sp1.N;
  if (rule == truncation::full)
  {
    long full1d = space_dim(sp1);
    long r = 1;
    for (int i = 0; i < d; ++i)
      r *= full1d;
    return r;
  }
  // count(dim, budget) = sum over l at this dim of leveldim(l) * count(dim-1, budget-l)
  std::vector<long> cur(N + 1, 1), next(N + 1, 0);
  for (int dim = 0; dim < d; ++dim)
  {
    for (int budget = 0; budget <= N; ++budget)
    {
      long acc = 0;
      for (int l = 0; l <= budget; ++l)
        acc += static_cast<long>(level_dim(sp1, l)) * cur[budget - l];
      next[budget] = acc;
    }
    std::swap(cur, next);
  }
  return cur[N];
}

} // namespace sgcdg
