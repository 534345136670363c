#include "sgcdg/sparse_space.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

using namespace sgcdg;

namespace
{
std::array<int, 12> tuple_of(sparse_space const &s, multi_index const &mi)
{
  std::array<int, 12> t{};
  int sum = 0;
  for (int i = 0; i < s.d; ++i)
    sum += mi.l[i];
  t[0] = sum;
  for (int i = 0; i < s.d; ++i)
  {
    t[1 + i] = mi.l[i];
    t[1 + s.d + i] = mi.j[i];
    t[1 + 2 * s.d + i] = mi.p[i];
  }
  return t;
}
} // namespace

TEST_CASE("dof counts agree with enumeration and closed forms")
{
  for (int d = 2; d <= 4; ++d)
    for (int k = 0; k <= 2; ++k)
      for (int N = 1; N <= (d == 4 ? 3 : 4); ++N)
      {
        for (auto role : {mesh_role::primal, mesh_role::dual})
          for (auto bc : {boundary_type::periodic, boundary_type::nonperiodic})
          {
            space1d const s1{role, bc, N, k};
            sparse_space sp = enumerate(d, s1);
            REQUIRE(dof_count(d, s1) == sp.dofs());

            sparse_space full = enumerate(d, s1, truncation::full);
            long f1 = space_dim(s1);
            long expect = 1;
            for (int i = 0; i < d; ++i)
              expect *= f1;
            REQUIRE(full.dofs() == expect);
            REQUIRE(dof_count(d, s1, truncation::full) == expect);
          }
      }
}

TEST_CASE("sparse sets are smaller than full grids at equal resolution")
{
  space1d const s1{mesh_role::primal, boundary_type::periodic, 6, 1};
  REQUIRE(dof_count(3, s1) < dof_count(3, s1, truncation::full) / 100);
}

TEST_CASE("public numbering is sorted by level sum, then lexicographic l, j, p")
{
  for (int d : {2, 3})
  {
    space1d const s1{mesh_role::dual, boundary_type::nonperiodic, 3, 1};
    sparse_space sp = enumerate(d, s1);
    auto prev = tuple_of(sp, index_at(sp, 0));
    for (int o = 1; o < sp.dofs(); ++o)
    {
      auto cur = tuple_of(sp, index_at(sp, o));
      REQUIRE(prev < cur);
      prev = cur;
    }
  }
}

TEST_CASE("ordinal and index_at are inverse bijections")
{
  space1d const s1{mesh_role::primal, boundary_type::periodic, 4, 2};
  sparse_space sp = enumerate(3, s1);
  std::mt19937 gen(7121);
  std::uniform_int_distribution<int> pick(0, sp.dofs() - 1);
  for (int trial = 0; trial < 500; ++trial)
  {
    int const o = pick(gen);
    REQUIRE(ordinal(sp, index_at(sp, o)) == o);
  }
  REQUIRE_THROWS_AS(index_at(sp, sp.dofs()), std::out_of_range);
  REQUIRE_THROWS_AS(index_at(sp, -1), std::out_of_range);

  multi_index bad;
  bad.l = {3, 2, 0, 0}; // level sum exceeds N = 4
  REQUIRE_THROWS_AS(ordinal(sp, bad), std::out_of_range);
  multi_index bad2 = index_at(sp, 10);
  bad2.p[0] = 3;
  REQUIRE_THROWS_AS(ordinal(sp, bad2), std::out_of_range);
}

TEST_CASE("slot permutation is a bijection consistent with blocks")
{
  space1d const s1{mesh_role::dual, boundary_type::nonperiodic, 3, 2};
  sparse_space sp = enumerate(2, s1);
  std::vector<int> seen(sp.dofs(), 0);
  for (int o = 0; o < sp.dofs(); ++o)
    seen[sp.ord_to_slot[o]]++;
  REQUIRE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  for (int o = 0; o < sp.dofs(); ++o)
    REQUIRE(sp.slot_to_ord[sp.ord_to_slot[o]] == o);

  Eigen::VectorXd v = Eigen::VectorXd::Random(sp.dofs());
  Eigen::VectorXd w = to_ordinal(sp, to_slot(sp, v));
  REQUIRE((v - w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("layout blocks tile the dof range")
{
  space1d const s1{mesh_role::primal, boundary_type::nonperiodic, 4, 1};
  for (auto rule : {truncation::sparse, truncation::full})
  {
    sparse_space sp = enumerate(3, s1, rule);
    int off = 0;
    for (auto const &b : sp.layout.blocks)
    {
      REQUIRE(b.offset == off);
      int sz = 1;
      for (int i = 0; i < sp.d; ++i)
      {
        REQUIRE(b.esize[i] == level_dim(s1, b.lvl[i]));
        sz *= b.esize[i];
      }
      REQUIRE(b.size == sz);
      off += sz;
    }
    REQUIRE(off == sp.dofs());
  }
}
