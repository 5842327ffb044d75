#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hpfem/errors.hpp"
#include "hpfem/fe_space.hpp"
#include "hpfem/mesh.hpp"
#include "test_util.hpp"

using namespace hpfem;
using doctest::Approx;

namespace {

int binomial(int n, int k) {
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("element map") {
  Box sq{2, {0.0, 0.0}, {1.0, 1.0}};
  const ElementGeometry g = box_geometry(sq);
  const std::vector<double> mid{0.0, 0.0};
  const MappedPoint m = element_map(g, mid);
  CHECK(m.x[0] == Approx(0.5));
  CHECK(m.x[1] == Approx(0.5));
  CHECK(m.jacobian(0, 0) == Approx(0.5));
  CHECK(m.jacobian(1, 1) == Approx(0.5));
  CHECK(m.jacobian(0, 1) == Approx(0.0));
  CHECK(m.det == Approx(0.25));
  for (int v = 0; v < 4; ++v) {
    const std::vector<double> xh{v & 1 ? 1.0 : -1.0, v & 2 ? 1.0 : -1.0};
    const MappedPoint c = element_map(g, xh);
    CHECK(c.x[0] == Approx(g.vertices[v][0]));
    CHECK(c.x[1] == Approx(g.vertices[v][1]));
  }
  const ElementGeometry seg = box_geometry(Box{1, {0.0, 0.0}, {0.5, 0.0}});
  const std::vector<double> h{0.5};
  const MappedPoint s = element_map(seg, h);
  CHECK(s.x[0] == Approx(0.375));
  CHECK(s.jacobian(0, 0) == Approx(0.25));
}

TEST_CASE("element map of a skewed quadrilateral matches bilinear interpolation") {
  ElementGeometry q{2, {{0.0, 0.0}, {2.0, 0.3}, {0.4, 1.5}, {2.5, 2.0}}};
  for (int s = 0; s < 20; ++s) {
    const double a = testutil::uniform(-1, 1), b = testutil::uniform(-1, 1);
    const std::vector<double> xh{a, b};
    const MappedPoint m = element_map(q, xh);
    const double w[4] = {(1 - a) * (1 - b) / 4, (1 + a) * (1 - b) / 4, (1 - a) * (1 + b) / 4, (1 + a) * (1 + b) / 4};
    for (int k = 0; k < 2; ++k) {
      double x = 0.0;
      for (int v = 0; v < 4; ++v) x += w[v] * q.vertices[v][k];
      CHECK(m.x[k] == Approx(x).epsilon(1e-14));
    }
    const double h = 1e-6;
    for (int col = 0; col < 2; ++col) {
      std::vector<double> p = xh, n = xh;
      p[col] += h;
      n[col] -= h;
      const MappedPoint mp = element_map(q, p), mn = element_map(q, n);
      for (int row = 0; row < 2; ++row) CHECK(m.jacobian(row, col) == Approx((mp.x[row] - mn.x[row]) / (2 * h)).epsilon(1e-8));
    }
    CHECK(m.det == Approx(m.jacobian.determinant()));
  }
}

TEST_CASE("refinement") {
  const std::vector<double> z1{0.0};
  const auto kids1 = refine_element(box_geometry(Box{1, {0.0, 0.0}, {1.0, 0.0}}), z1);
  REQUIRE(kids1.size() == 2);
  CHECK(kids1[0].vertices[1][0] == Approx(0.5));
  CHECK(kids1[1].vertices[0][0] == Approx(0.5));
  CHECK(kids1[1].vertices[1][0] == Approx(1.0));

  const std::vector<double> z2{0.0, 0.0};
  const auto kids2 = refine_element(box_geometry(Box{2, {0.0, 0.0}, {1.0, 1.0}}), z2);
  REQUIRE(kids2.size() == 4);
  const ElementGeometry& c10 = kids2[static_cast<std::size_t>(child_flat_index({1, 0}))];
  CHECK(c10.vertices[0][0] == Approx(0.5));
  CHECK(c10.vertices[0][1] == Approx(0.0));
  CHECK(c10.vertices[3][0] == Approx(1.0));
  CHECK(c10.vertices[3][1] == Approx(0.5));

  const std::vector<double> zb{1.0, 0.0};
  CHECK_THROWS_AS(reference_children(2, zb), InvalidArgument);

  SUBCASE("children tile the reference box for an off-centre split") {
    const std::vector<double> z{0.3, -0.6};
    double vol = 0.0;
    for (const Box& b : reference_children(2, z)) vol += b.volume();
    CHECK(vol == Approx(4.0));
    CHECK(reference_child({0, 1}, z).lo[1] == Approx(-0.6));
    CHECK(reference_child({0, 1}, z).hi[0] == Approx(0.3));
  }
}

TEST_CASE("internal nodes") {
  const auto n1 = internal_nodes(1);
  REQUIRE(n1.size() == 3);
  CHECK(n1[0].dim() == 0);
  CHECK(n1[1] == InternalNode{{1}, {0}});
  CHECK(n1[2] == InternalNode{{1}, {1}});
  CHECK(internal_nodes(2).size() == 9);
  int counts[4] = {0, 0, 0, 0};
  for (const auto& n : internal_nodes(3)) ++counts[n.dim()];
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 6);
  CHECK(counts[2] == 12);
  CHECK(counts[3] == 8);
  for (int d = 1; d <= 5; ++d) {
    const auto nodes = internal_nodes(d);
    int pow3 = 1;
    for (int k = 0; k < d; ++k) pow3 *= 3;
    CHECK(static_cast<int>(nodes.size()) == pow3);
    std::vector<int> per_dim(d + 1, 0);
    for (const auto& n : nodes) ++per_dim[n.dim()];
    for (int r = 0; r <= d; ++r) CHECK(per_dim[r] == binomial(d, r) * (1 << r));
    // rank is a bijection onto 1..count within each dimension
    for (int r = 0; r <= d; ++r) {
      std::set<int> ranks;
      for (const auto& n : nodes)
        if (n.dim() == r) ranks.insert(node_rank(n, d));
      CHECK(static_cast<int>(ranks.size()) == per_dim[r]);
      if (!ranks.empty()) {
        CHECK(*ranks.begin() == 1);
        CHECK(*ranks.rbegin() == per_dim[r]);
      }
    }
  }
}

TEST_CASE("incident children") {
  const auto c = incident_children(InternalNode{{1}, {0}}, 3);
  const std::set<std::vector<int>> got = [&] {
    std::set<std::vector<int>> s;
    for (const auto& m : c) s.insert(std::vector<int>(m.begin(), m.end()));
    return s;
  }();
  const std::set<std::vector<int>> want{{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {0, 0, 1}};
  CHECK(got == want);
  CHECK(incident_children(InternalNode{{}, {}}, 2).size() == 4);
  const auto pinned = incident_children(InternalNode{{1, 2}, {1, 0}}, 2);
  REQUIRE(pinned.size() == 1);
  CHECK(pinned[0][0] == 1);
  CHECK(pinned[0][1] == 0);
  // Brute force: an incident child is one that contains the node's face of the split.
  for (const auto& n : internal_nodes(3)) {
    const auto inc = incident_children(n, 3);
    CHECK(static_cast<int>(inc.size()) == (1 << (3 - n.dim())));
    for (const auto& ch : inc)
      for (int k = 0; k < n.dim(); ++k) CHECK(ch[n.orientation[k] - 1] == n.location[k]);
  }
}

TEST_CASE("mixed-radix enumeration iota") {
  CHECK(index_iota({0, 0, 0}, 4) == 1);
  CHECK(index_iota({2, 1}, 3) == 7);
  CHECK_THROWS_AS(index_iota({4, 0}, 3), InvalidArgument);
  for (int d = 1; d <= 3; ++d)
    for (int p = 1; p <= 4; ++p) {
      int total = 1;
      for (int k = 0; k < d; ++k) total *= p + 1;
      std::set<int> seen;
      for (int i = 1; i <= total; ++i) {
        const MultiIndex j = iota_inverse(i, d, p);
        CHECK(index_iota(j, p) == i);
        seen.insert(i);
      }
      CHECK(static_cast<int>(seen.size()) == total);
    }
}

TEST_CASE("hp-function enumeration nu") {
  CHECK(index_nu(InternalNode{{}, {}}, MultiIndex(std::vector<int>{}), 2, 2) == 1);
  for (int d = 1; d <= 3; ++d)
    for (int p = 1; p <= 4; ++p) {
      std::set<int> seen;
      for (const auto& n : internal_nodes(d)) {
        // all p-tuples in {2..p}^r
        const int r = n.dim();
        int count = 1;
        for (int k = 0; k < r; ++k) count *= p - 1;
        for (int c = 0; c < count; ++c) {
          std::vector<int> pv(static_cast<std::size_t>(r));
          int rest = c;
          for (int k = 0; k < r; ++k) {
            pv[static_cast<std::size_t>(k)] = 2 + rest % (p - 1);
            rest /= p - 1;
          }
          seen.insert(index_nu(n, MultiIndex(pv), p, d));
        }
      }
      const int total = hp_function_count(d, p);
      CHECK(static_cast<int>(seen.size()) == total);
      CHECK(*seen.begin() == 1);
      CHECK(*seen.rbegin() == total);
    }
  CHECK(hp_function_count(2, 2) == 9);
  CHECK(hp_function_count(1, 1) == 1);
  CHECK_THROWS_AS(index_nu(InternalNode{{1}, {0}}, MultiIndex({5}), 3, 1), InvalidArgument);
}

TEST_CASE("adaptive mesh basics") {
  Mesh m = Mesh::uniform(2, 4);
  CHECK(m.num_leaves() == 16);
  const auto kids = m.refine(5);
  CHECK(kids.size() == 4);
  CHECK(m.num_leaves() == 19);
  CHECK(m.element(kids[0]).level == 1);
  CHECK(m.element(kids[3]).box.volume() == Approx(1.0 / 64));
  const auto loc = m.locate({0.99, 0.01});
  REQUIRE(loc.has_value());
  CHECK(m.element(*loc).box.contains({0.99, 0.01}));
  CHECK_FALSE(m.locate({1.5, 0.2}).has_value());
  CHECK_FALSE(m.leaf_across(0, 0, 0).has_value());
  CHECK(m.is_one_irregular());
  CHECK_THROWS(m.refine(5));
}

TEST_CASE("one-irregular closure") {
  SUBCASE("single refinement needs no closure") {
    Mesh m = Mesh::uniform(2, 4);
    const std::vector<int> r = m.refine(5);
    const int ids[] = {5};
    CHECK(close_one_irregular(m, ids).empty());
  }
  SUBCASE("refining a child twice forces the coarse neighbour once") {
    Mesh m = Mesh::uniform(2, 4);
    // element 5 covers [1/4,1/2] x [1/4,1/2]; its child (0,0) touches element 4 on the left
    const auto kids = m.refine(5);
    const int c = kids[0];
    m.refine(c);
    const int ids[] = {5, c};
    CHECK_FALSE(m.is_one_irregular());
    const auto forced = close_one_irregular(m, ids);
    CHECK(std::find(forced.begin(), forced.end(), 4) != forced.end());
    CHECK(m.is_one_irregular());
    for (int leaf : m.leaves())
      for (int axis = 0; axis < 2; ++axis)
        for (int side = 0; side < 2; ++side)
          for (double along : {0.25, 0.75}) {
            const auto nb = m.leaf_across(leaf, axis, side, along);
            if (nb) CHECK(std::abs(m.element(leaf).level - m.element(*nb).level) <= 1);
          }
  }
  SUBCASE("1D never closes") {
    Mesh m = Mesh::uniform(1, 4);
    const auto k = m.refine(1);
    const auto k2 = m.refine(k[0]);
    const int ids[] = {1, k[0], k2[0]};
    m.refine(k2[0]);
    CHECK(close_one_irregular(m, ids).empty());
  }
}

TEST_CASE("mesh dump") {
  Mesh m = Mesh::uniform(1, 2);
  const std::vector<int> degrees{3, 4};
  std::ostringstream os;
  dump_mesh_jsonl(os, m, degrees);
  const std::string s = os.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 2);
  CHECK(s.find("\"degree\":4") != std::string::npos);
}

TEST_CASE("refinement depth is bounded by the integer grid") {
  CHECK(Mesh::uniform(1, 4).max_level() == 60);
  CHECK(Mesh::uniform(2, 3).max_level() == 60);
  CHECK(Mesh::uniform(1, 1).max_level() == 62);
  Mesh m = Mesh::uniform(1, 4);
  int leaf = 0;
  for (int k = 0; k < m.max_level(); ++k) leaf = m.refine(leaf)[0];
  CHECK(m.element(leaf).level == m.max_level());
  CHECK(m.element(leaf).box.width(0) == std::ldexp(0.25, -60));
  CHECK_THROWS_AS(m.refine(leaf), InvalidArgument);
  const HpSpace s = HpSpace::build(m, std::vector<int>(static_cast<std::size_t>(m.num_elements()), 1));
  CHECK(s.num_dofs() == m.num_leaves() - 1);
}
