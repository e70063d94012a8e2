#include <doctest.h>

#include <cmath>

#include "sbm/mesh.hpp"
#include "sbm/geometry.hpp"
#include "support/fixtures.hpp"

using namespace sbm;

namespace {
const BoundingBox kUnitSquare{{0, 0, 0}, {1, 1, 0}, 2};
const BoundingBox kUnitCube{{0, 0, 0}, {1, 1, 1}, 3};
}  // namespace

TEST_CASE("complete level-2 grid in 2D") {
  const Mesh m = build_grid(kUnitSquare, 2);
  CHECK(m.n_elements() == 16);
  CHECK(m.n_nodes() == 25);
  CHECK(m.h() == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("complete level-1 grid in 3D") {
  const Mesh m = build_grid(kUnitCube, 1);
  CHECK(m.n_elements() == 8);
  CHECK(m.n_nodes() == 27);
}

TEST_CASE("carving removes all-exterior elements of the R=0.3 circle") {
  const Circle circle({0.5, 0.5, 0}, 0.3);

  // Independent census: classify every element of the complete grid from
  // analytic node distances.
  const Mesh full = build_grid(kUnitSquare, 2);
  std::size_t expected_kept = 0;
  for (std::uint32_t e = 0; e < full.n_elements(); ++e) {
    const std::uint32_t* nodes = full.element_nodes(e);
    bool any_inside = false;
    for (int l = 0; l < 4; ++l) {
      const Point p = full.node_coord(nodes[l]);
      const double r = std::hypot(p[0] - 0.5, p[1] - 0.5);
      any_inside = any_inside || r <= 0.3;
    }
    if (any_inside) ++expected_kept;
  }
  CHECK(expected_kept == 12);

  const Mesh carved = build_grid(kUnitSquare, 2, &circle, true);
  CHECK(carved.n_elements() == expected_kept);
  CHECK(carved.carved());

  // Carving soundness: every dropped cell had all nodes outside.
  for (std::uint32_t i = 0; i < 4; ++i)
    for (std::uint32_t j = 0; j < 4; ++j) {
      if (carved.element_at_cell(i, j, 0)) continue;
      for (int li = 0; li < 2; ++li)
        for (int lj = 0; lj < 2; ++lj) {
          const double x = 0.25 * (i + li), y = 0.25 * (j + lj);
          CHECK(std::hypot(x - 0.5, y - 0.5) > 0.3);
        }
    }
}

TEST_CASE("node count cap raises a resource error") {
  CHECK_THROWS_AS(build_grid(kUnitSquare, 8, nullptr, false, 1000), ResourceError);
}

TEST_CASE("neighbor lookup from locational codes") {
  const Mesh m = build_grid(kUnitSquare, 2);
  const auto at_anchor = [&](double x, double y) {
    return *m.element_at_cell(std::uint32_t(x / 0.25 + 0.5), std::uint32_t(y / 0.25 + 0.5), 0);
  };
  const std::uint32_t origin = at_anchor(0.0, 0.0);
  const auto right = m.neighbor(origin, 0, +1);
  REQUIRE(right.has_value());
  const Point a = m.element_anchor(*right);
  CHECK(a[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_FALSE(m.neighbor(origin, 0, -1).has_value());
  CHECK_FALSE(m.neighbor(origin, 1, -1).has_value());

  // Carved neighbor is absent: the corner cells of the R=0.3 disk grid are
  // gone, so stepping into one fails.
  const Circle circle({0.5, 0.5, 0}, 0.3);
  const Mesh carved = build_grid(kUnitSquare, 2, &circle, true);
  const auto edge = carved.element_at_cell(1, 0, 0);
  REQUIRE(edge.has_value());
  CHECK_FALSE(carved.neighbor(*edge, 0, -1).has_value());  // toward carved corner (0,0)
  CHECK(carved.neighbor(*edge, 1, +1).has_value());
}

TEST_CASE("face-adjacent elements share face node ids") {
  for (int dim : {2, 3}) {
    const Mesh m = build_grid(dim == 2 ? kUnitSquare : kUnitCube, 2);
    int local[4], count = 0;
    for (std::uint32_t e = 0; e < m.n_elements(); ++e)
      for (int axis = 0; axis < dim; ++axis) {
        const auto nb = m.neighbor(e, axis, +1);
        if (!nb) continue;
        m.face_local_nodes(axis, +1, local, count);
        int local_nb[4], count_nb = 0;
        m.face_local_nodes(axis, -1, local_nb, count_nb);
        REQUIRE(count == count_nb);
        for (int i = 0; i < count; ++i)
          CHECK(m.element_nodes(e)[local[i]] == m.element_nodes(*nb)[local_nb[i]]);
      }
  }
}

TEST_CASE("multilinear basis values") {
  SUBCASE("2D center") {
    const ShapeEval se = shape_eval({0, 0, 0}, 2);
    for (int l = 0; l < 4; ++l) CHECK(se.value[l] == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("2D corner interpolation") {
    const ShapeEval se = shape_eval({-1, -1, 0}, 2);
    CHECK(se.value[0] == doctest::Approx(1.0).epsilon(1e-15));
    for (int l = 1; l < 4; ++l) CHECK(se.value[l] == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("partition of unity and zero gradient sum at random points") {
    test::Rng rng(42);
    for (int dim : {2, 3}) {
      for (int trial = 0; trial < 100; ++trial) {
        Point local{rng.uniform(-1, 1), rng.uniform(-1, 1), dim == 3 ? rng.uniform(-1, 1) : 0};
        const ShapeEval se = shape_eval(local, dim);
        double sum = 0;
        Point gsum{0, 0, 0};
        for (int l = 0; l < se.n_nodes; ++l) {
          sum += se.value[l];
          gsum = gsum + se.gradient[l];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
        for (int a = 0; a < dim; ++a) CHECK(std::abs(gsum[a]) < 1e-13);
      }
    }
  }
}

TEST_CASE("Gauss rules") {
  SUBCASE("n=1 in 1D") {
    const QuadratureRule r = gauss_rule(1, 1);
    REQUIRE(r.size() == 1);
    CHECK(r.points[0][0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.weights[0] == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("n=2 in 2D") {
    const QuadratureRule r = gauss_rule(2, 2);
    REQUIRE(r.size() == 4);
    const double g = 1.0 / std::sqrt(3.0);
    for (std::size_t q = 0; q < 4; ++q) {
      CHECK(std::abs(std::abs(r.points[q][0]) - g) < 1e-15);
      CHECK(std::abs(std::abs(r.points[q][1]) - g) < 1e-15);
      CHECK(r.weights[q] == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("n=5 in 2D integrates x^8 exactly") {
    const QuadratureRule r = gauss_rule(5, 2);
    double integral = 0;
    for (std::size_t q = 0; q < r.size(); ++q)
      integral += r.weights[q] * std::pow(r.points[q][0], 8);
    CHECK(integral == doctest::Approx(2.0 / 9.0 * 2.0).epsilon(1e-14));
  }
  SUBCASE("weights sum to 2^dim") {
    for (int dim : {1, 2, 3})
      for (int n = 1; n <= 10; ++n) {
        const QuadratureRule r = gauss_rule(n, dim);
        double sum = 0;
        for (double w : r.weights) sum += w;
        CHECK(sum == doctest::Approx(std::pow(2.0, dim)).epsilon(1e-13));
      }
  }
  SUBCASE("exactness for monomials up to degree 2n-1 per axis") {
    // Analytic oracle: the integral of x^p over [-1,1] is 0 for odd p and
    // 2/(p+1) for even p; tensor rules multiply per axis.
    for (int n = 1; n <= 10; ++n) {
      const QuadratureRule r = gauss_rule(n, 2);
      for (int px = 0; px <= 2 * n - 1; ++px)
        for (int py = 0; py <= 2 * n - 1; py += 3) {
          double integral = 0;
          for (std::size_t q = 0; q < r.size(); ++q)
            integral +=
                r.weights[q] * std::pow(r.points[q][0], px) * std::pow(r.points[q][1], py);
          const double exact_x = (px % 2 == 1) ? 0.0 : 2.0 / (px + 1);
          const double exact_y = (py % 2 == 1) ? 0.0 : 2.0 / (py + 1);
          const double exact = exact_x * exact_y;
          if (exact == 0.0)
            CHECK(std::abs(integral) < 1e-13);
          else
            CHECK(std::abs(integral - exact) < 1e-13 * std::abs(exact));
        }
    }
  }
}

TEST_CASE("reference map round trip") {
  const Mesh m = build_grid(kUnitSquare, 3);
  test::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Point p{rng.uniform(0, 1), rng.uniform(0, 1), 0};
    const auto e = m.locate(p);
    REQUIRE(e.has_value());
    const Point ref = m.to_reference(*e, p);
    for (int a = 0; a < 2; ++a) {
      CHECK(ref[a] >= -1.0 - 1e-12);
      CHECK(ref[a] <= 1.0 + 1e-12);
    }
    const Point back = m.from_reference(*e, ref);
    CHECK(back[0] == doctest::Approx(p[0]).epsilon(1e-14));
    CHECK(back[1] == doctest::Approx(p[1]).epsilon(1e-14));
  }
}
