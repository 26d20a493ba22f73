#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "brl/errors.hpp"
#include "brl/inversion.hpp"
#include "brl/raytrace.hpp"
#include "brl/scenario.hpp"

using namespace brl;

namespace {

Scenario tube_scenario() {
  Scenario sc = make_flat_annulus(1.4, 0.25);
  sc.obstacle = make_curve(
      "two_bar_tube",
      {{"cx", 0.0}, {"cy", 0.0}, {"gap", 0.3}, {"wall_length", 1.6},
       {"bar_thickness", 0.2}, {"corner_radius", 0.02}},
      BoundaryCurve::Role::Obstacle);
  sc.L = 40.0;
  sc.tol.step = 5e-4;
  return sc;
}

}  // namespace

TEST_CASE("forward rows sum to travel times") {
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const PixelBasis basis = make_pixel_basis(sc, 12);
  REQUIRE(basis.active_count() > 0);
  const auto fan = make_boundary_fan(sc, 16, 15);
  const ForwardOperator op = assemble_forward_matrix(sc, basis, fan);
  REQUIRE(op.A.rows() == op.tau.size());
  CHECK(op.A.rows() + op.n_excluded == static_cast<int>(fan.size()));
  CHECK(op.scenario_hash == sc.hash());
  for (int i = 0; i < op.A.rows(); ++i) {
    CHECK(std::abs(op.A.row(i).sum() - op.tau(i)) <
          1e-9 * std::max(1.0, op.tau(i)));
  }
}

TEST_CASE("pixel basis activates exactly the interior cells") {
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const PixelBasis basis = make_pixel_basis(sc, 20);
  REQUIRE(static_cast<int>(basis.cell_index.size()) == 400);
  for (int i = 0; i < basis.active_count(); ++i) {
    CHECK(inside_surface(sc, basis.centers[i]));
    CHECK(basis.locate(basis.centers[i]) == i);
  }
  // Points in inactive cells snap to a nearby active one.
  const int k = basis.locate({0.0, 0.0});
  REQUIRE(k >= 0);
  REQUIRE(k < basis.active_count());
  CHECK(norm(basis.centers[k]) < 0.45);
  const int far = basis.locate({50.0, -50.0});
  CHECK(far >= 0);
  CHECK(far < basis.active_count());
}

TEST_CASE("discretize_field samples the cell centers") {
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const PixelBasis basis = make_pixel_basis(sc, 10);
  const auto f = parse_field("gaussian{a=1,x0=0.3,y0=-0.2,w=0.5}");
  const Eigen::VectorXd v = discretize_field(basis, *f);
  REQUIRE(v.size() == basis.active_count());
  for (int i = 0; i < v.size(); ++i)
    CHECK(v(i) == f->value(basis.centers[i]));
}

TEST_CASE("well-posed fans give a full-rank descending spectrum") {
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const PixelBasis basis = make_pixel_basis(sc, 12);
  const auto fan = make_boundary_fan(sc, 20, 18);
  const ForwardOperator op = assemble_forward_matrix(sc, basis, fan);
  REQUIRE(op.A.rows() > op.A.cols());
  const SpectrumReport spec = singular_spectrum(op.A);
  CHECK(spec.effective_rank == op.A.cols());
  CHECK(spec.sigma_min > 0.0);
  CHECK(spec.sigma_max == spec.singular_values(0));
  for (int i = 1; i < spec.singular_values.size(); ++i)
    CHECK(spec.singular_values(i) <= spec.singular_values(i - 1));
}

TEST_CASE("reconstruction inverts synthetic coefficient data") {
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const PixelBasis basis = make_pixel_basis(sc, 10);
  const auto fan = make_boundary_fan(sc, 18, 16);
  const ForwardOperator op = assemble_forward_matrix(sc, basis, fan);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::VectorXd x_true(op.A.cols());
  for (int i = 0; i < x_true.size(); ++i) x_true(i) = U(rng);
  const Eigen::VectorXd d = op.A * x_true;
  const ReconstructionReport rec = reconstruct(op.A, d, 0.0, &x_true);
  REQUIRE(rec.rel_error.has_value());
  CHECK(*rec.rel_error < 1e-8);
  CHECK((rec.coefficients - x_true).norm() < 1e-8 * x_true.norm());
  // A small Tikhonov weight introduces only a small bias.
  const ReconstructionReport reg = reconstruct(op.A, d, 1e-10, &x_true);
  CHECK(*reg.rel_error < 1e-6);
}

TEST_CASE("rank-deficient systems need regularization") {
  Eigen::MatrixXd A(4, 3);
  A << 1, 0, 1,
       0, 1, 1,
       1, 1, 2,
       2, 1, 3;  // third column = first + second
  const Eigen::VectorXd d = Eigen::VectorXd::Ones(4);
  CHECK_THROWS_AS(reconstruct(A, d, 0.0), SingularSystem);
  const ReconstructionReport rec = reconstruct(A, d, 1e-6);
  CHECK(rec.coefficients.size() == 3);
  CHECK(std::isfinite(rec.coefficients.norm()));
  const Eigen::VectorXd bad = Eigen::VectorXd::Ones(5);
  CHECK_THROWS_AS(reconstruct(A, bad, 1e-6), DimensionMismatch);
}

TEST_CASE("default regularization scales quadratically with the data") {
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const PixelBasis basis = make_pixel_basis(sc, 8);
  const auto fan = make_boundary_fan(sc, 12, 11);
  const ForwardOperator op = assemble_forward_matrix(sc, basis, fan);
  const SpectrumReport s1 = singular_spectrum(op.A);
  const SpectrumReport s2 = singular_spectrum(2.0 * op.A);
  CHECK(default_mu(s1) > 0.0);
  CHECK(default_mu(s2) == doctest::Approx(4.0 * default_mu(s1)).epsilon(1e-12));
}

TEST_CASE("the axial sine band is invisible on full straight crossings") {
  const auto g = make_axial_sine_field({0.1, 0.0}, 1.5, 0.2);
  // Zero outside the band.
  CHECK(g->value({0.1, 0.25}) == 0.0);
  CHECK(g->value({1.0, 0.0}) == 0.0);
  // One full period along any horizontal line through the band.
  for (double y : {-0.15, 0.0, 0.12}) {
    const int n = 4000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = -0.65 + (i + 0.5) * 1.5 / n;
      acc += g->value({x, y}) * 1.5 / n;
    }
    CHECK(std::abs(acc) < 1e-9);
  }
  // Gradient agrees with finite differences inside the band.
  const Vec2 p{0.3, 0.05};
  const double h = 1e-6;
  const Vec2 fd{(g->value({p.x + h, p.y}) - g->value({p.x - h, p.y})) /
                    (2.0 * h),
                (g->value({p.x, p.y + h}) - g->value({p.x, p.y - h})) /
                    (2.0 * h)};
  CHECK(norm(g->gradient(p) - fd) < 1e-6);
}

TEST_CASE("the tube hides its axial sine from every boundary ray") {
  const Scenario sc = tube_scenario();
  const auto g = tube_null_function(sc);
  const double gnorm = field_l2_norm(sc, *g);
  CHECK(gnorm > 0.1);
  const auto fan = make_boundary_fan(sc, 24, 23);
  const auto rows = fan_transform(sc, *g, fan);
  double worst = 0.0;
  std::size_t exits = 0;
  for (const auto& r : rows) {
    if (!r.ok()) continue;
    ++exits;
    worst = std::max(worst, std::abs(r.value));
  }
  REQUIRE(exits > 0);
  CHECK(worst < 1e-4 * gnorm);
}

TEST_CASE("the same band is visible without the tube walls") {
  // Transplanting the invisible field into a plain annulus exposes it: rays
  // that clip the band partially pick up nonzero integrals.
  const Scenario tube = tube_scenario();
  const auto g = tube_null_function(tube);
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const double gnorm = field_l2_norm(sc, *g);
  REQUIRE(gnorm > 0.0);
  const auto fan = make_boundary_fan(sc, 20, 15);
  const auto rows = fan_transform(sc, *g, fan);
  double worst = 0.0;
  for (const auto& r : rows)
    if (r.ok()) worst = std::max(worst, std::abs(r.value));
  CHECK(worst > 1e-2 * gnorm);
}

TEST_CASE("tube null functions require a tube obstacle") {
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  CHECK_THROWS_AS(tube_null_function(sc), NotATubeScenario);
}

TEST_CASE("field_l2_norm matches closed forms") {
  const Scenario disc = make_flat_disc(1.0);
  const auto two = parse_field("constant{c=2}");
  CHECK(field_l2_norm(disc, *two, 512) ==
        doctest::Approx(2.0 * std::sqrt(kPi)).epsilon(2e-3));
  // The axial sine over the tube support: integral of sin^2 over one period
  // times the gap height.
  const Scenario tube = tube_scenario();
  const auto g = tube_null_function(tube);
  const double support_len = 1.6 - 6.0 * 0.02;
  const double expected = std::sqrt(0.3 * support_len / 2.0);
  CHECK(field_l2_norm(tube, *g, 1024) ==
        doctest::Approx(expected).epsilon(1e-2));
}

TEST_CASE("inverse crime reconstruction on the annulus") {
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const PixelBasis basis = make_pixel_basis(sc, 10);
  const auto fan = make_boundary_fan(sc, 16, 14);
  const ForwardOperator op = assemble_forward_matrix(sc, basis, fan);
  const auto f = parse_field("gaussian{a=0.5,x0=0.45,y0=0.0,w=0.4}");
  const Eigen::VectorXd x_true = discretize_field(basis, *f);
  const Eigen::VectorXd d = op.A * x_true;
  const SpectrumReport spec = singular_spectrum(op.A);
  const ReconstructionReport rec =
      reconstruct(op.A, d, default_mu(spec), &x_true);
  REQUIRE(rec.rel_error.has_value());
  CHECK(*rec.rel_error < 1e-4);
}
