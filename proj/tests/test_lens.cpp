#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "brl/errors.hpp"
#include "brl/lens.hpp"
#include "brl/raytrace.hpp"
#include "brl/scenario.hpp"

using namespace brl;

TEST_CASE("metric family flexes the conformal factor only") {
  const Scenario base = make_flat_disc(1.0);
  const MetricFamily fam = make_metric_family(base, "radial_quadratic{c=0.5}");
  CHECK(fam.scenario_at(0.0).hash() == base.hash());
  const Scenario bent = fam.scenario_at(0.3);
  // lambda_s = 0.3 * 0.5 r^2 has laplacian 0.6, so K(0) = -0.6.
  CHECK(bent.surface.gauss_curvature({0.0, 0.0}) ==
        doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(bent.outer->total_length() == base.outer->total_length());
  CHECK(bent.tol.step == base.tol.step);
}

TEST_CASE("perturbed travel data at s = 0 is the base trace") {
  const Scenario base = make_flat_annulus(1.0, 0.25);
  const MetricFamily fam =
      make_metric_family(base, "gaussian{a=1,x0=0.3,y0=0.2,w=0.4}");
  const BrokenRay ray = trace_broken_ray(base, Vec2{1.0, 0.0}, kPi - 0.25);
  const TravelData td = perturbed_travel_data(fam, {1.0, 0.0}, kPi - 0.25, 0.0);
  CHECK(td.tau == ray.tau);
  CHECK(norm(td.exit_x - ray.exit.x) == 0.0);
  CHECK(td.reflections == ray.reflection_count());
}

TEST_CASE("constant flex scales all travel times exponentially") {
  // With h = 1 every geodesic stays a straight line and tau_s = e^s tau_0,
  // so the transform of h equals d/ds tau and the endpoint term vanishes.
  const Scenario base = make_flat_disc(1.0);
  const MetricFamily fam = make_metric_family(base, "constant{c=1}");
  for (double th : {2.2, 2.9, 3.8}) {
    const LinearizationReport rep =
        linearization_residual(fam, {1.0, 0.0}, th);
    const double tau0 = -2.0 * std::cos(th);
    CHECK(std::abs(rep.lhs - tau0) < 1e-8);
    CHECK(std::abs(rep.rhs_tau - tau0) < 1e-7);
    CHECK(std::abs(rep.rhs_endpoint) < 1e-7);
    CHECK(rep.residual < 1e-7);
    CHECK(rep.reflections == 0);
    CHECK(rep.minimizing_hint);
    CHECK(rep.s_fd == 1e-3);
  }
}

TEST_CASE("radial flex leaves the head-on exit fixed") {
  const Scenario base = make_flat_annulus(1.0, 0.25);
  const MetricFamily fam = make_metric_family(base, "radial_quadratic{c=1}");
  const LinearizationReport rep = linearization_residual(fam, {1.0, 0.0}, kPi);
  CHECK(rep.reflections == 1);
  CHECK(std::abs(rep.rhs_endpoint) < 1e-7);
  CHECK(rep.residual < 1e-6);
  CHECK_FALSE(rep.minimizing_hint);
}

TEST_CASE("asymmetric flex needs the endpoint term") {
  const Scenario base = make_flat_annulus(1.0, 0.25);
  const MetricFamily fam =
      make_metric_family(base, "gaussian{a=1,x0=0.3,y0=0.2,w=0.4}");
  const LinearizationReport rep =
      linearization_residual(fam, {1.0, 0.0}, kPi - 0.25);
  CHECK(rep.reflections == 1);
  CHECK(rep.residual < 1e-6);
  // Dropping the exit-motion term breaks the identity by orders of
  // magnitude: the derivative of travel time alone does not see h.
  CHECK(rep.residual_no_endpoint > 10.0 * rep.residual);
  CHECK(rep.residual_no_endpoint > 1e-4);
}

TEST_CASE("the linearization holds over a curved base") {
  Scenario base = make_flat_annulus(1.0, 0.25);
  base.surface = ConformalSurface(parse_profile("radial_quadratic{c=0.1}"));
  const MetricFamily fam =
      make_metric_family(base, "gaussian{a=0.8,x0=-0.2,y0=0.3,w=0.5}");
  for (double th : {kPi - 0.2, kPi + 0.14}) {
    const LinearizationReport rep =
        linearization_residual(fam, {1.0, 0.0}, th);
    CHECK(rep.reflections >= 1);
    CHECK(rep.residual < 1e-6);
  }
}

TEST_CASE("entry variation joins the identity with its own term") {
  const Scenario base = make_flat_disc(1.0);
  const MetricFamily fam =
      make_metric_family(base, "gaussian{a=1,x0=0.2,y0=-0.1,w=0.5}");
  {
    const GeodesicLinearizationReport rep =
        geodesic_linearization_check(fam, 0.7, 2.9, 0.4, 0.2);
    CHECK(rep.residual < 1e-6);
    CHECK(std::abs(rep.rhs_entry) > 1e-3);  // the entry really moves
  }
  {
    // Frozen entry reduces to the boundary-fixed identity.
    const GeodesicLinearizationReport rep =
        geodesic_linearization_check(fam, 0.7, 2.9, 0.0, 0.0);
    CHECK(std::abs(rep.rhs_entry) < 1e-12);
    CHECK(rep.residual < 1e-6);
  }
}

TEST_CASE("reflection pattern changes are detected and stepped around") {
  const Scenario base = make_flat_annulus(1.0, 0.25);
  const MetricFamily fam = make_metric_family(base, "radial_quadratic{c=1}");
  // A ray that just misses the obstacle flips its pattern somewhere in a
  // coarse stencil: impact parameter 0.2505 against obstacle radius 0.25.
  const double graze = kPi - std::asin(0.2505);
  bool flipped = false;
  for (int k = -3; k <= 3 && !flipped; ++k) {
    try {
      (void)linearization_residual(fam, {1.0, 0.0}, graze + 2e-4 * k, 2e-2);
    } catch (const ReflectionPatternChanged&) {
      flipped = true;
    }
  }
  CHECK(flipped);
  // The adaptive step finds a stencil that stays on the base pattern.
  const double stable = pattern_stable_step(fam, {1.0, 0.0}, graze, 1e-2);
  CHECK(stable > 0.0);
  CHECK(stable <= 1e-2);
  const LinearizationReport rep =
      linearization_residual(fam, {1.0, 0.0}, graze, stable);
  CHECK(rep.s_fd == stable);
  // A transversal ray keeps the full step.
  CHECK(pattern_stable_step(fam, {1.0, 0.0}, kPi, 1e-2) == 1e-2);
}

TEST_CASE("rays that fail to exit are reported") {
  Scenario base = make_flat_annulus(1.0, 0.25);
  base.L = 0.5;  // the head-on ray needs 1.5
  const MetricFamily fam = make_metric_family(base, "constant{c=1}");
  CHECK_THROWS_AS(perturbed_travel_data(fam, {1.0, 0.0}, kPi, 0.0),
                  RayDidNotExit);
  CHECK_THROWS_AS(linearization_residual(fam, {1.0, 0.0}, kPi), RayDidNotExit);
}
