#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "brl/errors.hpp"
#include "brl/raytrace.hpp"
#include "brl/scenario.hpp"
#include "brl/transform.hpp"

using namespace brl;

namespace {

Scenario kneg_annulus() {
  Scenario sc = make_flat_annulus(1.0, 0.25);
  sc.surface = ConformalSurface(parse_profile("radial_quadratic{c=0.1}"));
  return sc;
}

}  // namespace

TEST_CASE("segment weights integrate exactly through cubic order") {
  const Scenario sc = kneg_annulus();
  const BrokenRay ray = trace_broken_ray(sc, Vec2{1.0, 0.0}, kPi - 0.23);
  REQUIRE(ray.termination == Termination::ExitAtE);
  for (const auto& seg : ray.segments) {
    const auto w = segment_weights(seg);
    REQUIRE(w.size() == seg.samples.size());
    for (int p = 0; p <= 3; ++p) {
      double quad = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j)
        quad += w[j] * std::pow(seg.samples[j].t, p);
      const double exact = (std::pow(seg.t1, p + 1) - std::pow(seg.t0, p + 1)) /
                           (p + 1);
      CHECK(quad == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("transform of the unit field is the travel time") {
  for (const Scenario& sc : {make_flat_annulus(1.0, 0.25), kneg_annulus()}) {
    const auto one = parse_field("constant{c=1}");
    for (double th : {kPi - 0.3, kPi + 0.11, kPi - 0.02}) {
      const TransformSample s = brt_forward(sc, *one, {1.0, 0.0}, th);
      REQUIRE(s.ok());
      CHECK(s.value == doctest::Approx(s.tau).epsilon(1e-13));
    }
  }
}

TEST_CASE("flat disc chord integrals of 1 - r^2 are closed form") {
  // Along the chord from (1,0) with angle theta, 1 - |x(t)|^2 = t(tau - t),
  // so the transform equals tau^3/6 and composite Simpson is exact on it.
  const Scenario sc = make_flat_disc(1.0);
  const auto f = parse_field("polynomial{c00=1,c20=-1,c02=-1}");
  for (double th : {2.1, 2.6, 3.4, 4.1}) {
    const TransformSample s = brt_forward(sc, *f, {1.0, 0.0}, th);
    REQUIRE(s.ok());
    const double tau = s.tau;
    CHECK(s.value == doctest::Approx(tau * tau * tau / 6.0).epsilon(1e-9));
    CHECK(s.n_reflections == 0);
  }
}

TEST_CASE("head-on annulus ray integrates the radial gaussian twice") {
  // The ray (1,0) -> (0.25,0) -> (1,0) covers the segment r in [0.25, 1]
  // twice, so the transform is twice the single-pass line integral.
  const Scenario sc = make_flat_annulus(1.0, 0.25);
  const auto f = parse_field("gaussian{a=1,x0=0,y0=0,w=0.5}");
  const TransformSample s = brt_forward(sc, *f, {1.0, 0.0}, kPi);
  REQUIRE(s.ok());
  REQUIRE(s.n_reflections == 1);
  // Independent quadrature: midpoint rule on r in [0.25, 1].
  const int n = 20000;
  double ref = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = 0.25 + (i + 0.5) * 0.75 / n;
    ref += std::exp(-r * r / 0.25) * 0.75 / n;
  }
  CHECK(s.value == doctest::Approx(2.0 * ref).epsilon(1e-8));
}

TEST_CASE("fan transform matches per-ray evaluation") {
  const Scenario sc = kneg_annulus();
  const auto f = parse_field("gaussian{a=0.8,x0=0.3,y0=-0.1,w=0.4}");
  const auto fan = make_boundary_fan(sc, 5, 4);
  const auto rows = fan_transform(sc, *f, fan);
  REQUIRE(rows.size() == fan.size());
  for (std::size_t i = 0; i < fan.size(); ++i) {
    const TransformSample s = brt_forward(sc, *f, fan[i].x, fan[i].theta);
    CHECK(rows[i].value == s.value);
    CHECK(rows[i].tau == s.tau);
    CHECK(rows[i].entry_s == fan[i].entry_s);
  }
}

TEST_CASE("the transform satisfies the transport equation") {
  const auto f = parse_field("gaussian{a=1,x0=0.2,y0=0.1,w=0.5}");
  for (const Scenario& sc : {make_flat_annulus(1.0, 0.25), kneg_annulus()}) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int tested = 0;
    while (tested < 8) {
      const double phi = kTwoPi * U(rng);
      const double r = 0.4 + 0.5 * U(rng);
      const Vec2 x{r * std::cos(phi), r * std::sin(phi)};
      if (!inside_surface(sc, x, 1e-3)) continue;
      const double th = kTwoPi * U(rng);
      const double res1 = transport_residual(sc, *f, x, th, 1e-4);
      CHECK(res1 < 1e-3);
      // First order in the step h.
      const double res2 = transport_residual(sc, *f, x, th, 1e-5);
      CHECK(res2 < std::max(2e-1 * res1, 1e-8));
      ++tested;
    }
  }
}

TEST_CASE("forward and reverse rays sum to the through integral") {
  const auto f = parse_field("gaussian{a=1,x0=-0.1,y0=0.25,w=0.45}");
  for (const Scenario& sc : {make_flat_annulus(1.0, 0.25), kneg_annulus()}) {
    for (const Vec2 x : {Vec2{0.6, 0.1}, Vec2{-0.3, 0.5}}) {
      for (double th : {0.4, 2.0, 5.1}) {
        CHECK(symmetry_residual(sc, *f, x, th) < 1e-8);
      }
    }
  }
}

TEST_CASE("short chords recover the boundary value") {
  const Scenario sc = make_flat_disc(1.0);
  const auto f = parse_field("gaussian{a=0.9,x0=1.0,y0=0.0,w=0.7}");
  const BoundaryData data = [&](Vec2 x, double theta) {
    return brt_forward(sc, *f, x, theta).value;
  };
  const Vec2 x{1.0, 0.0};
  const BoundaryRecovery rec = boundary_recovery(sc, data, x);
  CHECK(std::abs(rec.estimate - f->value(x)) < 2e-3);
  // The raw ratios improve toward the estimate as the chord shrinks.
  CHECK(std::abs(rec.ratios[2] - f->value(x)) <
        std::abs(rec.ratios[0] - f->value(x)));
}

TEST_CASE("field registry parses and differentiates") {
  const auto f = parse_field("gaussian{a=0.5,x0=0.1,y0=-0.2,w=0.35}");
  CHECK(f->describe().find("gaussian") != std::string::npos);
  const Vec2 x{0.3, 0.05};
  const double h = 1e-6;
  const Vec2 fd{(f->value({x.x + h, x.y}) - f->value({x.x - h, x.y})) /
                    (2.0 * h),
                (f->value({x.x, x.y + h}) - f->value({x.x, x.y - h})) /
                    (2.0 * h)};
  CHECK(norm(f->gradient(x) - fd) < 1e-8);
  CHECK_THROWS_AS(parse_field("unknown_field{}"), SchemaError);
}
