#include "brl/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "brl/common.hpp"
#include "brl/errors.hpp"

namespace brl {

namespace {

int clamp_cell(double u, int n) {
  const int i = static_cast<int>(std::floor(u));
  return std::clamp(i, 0, n - 1);
}

}  // namespace

int PixelBasis::locate(Vec2 x) const {
  const int ix = clamp_cell((x.x - lo.x) / h, n);
  const int iy = clamp_cell((x.y - lo.y) / h, n);
  const int direct = cell_index[static_cast<std::size_t>(iy) * n + ix];
  if (direct >= 0) return direct;

  // Expanding Chebyshev rings around the containing cell; keep scanning a few
  // rings past the first hit so the euclidean-nearest center wins.
  int best = -1;
  double best_d2 = 0.0;
  int r_stop = n;
  for (int r = 1; r <= r_stop; ++r) {
    for (int dy = -r; dy <= r; ++dy) {
      const int jy = iy + dy;
      if (jy < 0 || jy >= n) continue;
      const int step = (std::abs(dy) == r) ? 1 : 2 * r;
      for (int dx = -r; dx <= r; dx += step) {
        const int jx = ix + dx;
        if (jx < 0 || jx >= n) continue;
        const int idx = cell_index[static_cast<std::size_t>(jy) * n + jx];
        if (idx < 0) continue;
        const double d2 = norm2(centers[idx] - x);
        if (best < 0 || d2 < best_d2) {
          best = idx;
          best_d2 = d2;
        }
      }
    }
    if (best >= 0 && r_stop == n) r_stop = std::min(n, (3 * r) / 2 + 2);
  }
  if (best < 0) throw Error("pixel basis has no active cells");
  return best;
}

PixelBasis make_pixel_basis(const Scenario& scenario, int n) {
  if (n < 2) throw SchemaError("pixel basis: need n >= 2");
  if (!scenario.outer) throw SchemaError("pixel basis: scenario has no outer curve");
  const double R = scenario.outer->bound_radius();
  PixelBasis basis;
  basis.n = n;
  basis.h = 2.0 * R / n;
  basis.lo = Vec2{-R, -R};
  basis.cell_index.assign(static_cast<std::size_t>(n) * n, -1);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 c{basis.lo.x + (ix + 0.5) * basis.h,
                   basis.lo.y + (iy + 0.5) * basis.h};
      if (!inside_surface(scenario, c)) continue;
      basis.cell_index[static_cast<std::size_t>(iy) * n + ix] =
          static_cast<int>(basis.centers.size());
      basis.centers.push_back(c);
    }
  }
  if (basis.centers.empty()) throw SchemaError("pixel basis: no cell center lies in M");
  return basis;
}

ForwardOperator assemble_forward_matrix(const Scenario& scenario,
                                        const PixelBasis& basis,
                                        const std::vector<FanEntry>& fan) {
  if (fan.empty()) throw DimensionMismatch("forward matrix: empty fan");
  const int n_active = basis.active_count();
  const std::size_t n_fan = fan.size();

  std::vector<char> keep(n_fan, 0);
  std::vector<double> taus(n_fan, 0.0);
  std::vector<Eigen::VectorXd> rows(n_fan);
  parallel_for(n_fan, [&](std::size_t i) {
    try {
      const BrokenRay ray = trace_broken_ray(scenario, fan[i].x, fan[i].theta);
      if (ray.termination != Termination::ExitAtE) return;
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n_active);
      for (const RaySegment& seg : ray.segments) {
        const std::vector<double> w = segment_weights(seg);
        for (std::size_t k = 0; k < seg.samples.size(); ++k) {
          row[basis.locate(seg.samples[k].x)] += w[k];
        }
      }
      rows[i] = std::move(row);
      taus[i] = ray.tau;
      keep[i] = 1;
    } catch (const Error&) {
      // non-exiting or tangential ray: excluded below
    }
  });

  ForwardOperator op;
  op.scenario_hash = scenario.hash();
  std::size_t n_keep = 0;
  for (std::size_t i = 0; i < n_fan; ++i) n_keep += keep[i] ? 1 : 0;
  op.n_excluded = static_cast<int>(n_fan - n_keep);
  op.A.resize(static_cast<Eigen::Index>(n_keep), n_active);
  op.tau.resize(static_cast<Eigen::Index>(n_keep));
  op.ray_ids.reserve(n_keep);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n_fan; ++i) {
    if (!keep[i]) continue;
    op.A.row(r) = rows[i];
    op.tau[r] = taus[i];
    op.ray_ids.push_back(static_cast<int>(i));
    ++r;
  }
  return op;
}

SpectrumReport singular_spectrum(const Eigen::MatrixXd& A, double rank_tol) {
  if (A.rows() == 0 || A.cols() == 0)
    throw DimensionMismatch("singular spectrum: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  SpectrumReport rep;
  rep.singular_values = svd.singularValues();
  rep.sigma_max = rep.singular_values[0];
  rep.sigma_min = rep.singular_values[rep.singular_values.size() - 1];
  rep.rank_tol = rank_tol;
  rep.effective_rank = 0;
  for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
    if (rep.singular_values[i] > rep.sigma_max * rank_tol) ++rep.effective_rank;
  }
  return rep;
}

ReconstructionReport reconstruct(const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& data, double mu,
                                 const Eigen::VectorXd* truth) {
  if (A.rows() == 0 || A.cols() == 0)
    throw DimensionMismatch("reconstruct: empty matrix");
  if (data.size() != A.rows())
    throw DimensionMismatch("reconstruct: data length does not match rows");
  if (mu < 0.0) throw SchemaError("reconstruct: mu must be nonnegative");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  ReconstructionReport rep;
  rep.mu = mu;
  rep.sigma_max = sigma[0];
  rep.sigma_min = sigma[sigma.size() - 1];
  if (mu == 0.0 &&
      (A.rows() < A.cols() || rep.sigma_min <= rep.sigma_max * 1e-12)) {
    throw SingularSystem("reconstruct: mu = 0 on a rank-deficient system");
  }
  Eigen::VectorXd filt(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    filt[i] = sigma[i] / (sigma[i] * sigma[i] + mu);
  }
  const Eigen::VectorXd z = svd.matrixU().transpose() * data;
  rep.coefficients = svd.matrixV() * filt.cwiseProduct(z).eval();

  if (truth != nullptr) {
    if (truth->size() != rep.coefficients.size())
      throw DimensionMismatch("reconstruct: truth length does not match columns");
    const double tn = truth->norm();
    const double err = (rep.coefficients - *truth).norm();
    rep.rel_error = (tn > 0.0) ? err / tn : err;
  }
  return rep;
}

double default_mu(const SpectrumReport& spectrum) {
  return 1e-8 * spectrum.sigma_max * spectrum.sigma_max;
}

Eigen::VectorXd discretize_field(const PixelBasis& basis,
                                 const ScalarField& field) {
  Eigen::VectorXd v(basis.active_count());
  for (int i = 0; i < basis.active_count(); ++i) v[i] = field.value(basis.centers[i]);
  return v;
}

namespace {

// One full sine period along x over an open band; identically zero outside.
class AxialSineField final : public ScalarField {
 public:
  AxialSineField(Vec2 center, double length, double half_width)
      : c_(center), len_(length), hw_(half_width) {}

  double value(Vec2 x) const override {
    if (!inside(x)) return 0.0;
    return std::sin(kTwoPi * (x.x - (c_.x - 0.5 * len_)) / len_);
  }
  Vec2 gradient(Vec2 x) const override {
    if (!inside(x)) return Vec2{0.0, 0.0};
    const double u = kTwoPi * (x.x - (c_.x - 0.5 * len_)) / len_;
    return Vec2{kTwoPi / len_ * std::cos(u), 0.0};
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "axial_sine{cx=" << fmt17(c_.x) << ",cy=" << fmt17(c_.y)
       << ",length=" << fmt17(len_) << ",half_width=" << fmt17(hw_) << "}";
    return os.str();
  }

 private:
  // The band is open, but reflection samples sit on the wall within the event
  // localization tolerance; the slack makes them evaluate the inside limit so
  // the integrand stays continuous along reflected rays.
  bool inside(Vec2 x) const {
    constexpr double slack = 1e-8;
    return std::abs(x.x - c_.x) < 0.5 * len_ + slack &&
           std::abs(x.y - c_.y) < hw_ + slack;
  }
  Vec2 c_;
  double len_, hw_;
};

}  // namespace

FieldPtr make_axial_sine_field(Vec2 center, double length, double half_width) {
  if (length <= 0.0 || half_width <= 0.0)
    throw SchemaError("axial sine: length and half_width must be positive");
  return std::make_shared<AxialSineField>(center, length, half_width);
}

FieldPtr tube_null_function(const Scenario& scenario) {
  if (!scenario.obstacle || scenario.obstacle->kind() != "two_bar_tube")
    throw NotATubeScenario("tube null function needs a two_bar_tube obstacle");
  const auto p = scenario.obstacle->params();
  const double wall_length = p.at("wall_length");
  const double rc = p.at("corner_radius");
  const double gap = p.at("gap");
  // Inset three corner radii per end: rays can change axial direction only on
  // the corner arcs and end caps, all of which lie outside this range, so
  // every pass across the support is a full period.
  const double support_len = wall_length - 6.0 * rc;
  if (support_len <= 0.0)
    throw NotATubeScenario("tube walls too short for the corner inset");
  return make_axial_sine_field(Vec2{p.at("cx"), p.at("cy")}, support_len,
                               0.5 * gap);
}

double field_l2_norm(const Scenario& scenario, const ScalarField& field, int n) {
  if (n < 2) throw SchemaError("field norm: need n >= 2");
  const double R = scenario.outer->bound_radius();
  const double h = 2.0 * R / n;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 c{-R + (ix + 0.5) * h, -R + (iy + 0.5) * h};
      if (!inside_surface(scenario, c)) continue;
      const double f = field.value(c);
      terms.push_back(f * f * sqr(scenario.surface.conf(c)) * h * h);
    }
  }
  return std::sqrt(pairwise_sum(terms));
}

}  // namespace brl
