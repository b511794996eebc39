#include "swirl/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "swirl/random.hpp"

namespace swirl {

namespace {

using Vec5 = std::array<double, 5>;

// Observations in struct-of-arrays form with logs precomputed, so that one
// model evaluation costs two exp() calls.
class Misfit {
 public:
  explicit Misfit(std::span<const VelocityObservation> obs) {
    const std::size_t n = obs.size();
    log_r_.resize(n);
    log_z_.resize(n);
    r_.resize(n);
    z_.resize(n);
    y_.resize(n);
    weight_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      r_[k] = obs[k].r;
      z_[k] = obs[k].z;
      log_r_[k] = obs[k].r > 0.0 ? std::log(obs[k].r) : -HUGE_VAL;
      log_z_[k] = obs[k].z > 0.0 ? std::log(obs[k].z) : -HUGE_VAL;
      y_[k] = obs[k].v_obs;
      weight_[k] = 1.0 / obs[k].sigma;
    }
  }

  std::size_t size() const { return y_.size(); }

  // Weighted residuals (v - v_obs) / sigma.
  template <typename Out>
  void residuals(const Vec5& p, Out&& out) const {
    const double v_c = p[0];
    const Profile radial(p[1], p[2]);
    const Profile vertical(p[3], p[4]);
    for (std::size_t k = 0; k < y_.size(); ++k) {
      const double v = v_c * radial(r_[k], log_r_[k]) * vertical(z_[k], log_z_[k]);
      out(k, (v - y_[k]) * weight_[k]);
    }
  }

  double objective(const Vec5& p) const {
    double sum = 0.0;
    residuals(p, [&](std::size_t, double e) { sum += e * e; });
    return sum;
  }

  double rms(const Vec5& p) const {
    double sum = 0.0;
    residuals(p, [&](std::size_t k, double e) {
      const double d = e / weight_[k];
      sum += d * d;
    });
    return std::sqrt(sum / static_cast<double>(y_.size()));
  }

 private:
  struct Profile {
    Profile(double n, double xc) : n(n) {
      const double xcn = std::exp(n * std::log(xc));
      a = n * xcn / xc;
      b = (n - 1.0) * xcn;
    }
    double operator()(double x, double log_x) const {
      if (x <= 0.0) return 0.0;
      return a * x / (b + std::exp(n * log_x));
    }
    double n, a, b;
  };

  std::vector<double> r_, z_, log_r_, log_z_, y_, weight_;
};

Vec5 clamp(const Vec5& p, const ParameterBounds& b) {
  Vec5 out;
  for (int k = 0; k < 5; ++k) out[k] = std::clamp(p[k], b.lower[k], b.upper[k]);
  return out;
}

struct SimplexResult {
  Vec5 best{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead on x = p / scale, evaluating the objective at the projection
// of each vertex onto the bounds.
SimplexResult nelder_mead(const Misfit& misfit, const Vec5& start, const Vec5& scale,
                          const ParameterBounds& bounds, int max_iter) {
  constexpr int N = 5;
  auto eval = [&](const Vec5& x) {
    Vec5 p;
    for (int k = 0; k < N; ++k) p[k] = x[k] * scale[k];
    return misfit.objective(clamp(p, bounds));
  };

  std::array<Vec5, N + 1> x{};
  std::array<double, N + 1> f{};
  for (int k = 0; k < N; ++k) x[0][k] = start[k] / scale[k];
  for (int v = 1; v <= N; ++v) {
    x[v] = x[0];
    const int k = v - 1;
    const double step = 0.1 * x[0][k];
    x[v][k] += (x[0][k] + step) * scale[k] > bounds.upper[k] ? -step : step;
  }
  for (int v = 0; v <= N; ++v) f[v] = eval(x[v]);

  SimplexResult out;
  std::array<int, N + 1> order{};
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
    const int lo = order[0];
    const int hi = order[N];
    const int second = order[N - 1];

    double size = 0.0;
    for (int v = 0; v <= N; ++v) {
      for (int k = 0; k < N; ++k) size = std::max(size, std::abs(x[v][k] - x[lo][k]));
    }
    const double spread = f[hi] - f[lo];
    if (size < 1e-9 || spread <= 1e-13 * f[lo] + 1e-300) {
      out.converged = true;
      out.iterations = it;
      break;
    }
    out.iterations = it + 1;

    Vec5 centroid{};
    for (int v = 0; v <= N; ++v) {
      if (v == hi) continue;
      for (int k = 0; k < N; ++k) centroid[k] += x[v][k] / N;
    }
    auto along = [&](double t) {
      Vec5 p;
      for (int k = 0; k < N; ++k) p[k] = centroid[k] + t * (x[hi][k] - centroid[k]);
      return p;
    };

    const Vec5 xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < f[lo]) {
      const Vec5 xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        x[hi] = xe;
        f[hi] = fe;
      } else {
        x[hi] = xr;
        f[hi] = fr;
      }
      continue;
    }
    if (fr < f[second]) {
      x[hi] = xr;
      f[hi] = fr;
      continue;
    }
    const bool outside = fr < f[hi];
    const Vec5 xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : f[hi])) {
      x[hi] = xc;
      f[hi] = fc;
      continue;
    }
    for (int v = 0; v <= N; ++v) {
      if (v == lo) continue;
      for (int k = 0; k < N; ++k) x[v][k] = x[lo][k] + 0.5 * (x[v][k] - x[lo][k]);
      f[v] = eval(x[v]);
    }
  }
  const int best = static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
  for (int k = 0; k < N; ++k) out.best[k] = x[best][k] * scale[k];
  out.best = clamp(out.best, bounds);
  out.value = misfit.objective(out.best);
  return out;
}

Eigen::MatrixXd jacobian(const Misfit& misfit, const Vec5& p, const ParameterBounds& bounds) {
  const auto n = static_cast<Eigen::Index>(misfit.size());
  Eigen::MatrixXd J(n, 5);
  Eigen::VectorXd plus(n), minus(n);
  for (int k = 0; k < 5; ++k) {
    const double step = 1e-6 * std::max(std::abs(p[k]), 1e-3);
    Vec5 a = p, b = p;
    a[k] = std::min(p[k] + step, bounds.upper[k]);
    b[k] = std::max(p[k] - step, bounds.lower[k]);
    misfit.residuals(a, [&](std::size_t i, double e) { plus[static_cast<Eigen::Index>(i)] = e; });
    misfit.residuals(b, [&](std::size_t i, double e) { minus[static_cast<Eigen::Index>(i)] = e; });
    J.col(k) = (plus - minus) / (a[k] - b[k]);
  }
  return J;
}

Eigen::VectorXd residual_vector(const Misfit& misfit, const Vec5& p) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(misfit.size()));
  misfit.residuals(p, [&](std::size_t i, double e) { r[static_cast<Eigen::Index>(i)] = e; });
  return r;
}

struct PolishResult {
  Vec5 p{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt with a central-difference Jacobian, projected onto the
// bounds after each step.
PolishResult polish(const Misfit& misfit, Vec5 p, const ParameterBounds& bounds, int max_iter) {
  PolishResult out;
  double f = misfit.objective(p);
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd J = jacobian(misfit, p, bounds);
    const Eigen::VectorXd r = residual_vector(misfit, p);
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;

    bool improved = false;
    double rel_step = 0.0;
    while (lambda < 1e14) {
      Eigen::MatrixXd M = A;
      for (int k = 0; k < 5; ++k) M(k, k) += lambda * std::max(A(k, k), 1e-300);
      const Eigen::VectorXd delta = M.ldlt().solve(-g);
      Vec5 trial;
      for (int k = 0; k < 5; ++k) trial[k] = p[k] + delta[k];
      trial = clamp(trial, bounds);
      const double ft = misfit.objective(trial);
      if (std::isfinite(ft) && ft <= f) {
        rel_step = 0.0;
        for (int k = 0; k < 5; ++k) {
          rel_step = std::max(rel_step, std::abs(trial[k] - p[k]) / std::max(std::abs(p[k]), 1e-300));
        }
        improved = ft < f || rel_step == 0.0;
        p = trial;
        f = ft;
        lambda = std::max(lambda * 0.1, 1e-12);
        break;
      }
      lambda *= 10.0;
    }
    if (!improved || rel_step < 1e-13) {
      out.converged = true;
      break;
    }
  }
  out.p = p;
  out.value = f;
  return out;
}

}  // namespace

bool ParameterBounds::contains(const ModelParams& p) const {
  const Vec5 a = p.to_array();
  for (int k = 0; k < 5; ++k) {
    if (!(a[k] >= lower[k] && a[k] <= upper[k])) return false;
  }
  return true;
}

ParameterBounds ParameterBounds::defaults(std::span<const VelocityObservation> obs, double R,
                                          double H) {
  double vmax = 0.0;
  for (const auto& o : obs) vmax = std::max(vmax, o.v_obs);
  if (!(vmax > 0.0)) vmax = 1.0;
  ParameterBounds b;
  b.lower = {1e-9 * vmax, 1.05, 1e-6 * R, 1.05, 1e-6 * H};
  b.upper = {10.0 * vmax, 20.0, R, 20.0, H};
  return b;
}

double fit_objective(const ModelParams& params, std::span<const VelocityObservation> obs) {
  return Misfit(obs).objective(params.to_array());
}

FitResult fit_model(std::span<const VelocityObservation> obs, const ModelParams& initial,
                    const ParameterBounds& bounds, const FitOptions& options) {
  if (obs.size() < 5) {
    throw std::invalid_argument("fit_model: at least 5 observations are required");
  }
  for (const auto& o : obs) {
    if (!std::isfinite(o.r) || !std::isfinite(o.z) || !std::isfinite(o.v_obs) || o.r < 0.0 ||
        !(o.sigma > 0.0)) {
      throw std::invalid_argument("fit_model: observation with invalid r, z, v or sigma");
    }
  }
  if (!bounds.contains(initial)) {
    throw std::invalid_argument("fit_model: initial guess outside parameter bounds");
  }
  for (int k = 0; k < 5; ++k) {
    if (!(bounds.lower[k] > 0.0)) {
      throw std::invalid_argument("fit_model: parameter lower bounds must be positive");
    }
  }

  {
    std::set<double> radii, heights;
    for (const auto& o : obs) {
      radii.insert(o.r);
      heights.insert(o.z);
    }
    if (radii.size() < 2 || heights.size() < 2) {
      throw RankDeficientError(
          "fit_model: observations lie on a single line and cannot constrain all parameters");
    }
  }

  const Misfit misfit(obs);
  const Vec5 p0 = initial.to_array();

  {
    Eigen::MatrixXd J = jacobian(misfit, p0, bounds);
    for (int k = 0; k < 5; ++k) {
      const double norm = J.col(k).norm();
      if (norm > 0.0) J.col(k) /= norm;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J.transpose() * J);
    const auto ev = eig.eigenvalues();
    if (!(ev.minCoeff() > 1e-14 * ev.maxCoeff())) {
      throw RankDeficientError("fit_model: observation geometry is rank deficient");
    }
  }

  Rng rng(options.seed);
  SimplexResult best;
  best.value = HUGE_VAL;
  int iterations = 0;
  const int restarts = std::max(options.restarts, 1);
  for (int k = 0; k < restarts; ++k) {
    Vec5 start = p0;
    if (k > 0) {
      for (auto& x : start) x *= 1.0 + options.jitter * rng.uniform(-1.0, 1.0);
      start = clamp(start, bounds);
    }
    const SimplexResult run = nelder_mead(misfit, start, p0, bounds, options.max_iter);
    iterations += run.iterations;
    if (run.value < best.value) best = run;
  }

  const PolishResult polished = polish(misfit, best.best, bounds, 100);
  iterations += polished.iterations;

  Vec5 p = best.best;
  double value = best.value;
  if (polished.value <= value) {
    p = polished.p;
    value = polished.value;
  }
  const double f0 = misfit.objective(p0);
  if (!(value <= f0)) {
    p = p0;
    value = f0;
  }

  FitResult result{SeparableVortex(ModelParams::from_array(p))};
  result.objective = value;
  result.rms_misfit = misfit.rms(p);
  result.iterations = iterations;
  result.converged = polished.converged;
  return result;
}

}  // namespace swirl
