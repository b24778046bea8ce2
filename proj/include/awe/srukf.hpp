#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "awe/error.hpp"

namespace awe::ukf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Scaled unscented transform parameters.
struct UTParams {
  double alpha = 0.01;
  double beta = 2.0;
  double kappa = 0.0;

  /// Composite scaling lambda = alpha^2 (n + kappa) - n.
  double lambda(int n) const { return alpha * alpha * (n + kappa) - n; }

  void validate(int n) const {
    if (!(alpha > 0.0) || alpha > 1.0) throw InvalidStateError("UTParams: alpha must be in (0, 1]");
    if (!(n + lambda(n) > 0.0))
      throw InvalidStateError("UTParams: n + lambda must be positive (adjust kappa)");
  }
};

/// Gaussian in square-root form: mean and lower-triangular factor S with P = S S^T.
struct GaussianState {
  VectorXd mean;
  MatrixXd sqrt_cov;  // lower-triangular, nonnegative diagonal by convention

  int dim() const { return static_cast<int>(mean.size()); }

  MatrixXd covariance() const { return sqrt_cov * sqrt_cov.transpose(); }
};

/// State transition x_{k+1} = propagate(x_k, dt) with additive process noise.
/// noise_sqrt(dt) returns the lower-triangular square root of the per-step
/// process noise covariance.
struct TransitionModel {
  std::function<VectorXd(const VectorXd&, double)> propagate;
  std::function<MatrixXd(double)> noise_sqrt;
};

/// Measurement z = observe(x) with additive noise; noise_sqrt is the
/// lower-triangular square root of the measurement noise covariance.
struct MeasurementModel {
  std::function<VectorXd(const VectorXd&)> observe;
  MatrixXd noise_sqrt;
};

struct SigmaPoints {
  MatrixXd points;   // n x (2n+1), column 0 is the mean
  VectorXd w_mean;   // 2n+1 weights, sums to 1
  VectorXd w_cov;    // 2n+1 weights
};

namespace detail {

/// Flips column signs of a lower-triangular factor so the diagonal is >= 0.
inline void normalize_diagonal_sign(MatrixXd& lower) {
  for (int j = 0; j < lower.cols(); ++j) {
    if (lower(j, j) < 0.0) lower.col(j) = -lower.col(j);
  }
}

/// Lower-triangular factor from the R of a thin QR of `rows` (rows x n, rows >= n).
inline MatrixXd qr_to_lower(const MatrixXd& stacked) {
  Eigen::HouseholderQR<MatrixXd> qr(stacked);
  const int n = static_cast<int>(stacked.cols());
  MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  MatrixXd lower = r.transpose();
  normalize_diagonal_sign(lower);
  return lower;
}

}  // namespace detail

/// Rank-1 Cholesky update (sign=+1) or downdate (sign=-1) of a lower-triangular
/// factor: returns S' with S' S'^T = S S^T + sign * v v^T.
/// Throws CovarianceDegeneracyError when a downdate would break positivity.
inline MatrixXd chol_rank1(MatrixXd s, VectorXd v, int sign) {
  const int n = static_cast<int>(v.size());
  for (int k = 0; k < n; ++k) {
    const double skk = s(k, k);
    const double arg = skk * skk + sign * v(k) * v(k);
    if (sign < 0 && arg <= skk * skk * 1e-30) {
      throw CovarianceDegeneracyError("chol_rank1: downdate lost positive definiteness at row " +
                                      std::to_string(k));
    }
    const double r = std::sqrt(arg);
    const double c = r / skk;
    const double ss = v(k) / skk;
    s(k, k) = r;
    for (int i = k + 1; i < n; ++i) {
      s(i, k) = (s(i, k) + sign * ss * v(i)) / c;
      v(i) = c * v(i) - ss * s(i, k);
    }
  }
  return s;
}

/// Generates 2n+1 scaled sigma points from a square-root Gaussian.
inline SigmaPoints sigma_points(const GaussianState& g, const UTParams& p) {
  const int n = g.dim();
  p.validate(n);
  if (!g.mean.allFinite() || !g.sqrt_cov.allFinite())
    throw InvalidStateError("sigma_points: non-finite mean or sqrt covariance");

  const double lam = p.lambda(n);
  const double gamma = std::sqrt(n + lam);

  SigmaPoints sp;
  sp.points.resize(n, 2 * n + 1);
  sp.points.col(0) = g.mean;
  for (int i = 0; i < n; ++i) {
    const VectorXd spread = gamma * g.sqrt_cov.col(i);
    sp.points.col(1 + i) = g.mean + spread;
    sp.points.col(1 + n + i) = g.mean - spread;
  }

  sp.w_mean.resize(2 * n + 1);
  sp.w_cov.resize(2 * n + 1);
  const double wi = 1.0 / (2.0 * (n + lam));
  sp.w_mean.setConstant(wi);
  sp.w_cov.setConstant(wi);
  sp.w_mean(0) = lam / (n + lam);
  sp.w_cov(0) = sp.w_mean(0) + 1.0 - p.alpha * p.alpha + p.beta;
  return sp;
}

/// SR-UKF time update. Propagates sigma points through f and rebuilds the
/// square-root factor by QR over weighted deviations stacked with the process
/// noise square root, then a rank-1 update/downdate for the center point.
inline GaussianState predict(const GaussianState& g, const TransitionModel& f, double dt,
                             const UTParams& p) {
  const int n = g.dim();
  const SigmaPoints sp = sigma_points(g, p);

  MatrixXd propagated(n, 2 * n + 1);
  for (int i = 0; i < 2 * n + 1; ++i) {
    propagated.col(i) = f.propagate(sp.points.col(i), dt);
  }
  if (!propagated.allFinite()) throw DivergenceError("predict: transition produced non-finite state");

  GaussianState out;
  out.mean = propagated * sp.w_mean;

  const MatrixXd noise = f.noise_sqrt(dt);
  MatrixXd stacked(2 * n + static_cast<int>(noise.cols()), n);
  for (int i = 1; i < 2 * n + 1; ++i) {
    stacked.row(i - 1) = std::sqrt(sp.w_cov(i)) * (propagated.col(i) - out.mean).transpose();
  }
  stacked.bottomRows(noise.cols()) = noise.transpose();
  out.sqrt_cov = detail::qr_to_lower(stacked);

  const VectorXd center = propagated.col(0) - out.mean;
  if (center.squaredNorm() > 0.0) {
    const double w0 = sp.w_cov(0);
    out.sqrt_cov = chol_rank1(out.sqrt_cov, std::sqrt(std::abs(w0)) * center, w0 >= 0.0 ? +1 : -1);
  }
  return out;
}

/// Result of a measurement update. When `skipped` is set the posterior equals
/// the prior and `diagnostic` names the reason.
struct UpdateResult {
  GaussianState posterior;
  VectorXd innovation;
  bool skipped = false;
  std::string diagnostic;
};

/// SR-UKF measurement update. Kalman gain via two triangular solves against
/// the innovation square-root factor; posterior factor via rank-1 downdates.
inline UpdateResult update(const GaussianState& g, const MeasurementModel& h, const VectorXd& z,
                           const UTParams& p) {
  const int n = g.dim();
  const int m = static_cast<int>(z.size());
  const SigmaPoints sp = sigma_points(g, p);

  MatrixXd zpts(m, 2 * n + 1);
  for (int i = 0; i < 2 * n + 1; ++i) {
    VectorXd zi = h.observe(sp.points.col(i));
    if (zi.size() != m)
      throw InvalidStateError("update: measurement model output dimension mismatch");
    zpts.col(i) = zi;
  }
  if (!zpts.allFinite()) throw DivergenceError("update: measurement model produced non-finite output");

  const VectorXd zhat = zpts * sp.w_mean;

  MatrixXd stacked(2 * n + m, m);
  for (int i = 1; i < 2 * n + 1; ++i) {
    stacked.row(i - 1) = std::sqrt(sp.w_cov(i)) * (zpts.col(i) - zhat).transpose();
  }
  stacked.bottomRows(m) = h.noise_sqrt.transpose();
  MatrixXd sz = detail::qr_to_lower(stacked);

  const VectorXd zc = zpts.col(0) - zhat;
  UpdateResult res;
  res.innovation = z - zhat;
  if (zc.squaredNorm() > 0.0) {
    const double w0 = sp.w_cov(0);
    try {
      sz = chol_rank1(sz, std::sqrt(std::abs(w0)) * zc, w0 >= 0.0 ? +1 : -1);
    } catch (const CovarianceDegeneracyError& e) {
      res.posterior = g;
      res.skipped = true;
      res.diagnostic = std::string("innovation factor downdate failed: ") + e.what();
      return res;
    }
  }

  const double min_diag = sz.diagonal().cwiseAbs().minCoeff();
  if (!(min_diag > 1e-300)) {
    res.posterior = g;
    res.skipped = true;
    res.diagnostic = "singular innovation square-root factor";
    return res;
  }

  MatrixXd pxz = MatrixXd::Zero(n, m);
  for (int i = 0; i < 2 * n + 1; ++i) {
    pxz += sp.w_cov(i) * (sp.points.col(i) - g.mean) * (zpts.col(i) - zhat).transpose();
  }

  // K = Pxz Sz^{-T} Sz^{-1} via two triangular solves
  MatrixXd k = sz.triangularView<Eigen::Lower>().solve(pxz.transpose());   // Sz^{-1} Pxz^T
  k = sz.transpose().triangularView<Eigen::Upper>().solve(k);              // Sz^{-T} ...
  const MatrixXd gain = k.transpose();

  res.posterior.mean = g.mean + gain * res.innovation;
  res.posterior.sqrt_cov = g.sqrt_cov;
  const MatrixXd u = gain * sz;
  try {
    for (int j = 0; j < m; ++j) {
      res.posterior.sqrt_cov = chol_rank1(res.posterior.sqrt_cov, u.col(j), -1);
    }
  } catch (const CovarianceDegeneracyError& e) {
    res.posterior = g;
    res.skipped = true;
    res.diagnostic = std::string("posterior factor downdate failed: ") + e.what();
    return res;
  }
  return res;
}

/// Convenience wrapper owning the UT parameters and the downdate-failure
/// policy: skipped updates are counted and more than `max_consecutive_skips`
/// in a row abort with a diagnostic.
class SquareRootUkf {
 public:
  explicit SquareRootUkf(UTParams params = {}, int max_consecutive_skips = 5)
      : params_(params), max_skips_(max_consecutive_skips) {}

  const UTParams& params() const { return params_; }

  GaussianState predict(const GaussianState& g, const TransitionModel& f, double dt) const {
    return ukf::predict(g, f, dt, params_);
  }

  UpdateResult update(const GaussianState& g, const MeasurementModel& h, const VectorXd& z) {
    UpdateResult res = ukf::update(g, h, z, params_);
    if (res.skipped) {
      ++consecutive_skips_;
      ++total_skips_;
      if (consecutive_skips_ > max_skips_) {
        throw CovarianceDegeneracyError("update skipped " + std::to_string(consecutive_skips_) +
                                        " times in a row: " + res.diagnostic);
      }
    } else {
      consecutive_skips_ = 0;
    }
    return res;
  }

  int consecutive_skips() const { return consecutive_skips_; }
  long total_skips() const { return total_skips_; }

 private:
  UTParams params_;
  int max_skips_;
  int consecutive_skips_ = 0;
  long total_skips_ = 0;
};

}  // namespace awe::ukf
