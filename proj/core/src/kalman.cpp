#include "sentinel/kalman.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

using MeasurementMatrix = Eigen::Matrix<double, 4, 8>;

const StateCovariance& motion_matrix() {
  static const StateCovariance f = [] {
    StateCovariance m = StateCovariance::Identity();
    for (int i = 0; i < 4; ++i) m(i, 4 + i) = 1.0;
    return m;
  }();
  return f;
}

const MeasurementMatrix& observation_matrix() {
  static const MeasurementMatrix h = [] {
    MeasurementMatrix m = MeasurementMatrix::Zero();
    for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
    return m;
  }();
  return h;
}

}  // namespace

BBox KalmanState::bbox() const {
  const double h = mean(3);
  const double w = mean(2) * h;
  return {mean(0) - 0.5 * w, mean(1) - 0.5 * h, mean(0) + 0.5 * w, mean(1) + 0.5 * h};
}

Eigen::Vector4d measurement_of(const BBox& b) {
  const Point2 c = b.center();
  return {c.x, c.y, b.width() / b.height(), b.height()};
}

KalmanState kalman_initiate(const BBox& b, const KalmanNoise& noise) {
  KalmanState s;
  s.mean.head<4>() = measurement_of(b);
  s.mean.tail<4>().setZero();

  const double h = s.mean(3);
  const double pw = noise.position_weight;
  const double vw = noise.velocity_weight;
  StateVector stdev;
  stdev << 2 * pw * h, 2 * pw * h, 1e-2, 2 * pw * h, 10 * vw * h, 10 * vw * h, 1e-5,
      10 * vw * h;
  s.covariance = stdev.array().square().matrix().asDiagonal();
  return s;
}

KalmanState kalman_predict(const KalmanState& s, const KalmanNoise& noise) {
  const double h = s.mean(3);
  const double pw = noise.position_weight;
  const double vw = noise.velocity_weight;
  StateVector stdev;
  stdev << pw * h, pw * h, 1e-2, pw * h, vw * h, vw * h, 1e-5, vw * h;
  const StateCovariance q = stdev.array().square().matrix().asDiagonal();

  const auto& f = motion_matrix();
  KalmanState out;
  out.mean = f * s.mean;
  out.covariance = f * s.covariance * f.transpose() + q;
  return out;
}

KalmanState kalman_update(const KalmanState& s, const BBox& measured,
                          const KalmanNoise& noise) {
  const double h = s.mean(3);
  const double pw = noise.position_weight;
  Eigen::Vector4d r_std(pw * h, pw * h, 1e-1, pw * h);
  const Eigen::Matrix4d r = r_std.array().square().matrix().asDiagonal();

  const auto& hm = observation_matrix();
  const Eigen::Vector4d projected = hm * s.mean;
  const Eigen::Matrix4d innovation_cov = hm * s.covariance * hm.transpose() + r;

  Eigen::LLT<Eigen::Matrix4d> llt(innovation_cov);
  if (llt.info() != Eigen::Success || !innovation_cov.allFinite()) {
    throw NumericalFailure("innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, solved as S K^T = H P.
  const Eigen::Matrix<double, 8, 4> gain =
      llt.solve(hm * s.covariance).transpose();

  KalmanState out;
  out.mean = s.mean + gain * (measurement_of(measured) - projected);
  out.covariance = s.covariance - gain * innovation_cov * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

}  // namespace sentinel
