#pragma once

#include <Eigen/Core>

#include "sentinel/geometry.hpp"

namespace sentinel {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;

// Constant-velocity state over (cx, cy, aspect = w/h, height) and their
// per-frame velocities.
struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateCovariance covariance = StateCovariance::Identity();

  BBox bbox() const;
};

// Measurement (cx, cy, w/h, h) of a corner-form box.
Eigen::Vector4d measurement_of(const BBox& b);

// Noise standard deviations scale with the box height.
struct KalmanNoise {
  double position_weight = 1.0 / 20.0;
  double velocity_weight = 1.0 / 160.0;
};

KalmanState kalman_initiate(const BBox& b, const KalmanNoise& noise = {});

KalmanState kalman_predict(const KalmanState& s, const KalmanNoise& noise = {});

// Throws NumericalFailure if the innovation covariance is not positive definite.
KalmanState kalman_update(const KalmanState& s, const BBox& measured,
                          const KalmanNoise& noise = {});

}  // namespace sentinel
