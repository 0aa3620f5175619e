/*
 * Copyright 2026 The truckctl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string_view>

#include <Eigen/Core>

#include "truckctl/longitudinal_model.hpp"

namespace truckctl {

/// Which single-track state matrix to build.
///
/// kAsPrinted keeps the mixed front/rear stiffness entries of the reference
/// model verbatim: (1,2) = (b1 c1 - a1 c1 - m v^2) / v and
/// (2,2) = -(a1^2 c1 + b1^2 c1) / v. kStandardBicycle uses the textbook
/// entries (b1 c2 - a1 c1 - m v^2) / v and -(a1^2 c1 + b1^2 c2) / v.
enum class LateralVariant { kAsPrinted, kStandardBicycle };

std::string_view LateralVariantName(LateralVariant variant);
LateralVariant ParseLateralVariant(std::string_view name);

struct LateralParams {
  double a1 = 3.19;  // m, front axle to CG
  double b1 = 1.62;  // m, rear axle to CG
  double l1 = 4.81;  // m, wheelbase
  double m1 = 16030.0;
  double payload = 12550.0;
  double inertia = 215717.0;  // kg m^2, yaw moment of inertia J1
  double f1 = 5.73;           // 1/rad, normalised cornering stiffness
  double f2 = 5.73;
  double v_floor = 1.38;  // m/s
  double gravity = kGravity;

  double total_mass() const { return m1 + payload; }
  void Validate() const;
};

struct AxleLoads {
  double fz1 = 0.0;  // N
  double fz2 = 0.0;  // N
  double c1 = 0.0;   // N/rad
  double c2 = 0.0;   // N/rad
};

/// Static axle loads and load-proportional cornering stiffness.
AxleLoads ComputeAxleLoads(const LateralParams& p, double total_mass);

/// Ordered as x = [y_dot, psi_dot, rho, theta].
struct LateralState {
  double y_dot = 0.0;
  double psi_dot = 0.0;
  double rho = 0.0;
  double theta = 0.0;

  Eigen::Vector4d AsVector() const { return {y_dot, psi_dot, rho, theta}; }
};

/// M x_dot = A x + B alpha and its rewritten form x_dot = F x + G alpha,
/// optionally discretised with a zero-order hold.
struct LateralSystem {
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Vector4d B = Eigen::Vector4d::Zero();
  Eigen::Matrix4d F = Eigen::Matrix4d::Zero();
  Eigen::Vector4d G = Eigen::Vector4d::Zero();
  Eigen::Matrix4d F_d = Eigen::Matrix4d::Identity();
  Eigen::Vector4d G_d = Eigen::Vector4d::Zero();
  double Ts = 0.0;  // zero until discretised
  double v_used = 0.0;
};

/// Builds the continuous model at speed max(v, v_floor) for the total mass
/// p.total_mass().
LateralSystem ContinuousMatrices(const LateralParams& p, double v,
                                 LateralVariant variant);

/// Adds the zero-order-hold pair (F_d, G_d) for sampling time Ts.
LateralSystem Discretize(const LateralSystem& continuous, double Ts);

/// Matrix exponential by scaling and squaring of the Taylor series. The
/// series is summed until the next term is below 1e-17 of the partial sum.
Eigen::MatrixXd ExpmSeries(const Eigen::MatrixXd& X);

}  // namespace truckctl
