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

#include "truckctl/lateral_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "truckctl/errors.hpp"

namespace truckctl {

std::string_view LateralVariantName(LateralVariant variant) {
  return variant == LateralVariant::kAsPrinted ? "as-printed"
                                               : "standard-bicycle";
}

LateralVariant ParseLateralVariant(std::string_view name) {
  if (name == "as-printed") return LateralVariant::kAsPrinted;
  if (name == "standard-bicycle") return LateralVariant::kStandardBicycle;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown lateral variant '" + std::string(name) + "'");
}

void LateralParams::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(a1 > 0.0 && b1 > 0.0 && l1 > 0.0, "axle distances must be positive");
  require(std::abs(a1 + b1 - l1) <= 1e-6, "wheelbase must equal a1 + b1");
  require(m1 > 0.0 && payload >= 0.0, "masses must be non-negative");
  require(inertia > 0.0, "yaw inertia must be positive");
  require(f1 > 0.0 && f2 > 0.0, "normalised cornering stiffness must be positive");
  require(v_floor > 0.0, "v_floor must be positive");
}

AxleLoads ComputeAxleLoads(const LateralParams& p, double total_mass) {
  if (!(total_mass > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "total mass must be positive");
  }
  AxleLoads out;
  out.fz1 = total_mass * p.gravity * p.b1 / p.l1;
  out.fz2 = total_mass * p.gravity * p.a1 / p.l1;
  out.c1 = p.f1 * out.fz1;
  out.c2 = p.f2 * out.fz2;
  return out;
}

LateralSystem ContinuousMatrices(const LateralParams& p, double v,
                                 LateralVariant variant) {
  const double m = p.total_mass();
  const AxleLoads loads = ComputeAxleLoads(p, m);
  const double c1 = loads.c1;
  const double c2 = loads.c2;
  const double a1 = p.a1;
  const double b1 = p.b1;
  const double speed = std::max(v, p.v_floor);

  LateralSystem sys;
  sys.v_used = speed;
  sys.M.diagonal() << m, p.inertia, 1.0, 1.0;

  sys.A.setZero();
  sys.A(0, 0) = (-c1 - c2) / speed;
  sys.A(1, 0) = (b1 * c2 - a1 * c1) / speed;
  if (variant == LateralVariant::kAsPrinted) {
    sys.A(0, 1) = (b1 * c1 - a1 * c1 - m * speed * speed) / speed;
    sys.A(1, 1) = (-a1 * a1 * c1 - b1 * b1 * c1) / speed;
  } else {
    sys.A(0, 1) = (b1 * c2 - a1 * c1 - m * speed * speed) / speed;
    sys.A(1, 1) = (-a1 * a1 * c1 - b1 * b1 * c2) / speed;
  }
  // Linearised path-following kinematics: rho_dot = y_dot + v theta,
  // theta_dot = psi_dot.
  sys.A(2, 0) = 1.0;
  sys.A(2, 3) = speed;
  sys.A(3, 1) = 1.0;

  sys.B << c1, a1 * c1, 0.0, 0.0;

  const Eigen::Vector4d inv_mass = sys.M.diagonal().cwiseInverse();
  sys.F = inv_mass.asDiagonal() * sys.A;
  sys.G = inv_mass.asDiagonal() * sys.B;
  return sys;
}

Eigen::MatrixXd ExpmSeries(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  const double norm = X.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  const Eigen::MatrixXd scaled = X / std::ldexp(1.0, squarings);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-17 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

LateralSystem Discretize(const LateralSystem& continuous, double Ts) {
  if (!(Ts > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sampling time must be positive");
  }
  // exp([[F, G], [0, 0]] Ts) = [[F_d, G_d], [0, I]].
  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(5, 5);
  augmented.topLeftCorner<4, 4>() = continuous.F * Ts;
  augmented.topRightCorner<4, 1>() = continuous.G * Ts;
  const Eigen::MatrixXd phi = ExpmSeries(augmented);

  LateralSystem out = continuous;
  out.F_d = phi.topLeftCorner<4, 4>();
  out.G_d = phi.topRightCorner<4, 1>();
  out.Ts = Ts;
  return out;
}

}  // namespace truckctl
