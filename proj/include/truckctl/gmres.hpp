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

#include <functional>

#include <Eigen/Core>

namespace truckctl {

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;  // ||b - A x|| estimated by the Arnoldi recurrence
};

/// Restart-free GMRES on a matrix-free operator, at most `kmax` Arnoldi
/// steps from the initial guess `x0`. Stops early on a lucky breakdown or
/// when the residual falls below `tol`. With kmax = 0 it returns x0.
GmresResult SolveGmres(const LinearOperator& apply, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& x0, int kmax, double tol = 0.0);

}  // namespace truckctl
