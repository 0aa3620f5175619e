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

#include "truckctl/gmres.hpp"

#include <cmath>
#include <vector>

namespace truckctl {

GmresResult SolveGmres(const LinearOperator& apply, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& x0, int kmax, double tol) {
  GmresResult out;
  out.x = x0;
  Eigen::VectorXd r = b - apply(x0);
  const double beta = r.norm();
  out.residual = beta;
  if (kmax <= 0 || beta == 0.0 || beta <= tol) return out;

  const Eigen::Index n = b.size();
  const int k_cap = static_cast<int>(std::min<Eigen::Index>(kmax, n));
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, k_cap + 1);
  Eigen::MatrixXd Hm = Eigen::MatrixXd::Zero(k_cap + 1, k_cap);
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(k_cap);
  Eigen::VectorXd sn = Eigen::VectorXd::Zero(k_cap);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k_cap + 1);
  g(0) = beta;
  V.col(0) = r / beta;

  int k = 0;
  for (; k < k_cap; ++k) {
    Eigen::VectorXd w = apply(V.col(k));
    for (int j = 0; j <= k; ++j) {
      Hm(j, k) = w.dot(V.col(j));
      w -= Hm(j, k) * V.col(j);
    }
    Hm(k + 1, k) = w.norm();
    const bool breakdown = Hm(k + 1, k) <= 1e-14 * beta;
    if (!breakdown) V.col(k + 1) = w / Hm(k + 1, k);

    for (int j = 0; j < k; ++j) {
      const double t = cs(j) * Hm(j, k) + sn(j) * Hm(j + 1, k);
      Hm(j + 1, k) = -sn(j) * Hm(j, k) + cs(j) * Hm(j + 1, k);
      Hm(j, k) = t;
    }
    const double denom = std::hypot(Hm(k, k), Hm(k + 1, k));
    if (denom == 0.0) break;
    cs(k) = Hm(k, k) / denom;
    sn(k) = Hm(k + 1, k) / denom;
    Hm(k, k) = denom;
    Hm(k + 1, k) = 0.0;
    g(k + 1) = -sn(k) * g(k);
    g(k) = cs(k) * g(k);
    out.residual = std::abs(g(k + 1));
    if (breakdown || out.residual <= tol) {
      ++k;
      break;
    }
  }
  out.iterations = k;
  if (k == 0) return out;

  const Eigen::VectorXd y = Hm.topLeftCorner(k, k)
                                .triangularView<Eigen::Upper>()
                                .solve(g.head(k));
  out.x += V.leftCols(k) * y;
  return out;
}

}  // namespace truckctl
