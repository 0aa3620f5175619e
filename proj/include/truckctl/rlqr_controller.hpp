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

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "truckctl/lateral_model.hpp"

namespace truckctl {

/// Norm-bounded structured uncertainty [dF dG] = H Delta [E_F E_G] with
/// ||Delta|| <= 1.
struct UncertaintyModel {
  Eigen::MatrixXd H;    // n x k
  Eigen::MatrixXd E_F;  // l x n
  Eigen::MatrixXd E_G;  // l x m
  // Set when the payload range is empty and E_F, E_G are identically zero.
  bool degenerate = false;

  /// rank([E_F E_G]) == rank(E_G), the sufficient condition for the
  /// large-penalty limit E_F + E_G K = 0. Reported, not enforced.
  bool RankConditionHolds() const;

  /// No uncertainty: H, E_F, E_G all zero.
  static UncertaintyModel None(int states, int inputs);

  /// The H, E_F, E_G used in the field experiment with the loaded truck
  /// (scalar steering input).
  static UncertaintyModel FieldExperiment();
};

/// Construction from the spread of the discretised lateral
/// model between two payloads: E_F weights the second column of
/// F(mp_min) - F(mp_max) by [1, 1, 1, 0.1] keeping signs, E_G is 0.1 times
/// the largest-magnitude entry of G(mp_min) - G(mp_max), H = [1 1 1 1]^T.
UncertaintyModel UncertaintyMatrices(const LateralParams& p, double mp_min,
                                     double mp_max, double v, double Ts,
                                     LateralVariant variant);

enum class RlqrForm {
  // Penalised framework with Sigma(mu, lambda); mu is honoured.
  kPenalized,
  // Sigma = 0 block matrix (the mu -> infinity form).
  kLimit,
};

std::string_view RlqrFormName(RlqrForm form);
RlqrForm ParseRlqrForm(std::string_view name);

struct RlqrConfig {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd P0;
  double mu = 1e9;
  double steering_limit = 0.3491;  // rad
  RlqrForm form = RlqrForm::kPenalized;

  /// Field-experiment weights with a scalar steering input:
  /// Q = diag(0.1, 0.1, 100, 15), R = 10000, P0 = I.
  static RlqrConfig Default();
  void Validate() const;
};

struct RlqrGain {
  Eigen::MatrixXd L;       // closed loop, n x n
  Eigen::MatrixXd K;       // m x n
  Eigen::MatrixXd P_next;  // n x n, symmetrised
};

/// One step of the robust regulator recursion from the weighting `P`.
///
/// The penalised form eliminates the Sigma block of the saddle-point system
/// and solves the remaining (n + m) normal equations by Cholesky; the limit
/// form solves the full block system by LU with full pivoting. P_next is
/// evaluated as
///   L' P L + K' R K + Q + r' Sigma^-1 r,   r = I L - B K - A,
/// which avoids the cancellation of the quadratic-form expression at large mu.
///
/// Throws Error{kSingularFramework} if the system cannot be solved.
RlqrGain RlqrStep(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                  const UncertaintyModel& unc, const RlqrConfig& cfg,
                  const Eigen::MatrixXd& P);

/// alpha = clamp(K x, +-steering_limit). Callers zero unmeasured states.
double RlqrControl(const Eigen::Vector4d& x, const RlqrGain& gain,
                   const RlqrConfig& cfg);

struct FiniteHorizonResult {
  std::vector<Eigen::MatrixXd> L;  // L_0 .. L_{N-1}
  std::vector<Eigen::MatrixXd> K;  // K_0 .. K_{N-1}
  std::vector<Eigen::MatrixXd> P;  // P_0 .. P_N
  std::vector<Eigen::VectorXd> x;  // x*_0 .. x*_N
  std::vector<Eigen::VectorXd> u;  // u*_0 .. u*_{N-1}
  double cost = 0.0;               // x0' P_0 x0
};

/// Backward-forward regulator over a known horizon: the backward pass starts
/// from P_N = cfg.P0, the forward pass applies x*_{k+1} = L_k x*_k.
FiniteHorizonResult RlqrFiniteHorizon(
    std::span<const std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> models,
    const UncertaintyModel& unc, const RlqrConfig& cfg,
    const Eigen::VectorXd& x0);

struct LqrResult {
  Eigen::MatrixXd K;
  Eigen::MatrixXd P;
};

/// Plain discrete Riccati recursion, `iterations` steps from P0. K is the
/// gain of the last step (u = K x).
LqrResult LqrOracle(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                    const Eigen::MatrixXd& P0, int iterations);

/// Warm-started regulator for the only-forward loop: one recursion step per
/// controller tick, reusing the previous P.
class RlqrController {
 public:
  explicit RlqrController(RlqrConfig cfg);

  /// Advances P by one step against (F_d, G_d) and returns the new gain.
  const RlqrGain& Update(const Eigen::MatrixXd& F_d, const Eigen::MatrixXd& G_d,
                         const UncertaintyModel& unc);

  double Control(const Eigen::Vector4d& x) const;

  const RlqrGain& gain() const { return gain_; }
  const Eigen::MatrixXd& P() const { return P_; }
  const RlqrConfig& config() const { return cfg_; }

 private:
  RlqrConfig cfg_;
  Eigen::MatrixXd P_;
  RlqrGain gain_;
};

}  // namespace truckctl
