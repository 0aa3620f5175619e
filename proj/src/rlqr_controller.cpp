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

#include "truckctl/rlqr_controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "truckctl/errors.hpp"

namespace truckctl {
namespace {

using Eigen::MatrixXd;

int NumericRank(const MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double tol =
      sv(0) * 1e-12 * static_cast<double>(std::max(m.rows(), m.cols()));
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return rank;
}

void RequireSpd(const MatrixXd& m, const char* name, bool allow_semidefinite) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be a non-empty square matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (allow_semidefinite ? min_eig < -1e-12 * scale : min_eig <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be positive " +
                    (allow_semidefinite ? "semidefinite" : "definite"));
  }
}

void CheckShapes(const MatrixXd& F, const MatrixXd& G,
                 const UncertaintyModel& unc, const RlqrConfig& cfg,
                 const MatrixXd& P) {
  const Eigen::Index n = F.rows();
  const Eigen::Index m = G.cols();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (F.cols() != n || G.rows() != n) fail("F must be n x n and G n x m");
  if (P.rows() != n || P.cols() != n) fail("P must be n x n");
  if (cfg.Q.rows() != n || cfg.R.rows() != m) fail("Q, R sizes mismatch F, G");
  if (unc.H.rows() != n) fail("H must have n rows");
  if (unc.E_F.cols() != n || unc.E_G.cols() != m ||
      unc.E_F.rows() != unc.E_G.rows()) {
    fail("E_F must be l x n and E_G l x m");
  }
  if (!F.allFinite() || !G.allFinite() || !P.allFinite()) {
    throw Error(ErrorCode::kSingularFramework, "non-finite model or weighting");
  }
}

RlqrGain Finish(MatrixXd L, MatrixXd K, MatrixXd P_next) {
  if (!L.allFinite() || !K.allFinite() || !P_next.allFinite()) {
    throw Error(ErrorCode::kSingularFramework,
                "regulator produced non-finite values");
  }
  RlqrGain out;
  out.L = std::move(L);
  out.K = std::move(K);
  out.P_next = 0.5 * (P_next + P_next.transpose());
  return out;
}

RlqrGain PenalizedStep(const MatrixXd& F, const MatrixXd& G,
                       const UncertaintyModel& unc, const RlqrConfig& cfg,
                       const MatrixXd& P) {
  const Eigen::Index n = F.rows();
  const Eigen::Index l = unc.E_F.rows();
  const Eigen::Index k = unc.H.cols();
  const double mu = cfg.mu;

  const MatrixXd HtH = unc.H.transpose() * unc.H;
  const double h_norm = k > 0 ? (mu * HtH).operatorNorm() : 0.0;
  const double lambda = h_norm > 0.0 ? (1.0 + 1e-3) * h_norm : mu;

  // Minimizing over x_{k+1} first leaves the weight
  // P_tilde = (P^-1 + Sigma_11)^-1 = (I + P Sigma_11)^-1 P on F x + G u,
  // with Sigma_11 = mu^-1 I - lambda^-1 H H'.
  MatrixXd sigma_11 = MatrixXd::Identity(n, n) / mu;
  if (k > 0 && h_norm > 0.0) {
    sigma_11 -= unc.H * unc.H.transpose() / lambda;
  }
  Eigen::LLT<MatrixXd> sigma_llt(sigma_11);
  if (sigma_llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularFramework,
                "Sigma is not positive definite");
  }
  const Eigen::PartialPivLU<MatrixXd> shrink(MatrixXd::Identity(n, n) +
                                             P * sigma_11);
  MatrixXd p_tilde = shrink.solve(P);
  p_tilde = 0.5 * (p_tilde + p_tilde.transpose());

  MatrixXd gain_matrix = G.transpose() * p_tilde * G + cfg.R;
  MatrixXd gain_rhs = G.transpose() * p_tilde * F;
  if (l > 0) {
    gain_matrix += lambda * unc.E_G.transpose() * unc.E_G;
    gain_rhs += lambda * unc.E_G.transpose() * unc.E_F;
  }
  gain_matrix = 0.5 * (gain_matrix + gain_matrix.transpose());
  Eigen::LLT<MatrixXd> llt(gain_matrix);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularFramework,
                "input weight is not positive definite");
  }
  MatrixXd K = -llt.solve(gain_rhs);
  const MatrixXd closed = F + G * K;
  MatrixXd L = Eigen::PartialPivLU<MatrixXd>(MatrixXd::Identity(n, n) +
                                             sigma_11 * P)
                   .solve(closed);

  MatrixXd P_next = closed.transpose() * p_tilde * closed +
                    K.transpose() * cfg.R * K + cfg.Q;
  if (l > 0) {
    const MatrixXd robust = unc.E_F + unc.E_G * K;
    P_next += lambda * robust.transpose() * robust;
  }
  return Finish(std::move(L), std::move(K), std::move(P_next));
}

RlqrGain LimitStep(const MatrixXd& F, const MatrixXd& G,
                   const UncertaintyModel& unc, const RlqrConfig& cfg,
                   const MatrixXd& P) {
  const Eigen::Index n = F.rows();
  const Eigen::Index m = G.cols();

  // The hard constraint E_F + E_G K = 0 keeps only the independent rows of
  // [E_F E_G]; an all-zero uncertainty leaves no constraint at all.
  MatrixXd e_stack(unc.E_F.rows(), n + m);
  e_stack << unc.E_F, unc.E_G;
  MatrixXd E_F(0, n), E_G(0, m);
  if (e_stack.rows() > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(e_stack, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = 1e-12 * std::max<double>(e_stack.rows(), n + m) *
                       (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol) ++rank;
    const MatrixXd reduced = sv.head(rank).asDiagonal() *
                             svd.matrixV().leftCols(rank).transpose();
    E_F = reduced.leftCols(n);
    E_G = reduced.rightCols(m);
  }
  const Eigen::Index l = E_F.rows();

  auto inverse_spd = [](const MatrixXd& x, const char* name) {
    Eigen::LLT<MatrixXd> llt(x);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularFramework,
                  std::string(name) + " is not positive definite");
    }
    return MatrixXd(llt.solve(MatrixXd::Identity(x.rows(), x.cols())));
  };

  // Block offsets: [x_{k+1}, u, Q-row, n-constraint, l-constraint, L, K].
  const Eigen::Index o1 = 0, o2 = n, o3 = n + m, o4 = 2 * n + m,
                     o5 = 3 * n + m, o6 = 3 * n + m + l, o7 = 4 * n + m + l;
  const Eigen::Index size = o7 + m;
  MatrixXd big = MatrixXd::Zero(size, size);
  big.block(o1, o1, n, n) = inverse_spd(P, "P");
  big.block(o1, o6, n, n).setIdentity();
  big.block(o2, o2, m, m) = inverse_spd(cfg.R, "R");
  big.block(o2, o7, m, m).setIdentity();
  big.block(o3, o3, n, n) = inverse_spd(cfg.Q, "Q");
  big.block(o4, o6, n, n).setIdentity();
  big.block(o4, o7, n, m) = -G;
  big.block(o5, o7, l, m) = -E_G;
  big.block(o6, o1, n, n).setIdentity();
  big.block(o6, o4, n, n).setIdentity();
  big.block(o7, o2, m, m).setIdentity();
  big.block(o7, o4, m, n) = -G.transpose();
  big.block(o7, o5, m, l) = -E_G.transpose();

  MatrixXd rhs = MatrixXd::Zero(size, n);
  rhs.block(o3, 0, n, n) = -MatrixXd::Identity(n, n);
  rhs.block(o4, 0, n, n) = F;
  rhs.block(o5, 0, l, n) = E_F;

  Eigen::FullPivLU<MatrixXd> lu(big);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kSingularFramework,
                "limit-form block matrix is singular");
  }
  const MatrixXd z = lu.solve(rhs);
  MatrixXd L = z.block(o6, 0, n, n);
  MatrixXd K = z.block(o7, 0, m, n);
  MatrixXd P_next = -z.block(o3, 0, n, n) + F.transpose() * z.block(o4, 0, n, n) +
                    E_F.transpose() * z.block(o5, 0, l, n);
  return Finish(std::move(L), std::move(K), std::move(P_next));
}

}  // namespace

bool UncertaintyModel::RankConditionHolds() const {
  MatrixXd joined(E_F.rows(), E_F.cols() + E_G.cols());
  joined << E_F, E_G;
  return NumericRank(joined) == NumericRank(E_G);
}

UncertaintyModel UncertaintyModel::None(int states, int inputs) {
  UncertaintyModel u;
  u.H = MatrixXd::Zero(states, 1);
  u.E_F = MatrixXd::Zero(1, states);
  u.E_G = MatrixXd::Zero(1, inputs);
  return u;
}

UncertaintyModel UncertaintyModel::FieldExperiment() {
  UncertaintyModel u;
  u.H = MatrixXd::Ones(4, 1);
  u.E_F.resize(1, 4);
  u.E_F << -0.000405618009134, 0.004949413574869, 0.000000034165611,
      0.000024747067874;
  u.E_G.resize(1, 1);
  u.E_G << -0.00114326083475285;
  return u;
}

UncertaintyModel UncertaintyMatrices(const LateralParams& p, double mp_min,
                                     double mp_max, double v, double Ts,
                                     LateralVariant variant) {
  if (!(mp_min >= 0.0) || !(mp_max >= 0.0) || mp_min > mp_max) {
    throw Error(ErrorCode::kInvalidArgument,
                "payload range must satisfy 0 <= mp_min <= mp_max");
  }
  LateralParams lo = p;
  lo.payload = mp_min;
  LateralParams hi = p;
  hi.payload = mp_max;
  const LateralSystem sys_lo = Discretize(ContinuousMatrices(lo, v, variant), Ts);
  const LateralSystem sys_hi = Discretize(ContinuousMatrices(hi, v, variant), Ts);
  const Eigen::Matrix4d gamma_f = sys_lo.F_d - sys_hi.F_d;
  const Eigen::Vector4d gamma_g = sys_lo.G_d - sys_hi.G_d;

  UncertaintyModel u;
  u.H = MatrixXd::Ones(4, 1);
  const Eigen::Vector4d weights(1.0, 1.0, 1.0, 0.1);
  u.E_F = gamma_f.col(1).cwiseProduct(weights).transpose();
  Eigen::Index arg = 0;
  gamma_g.cwiseAbs().maxCoeff(&arg);
  u.E_G = MatrixXd::Constant(1, 1, 0.1 * gamma_g(arg));
  u.degenerate = mp_min == mp_max;
  return u;
}

std::string_view RlqrFormName(RlqrForm form) {
  return form == RlqrForm::kPenalized ? "penalized" : "limit";
}

RlqrForm ParseRlqrForm(std::string_view name) {
  if (name == "penalized") return RlqrForm::kPenalized;
  if (name == "limit") return RlqrForm::kLimit;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown regulator form '" + std::string(name) + "'");
}

RlqrConfig RlqrConfig::Default() {
  RlqrConfig cfg;
  cfg.Q = Eigen::Vector4d(0.1, 0.1, 100.0, 15.0).asDiagonal();
  cfg.R = MatrixXd::Constant(1, 1, 10000.0);
  cfg.P0 = MatrixXd::Identity(4, 4);
  return cfg;
}

void RlqrConfig::Validate() const {
  RequireSpd(Q, "Q", false);
  RequireSpd(R, "R", false);
  RequireSpd(P0, "P0", false);
  if (P0.rows() != Q.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "P0 and Q sizes differ");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::kInvalidArgument, "mu must be positive and finite");
  }
  if (!(steering_limit > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "steering limit must be positive");
  }
}

RlqrGain RlqrStep(const MatrixXd& F, const MatrixXd& G,
                  const UncertaintyModel& unc, const RlqrConfig& cfg,
                  const MatrixXd& P) {
  CheckShapes(F, G, unc, cfg, P);
  return cfg.form == RlqrForm::kPenalized ? PenalizedStep(F, G, unc, cfg, P)
                                          : LimitStep(F, G, unc, cfg, P);
}

double RlqrControl(const Eigen::Vector4d& x, const RlqrGain& gain,
                   const RlqrConfig& cfg) {
  if (gain.K.rows() != 1 || gain.K.cols() != 4) {
    throw Error(ErrorCode::kInvalidArgument, "steering gain must be 1 x 4");
  }
  const double alpha = (gain.K * x)(0);
  return std::clamp(alpha, -cfg.steering_limit, cfg.steering_limit);
}

FiniteHorizonResult RlqrFiniteHorizon(
    std::span<const std::pair<MatrixXd, MatrixXd>> models,
    const UncertaintyModel& unc, const RlqrConfig& cfg,
    const Eigen::VectorXd& x0) {
  if (models.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must have N >= 1");
  }
  const std::size_t N = models.size();
  FiniteHorizonResult out;
  out.L.resize(N);
  out.K.resize(N);
  out.P.resize(N + 1);
  out.P[N] = cfg.P0;
  for (std::size_t k = N; k-- > 0;) {
    RlqrGain g = RlqrStep(models[k].first, models[k].second, unc, cfg,
                          out.P[k + 1]);
    out.L[k] = std::move(g.L);
    out.K[k] = std::move(g.K);
    out.P[k] = std::move(g.P_next);
  }
  out.x.reserve(N + 1);
  out.u.reserve(N);
  out.x.push_back(x0);
  for (std::size_t k = 0; k < N; ++k) {
    out.u.push_back(out.K[k] * out.x[k]);
    out.x.push_back(out.L[k] * out.x[k]);
  }
  out.cost = x0.dot(out.P[0] * x0);
  return out;
}

LqrResult LqrOracle(const MatrixXd& F, const MatrixXd& G, const MatrixXd& Q,
                    const MatrixXd& R, const MatrixXd& P0, int iterations) {
  LqrResult out;
  out.P = P0;
  out.K = MatrixXd::Zero(G.cols(), F.rows());
  for (int i = 0; i < iterations; ++i) {
    const MatrixXd S = R + G.transpose() * out.P * G;
    out.K = -S.ldlt().solve(G.transpose() * out.P * F);
    const MatrixXd closed = F + G * out.K;
    MatrixXd next = closed.transpose() * out.P * closed +
                    out.K.transpose() * R * out.K + Q;
    out.P = 0.5 * (next + next.transpose());
  }
  return out;
}

RlqrController::RlqrController(RlqrConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.Validate();
  P_ = cfg_.P0;
  gain_.L = MatrixXd::Zero(P_.rows(), P_.cols());
  gain_.K = MatrixXd::Zero(cfg_.R.rows(), P_.cols());
  gain_.P_next = P_;
}

const RlqrGain& RlqrController::Update(const MatrixXd& F_d, const MatrixXd& G_d,
                                       const UncertaintyModel& unc) {
  gain_ = RlqrStep(F_d, G_d, unc, cfg_, P_);
  P_ = gain_.P_next;
  return gain_;
}

double RlqrController::Control(const Eigen::Vector4d& x) const {
  return RlqrControl(x, gain_, cfg_);
}

}  // namespace truckctl
