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

#include "truckctl/run_summary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "truckctl/errors.hpp"

namespace truckctl {
namespace {

std::string Num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

RunSummary Summarize(std::span<const LogRow> rows, bool completed,
                     const std::string& abort_reason, double wall_time) {
  RunSummary s;
  s.rows = rows.size();
  s.completed = completed;
  s.abort_reason = abort_reason;
  s.wall_time = wall_time;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LogRow& r = rows[i];
    s.max_abs_rho = std::max(s.max_abs_rho, std::abs(r.rho));
    sum_sq += r.rho * r.rho;
    s.max_abs_theta = std::max(s.max_abs_theta, std::abs(r.theta));
    s.max_abs_u = std::max(s.max_abs_u, std::abs(r.u_cmd));
    s.max_v = std::max(s.max_v, r.v);
    s.max_lateral_accel = std::max(s.max_lateral_accel, r.v * r.v * r.f_curv);
    if (i > 0 && r.t > rows[i - 1].t) {
      const double rate =
          std::abs(r.alpha - rows[i - 1].alpha) / (r.t - rows[i - 1].t);
      s.max_abs_alpha_rate = std::max(s.max_abs_alpha_rate, rate);
    }
    s.duration = r.t;
  }
  if (!rows.empty()) s.rms_rho = std::sqrt(sum_sq / static_cast<double>(rows.size()));
  return s;
}

RunSummary Summarize(const SimLog& log) {
  return Summarize(log.rows, log.completed, log.abort_reason, log.wall_time);
}

std::string FormatSummary(const RunSummary& s) {
  std::string out;
  out += "completed = " + std::string(s.completed ? "true" : "false") + "\n";
  out += "abort_reason = " + s.abort_reason + "\n";
  out += "rows = " + std::to_string(s.rows) + "\n";
  out += "duration_s = " + Num(s.duration) + "\n";
  out += "max_abs_rho_m = " + Num(s.max_abs_rho) + "\n";
  out += "rms_rho_m = " + Num(s.rms_rho) + "\n";
  out += "max_abs_theta_rad = " + Num(s.max_abs_theta) + "\n";
  out += "max_abs_alpha_rate_rad_s = " + Num(s.max_abs_alpha_rate) + "\n";
  out += "max_abs_u_n_kg = " + Num(s.max_abs_u) + "\n";
  out += "max_v_m_s = " + Num(s.max_v) + "\n";
  out += "max_lateral_accel_m_s2 = " + Num(s.max_lateral_accel) + "\n";
  out += "wall_time_s = " + Num(s.wall_time) + "\n";
  return out;
}

void WriteSummary(const std::filesystem::path& file, const RunSummary& summary) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
  out << FormatSummary(summary);
}

}  // namespace truckctl
