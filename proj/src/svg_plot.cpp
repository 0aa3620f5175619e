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

#include "truckctl/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "truckctl/errors.hpp"

namespace truckctl {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Rounded tick step giving roughly five intervals over [lo, hi].
double TickStep(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double nice = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

void Expand(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 0.1, 1.0);
    lo -= pad;
    hi += pad;
  }
}

}  // namespace

std::string RenderSvg(const Plot& plot) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const PlotSeries& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = x_hi = y_lo = y_hi = 0.0;
  Expand(x_lo, x_hi);
  Expand(y_lo, y_hi);
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Fmt(kWidth) +
         "\" height=\"" + Fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + Fmt(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
         Escape(plot.title) + "</text>\n";
  svg += "<rect x=\"" + Fmt(kLeft) + "\" y=\"" + Fmt(kTop) + "\" width=\"" + Fmt(pw) +
         "\" height=\"" + Fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = TickStep(x_lo, x_hi);
  for (double v = std::ceil(x_lo / xs) * xs; v <= x_hi + 1e-9 * xs; v += xs) {
    const double X = px(v);
    svg += "<line x1=\"" + Fmt(X) + "\" y1=\"" + Fmt(kTop + ph) + "\" x2=\"" + Fmt(X) +
           "\" y2=\"" + Fmt(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + Fmt(X) + "\" y=\"" + Fmt(kTop + ph + 18) +
           "\" text-anchor=\"middle\">" + Fmt(std::abs(v) < 1e-12 * xs ? 0.0 : v) + "</text>\n";
  }
  const double ys = TickStep(y_lo, y_hi);
  for (double v = std::ceil(y_lo / ys) * ys; v <= y_hi + 1e-9 * ys; v += ys) {
    const double Y = py(v);
    svg += "<line x1=\"" + Fmt(kLeft - 5) + "\" y1=\"" + Fmt(Y) + "\" x2=\"" + Fmt(kLeft) +
           "\" y2=\"" + Fmt(Y) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + Fmt(kLeft) + "\" y1=\"" + Fmt(Y) + "\" x2=\"" + Fmt(kLeft + pw) +
           "\" y2=\"" + Fmt(Y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + Fmt(kLeft - 8) + "\" y=\"" + Fmt(Y + 4) +
           "\" text-anchor=\"end\">" + Fmt(std::abs(v) < 1e-12 * ys ? 0.0 : v) + "</text>\n";
  }
  svg += "<text x=\"" + Fmt(kLeft + pw / 2) + "\" y=\"" + Fmt(kHeight - 15) +
         "\" text-anchor=\"middle\">" + Escape(plot.x_label) + "</text>\n";
  svg += "<text transform=\"translate(20," + Fmt(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + Escape(plot.y_label) + "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const PlotSeries& s = plot.series[k];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      points += Fmt(px(s.x[i])) + "," + Fmt(py(s.y[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(k);
    svg += "<line x1=\"" + Fmt(kLeft + pw + 12) + "\" y1=\"" + Fmt(ly - 4) + "\" x2=\"" +
           Fmt(kLeft + pw + 32) + "\" y2=\"" + Fmt(ly - 4) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + Fmt(kLeft + pw + 38) + "\" y=\"" + Fmt(ly) + "\">" +
           Escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> WriteRunPlots(
    const std::filesystem::path& dir, std::span<const LogRow> rows) {
  auto column = [&](double LogRow::*field) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const LogRow& r : rows) out.push_back(r.*field);
    return out;
  };
  const std::vector<double> t = column(&LogRow::t);
  std::vector<double> throttle_frac;
  for (const LogRow& r : rows) throttle_frac.push_back(r.throttle / 100.0);

  std::vector<std::pair<std::string, Plot>> plots;
  plots.push_back({"altitude.svg",
                   {"Altitude profile", "s [m]", "altitude [m]",
                    {{"altitude", column(&LogRow::s_est), column(&LogRow::altitude)}}}});
  plots.push_back({"throttle_brake.svg",
                   {"Throttle and brake", "t [s]", "fraction [-]",
                    {{"throttle", t, throttle_frac, "#2ca02c"},
                     {"brake", t, column(&LogRow::brake), "#d62728"}}}});
  plots.push_back({"velocity.svg",
                   {"Velocity", "t [s]", "v [m/s]",
                    {{"v", t, column(&LogRow::v)},
                     {"planner ref", t, column(&LogRow::v_ref_cmd), "#ff7f0e"}}}});
  plots.push_back({"steering.svg",
                   {"Steering angle", "t [s]", "alpha [rad]",
                    {{"alpha", t, column(&LogRow::alpha)},
                     {"command", t, column(&LogRow::alpha_cmd), "#ff7f0e"}}}});
  plots.push_back({"heading_error.svg",
                   {"Heading error", "t [s]", "theta [rad]",
                    {{"theta", t, column(&LogRow::theta)}}}});
  plots.push_back({"lateral_displacement.svg",
                   {"Lateral displacement", "t [s]", "rho [m]",
                    {{"rho", t, column(&LogRow::rho)}}}});

  std::vector<std::filesystem::path> written;
  for (const auto& [name, plot] : plots) {
    const std::filesystem::path file = dir / name;
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
    out << RenderSvg(plot);
    written.push_back(file);
  }
  return written;
}

}  // namespace truckctl
