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

#include "truckctl/scenario_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "truckctl/errors.hpp"
#include "truckctl/path_generator.hpp"

namespace truckctl {
namespace {

[[noreturn]] void Fail(std::string_view key, const std::string& what) {
  throw Error(ErrorCode::kConfigError, "'" + std::string(key) + "': " + what);
}

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseDouble(std::string_view key, std::string_view text) {
  const std::string t = Trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    Fail(key, "expected a number, got '" + t + "'");
  }
  return v;
}

long long ParseInteger(std::string_view key, std::string_view text) {
  const std::string t = Trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    Fail(key, "expected an integer, got '" + t + "'");
  }
  return v;
}

bool ParseBool(std::string_view key, std::string_view text) {
  const std::string t = Trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  Fail(key, "expected true or false, got '" + t + "'");
}

struct Entry {
  std::string name;  // section.key
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, std::string_view)> set;
};

template <typename Member>
Entry Real(std::string name, Member member) {
  Entry e;
  e.name = name;
  e.get = [member](const ScenarioConfig& c) { return FormatDouble(member(c)); };
  e.set = [member, name](ScenarioConfig& c, std::string_view v) {
    member(c) = ParseDouble(name, v);
  };
  return e;
}

template <typename Member>
Entry Int(std::string name, Member member) {
  Entry e;
  e.name = name;
  e.get = [member](const ScenarioConfig& c) {
    return std::to_string(member(c));
  };
  e.set = [member, name](ScenarioConfig& c, std::string_view v) {
    const long long parsed = ParseInteger(name, v);
    using T = std::remove_reference_t<decltype(member(c))>;
    if (parsed < 0 && std::is_unsigned_v<T>) Fail(name, "must be >= 0");
    member(c) = static_cast<T>(parsed);
  };
  return e;
}

template <typename Member>
Entry Text(std::string name, Member member) {
  Entry e;
  e.name = name;
  e.get = [member](const ScenarioConfig& c) { return member(c); };
  e.set = [member](ScenarioConfig& c, std::string_view v) {
    member(c) = Trim(v);
  };
  return e;
}

template <typename Member>
Entry Flag(std::string name, Member member) {
  Entry e;
  e.name = name;
  e.get = [member](const ScenarioConfig& c) {
    return std::string(member(c) ? "true" : "false");
  };
  e.set = [member, name](ScenarioConfig& c, std::string_view v) {
    member(c) = ParseBool(name, v);
  };
  return e;
}

template <typename Member, typename Parse, typename Name>
Entry Choice(std::string name, Member member, Parse parse, Name to_name) {
  Entry e;
  e.name = name;
  e.get = [member, to_name](const ScenarioConfig& c) {
    return std::string(to_name(member(c)));
  };
  e.set = [member, parse, name](ScenarioConfig& c, std::string_view v) {
    try {
      member(c) = parse(Trim(v));
    } catch (const Error& err) {
      Fail(name, err.what());
    }
  };
  return e;
}

#define FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Entry>& Registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> r;
    r.push_back(Text("path.file", FIELD(path_file)));
    r.push_back(Text("path.spec", FIELD(path_spec)));
    r.push_back(Real("path.spacing", FIELD(path_spacing)));

    r.push_back(Real("vehicle.m1", FIELD(longitudinal.m1)));
    r.push_back(Real("vehicle.plant_payload", FIELD(plant_payload)));
    r.push_back(Real("vehicle.planner_payload", FIELD(longitudinal.payload)));
    r.push_back(Real("vehicle.controller_payload", FIELD(controller_payload)));
    r.push_back(Real("vehicle.drag_coefficient", FIELD(longitudinal.drag_coefficient)));
    r.push_back(Real("vehicle.air_density", FIELD(longitudinal.air_density)));
    r.push_back(Real("vehicle.frontal_area", FIELD(longitudinal.frontal_area)));
    r.push_back(Real("vehicle.wheel_radius", FIELD(longitudinal.wheel_radius)));
    r.push_back(Real("vehicle.tire_slip", FIELD(longitudinal.tire_slip)));
    r.push_back(Real("vehicle.omega_idle", FIELD(longitudinal.omega_idle)));
    r.push_back(Real("vehicle.omega_redline", FIELD(longitudinal.omega_redline)));
    r.push_back(Real("vehicle.driveline_efficiency",
                     FIELD(longitudinal.driveline_efficiency)));
    r.push_back(Real("vehicle.gravity", FIELD(longitudinal.gravity)));
    r.push_back(Int("vehicle.gear", FIELD(gear)));
    {
      Entry e;
      e.name = "vehicle.gear_ratios";
      e.get = [](const ScenarioConfig& c) {
        std::string out;
        for (double g : c.longitudinal.gear_ratios) {
          if (!out.empty()) out += ",";
          out += FormatDouble(g);
        }
        return out;
      };
      e.set = [](ScenarioConfig& c, std::string_view v) {
        std::array<double, 12> ratios{};
        std::size_t count = 0;
        std::size_t pos = 0;
        const std::string text(v);
        while (pos <= text.size()) {
          const std::size_t comma = std::min(text.find(',', pos), text.size());
          if (count == ratios.size()) Fail("vehicle.gear_ratios", "expected 12 ratios");
          ratios[count++] = ParseDouble("vehicle.gear_ratios",
                                        std::string_view(text).substr(pos, comma - pos));
          pos = comma + 1;
        }
        if (count != ratios.size()) Fail("vehicle.gear_ratios", "expected 12 ratios");
        c.longitudinal.gear_ratios = ratios;
      };
      r.push_back(e);
    }

    r.push_back(Real("lateral.a1", FIELD(lateral.a1)));
    r.push_back(Real("lateral.b1", FIELD(lateral.b1)));
    r.push_back(Real("lateral.l1", FIELD(lateral.l1)));
    r.push_back(Real("lateral.inertia", FIELD(lateral.inertia)));
    r.push_back(Real("lateral.f1", FIELD(lateral.f1)));
    r.push_back(Real("lateral.f2", FIELD(lateral.f2)));
    r.push_back(Real("lateral.v_floor", FIELD(lateral.v_floor)));
    r.push_back(Choice("lateral.plant_variant", FIELD(plant_variant),
                       ParseLateralVariant, LateralVariantName));
    r.push_back(Choice("lateral.controller_variant", FIELD(controller_variant),
                       ParseLateralVariant, LateralVariantName));

    r.push_back(Real("nmpc.period", FIELD(nmpc_period)));
    r.push_back(Real("nmpc.horizon", FIELD(nmpc.horizon)));
    r.push_back(Int("nmpc.steps", FIELD(nmpc.steps)));
    r.push_back(Int("nmpc.kmax", FIELD(nmpc.kmax)));
    r.push_back(Real("nmpc.zeta", FIELD(nmpc.zeta)));
    r.push_back(Real("nmpc.h_fd", FIELD(nmpc.h_fd)));
    r.push_back(Real("nmpc.u_max", FIELD(nmpc.u_max)));
    r.push_back(Real("nmpc.a_lat_max", FIELD(nmpc.a_lat_max)));
    r.push_back(Real("nmpc.v_ref", FIELD(nmpc.v_ref)));
    r.push_back(Real("nmpc.v_lim", FIELD(nmpc.v_lim)));
    r.push_back(Real("nmpc.gamma", FIELD(nmpc.gamma)));
    r.push_back(Real("nmpc.m_ta", FIELD(nmpc.m_ta)));
    r.push_back(Real("nmpc.delta_s", FIELD(nmpc.delta_s)));
    r.push_back(Real("nmpc.w1", FIELD(nmpc.w1)));
    r.push_back(Real("nmpc.w2", FIELD(nmpc.w2)));
    r.push_back(Real("nmpc.w3", FIELD(nmpc.w3)));
    r.push_back(Real("nmpc.w4", FIELD(nmpc.w4)));
    r.push_back(Real("nmpc.w5", FIELD(nmpc.w5)));
    r.push_back(Real("nmpc.w_slk", FIELD(nmpc.w_slk)));
    r.push_back(Real("nmpc.stop_distance", FIELD(nmpc.stop_distance)));
    r.push_back(Real("nmpc.exp_clamp", FIELD(nmpc.exp_clamp)));
    r.push_back(Int("nmpc.warm_start_iterations", FIELD(nmpc.warm_start_iterations)));

    r.push_back(Real("rlqr.period", FIELD(rlqr_period)));
    r.push_back(Real("rlqr.q_ydot", FIELD(q_diag[0])));
    r.push_back(Real("rlqr.q_psidot", FIELD(q_diag[1])));
    r.push_back(Real("rlqr.q_rho", FIELD(q_diag[2])));
    r.push_back(Real("rlqr.q_theta", FIELD(q_diag[3])));
    r.push_back(Real("rlqr.r", FIELD(r)));
    r.push_back(Real("rlqr.mu", FIELD(mu)));
    r.push_back(Real("rlqr.p0", FIELD(p0)));
    r.push_back(Real("rlqr.steering_limit", FIELD(steering_limit)));
    r.push_back(Choice("rlqr.form", FIELD(form), ParseRlqrForm, RlqrFormName));
    r.push_back(Choice("rlqr.uncertainty", FIELD(uncertainty),
                       ParseUncertaintySource, UncertaintySourceName));
    r.push_back(Real("rlqr.uncertainty_payload_min", FIELD(uncertainty_payload_min)));
    r.push_back(Real("rlqr.uncertainty_payload_max", FIELD(uncertainty_payload_max)));
    r.push_back(Real("rlqr.uncertainty_speed", FIELD(uncertainty_speed)));
    r.push_back(Flag("rlqr.zero_unmeasured", FIELD(zero_unmeasured)));

    r.push_back(Real("sim.plant_step", FIELD(plant_step)));
    r.push_back(Real("sim.log_period", FIELD(log_period)));
    r.push_back(Real("sim.duration_cap", FIELD(duration_cap)));
    r.push_back(Real("sim.goal_tolerance", FIELD(goal_tolerance)));
    r.push_back(Real("sim.steering_rate_limit", FIELD(steering_rate_limit)));
    r.push_back(Real("sim.projection_window", FIELD(projection_window)));
    r.push_back(Real("sim.initial_speed", FIELD(initial_speed)));
    r.push_back(Real("sim.initial_offset", FIELD(initial_offset)));
    r.push_back(Real("sim.initial_offset_std", FIELD(initial_offset_std)));
    r.push_back(Int("sim.seed", FIELD(seed)));

    r.push_back(Real("pi.kp", FIELD(pi.kp)));
    r.push_back(Real("pi.ki", FIELD(pi.ki)));
    r.push_back(Real("pi.k_b", FIELD(pi.k_b)));
    r.push_back(Flag("pi.feedforward", FIELD(pi.feedforward)));
    return r;
  }();
  return entries;
}

#undef FIELD

const Entry& Find(std::string_view name) {
  for (const Entry& e : Registry()) {
    if (e.name == name) return e;
  }
  Fail(name, "unknown configuration key");
}

}  // namespace

std::string_view UncertaintySourceName(UncertaintySource source) {
  switch (source) {
    case UncertaintySource::kFieldExperiment:
      return "field-experiment";
    case UncertaintySource::kComputed:
      return "computed";
    case UncertaintySource::kNone:
      return "none";
  }
  return "none";
}

UncertaintySource ParseUncertaintySource(std::string_view name) {
  if (name == "field-experiment") return UncertaintySource::kFieldExperiment;
  if (name == "computed") return UncertaintySource::kComputed;
  if (name == "none") return UncertaintySource::kNone;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown uncertainty source '" + std::string(name) + "'");
}

RlqrConfig ScenarioConfig::BuildRlqrConfig() const {
  RlqrConfig out;
  out.Q = q_diag.asDiagonal();
  out.R = Eigen::MatrixXd::Constant(1, 1, r);
  out.P0 = p0 * Eigen::MatrixXd::Identity(4, 4);
  out.mu = mu;
  out.steering_limit = steering_limit;
  out.form = form;
  return out;
}

void ScenarioConfig::Validate() const {
  auto require = [](bool ok, std::string_view key, const char* what) {
    if (!ok) Fail(key, what);
  };
  require(path_spacing > 0.0, "path.spacing", "must be positive");
  require(plant_payload >= 0.0, "vehicle.plant_payload", "must be >= 0");
  require(controller_payload >= 0.0, "vehicle.controller_payload", "must be >= 0");
  require(gear >= 1 && gear <= 12, "vehicle.gear", "must be in 1..12");
  require(plant_step > 0.0, "sim.plant_step", "must be positive");
  require(nmpc_period > 0.0, "nmpc.period", "must be positive");
  require(rlqr_period > 0.0, "rlqr.period", "must be positive");
  require(plant_step <= std::min(nmpc_period, rlqr_period) / 5.0 + 1e-12,
          "sim.plant_step", "must be at most a fifth of the controller periods");
  require(log_period >= plant_step, "sim.log_period",
          "must be at least the plant step");
  require(duration_cap > 0.0, "sim.duration_cap", "must be positive");
  require(goal_tolerance >= 0.0, "sim.goal_tolerance", "must be >= 0");
  require(steering_rate_limit > 0.0, "sim.steering_rate_limit", "must be positive");
  require(projection_window > 0.0, "sim.projection_window", "must be positive");
  require(initial_speed >= 0.0, "sim.initial_speed", "must be >= 0");
  require(initial_offset_std >= 0.0, "sim.initial_offset_std", "must be >= 0");
  require(pi.kp > 0.0 && pi.ki >= 0.0 && pi.k_b > 0.0, "pi.kp",
          "PI gains must be positive");
  require(uncertainty_payload_min <= uncertainty_payload_max,
          "rlqr.uncertainty_payload_min", "must not exceed the maximum");
  auto wrap = [](std::string_view key, auto&& fn) {
    try {
      fn();
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kConfigError) throw;
      Fail(key, err.what());
    }
  };
  wrap("nmpc", [&] { nmpc.Validate(); });
  wrap("vehicle", [&] { longitudinal.Validate(); });
  wrap("lateral", [&] { lateral.Validate(); });
  wrap("rlqr", [&] { BuildRlqrConfig().Validate(); });
}

ScenarioConfig ParseScenarioConfig(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& err) {
    throw Error(ErrorCode::kConfigError,
                "line " + std::to_string(err.line()) + ": " + err.message());
  }
  ScenarioConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      Fail(section, "keys must live inside a [section]");
    }
    bool known_section = false;
    for (const Entry& e : Registry()) {
      known_section = known_section || e.name.rfind(section + ".", 0) == 0;
    }
    if (!known_section) Fail(section, "unknown configuration section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      Find(name).set(cfg, value.data());
    }
  }
  return cfg;
}

ScenarioConfig LoadScenarioConfig(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + file.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  ScenarioConfig cfg = ParseScenarioConfig(buffer.str());
  cfg.base_dir = file.parent_path();
  return cfg;
}

void ApplyOverride(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    Fail(assignment, "override must have the form section.key=value");
  }
  const std::string key = Trim(assignment.substr(0, eq));
  Find(key).set(cfg, assignment.substr(eq + 1));
}

std::vector<std::string> ScenarioKeys() {
  std::vector<std::string> keys;
  for (const Entry& e : Registry()) keys.push_back(e.name);
  return keys;
}

std::string DumpScenarioConfig(const ScenarioConfig& cfg) {
  std::string out;
  for (const Entry& e : Registry()) {
    out += e.name + " = " + e.get(cfg) + "\n";
  }
  return out;
}

PathMap LoadScenarioPath(const ScenarioConfig& cfg) {
  auto resolve = [&](const std::string& name) {
    std::filesystem::path p(name);
    if (p.is_relative() && !cfg.base_dir.empty()) p = cfg.base_dir / p;
    return p;
  };
  if (cfg.path_file.empty() == cfg.path_spec.empty()) {
    Fail("path.file", "exactly one of path.file and path.spec must be set");
  }
  std::vector<Waypoint> waypoints;
  if (!cfg.path_spec.empty()) {
    waypoints = GeneratePath(ReadPathSpec(resolve(cfg.path_spec)));
  } else {
    waypoints = ReadWaypointFile(resolve(cfg.path_file));
  }
  return PathMap::Build(waypoints, cfg.path_spacing);
}

}  // namespace truckctl
