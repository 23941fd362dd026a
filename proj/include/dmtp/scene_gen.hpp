// Copyright 2026 The DMTP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DMTP_SCENE_GEN_HPP_
#define DMTP_SCENE_GEN_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dmtp/rng.hpp"
#include "dmtp/scene.hpp"

namespace dmtp
{

struct GeneratorConfig
{
  int t_obs = 10;
  int t_fut = 80;
  int num_agents = 1;     // predicted agents
  int num_neighbors = 2;  // additional context agents
  double lane_spacing = 3.5;
  double lane_length = 200.0;
  double speed_min = 5.0;
  double speed_max = 15.0;

  bool operator==(const GeneratorConfig &) const = default;
};

inline void validate_generator_config(const GeneratorConfig & c)
{
  if (c.num_agents < 1) {
    throw ConfigError("generator config: num_agents must be >= 1");
  }
  if (c.num_neighbors < 0) {
    throw ConfigError("generator config: num_neighbors must be >= 0");
  }
  if (c.lane_length <= 0.0 || c.lane_spacing <= 0.0) {
    throw ConfigError("generator config: degenerate lane geometry");
  }
  if (c.t_obs < 1 || c.t_fut < 0) {
    throw ConfigError("generator config: need t_obs >= 1 and t_fut >= 0");
  }
  if (!(c.speed_min > 0.0) || c.speed_min > c.speed_max || c.speed_max > 0.9 * kMaxSpeed) {
    throw ConfigError("generator config: speed range invalid");
  }
}

namespace gen_detail
{

constexpr double kPi = 3.14159265358979323846;

/// Piecewise-linear path with arc-length lookup.
class Path
{
public:
  void add_point(double x, double y)
  {
    if (!pts_.empty()) {
      const double d = std::hypot(x - pts_.back()[0], y - pts_.back()[1]);
      if (d < 1e-9) {
        return;
      }
      cum_.push_back(cum_.back() + d);
    } else {
      cum_.push_back(0.0);
    }
    pts_.push_back({x, y});
  }

  void add_line(double x0, double y0, double x1, double y1, double ds = 0.5)
  {
    const double len = std::hypot(x1 - x0, y1 - y0);
    const int n = std::max(1, static_cast<int>(std::ceil(len / ds)));
    for (int i = 0; i <= n; ++i) {
      const double f = static_cast<double>(i) / n;
      add_point(x0 + f * (x1 - x0), y0 + f * (y1 - y0));
    }
  }

  /// Circular arc around (cx, cy) from angle a0 to a1 (radians, signed
  /// sweep).
  void add_arc(double cx, double cy, double radius, double a0, double a1, double ds = 0.3)
  {
    const double sweep = a1 - a0;
    const int n = std::max(2, static_cast<int>(std::ceil(std::abs(sweep) * radius / ds)));
    for (int i = 0; i <= n; ++i) {
      const double a = a0 + sweep * static_cast<double>(i) / n;
      add_point(cx + radius * std::cos(a), cy + radius * std::sin(a));
    }
  }

  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }

  struct Pose
  {
    double x;
    double y;
    double heading;
  };

  Pose pose_at(double s) const
  {
    if (pts_.size() < 2) {
      return {pts_.empty() ? 0.0 : pts_[0][0], pts_.empty() ? 0.0 : pts_[0][1], 0.0};
    }
    s = std::clamp(s, 0.0, length());
    std::size_t hi = 1;
    while (hi + 1 < cum_.size() && cum_[hi] < s) {
      ++hi;
    }
    const std::size_t lo = hi - 1;
    const double seg = cum_[hi] - cum_[lo];
    const double f = seg > 0.0 ? (s - cum_[lo]) / seg : 0.0;
    const double dx = pts_[hi][0] - pts_[lo][0];
    const double dy = pts_[hi][1] - pts_[lo][1];
    return {pts_[lo][0] + f * dx, pts_[lo][1] + f * dy, wrap_angle(std::atan2(dy, dx))};
  }

  /// Downsampled copy for map polylines.
  std::vector<std::array<double, 2>> sample(double ds) const
  {
    std::vector<std::array<double, 2>> out;
    const double len = length();
    const int n = std::max(1, static_cast<int>(std::ceil(len / ds)));
    for (int i = 0; i <= n; ++i) {
      const Pose p = pose_at(len * static_cast<double>(i) / n);
      if (!out.empty() && std::hypot(p.x - out.back()[0], p.y - out.back()[1]) < 1e-9) {
        continue;
      }
      out.push_back({p.x, p.y});
    }
    return out;
  }

private:
  std::vector<std::array<double, 2>> pts_;
  std::vector<double> cum_;
};

/// States for an agent moving along `path`, starting at arc length `s0`,
/// with per-step speeds (speeds[t] carries the agent from step t-1 to t).
inline std::vector<AgentState> states_on_path(
  const Path & path, double s0, const std::vector<double> & speeds)
{
  std::vector<AgentState> out(speeds.size());
  double s = s0;
  for (std::size_t t = 0; t < speeds.size(); ++t) {
    if (t > 0) {
      s += speeds[t] * kStepSeconds;
    }
    const Path::Pose p = path.pose_at(s);
    out[t].x = p.x;
    out[t].y = p.y;
    out[t].heading = p.heading;
    out[t].vx = speeds[t] * std::cos(p.heading);
    out[t].vy = speeds[t] * std::sin(p.heading);
    out[t].valid = true;
  }
  return out;
}

inline std::vector<double> constant_speed(int horizon, double v)
{
  return std::vector<double>(static_cast<std::size_t>(horizon), v);
}

/// Speed profile that is zero until `go_step`, then ramps at `accel` up to
/// `v_target`.
inline std::vector<double> stop_then_go(int horizon, int go_step, double accel, double v_target)
{
  std::vector<double> v(static_cast<std::size_t>(horizon), 0.0);
  double cur = 0.0;
  for (int t = 0; t < horizon; ++t) {
    if (t >= go_step) {
      cur = std::min(v_target, cur + accel * kStepSeconds);
    }
    v[static_cast<std::size_t>(t)] = cur;
  }
  return v;
}

inline void mark_leading_invalid(AgentTrack & track, int count)
{
  for (int t = 0; t < count && t < static_cast<int>(track.states.size()); ++t) {
    track.states[static_cast<std::size_t>(t)] = AgentState{};
  }
}

inline MapPolyline polyline_from(const Path & path, PolylineType type, double ds)
{
  MapPolyline pl;
  pl.polyline_type = type;
  pl.points = path.sample(ds);
  return pl;
}

inline MapPolyline straight_polyline(
  PolylineType type, double x0, double y0, double x1, double y1, double ds = 5.0)
{
  Path p;
  p.add_line(x0, y0, x1, y1, ds);
  return polyline_from(p, type, ds);
}

}  // namespace gen_detail

/// Deterministic synthetic scene for one scenario family. Identical
/// (family, seed, config) triples produce identical scenes.
inline Scene generate_scene(
  ScenarioFamily family, std::uint64_t seed, const GeneratorConfig & config = {})
{
  using namespace gen_detail;
  validate_generator_config(config);

  Rng rng(mix_seed(static_cast<std::uint64_t>(family) + 1, seed));
  Scene scene;
  scene.scene_id = std::string(to_string(family)) + "_" + std::to_string(seed);
  scene.t_obs = config.t_obs;
  scene.t_fut = config.t_fut;
  scene.family = family;
  const int horizon = scene.horizon();

  auto add_track = [&](const std::string & id, AgentType type, std::vector<AgentState> states,
                       bool predicted) {
    AgentTrack track;
    track.agent_id = id;
    track.agent_type = type;
    track.states = std::move(states);
    scene.tracks.push_back(std::move(track));
    if (predicted) {
      scene.predict_ids.push_back(id);
    }
  };

  // Neighbors occasionally enter sensing range a few steps late.
  auto maybe_truncate_neighbor = [&](AgentTrack & track) {
    if (rng.uniform() < 0.3) {
      mark_leading_invalid(track, 1 + rng.below_int(3));
    }
  };

  switch (family) {
    case ScenarioFamily::kLaneKeep: {
      const int total = config.num_agents + config.num_neighbors;
      const int lanes = std::max(total, 2);
      const double half = config.lane_length / 2.0;
      for (int lane = 0; lane < lanes; ++lane) {
        const double y = lane * config.lane_spacing;
        scene.map.push_back(straight_polyline(PolylineType::kLaneCenter, -half, y, half, y));
      }
      scene.map.push_back(straight_polyline(
        PolylineType::kRoadEdge, -half, -config.lane_spacing / 2.0, half, -config.lane_spacing / 2.0));
      scene.map.push_back(straight_polyline(
        PolylineType::kRoadEdge, -half, (lanes - 0.5) * config.lane_spacing, half,
        (lanes - 0.5) * config.lane_spacing));

      for (int i = 0; i < total; ++i) {
        const int lane = i % lanes;
        const double y = lane * config.lane_spacing;
        const bool predicted = i < config.num_agents;
        const bool bike = !predicted && rng.uniform() < 0.25;
        double v = rng.uniform(config.speed_min, config.speed_max);
        if (bike) {
          v = std::min(v, rng.uniform(3.0, 6.0));
        }
        const double x0 = rng.uniform(-60.0, -36.0);
        Path p;
        p.add_line(-half, y, half, y, 2.0);
        auto states = states_on_path(p, x0 + half, constant_speed(horizon, v));
        add_track(
          "agent_" + std::to_string(i), bike ? AgentType::kBicycle : AgentType::kVehicle,
          std::move(states), predicted);
        if (!predicted) {
          maybe_truncate_neighbor(scene.tracks.back());
        }
      }
      break;
    }

    case ScenarioFamily::kStopStart: {
      // Main road along +x with a signal-controlled stop line at x = -2.
      const double half = config.lane_length / 2.0;
      scene.map.push_back(straight_polyline(PolylineType::kLaneCenter, -half, 0.0, half, 0.0));
      scene.map.push_back(
        straight_polyline(PolylineType::kLaneCenter, -half, config.lane_spacing, half, config.lane_spacing));
      scene.map.push_back(straight_polyline(PolylineType::kLaneCenter, 0.0, -half, 0.0, half));
      scene.map.push_back(straight_polyline(PolylineType::kCrosswalk, -2.0, -6.0, -2.0, 8.0, 2.0));

      const int green_at = 4 + rng.below_int(std::max(1, config.t_obs - 6));
      TrafficSignal signal;
      signal.position = {-2.0, -2.0};
      for (int t = 0; t < config.t_obs; ++t) {
        signal.state_per_step.push_back(t < green_at ? SignalState::kRed : SignalState::kGreen);
      }
      scene.signals.push_back(signal);

      for (int i = 0; i < config.num_agents; ++i) {
        const double stop_x = -6.0 - 7.0 * i;
        Path p;
        p.add_line(-half, 0.0, half, 0.0, 2.0);
        const int react = (config.t_obs - green_at) + rng.below_int(4);
        const double v_target = rng.uniform(6.0, 11.0);
        auto speeds = stop_then_go(horizon, config.t_obs + react, 2.5, v_target);
        auto states = states_on_path(p, stop_x + half, speeds);
        add_track("agent_" + std::to_string(i), AgentType::kVehicle, std::move(states), true);
      }

      int id = config.num_agents;
      for (int i = 0; i < config.num_neighbors; ++i, ++id) {
        if (i == 0) {
          // Pedestrian crossing on the crosswalk.
          Path p;
          p.add_line(-2.0, -6.0, -2.0, 8.0, 0.5);
          auto states = states_on_path(p, 0.0, constant_speed(horizon, 1.2));
          add_track("agent_" + std::to_string(id), AgentType::kPedestrian, std::move(states), false);
        } else {
          // Cross traffic on the side road.
          const double v = rng.uniform(4.0, 8.0);
          Path p;
          p.add_line(0.0, -half, 0.0, half, 2.0);
          auto states = states_on_path(p, half - 40.0 - 10.0 * i, constant_speed(horizon, v));
          add_track("agent_" + std::to_string(id), AgentType::kVehicle, std::move(states), false);
          maybe_truncate_neighbor(scene.tracks.back());
        }
      }
      break;
    }

    case ScenarioFamily::kTurn: {
      const double radius = rng.uniform(8.0, 15.0);
      const bool left = rng.uniform() < 0.5;
      const double v = rng.uniform(4.0, 7.0);
      const double sgn = left ? 1.0 : -1.0;

      Path p;
      const double approach = v * config.t_obs * kStepSeconds + rng.uniform(0.5, 2.0) + 40.0;
      p.add_line(-radius - approach, 0.0, -radius, 0.0, 1.0);
      // Quarter arc from (-radius, 0) to (0, sgn * radius).
      p.add_arc(-radius, sgn * radius, radius, -sgn * kPi / 2.0, 0.0, 0.3);
      p.add_line(0.0, sgn * radius, 0.0, sgn * (radius + 60.0), 1.0);

      scene.map.push_back(polyline_from(p, PolylineType::kLaneCenter, 2.0));
      scene.map.push_back(straight_polyline(PolylineType::kLaneCenter, -radius - 80.0, 0.0, 60.0, 0.0));
      scene.map.push_back(straight_polyline(
        PolylineType::kLaneCenter, -radius - 80.0, config.lane_spacing, 60.0, config.lane_spacing));
      scene.map.push_back(straight_polyline(PolylineType::kRoadEdge, -radius - 80.0,
        -config.lane_spacing / 2.0, 60.0, -config.lane_spacing / 2.0));

      TrafficSignal signal;
      signal.position = {-radius - 2.0, sgn * 2.0};
      signal.state_per_step.assign(static_cast<std::size_t>(config.t_obs), SignalState::kGreen);
      scene.signals.push_back(signal);

      for (int i = 0; i < config.num_agents; ++i) {
        const double s0 = 40.0 - 8.0 * i;
        auto states = states_on_path(p, s0, constant_speed(horizon, v));
        add_track("agent_" + std::to_string(i), AgentType::kVehicle, std::move(states), true);
      }
      int id = config.num_agents;
      for (int i = 0; i < config.num_neighbors; ++i, ++id) {
        // Oncoming traffic on the adjacent lane.
        const double vn = rng.uniform(5.0, 10.0);
        Path q;
        q.add_line(60.0, config.lane_spacing, -radius - 80.0, config.lane_spacing, 2.0);
        auto states = states_on_path(q, 20.0 + 15.0 * i, constant_speed(horizon, vn));
        add_track("agent_" + std::to_string(id), AgentType::kVehicle, std::move(states), false);
        maybe_truncate_neighbor(scene.tracks.back());
      }
      break;
    }

    case ScenarioFamily::kInteraction: {
      const double half = config.lane_length / 2.0;
      scene.map.push_back(straight_polyline(PolylineType::kLaneCenter, -half, 0.0, half, 0.0));
      scene.map.push_back(straight_polyline(PolylineType::kLaneCenter, 0.0, -half, 0.0, half));
      scene.map.push_back(straight_polyline(
        PolylineType::kRoadEdge, -half, -config.lane_spacing / 2.0, -4.0, -config.lane_spacing / 2.0));

      const int num_pred = std::max(config.num_agents, 2);

      // Agent 0 crosses on the main road at constant speed.
      const double v_a = rng.uniform(7.0, 11.0);
      const int cross_step = config.t_obs + 10 + rng.below_int(25);
      const double x0_a = -v_a * cross_step * kStepSeconds;
      Path pa;
      pa.add_line(-half, 0.0, half, 0.0, 2.0);
      add_track(
        "agent_0", AgentType::kVehicle,
        states_on_path(pa, x0_a + half, constant_speed(horizon, v_a)), true);

      // Agent 1 approaches on the side road and yields until agent 0 clears.
      const double v_b = rng.uniform(5.0, 9.0);
      Path pb;
      pb.add_line(0.0, -half, 0.0, half, 2.0);
      std::vector<double> vb(static_cast<std::size_t>(horizon), v_b);
      const double clear_step = cross_step + 3.0 / (v_a * kStepSeconds);
      double y_b = -rng.uniform(14.0, 20.0);
      double cur = v_b;
      double y_sim = y_b;
      for (int t = 1; t < horizon; ++t) {
        const bool cleared = t > static_cast<int>(clear_step);
        const double dist_to_hold = -4.0 - y_sim;
        if (!cleared && dist_to_hold < 12.0) {
          cur = std::max(0.0, cur - 3.0 * kStepSeconds);
          if (dist_to_hold < 0.3) {
            cur = 0.0;
          }
        } else if (cleared) {
          cur = std::min(v_b, cur + 2.5 * kStepSeconds);
        }
        vb[static_cast<std::size_t>(t)] = cur;
        y_sim += cur * kStepSeconds;
      }
      add_track("agent_1", AgentType::kVehicle, states_on_path(pb, y_b + half, vb), true);

      // Extra predicted agents keep to parallel lanes.
      for (int i = 2; i < num_pred; ++i) {
        const double y = i * config.lane_spacing;
        const double v = rng.uniform(config.speed_min, config.speed_max);
        Path p;
        p.add_line(-half, y, half, y, 2.0);
        scene.map.push_back(straight_polyline(PolylineType::kLaneCenter, -half, y, half, y));
        add_track(
          "agent_" + std::to_string(i), AgentType::kVehicle,
          states_on_path(p, half - 60.0 + rng.uniform(0.0, 10.0), constant_speed(horizon, v)), true);
      }
      int id = num_pred;
      for (int i = 0; i < config.num_neighbors; ++i, ++id) {
        // Follower behind agent 0.
        const double gap = 12.0 + 8.0 * i;
        auto states = states_on_path(pa, x0_a + half - gap, constant_speed(horizon, v_a));
        add_track("agent_" + std::to_string(id), AgentType::kVehicle, std::move(states), false);
        maybe_truncate_neighbor(scene.tracks.back());
      }
      break;
    }

    case ScenarioFamily::kIrregular: {
      // Wandering road with no signals.
      const int total = config.num_agents + config.num_neighbors;
      for (int i = 0; i < total; ++i) {
        const bool predicted = i < config.num_agents;
        const double v = rng.uniform(3.0, 8.0);
        double heading = rng.uniform(-kPi, kPi);
        double x = rng.uniform(-12.0, 12.0);
        double y = rng.uniform(-12.0, 12.0) + 14.0 * i;
        std::vector<AgentState> states(static_cast<std::size_t>(horizon));
        Path trace;
        trace.add_point(x, y);
        for (int t = 0; t < horizon; ++t) {
          if (t > 0) {
            heading = wrap_angle(heading + rng.uniform(-0.06, 0.06));
            x += v * kStepSeconds * std::cos(heading);
            y += v * kStepSeconds * std::sin(heading);
            trace.add_point(x, y);
          }
          states[static_cast<std::size_t>(t)] = {
            x, y, heading, v * std::cos(heading), v * std::sin(heading), true};
        }
        add_track(
          "agent_" + std::to_string(i), predicted ? AgentType::kVehicle : AgentType::kBicycle,
          std::move(states), predicted);
        if (!predicted) {
          maybe_truncate_neighbor(scene.tracks.back());
        }
        if (predicted) {
          scene.map.push_back(polyline_from(trace, PolylineType::kLaneCenter, 4.0));
        }
      }
      // A few unrelated jagged edges.
      const int extra = 2 + rng.below_int(2);
      for (int e = 0; e < extra; ++e) {
        Path p;
        double x = rng.uniform(-40.0, 40.0);
        double y = rng.uniform(-40.0, 40.0);
        double heading = rng.uniform(-kPi, kPi);
        p.add_point(x, y);
        const int segs = 5 + rng.below_int(6);
        for (int sgi = 0; sgi < segs; ++sgi) {
          heading = wrap_angle(heading + rng.uniform(-0.8, 0.8));
          const double len = rng.uniform(4.0, 12.0);
          x += len * std::cos(heading);
          y += len * std::sin(heading);
          p.add_point(x, y);
        }
        scene.map.push_back(polyline_from(p, PolylineType::kRoadEdge, 4.0));
      }
      break;
    }
  }

  validate_scene(scene);
  return scene;
}

}  // namespace dmtp

#endif  // DMTP_SCENE_GEN_HPP_
