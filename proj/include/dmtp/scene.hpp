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

#ifndef DMTP_SCENE_HPP_
#define DMTP_SCENE_HPP_

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmtp/common.hpp"

namespace dmtp
{

constexpr double kStepSeconds = 0.1;  // tracks are sampled at 10 Hz
constexpr double kMaxSpeed = 40.0;    // m/s, bounds |delta position| per step

enum class AgentType { kVehicle, kBicycle, kPedestrian };
enum class PolylineType { kLaneCenter, kRoadEdge, kCrosswalk };
enum class SignalState { kRed, kYellow, kGreen, kUnknown };
enum class ScenarioFamily { kLaneKeep, kStopStart, kTurn, kInteraction, kIrregular };

inline const char * to_string(AgentType t)
{
  switch (t) {
    case AgentType::kVehicle: return "vehicle";
    case AgentType::kBicycle: return "bicycle";
    default: return "pedestrian";
  }
}

inline const char * to_string(PolylineType t)
{
  switch (t) {
    case PolylineType::kLaneCenter: return "lane_center";
    case PolylineType::kRoadEdge: return "road_edge";
    default: return "crosswalk";
  }
}

inline const char * to_string(SignalState s)
{
  switch (s) {
    case SignalState::kRed: return "red";
    case SignalState::kYellow: return "yellow";
    case SignalState::kGreen: return "green";
    default: return "unknown";
  }
}

inline const char * to_string(ScenarioFamily f)
{
  switch (f) {
    case ScenarioFamily::kLaneKeep: return "lane_keep";
    case ScenarioFamily::kStopStart: return "stop_start";
    case ScenarioFamily::kTurn: return "turn";
    case ScenarioFamily::kInteraction: return "interaction";
    default: return "irregular";
  }
}

inline std::optional<ScenarioFamily> family_from_string(const std::string & s)
{
  if (s == "lane_keep") return ScenarioFamily::kLaneKeep;
  if (s == "stop_start") return ScenarioFamily::kStopStart;
  if (s == "turn") return ScenarioFamily::kTurn;
  if (s == "interaction") return ScenarioFamily::kInteraction;
  if (s == "irregular") return ScenarioFamily::kIrregular;
  return std::nullopt;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
  constexpr double kPi = 3.14159265358979323846;
  a = std::fmod(a, 2.0 * kPi);
  if (a > kPi) {
    a -= 2.0 * kPi;
  }
  if (a <= -kPi) {
    a += 2.0 * kPi;
  }
  return a;
}

struct AgentState
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians in (-pi, pi]
  double vx = 0.0;
  double vy = 0.0;
  bool valid = false;

  bool operator==(const AgentState &) const = default;
};

struct AgentTrack
{
  std::string agent_id;
  AgentType agent_type = AgentType::kVehicle;
  std::vector<AgentState> states;  // length t_obs + t_fut

  bool operator==(const AgentTrack &) const = default;
};

struct MapPolyline
{
  PolylineType polyline_type = PolylineType::kLaneCenter;
  std::vector<std::array<double, 2>> points;  // length >= 2

  bool operator==(const MapPolyline &) const = default;
};

struct TrafficSignal
{
  std::array<double, 2> position{0.0, 0.0};
  std::vector<SignalState> state_per_step;  // length t_obs

  bool operator==(const TrafficSignal &) const = default;
};

/// One traffic scenario: all agent tracks, map polylines and signal records.
/// Immutable after construction; safe to share read-only.
struct Scene
{
  std::string scene_id;
  int t_obs = 10;
  int t_fut = 80;
  ScenarioFamily family = ScenarioFamily::kLaneKeep;
  std::vector<AgentTrack> tracks;
  std::vector<MapPolyline> map;
  std::vector<TrafficSignal> signals;
  std::vector<std::string> predict_ids;

  bool operator==(const Scene &) const = default;

  int horizon() const { return t_obs + t_fut; }

  int track_index(const std::string & id) const
  {
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      if (tracks[i].agent_id == id) {
        return static_cast<int>(i);
      }
    }
    return -1;
  }

  bool is_predicted(const std::string & id) const
  {
    for (const auto & p : predict_ids) {
      if (p == id) {
        return true;
      }
    }
    return false;
  }

  /// Indices of predicted tracks in track order.
  std::vector<int> predicted_indices() const
  {
    std::vector<int> out;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      if (is_predicted(tracks[i].agent_id)) {
        out.push_back(static_cast<int>(i));
      }
    }
    return out;
  }

  std::vector<int> neighbor_indices() const
  {
    std::vector<int> out;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      if (!is_predicted(tracks[i].agent_id)) {
        out.push_back(static_cast<int>(i));
      }
    }
    return out;
  }
};

/// Throws ParseError naming the offending field when any invariant is
/// violated.
inline void validate_scene(const Scene & s)
{
  if (s.t_obs < 1) {
    throw ParseError("scene " + s.scene_id + ": t_obs must be >= 1, got " + std::to_string(s.t_obs));
  }
  if (s.t_fut < 0) {
    throw ParseError("scene " + s.scene_id + ": t_fut must be >= 0");
  }
  const int horizon = s.t_obs + s.t_fut;
  const double max_step = kMaxSpeed * kStepSeconds;
  for (const AgentTrack & track : s.tracks) {
    if (static_cast<int>(track.states.size()) != horizon) {
      throw ParseError(
        "tracks[" + track.agent_id + "].states: expected " + std::to_string(horizon) +
        " states, got " + std::to_string(track.states.size()));
    }
    for (std::size_t t = 0; t < track.states.size(); ++t) {
      const AgentState & st = track.states[t];
      if (!st.valid) {
        continue;
      }
      if (!std::isfinite(st.x) || !std::isfinite(st.y) || !std::isfinite(st.heading) ||
          !std::isfinite(st.vx) || !std::isfinite(st.vy)) {
        throw ParseError(
          "tracks[" + track.agent_id + "].states[" + std::to_string(t) + "]: non-finite value");
      }
      constexpr double kPi = 3.14159265358979323846;
      if (st.heading <= -kPi - 1e-12 || st.heading > kPi + 1e-12) {
        throw ParseError(
          "tracks[" + track.agent_id + "].states[" + std::to_string(t) +
          "].heading: outside (-pi, pi]");
      }
      if (t > 0 && track.states[t - 1].valid) {
        const double dx = st.x - track.states[t - 1].x;
        const double dy = st.y - track.states[t - 1].y;
        if (std::hypot(dx, dy) > max_step + 1e-9) {
          throw ParseError(
            "tracks[" + track.agent_id + "].states[" + std::to_string(t) +
            "]: step displacement exceeds v_max * dt");
        }
      }
    }
  }
  for (std::size_t i = 0; i < s.map.size(); ++i) {
    const MapPolyline & pl = s.map[i];
    if (pl.points.size() < 2) {
      throw ParseError("map[" + std::to_string(i) + "]: fewer than 2 points");
    }
    for (std::size_t p = 0; p < pl.points.size(); ++p) {
      if (!std::isfinite(pl.points[p][0]) || !std::isfinite(pl.points[p][1])) {
        throw ParseError(
          "map[" + std::to_string(i) + "].points[" + std::to_string(p) + "]: non-finite");
      }
      if (p > 0 && pl.points[p] == pl.points[p - 1]) {
        throw ParseError(
          "map[" + std::to_string(i) + "].points[" + std::to_string(p) +
          "]: duplicated consecutive point");
      }
    }
  }
  for (std::size_t i = 0; i < s.signals.size(); ++i) {
    if (static_cast<int>(s.signals[i].state_per_step.size()) != s.t_obs) {
      throw ParseError(
        "signals[" + std::to_string(i) + "].state_per_step: expected " + std::to_string(s.t_obs) +
        " entries, got " + std::to_string(s.signals[i].state_per_step.size()));
    }
  }
  if (s.predict_ids.empty()) {
    throw ParseError("scene " + s.scene_id + ": predict_ids is empty");
  }
  for (const std::string & id : s.predict_ids) {
    const int idx = s.track_index(id);
    if (idx < 0) {
      throw ParseError("predict_ids: unknown agent id '" + id + "'");
    }
    if (!s.tracks[static_cast<std::size_t>(idx)].states[static_cast<std::size_t>(s.t_obs - 1)].valid) {
      throw ParseError("predict_ids: agent '" + id + "' invalid at last observed step");
    }
  }
}

/// Non-overlapping views over the observed and future parts of a track;
/// their concatenation is the original state sequence.
struct HistoryFutureSplit
{
  std::span<const AgentState> history;
  std::span<const AgentState> future;
};

inline HistoryFutureSplit split_history_future(const Scene & scene, const AgentTrack & track)
{
  const auto obs = static_cast<std::size_t>(scene.t_obs);
  std::span<const AgentState> all(track.states);
  return {all.subspan(0, obs), all.subspan(obs)};
}

inline std::span<const AgentState> history_view(const Scene & scene, const AgentTrack & track)
{
  return split_history_future(scene, track).history;
}

inline std::span<const AgentState> future_view(const Scene & scene, const AgentTrack & track)
{
  return split_history_future(scene, track).future;
}

}  // namespace dmtp

#endif  // DMTP_SCENE_HPP_
