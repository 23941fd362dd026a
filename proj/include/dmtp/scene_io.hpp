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

#ifndef DMTP_SCENE_IO_HPP_
#define DMTP_SCENE_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmtp/scene.hpp"

namespace dmtp
{

inline constexpr const char * kSceneSchemaVersion = "1";

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson scene_to_json(const Scene & scene)
{
  OrderedJson j;
  j["schema_version"] = kSceneSchemaVersion;
  j["scene_id"] = scene.scene_id;
  j["t_obs"] = scene.t_obs;
  j["t_fut"] = scene.t_fut;
  j["family"] = to_string(scene.family);
  j["tracks"] = OrderedJson::array();
  for (const AgentTrack & track : scene.tracks) {
    OrderedJson tj;
    tj["agent_id"] = track.agent_id;
    tj["agent_type"] = to_string(track.agent_type);
    tj["states"] = OrderedJson::array();
    for (const AgentState & s : track.states) {
      tj["states"].push_back(
        {{"x", s.x}, {"y", s.y}, {"heading", s.heading}, {"vx", s.vx}, {"vy", s.vy},
         {"valid", s.valid}});
    }
    j["tracks"].push_back(std::move(tj));
  }
  j["map"] = OrderedJson::array();
  for (const MapPolyline & pl : scene.map) {
    OrderedJson pj;
    pj["type"] = to_string(pl.polyline_type);
    pj["points"] = OrderedJson::array();
    for (const auto & p : pl.points) {
      pj["points"].push_back({p[0], p[1]});
    }
    j["map"].push_back(std::move(pj));
  }
  j["signals"] = OrderedJson::array();
  for (const TrafficSignal & sig : scene.signals) {
    OrderedJson sj;
    sj["position"] = {sig.position[0], sig.position[1]};
    sj["states"] = OrderedJson::array();
    for (SignalState st : sig.state_per_step) {
      sj["states"].push_back(to_string(st));
    }
    j["signals"].push_back(std::move(sj));
  }
  j["predict_ids"] = scene.predict_ids;
  return j;
}

namespace io_detail
{

inline ParseError field_error(const std::string & path, const std::string & what)
{
  return ParseError("schema error: " + path + ": " + what);
}

template <typename T>
T require(const OrderedJson & j, const std::string & key, const std::string & path)
{
  if (!j.contains(key)) {
    throw field_error(path + "." + key, "missing field");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw field_error(path + "." + key, "wrong type");
  }
}

}  // namespace io_detail

inline Scene scene_from_json(const OrderedJson & j)
{
  using io_detail::field_error;
  using io_detail::require;

  const auto version = require<std::string>(j, "schema_version", "scene");
  if (version != kSceneSchemaVersion) {
    throw field_error("scene.schema_version",
                      "unsupported version '" + version + "', expected '" + kSceneSchemaVersion + "'");
  }
  Scene scene;
  scene.scene_id = require<std::string>(j, "scene_id", "scene");
  scene.t_obs = require<int>(j, "t_obs", "scene");
  scene.t_fut = require<int>(j, "t_fut", "scene");
  const auto family = family_from_string(require<std::string>(j, "family", "scene"));
  if (!family) {
    throw field_error("scene.family", "unknown scenario family");
  }
  scene.family = *family;

  if (!j.contains("tracks") || !j.at("tracks").is_array()) {
    throw field_error("scene.tracks", "missing or not an array");
  }
  for (const auto & tj : j.at("tracks")) {
    AgentTrack track;
    track.agent_id = require<std::string>(tj, "agent_id", "tracks[]");
    const std::string path = "tracks[" + track.agent_id + "]";
    const auto type = require<std::string>(tj, "agent_type", path);
    if (type == "vehicle") {
      track.agent_type = AgentType::kVehicle;
    } else if (type == "bicycle") {
      track.agent_type = AgentType::kBicycle;
    } else if (type == "pedestrian") {
      track.agent_type = AgentType::kPedestrian;
    } else {
      throw field_error(path + ".agent_type", "unknown agent type '" + type + "'");
    }
    if (!tj.contains("states") || !tj.at("states").is_array()) {
      throw field_error(path + ".states", "missing or not an array");
    }
    for (const auto & sj : tj.at("states")) {
      AgentState st;
      const std::string spath = path + ".states[]";
      st.x = require<double>(sj, "x", spath);
      st.y = require<double>(sj, "y", spath);
      st.heading = require<double>(sj, "heading", spath);
      st.vx = require<double>(sj, "vx", spath);
      st.vy = require<double>(sj, "vy", spath);
      st.valid = require<bool>(sj, "valid", spath);
      track.states.push_back(st);
    }
    scene.tracks.push_back(std::move(track));
  }

  if (j.contains("map")) {
    for (std::size_t i = 0; i < j.at("map").size(); ++i) {
      const auto & pj = j.at("map").at(i);
      const std::string path = "map[" + std::to_string(i) + "]";
      MapPolyline pl;
      const auto type = require<std::string>(pj, "type", path);
      if (type == "lane_center") {
        pl.polyline_type = PolylineType::kLaneCenter;
      } else if (type == "road_edge") {
        pl.polyline_type = PolylineType::kRoadEdge;
      } else if (type == "crosswalk") {
        pl.polyline_type = PolylineType::kCrosswalk;
      } else {
        throw field_error(path + ".type", "unknown polyline type '" + type + "'");
      }
      if (!pj.contains("points") || !pj.at("points").is_array()) {
        throw field_error(path + ".points", "missing or not an array");
      }
      for (const auto & pt : pj.at("points")) {
        if (!pt.is_array() || pt.size() != 2) {
          throw field_error(path + ".points[]", "expected [x, y]");
        }
        pl.points.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      }
      scene.map.push_back(std::move(pl));
    }
  }

  if (j.contains("signals")) {
    for (std::size_t i = 0; i < j.at("signals").size(); ++i) {
      const auto & sj = j.at("signals").at(i);
      const std::string path = "signals[" + std::to_string(i) + "]";
      TrafficSignal sig;
      if (!sj.contains("position") || !sj.at("position").is_array() || sj.at("position").size() != 2) {
        throw field_error(path + ".position", "expected [x, y]");
      }
      sig.position = {sj.at("position").at(0).get<double>(), sj.at("position").at(1).get<double>()};
      if (!sj.contains("states") || !sj.at("states").is_array()) {
        throw field_error(path + ".states", "missing or not an array");
      }
      for (const auto & st : sj.at("states")) {
        const std::string name = st.get<std::string>();
        if (name == "red") {
          sig.state_per_step.push_back(SignalState::kRed);
        } else if (name == "yellow") {
          sig.state_per_step.push_back(SignalState::kYellow);
        } else if (name == "green") {
          sig.state_per_step.push_back(SignalState::kGreen);
        } else if (name == "unknown") {
          sig.state_per_step.push_back(SignalState::kUnknown);
        } else {
          throw field_error(path + ".states[]", "unknown signal state '" + name + "'");
        }
      }
      scene.signals.push_back(std::move(sig));
    }
  }

  scene.predict_ids = io_detail::require<std::vector<std::string>>(j, "predict_ids", "scene");
  validate_scene(scene);
  return scene;
}

inline void save_scene(const Scene & scene, const std::filesystem::path & path)
{
  atomic_write(path, scene_to_json(scene).dump(2) + "\n");
}

inline Scene load_scene(const std::filesystem::path & path)
{
  OrderedJson j;
  try {
    j = OrderedJson::parse(read_file(path));
  } catch (const nlohmann::json::exception & e) {
    throw ParseError("schema error: " + path.string() + ": invalid JSON: " + e.what());
  }
  return scene_from_json(j);
}

// ---------------------------------------------------------------------------
// Dataset = directory of one-scene files + manifest.
// ---------------------------------------------------------------------------

struct DatasetManifest
{
  std::string schema_version = kSceneSchemaVersion;
  std::vector<std::string> files;
};

inline void save_dataset_manifest(const DatasetManifest & m, const std::filesystem::path & dir)
{
  OrderedJson j;
  j["schema_version"] = m.schema_version;
  j["files"] = m.files;
  atomic_write(dir / "manifest.json", j.dump(2) + "\n");
}

inline DatasetManifest load_dataset_manifest(const std::filesystem::path & dir)
{
  const auto path = dir / "manifest.json";
  OrderedJson j;
  try {
    j = OrderedJson::parse(read_file(path));
  } catch (const nlohmann::json::exception & e) {
    throw ParseError("schema error: " + path.string() + ": invalid JSON: " + e.what());
  }
  DatasetManifest m;
  m.schema_version = io_detail::require<std::string>(j, "schema_version", "manifest");
  if (m.schema_version != kSceneSchemaVersion) {
    throw ParseError("schema error: manifest.schema_version: unsupported '" + m.schema_version + "'");
  }
  m.files = io_detail::require<std::vector<std::string>>(j, "files", "manifest");
  return m;
}

/// Loads every scene listed by the dataset manifest, in manifest order.
inline std::vector<Scene> load_dataset(const std::filesystem::path & dir)
{
  const DatasetManifest manifest = load_dataset_manifest(dir);
  std::vector<Scene> scenes;
  scenes.reserve(manifest.files.size());
  for (const std::string & f : manifest.files) {
    scenes.push_back(load_scene(dir / f));
  }
  return scenes;
}

inline void save_dataset(const std::vector<Scene> & scenes, const std::filesystem::path & dir)
{
  std::filesystem::create_directories(dir);
  DatasetManifest manifest;
  for (const Scene & s : scenes) {
    const std::string name = s.scene_id + ".json";
    save_scene(s, dir / name);
    manifest.files.push_back(name);
  }
  save_dataset_manifest(manifest, dir);
}

}  // namespace dmtp

#endif  // DMTP_SCENE_IO_HPP_
