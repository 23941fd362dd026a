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

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "dmtp/scene_gen.hpp"
#include "dmtp/scene_io.hpp"

using namespace dmtp;
namespace fs = std::filesystem;

namespace
{

fs::path temp_dir()
{
  static int counter = 0;
  fs::path p = fs::temp_directory_path() / ("dmtp_scene_test_" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("generator is deterministic")
{
  const Scene a = generate_scene(ScenarioFamily::kLaneKeep, 7);
  const Scene b = generate_scene(ScenarioFamily::kLaneKeep, 7);
  CHECK(a == b);
  CHECK(scene_to_json(a).dump() == scene_to_json(b).dump());

  const Scene c = generate_scene(ScenarioFamily::kLaneKeep, 8);
  CHECK_FALSE(a == c);
}

TEST_CASE("turn scenes change heading by at least 60 degrees")
{
  const Scene s = generate_scene(ScenarioFamily::kTurn, 1);
  const AgentTrack & track = s.tracks[0];
  const double h_obs = track.states[static_cast<std::size_t>(s.t_obs - 1)].heading;
  const double h_end = track.states.back().heading;
  CHECK(std::abs(wrap_angle(h_end - h_obs)) >= 3.14159265358979 / 3.0);
}

TEST_CASE("stop_start scenes include a red-to-green signal")
{
  const Scene s = generate_scene(ScenarioFamily::kStopStart, 3);
  bool found = false;
  for (const TrafficSignal & sig : s.signals) {
    for (std::size_t t = 1; t < sig.state_per_step.size(); ++t) {
      if (sig.state_per_step[t - 1] == SignalState::kRed &&
          sig.state_per_step[t] == SignalState::kGreen) {
        found = true;
      }
    }
  }
  CHECK(found);
}

TEST_CASE("lane_keep futures stay on a lane center")
{
  const Scene s = generate_scene(ScenarioFamily::kLaneKeep, 21);
  for (int idx : s.predicted_indices()) {
    const AgentTrack & track = s.tracks[static_cast<std::size_t>(idx)];
    for (const AgentState & st : future_view(s, track)) {
      double best = 1e9;
      for (const MapPolyline & pl : s.map) {
        if (pl.polyline_type != PolylineType::kLaneCenter) {
          continue;
        }
        for (const auto & p : pl.points) {
          best = std::min(best, std::abs(st.y - p[1]));
        }
      }
      CHECK(best <= 0.5);
    }
  }
}

TEST_CASE("irregular scenes have no signals")
{
  const Scene s = generate_scene(ScenarioFamily::kIrregular, 5);
  CHECK(s.signals.empty());
}

TEST_CASE("every generated scene passes the type invariants")
{
  const ScenarioFamily families[] = {
    ScenarioFamily::kLaneKeep, ScenarioFamily::kStopStart, ScenarioFamily::kTurn,
    ScenarioFamily::kInteraction, ScenarioFamily::kIrregular};
  for (ScenarioFamily family : families) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      // generate_scene validates internally; the check here is that it
      // does not throw and stays deterministic across a re-roll.
      const Scene s = generate_scene(family, seed);
      CHECK(s == generate_scene(family, seed));
    }
  }
}

TEST_CASE("invalid generator configs are rejected")
{
  GeneratorConfig c;
  c.num_agents = 0;
  CHECK_THROWS_AS(generate_scene(ScenarioFamily::kLaneKeep, 0, c), ConfigError);
  c = GeneratorConfig{};
  c.lane_length = 0.0;
  CHECK_THROWS_AS(generate_scene(ScenarioFamily::kLaneKeep, 0, c), ConfigError);
}

TEST_CASE("split history and future views")
{
  const Scene s = generate_scene(ScenarioFamily::kLaneKeep, 2);
  const AgentTrack & track = s.tracks[0];
  const auto split = split_history_future(s, track);
  CHECK(split.history.size() == 10);
  CHECK(split.future.size() == 80);

  std::vector<AgentState> rejoined(split.history.begin(), split.history.end());
  rejoined.insert(rejoined.end(), split.future.begin(), split.future.end());
  CHECK(rejoined == track.states);

  GeneratorConfig degen;
  degen.t_fut = 0;
  const Scene empty_future = generate_scene(ScenarioFamily::kLaneKeep, 2, degen);
  const auto split2 = split_history_future(empty_future, empty_future.tracks[0]);
  CHECK(split2.history.size() == 10);
  CHECK(split2.future.empty());
}

TEST_CASE("scene json roundtrip is the identity")
{
  const ScenarioFamily families[] = {
    ScenarioFamily::kLaneKeep, ScenarioFamily::kStopStart, ScenarioFamily::kTurn,
    ScenarioFamily::kInteraction, ScenarioFamily::kIrregular};
  const fs::path dir = temp_dir();
  for (ScenarioFamily family : families) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Scene s = generate_scene(family, seed);
      const fs::path file = dir / (s.scene_id + ".json");
      save_scene(s, file);
      const Scene loaded = load_scene(file);
      CHECK(loaded == s);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("loading rejects malformed scenes with a field path")
{
  const fs::path dir = temp_dir();
  const Scene s = generate_scene(ScenarioFamily::kLaneKeep, 4);

  SECTION("track shorter than declared horizon")
  {
    OrderedJson j = scene_to_json(s);
    j["tracks"][0]["states"].erase(0);
    const fs::path file = dir / "bad_track.json";
    atomic_write(file, j.dump());
    CHECK_THROWS_WITH(
      load_scene(file), Catch::Matchers::ContainsSubstring("tracks[agent_0]"));
  }
  SECTION("empty predict_ids")
  {
    OrderedJson j = scene_to_json(s);
    j["predict_ids"] = OrderedJson::array();
    const fs::path file = dir / "bad_predict.json";
    atomic_write(file, j.dump());
    CHECK_THROWS_WITH(load_scene(file), Catch::Matchers::ContainsSubstring("predict_ids"));
  }
  SECTION("schema version mismatch")
  {
    OrderedJson j = scene_to_json(s);
    j["schema_version"] = "99";
    const fs::path file = dir / "bad_version.json";
    atomic_write(file, j.dump());
    CHECK_THROWS_AS(load_scene(file), ParseError);
  }
  SECTION("invalid JSON")
  {
    const fs::path file = dir / "bad_json.json";
    atomic_write(file, "{ not json");
    CHECK_THROWS_AS(load_scene(file), ParseError);
  }
  fs::remove_all(dir);
}

TEST_CASE("dataset manifest roundtrip")
{
  const fs::path dir = temp_dir();
  std::vector<Scene> scenes;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    scenes.push_back(generate_scene(ScenarioFamily::kInteraction, seed));
  }
  save_dataset(scenes, dir);
  const auto loaded = load_dataset(dir);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded == scenes);
  fs::remove_all(dir);
}
