#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "idrm/robot_model.hpp"
#include "idrm/shapes.hpp"

namespace idrm {

enum class Difficulty { kEasy, kMedium, kHard };
const char* difficultyName(Difficulty d);
/// Throws ScenarioError on an unknown name.
Difficulty parseDifficulty(const std::string& s);

struct Scenario {
  Environment env;
  Transform target;
  Difficulty difficulty = Difficulty::kEasy;
  int sub_id = 0;
  std::uint64_t seed = 0;
};

/// Tabletop scenes for a robot starting at the world origin facing +x.
///   easy:   table, top-down target 0.12 m past the near edge
///   medium: target 0.28 m past the edge, a crate where the robot would
///           naturally stand
///   hard:   medium plus 2-4 floor and torso-height obstacles
/// Sub-scenarios differ by a bounded jitter (per-axis +-0.025 m on the
/// target and table, so any two differ by under 0.1 m). Deterministic in
/// (difficulty, id, seed). id must be in [0, 10).
Scenario generateScenario(Difficulty d, int id, std::uint64_t seed);

/// Obstacle id of the table in generated scenes.
constexpr int kTableId = 1;

/// Start configuration used by the benchmark: nominal posture, stance at the
/// world origin.
Configuration benchStart(const RobotModel& m);

nlohmann::json obstacleToJson(const Obstacle& o);
Obstacle obstacleFromJson(const nlohmann::json& j, const std::string& path);
nlohmann::json scenarioToJson(const Scenario& s);
/// Accepts either a full scenario or an environment-only file (ground and
/// obstacles, no target). Throws ScenarioError.
Scenario scenarioFromJson(const nlohmann::json& j);
Scenario loadScenario(const std::string& path);
void saveScenario(const Scenario& s, const std::string& path);

/// Parses "x,y,z,R,P,Y". Throws ScenarioError.
Transform parseTargetPose(const std::string& s);

}  // namespace idrm
