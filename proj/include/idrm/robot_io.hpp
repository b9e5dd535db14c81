#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "idrm/robot_model.hpp"

namespace idrm {

/// Parse and validate a robot description. Errors are RobotModelError with a
/// JSON path such as "joints[3].limits".
RobotModel robotFromJson(const nlohmann::json& j);
nlohmann::json robotToJson(const RobotModel& m);

RobotModel loadRobot(const std::string& path);
void saveRobot(const RobotModel& m, const std::string& path);

/// FNV-1a 64 over the canonical JSON serialisation. Maps record it so a map
/// is never queried with a different robot.
std::uint64_t robotDigest(const RobotModel& m);

/// Nine-joint demo robot: torso yaw and pitch plus a seven-joint right arm on
/// a floating base, about 1.1 m of reach.
RobotModel demoRobot();

}  // namespace idrm
