#include "idrm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "idrm/error.hpp"

namespace idrm {

using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Obstacle box(int id, const Vec3& c, const Vec3& half, double yaw = 0.0) {
  Box b;
  b.pose = Transform{rotZ(yaw), c};
  b.half_extents = half;
  return {b, id};
}

Obstacle sphere(int id, const Vec3& c, double r) { return {Sphere{c, r}, id}; }

bool clearOf(const Vec3& p, const Environment& env, double margin) {
  for (const auto& o : env.obstacles)
    if (sphereIntersectsObstacle(Sphere{p, margin}, o)) return false;
  return true;
}

Vec3 vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ScenarioError(path + ": expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ScenarioError(path + ": expected an array of 3 numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

json vecJson(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Rpy rpyOrZero(const Mat3& r) {
  if (auto a = tryRpyOf(r)) return *a;
  throw ScenarioError("rotation at the roll-pitch-yaw singularity cannot be written");
}

}  // namespace

const char* difficultyName(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kMedium: return "medium";
    case Difficulty::kHard: return "hard";
  }
  return "unknown";
}

Difficulty parseDifficulty(const std::string& s) {
  if (s == "easy") return Difficulty::kEasy;
  if (s == "medium") return Difficulty::kMedium;
  if (s == "hard") return Difficulty::kHard;
  throw ScenarioError("unknown difficulty '" + s + "' (expected easy, medium or hard)");
}

Scenario generateScenario(Difficulty d, int id, std::uint64_t seed) {
  if (id < 0 || id >= 10) throw ScenarioError("sub-scenario id must be in [0, 10)");
  constexpr double kJitter = 0.025;
  constexpr int kRetries = 100;
  const std::uint64_t base = splitmix(seed ^ splitmix(static_cast<std::uint64_t>(id) + 1));

  for (int attempt = 0; attempt < kRetries; ++attempt) {
    // Table and target jitter depend on (seed, id) only, so the same
    // sub-scenario shares its table across difficulties.
    std::mt19937_64 rng(splitmix(base + static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> jit(-kJitter, kJitter);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    Scenario s;
    s.difficulty = d;
    s.sub_id = id;
    s.seed = seed;
    const Vec3 table_shift(jit(rng), jit(rng), 0.0);
    const Vec3 target_shift(jit(rng), jit(rng), jit(rng));
    const double yaw = 0.3 * (2.0 * u(rng) - 1.0);

    const Vec3 table_c = Vec3(1.5, 0.0, 0.375) + table_shift;
    s.env.obstacles.push_back(box(kTableId, table_c, Vec3(0.35, 0.5, 0.375)));
    const double edge = table_c.x() - 0.35;
    const double depth = d == Difficulty::kEasy ? 0.12 : 0.28;
    const Vec3 t = Vec3(edge + depth, 0.0, 0.80) + target_shift;
    s.target = Transform{rotZ(yaw), t};

    std::mt19937_64 extra(splitmix(base ^ (0x5bd1e995ull * (static_cast<std::uint64_t>(d) + 1)) ^
                                   static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> v(0.0, 1.0);
    if (d != Difficulty::kEasy) {
      // Crate where the robot would stand for a right-arm reach.
      s.env.obstacles.push_back(box(2, Vec3(edge - 0.22, t.y() + 0.15, 0.15), Vec3(0.12, 0.15, 0.15)));
    }
    if (d == Difficulty::kHard) {
      const int n = 2 + static_cast<int>(extra() % 3);
      for (int i = 0; i < n; ++i) {
        const double ang = std::numbers::pi * (0.6 + 0.8 * v(extra));
        const double r = 0.45 + 0.4 * v(extra);
        const double x = t.x() + r * std::cos(ang), y = t.y() + r * std::sin(ang);
        if (i % 2 == 0) {
          const double h = 0.15 + 0.15 * v(extra);
          s.env.obstacles.push_back(box(3 + i, Vec3(x, y, h), Vec3(0.1 + 0.05 * v(extra), 0.1 + 0.05 * v(extra), h),
                                        std::numbers::pi * v(extra)));
        } else {
          s.env.obstacles.push_back(sphere(3 + i, Vec3(x, y, 1.1 + 0.3 * v(extra)), 0.1 + 0.05 * v(extra)));
        }
      }
    }
    if (clearOf(t, s.env, 0.01)) return s;
  }
  throw ScenarioError("could not generate a scenario with the target clear of obstacles");
}

Configuration benchStart(const RobotModel& m) { return m.nominalConfiguration(); }

json obstacleToJson(const Obstacle& o) {
  if (const auto* s = std::get_if<Sphere>(&o.shape))
    return {{"type", "sphere"}, {"id", o.id}, {"center", vecJson(s->center)}, {"radius", s->radius}};
  const auto& b = std::get<Box>(o.shape);
  const Rpy r = rpyOrZero(b.pose.rotation);
  return {{"type", "box"},
          {"id", o.id},
          {"center", vecJson(b.pose.translation)},
          {"rpy", {r.roll, r.pitch, r.yaw}},
          {"half_extents", vecJson(b.half_extents)}};
}

Obstacle obstacleFromJson(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type")) throw ScenarioError(path + ": obstacle needs a type");
  const std::string type = j.at("type").get<std::string>();
  Obstacle o;
  o.id = j.value("id", 0);
  if (!j.contains("center")) throw ScenarioError(path + ".center: missing");
  const Vec3 c = vec3(j.at("center"), path + ".center");
  if (type == "sphere") {
    if (!j.contains("radius") || !j.at("radius").is_number()) throw ScenarioError(path + ".radius: missing");
    o.shape = Sphere{c, j.at("radius").get<double>()};
  } else if (type == "box") {
    if (!j.contains("half_extents")) throw ScenarioError(path + ".half_extents: missing");
    Box b;
    Vec3 rpy = Vec3::Zero();
    if (j.contains("rpy")) rpy = vec3(j.at("rpy"), path + ".rpy");
    b.pose = poseFromXyzRpy(c, Rpy{rpy[0], rpy[1], rpy[2]});
    b.half_extents = vec3(j.at("half_extents"), path + ".half_extents");
    o.shape = b;
  } else {
    throw ScenarioError(path + ".type: unknown obstacle type '" + type + "'");
  }
  try {
    o.validate();
  } catch (const Error& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  return o;
}

json scenarioToJson(const Scenario& s) {
  json obs = json::array();
  for (const auto& o : s.env.obstacles) obs.push_back(obstacleToJson(o));
  const Rpy r = rpyOrZero(s.target.rotation);
  return {{"ground", s.env.ground},
          {"obstacles", obs},
          {"target", {{"xyz", vecJson(s.target.translation)}, {"rpy", {r.roll, r.pitch, r.yaw}}}},
          {"difficulty", difficultyName(s.difficulty)},
          {"sub_scenario", s.sub_id},
          {"seed", s.seed}};
}

Scenario scenarioFromJson(const json& j) {
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  Scenario s;
  s.env.ground = j.value("ground", true);
  if (j.contains("obstacles")) {
    const json& obs = j.at("obstacles");
    if (!obs.is_array()) throw ScenarioError("obstacles: expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i)
      s.env.obstacles.push_back(obstacleFromJson(obs[i], "obstacles[" + std::to_string(i) + "]"));
  }
  if (j.contains("target")) {
    const json& t = j.at("target");
    const Vec3 xyz = vec3(t.at("xyz"), "target.xyz");
    Vec3 rpy = Vec3::Zero();
    if (t.contains("rpy")) rpy = vec3(t.at("rpy"), "target.rpy");
    s.target = poseFromXyzRpy(xyz, Rpy{rpy[0], rpy[1], rpy[2]});
  }
  if (j.contains("difficulty")) s.difficulty = parseDifficulty(j.at("difficulty").get<std::string>());
  s.sub_id = j.value("sub_scenario", 0);
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

Scenario loadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError(path + ": invalid JSON: " + e.what());
  }
  return scenarioFromJson(j);
}

void saveScenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write " + path);
  out << scenarioToJson(s).dump(2) << "\n";
}

Transform parseTargetPose(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ScenarioError("target: '" + item + "' is not a number");
    }
  }
  if (v.size() != 6) throw ScenarioError("target must be x,y,z,roll,pitch,yaw");
  return poseFromXyzRpy(Vec3(v[0], v[1], v[2]), Rpy{v[3], v[4], v[5]});
}

}  // namespace idrm
