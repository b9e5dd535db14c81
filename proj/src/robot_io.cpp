#include "idrm/robot_io.hpp"

#include <fstream>

#include "idrm/error.hpp"

namespace idrm {

using nlohmann::json;

namespace {

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw RobotModelError(path + "." + key, "missing field");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw RobotModelError(path, "expected a number");
  return j.get<double>();
}

Vec3 vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw RobotModelError(path, "expected an array of 3 numbers");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

Transform pose(const json& j, const std::string& path) {
  Vec3 xyz = Vec3::Zero();
  Vec3 rpy = Vec3::Zero();
  if (j.contains("xyz")) xyz = vec3(j.at("xyz"), path + ".xyz");
  if (j.contains("rpy")) rpy = vec3(j.at("rpy"), path + ".rpy");
  return poseFromXyzRpy(xyz, Rpy{rpy[0], rpy[1], rpy[2]});
}

json poseJson(const Transform& t) {
  const Rpy r = rpyOf(t);
  const Vec3& p = t.translation;
  return {{"xyz", {p.x(), p.y(), p.z()}}, {"rpy", {r.roll, r.pitch, r.yaw}}};
}

json vecJson(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Link link(const json& j, const std::string& path) {
  Link l;
  l.mass = number(field(j, "mass", path), path + ".mass");
  if (j.contains("com")) l.com = vec3(j.at("com"), path + ".com");
  const json& spheres = field(j, "spheres", path);
  if (!spheres.is_array()) throw RobotModelError(path + ".spheres", "expected an array");
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    const std::string sp = path + ".spheres[" + std::to_string(i) + "]";
    l.spheres.push_back({vec3(field(spheres[i], "center", sp), sp + ".center"),
                         number(field(spheres[i], "radius", sp), sp + ".radius")});
  }
  return l;
}

json linkJson(const Link& l) {
  json spheres = json::array();
  for (const auto& s : l.spheres) spheres.push_back({{"center", vecJson(s.center)}, {"radius", s.radius}});
  return {{"mass", l.mass}, {"com", vecJson(l.com)}, {"spheres", spheres}};
}

}  // namespace

RobotModel robotFromJson(const json& j) {
  RobotModel m;
  if (!j.is_object()) throw RobotModelError("$", "robot description must be an object");
  m.name = j.value("name", std::string("robot"));
  m.base_link = link(field(j, "base_link", "$"), "base_link");
  const json& joints = field(j, "joints", "$");
  if (!joints.is_array()) throw RobotModelError("joints", "expected an array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string p = "joints[" + std::to_string(i) + "]";
    const json& jj = joints[i];
    Joint jt;
    jt.name = jj.value("name", "joint" + std::to_string(i));
    jt.axis = vec3(field(jj, "axis", p), p + ".axis");
    if (jj.contains("origin")) jt.origin = pose(jj.at("origin"), p + ".origin");
    const json& lim = field(jj, "limits", p);
    if (!lim.is_array() || lim.size() != 2) throw RobotModelError(p + ".limits", "expected [lower, upper]");
    jt.lower = number(lim[0], p + ".limits[0]");
    jt.upper = number(lim[1], p + ".limits[1]");
    m.joints.push_back(jt);
    m.links.push_back(link(field(jj, "link", p), p + ".link"));
  }
  if (j.contains("stance_offset")) m.stance_offset = pose(j.at("stance_offset"), "stance_offset");
  if (j.contains("effector_offset")) m.effector_offset = pose(j.at("effector_offset"), "effector_offset");
  const json& poly = field(j, "support_polygon", "$");
  if (!poly.is_array()) throw RobotModelError("support_polygon", "expected an array");
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const std::string p = "support_polygon[" + std::to_string(i) + "]";
    if (!poly[i].is_array() || poly[i].size() != 2) throw RobotModelError(p, "expected [x, y]");
    m.support_polygon.emplace_back(number(poly[i][0], p + "[0]"), number(poly[i][1], p + "[1]"));
  }
  const json& nom = field(j, "nominal", "$");
  if (!nom.is_array()) throw RobotModelError("nominal", "expected an array");
  m.nominal.resize(static_cast<Eigen::Index>(nom.size()));
  for (std::size_t i = 0; i < nom.size(); ++i)
    m.nominal[static_cast<Eigen::Index>(i)] = number(nom[i], "nominal[" + std::to_string(i) + "]");
  m.validate();
  return m;
}

json robotToJson(const RobotModel& m) {
  json joints = json::array();
  for (int i = 0; i < m.dof(); ++i) {
    const Joint& jt = m.joints[i];
    joints.push_back({{"name", jt.name},
                      {"axis", vecJson(jt.axis)},
                      {"origin", poseJson(jt.origin)},
                      {"limits", {jt.lower, jt.upper}},
                      {"link", linkJson(m.links[i])}});
  }
  json poly = json::array();
  for (const auto& p : m.support_polygon) poly.push_back({p.x(), p.y()});
  json nom = json::array();
  for (int i = 0; i < m.nominal.size(); ++i) nom.push_back(m.nominal[i]);
  return {{"name", m.name},
          {"base_link", linkJson(m.base_link)},
          {"joints", joints},
          {"stance_offset", poseJson(m.stance_offset)},
          {"effector_offset", poseJson(m.effector_offset)},
          {"support_polygon", poly},
          {"nominal", nom}};
}

RobotModel loadRobot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RobotModelError(path, "cannot open robot description");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw RobotModelError(path, std::string("invalid JSON: ") + e.what());
  }
  return robotFromJson(j);
}

void saveRobot(const RobotModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << robotToJson(m).dump(2) << "\n";
}

std::uint64_t robotDigest(const RobotModel& m) {
  const std::string s = robotToJson(m).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RobotModel demoRobot() {
  RobotModel m;
  m.name = "demo9";
  m.base_link.mass = 25.0;
  m.base_link.com = {0, 0, -0.35};
  m.base_link.spheres = {{{0, 0, 0}, 0.12},          {{0, 0.1, -0.25}, 0.08}, {{0, -0.1, -0.25}, 0.08},
                         {{0, 0.1, -0.55}, 0.07},    {{0, -0.1, -0.55}, 0.07},
                         {{0.04, 0.1, -0.82}, 0.06}, {{0.04, -0.1, -0.82}, 0.06}};
  m.stance_offset = Transform::FromTranslation({0, 0, -0.9});

  auto add = [&](const char* name, Vec3 axis, Vec3 origin, double lo, double hi, Link l) {
    Joint j;
    j.name = name;
    j.axis = axis;
    j.origin = Transform::FromTranslation(origin);
    j.lower = lo;
    j.upper = hi;
    m.joints.push_back(j);
    m.links.push_back(std::move(l));
  };
  add("torso_yaw", Vec3::UnitZ(), {0, 0, 0.1}, -1.2, 1.2, {{{{0, 0, 0.03}, 0.1}}, 2.0, {0, 0, 0.03}});
  add("torso_pitch", Vec3::UnitY(), {0, 0, 0.08}, -0.3, 1.0,
      {{{{0, 0, 0.12}, 0.12}, {{0, 0, 0.32}, 0.12}, {{0, 0, 0.52}, 0.1}}, 15.0, {0, 0, 0.2}});
  add("shoulder_pitch", Vec3::UnitY(), {0, -0.22, 0.38}, -3.0, 1.0, {{{{0, 0, 0}, 0.07}}, 1.5, {0, 0, 0}});
  add("shoulder_roll", Vec3::UnitX(), {0, 0, 0}, -1.6, 0.25, {{{{0, 0, -0.15}, 0.06}}, 2.0, {0, 0, -0.15}});
  add("shoulder_yaw", Vec3::UnitZ(), {0, 0, -0.16}, -1.6, 1.6, {{{{0, 0, -0.1}, 0.05}}, 1.0, {0, 0, -0.08}});
  add("elbow", Vec3::UnitY(), {0, 0, -0.16}, -2.3, 0.0,
      {{{{0, 0, -0.08}, 0.05}, {{0, 0, -0.2}, 0.05}}, 1.2, {0, 0, -0.12}});
  add("wrist_yaw", Vec3::UnitZ(), {0, 0, -0.28}, -2.5, 2.5, {{{{0, 0, 0}, 0.035}}, 0.3, {0, 0, 0}});
  add("wrist_pitch", Vec3::UnitY(), {0, 0, -0.04}, -1.6, 1.6, {{{{0, 0, -0.03}, 0.03}}, 0.3, {0, 0, -0.03}});
  add("wrist_roll", Vec3::UnitX(), {0, 0, -0.05}, -1.6, 1.6, {{{{0, 0, -0.06}, 0.045}}, 0.4, {0, 0, -0.06}});
  m.effector_offset = Transform::FromTranslation({0, 0, -0.12});
  m.support_polygon = {{-0.1, -0.2}, {0.2, -0.2}, {0.2, 0.2}, {-0.1, 0.2}};
  m.nominal.resize(9);
  m.nominal << 0.0, 0.1, -0.6, -0.15, 0.0, -1.2, 0.0, -0.3, 0.0;
  m.validate();
  return m;
}

}  // namespace idrm
