#include "idrm/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "idrm/error.hpp"

namespace idrm {

using nlohmann::json;

const char* plannerName(Planner p) {
  switch (p) {
    case Planner::kIdrm: return "idrm";
    case Planner::kIrm: return "irm";
    case Planner::kRp: return "rp";
    case Planner::kRdrm: return "rdrm";
  }
  return "unknown";
}

Planner parsePlanner(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "idrm") return Planner::kIdrm;
  if (l == "irm") return Planner::kIrm;
  if (l == "rp") return Planner::kRp;
  if (l == "rdrm" || l == "r-drm") return Planner::kRdrm;
  throw Error("unknown planner '" + s + "' (expected idrm, irm, rp or rdrm)");
}

BenchConfig benchConfigFromJson(const json& j) {
  if (!j.is_object()) throw Error("bench config must be a JSON object");
  BenchConfig c;
  try {
    c.map_path = j.at("map").get<std::string>();
    c.robot_path = j.value("robot", std::string());
    if (j.contains("planners")) {
      c.planners.clear();
      for (const auto& p : j.at("planners")) c.planners.push_back(parsePlanner(p.get<std::string>()));
    }
    if (j.contains("difficulties")) {
      c.difficulties.clear();
      for (const auto& d : j.at("difficulties")) c.difficulties.push_back(parseDifficulty(d.get<std::string>()));
    }
    c.sub_scenarios = j.value("sub_scenarios", c.sub_scenarios);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.max_candidates = j.value("max_candidates", c.max_candidates);
    c.irm_max_candidates = j.value("irm_max_candidates", c.irm_max_candidates);
    c.baseline_iterations = j.value("baseline_iterations", c.baseline_iterations);
  } catch (const json::exception& e) {
    throw Error(std::string("bench config: ") + e.what());
  }
  if (c.sub_scenarios < 1 || c.sub_scenarios > 10) throw Error("bench config: sub_scenarios must be in [1, 10]");
  if (c.trials < 1) throw Error("bench config: trials must be at least 1");
  return c;
}

BenchConfig loadBenchConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open bench config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(path + ": invalid JSON: " + e.what());
  }
  BenchConfig c = benchConfigFromJson(j);
  // Relative paths in the config are relative to the config file.
  const auto dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (dir / p).string();
  };
  resolve(c.map_path);
  resolve(c.robot_path);
  return c;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<BenchAggregate> aggregateRows(const std::vector<BenchRow>& rows) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<const BenchRow*>> groups;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.planner, r.difficulty);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<BenchAggregate> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    BenchAggregate a;
    a.planner = key.first;
    a.difficulty = key.second;
    std::vector<double> times, cands;
    for (const BenchRow* r : g) {
      ++a.runs;
      a.successes += r->success ? 1 : 0;
      times.push_back(r->endpose_time_s);
      cands.push_back(r->candidates_tried);
    }
    for (double t : times) a.mean_time_s += t / a.runs;
    for (double c : cands) a.mean_candidates += c / a.runs;
    a.median_time_s = median(times);
    a.median_candidates = median(cands);
    out.push_back(a);
  }
  return out;
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= h >> 31;
  h *= 0xbf58476d1ce4e5b9ull;
  return h ^ (h >> 29);
}

}  // namespace

BenchRow runCell(BenchContext& ctx, Planner p, const Scenario& s, int trial, std::uint64_t seed,
                 const BenchConfig& cfg) {
  const RobotModel& m = *ctx.robot;
  const IdrmMap& map = *ctx.map;
  const Configuration q0 = benchStart(m);
  PlanOptions opt;
  opt.max_candidates = cfg.max_candidates;
  BaselineBudget budget;
  budget.seed = seed;

  EndPoseResult r;
  switch (p) {
    case Planner::kIdrm: {
      EndPosePlanner planner(map, m);
      r = planner.plan(q0, s.target, s.env, opt);
      break;
    }
    case Planner::kIrm:
      budget.max_iterations = cfg.irm_max_candidates;
      r = irmPlan(map, m, q0, s.target, s.env, opt, budget);
      break;
    case Planner::kRp:
      budget.max_iterations = cfg.baseline_iterations;
      r = rpPlan(m, q0, s.target, s.env, budget);
      break;
    case Planner::kRdrm:
      if (!ctx.drm) ctx.drm = std::make_unique<FixedBaseDrm>(FixedBaseDrm::Build(m, map));
      budget.max_iterations = cfg.baseline_iterations;
      r = rdrmPlan(m, map, *ctx.drm, q0, s.target, s.env, budget);
      break;
  }
  BenchRow row;
  row.planner = plannerName(p);
  row.difficulty = difficultyName(s.difficulty);
  row.sub_scenario = s.sub_id;
  row.trial = trial;
  row.seed = seed;
  row.success = r.success();
  row.outcome = outcomeName(r.outcome);
  row.candidates_tried = r.candidates_tried;
  row.free_count = r.free_count;
  row.feasible_count = r.feasible_count;
  row.endpose_time_s = r.total_s;
  row.collision_us = r.timings.collision_us;
  row.feasibility_us = r.timings.feasibility_us;
  row.selection_us = r.timings.selection_us;
  row.ik_us = r.timings.ik_us;
  return row;
}

BenchReport runBenchmark(BenchContext& ctx, const BenchConfig& cfg) {
  if (!ctx.map || !ctx.robot) throw Error("benchmark needs a map and a robot");
  BenchReport rep;
  for (Difficulty d : cfg.difficulties) {
    for (int id = 0; id < cfg.sub_scenarios; ++id) {
      const Scenario s = generateScenario(d, id, cfg.seed);
      for (Planner p : cfg.planners) {
        const int trials = isRandomized(p) ? cfg.trials : 1;
        for (int t = 0; t < trials; ++t) {
          std::uint64_t seed = mix(mix(mix(mix(cfg.seed, static_cast<std::uint64_t>(p)), static_cast<std::uint64_t>(d)),
                                       static_cast<std::uint64_t>(id)),
                                   static_cast<std::uint64_t>(t));
          rep.rows.push_back(runCell(ctx, p, s, t, seed, cfg));
        }
      }
    }
  }
  rep.aggregates = aggregateRows(rep.rows);
  return rep;
}

const char* const kCsvHeader =
    "planner,difficulty,sub_scenario,trial,seed,success,outcome,candidates_tried,free_count,feasible_count,"
    "endpose_time_s,collision_us,feasibility_us,selection_us,ik_us";

std::string csvLine(const BenchRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%s,%d,%d,%llu,%d,%s,%d,%zu,%zu,%.9f,%.3f,%.3f,%.3f,%.3f", r.planner.c_str(),
                r.difficulty.c_str(), r.sub_scenario, r.trial, static_cast<unsigned long long>(r.seed),
                r.success ? 1 : 0, r.outcome.c_str(), r.candidates_tried, r.free_count, r.feasible_count,
                r.endpose_time_s, r.collision_us, r.feasibility_us, r.selection_us, r.ik_us);
  return buf;
}

void appendCsv(const std::vector<BenchRow>& rows, const std::string& path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write " + path);
  if (fresh) out << kCsvHeader << "\n";
  for (const auto& r : rows) out << csvLine(r) << "\n";
  if (!out) throw Error("write failed: " + path);
}

std::vector<BenchRow> readCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<BenchRow> rows;
  std::string line;
  std::getline(in, line);
  if (line != kCsvHeader) throw Error(path + ": unexpected CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 15) throw Error(path + ": malformed row: " + line);
    BenchRow r;
    r.planner = f[0];
    r.difficulty = f[1];
    r.sub_scenario = std::stoi(f[2]);
    r.trial = std::stoi(f[3]);
    r.seed = std::stoull(f[4]);
    r.success = f[5] == "1";
    r.outcome = f[6];
    r.candidates_tried = std::stoi(f[7]);
    r.free_count = std::stoull(f[8]);
    r.feasible_count = std::stoull(f[9]);
    r.endpose_time_s = std::stod(f[10]);
    r.collision_us = std::stod(f[11]);
    r.feasibility_us = std::stod(f[12]);
    r.selection_us = std::stod(f[13]);
    r.ik_us = std::stod(f[14]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace idrm
