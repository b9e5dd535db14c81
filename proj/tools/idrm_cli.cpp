// idrm command-line tool: build, query, bench, inspect, scenario, robot.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "idrm/bench.hpp"
#include "idrm/error.hpp"
#include "idrm/robot_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

idrm::RobotModel robotOrDemo(const std::string& path) {
  return path.empty() ? idrm::demoRobot() : idrm::loadRobot(path);
}

void printHistogram(const char* title, const idrm::VoxelLists& l) {
  const std::size_t edges[] = {1, 10, 100, 1000, 10000, 100000};
  std::size_t counts[7] = {};
  std::size_t longest = 0;
  for (std::size_t v = 0; v < l.voxelCount(); ++v) {
    const std::size_t n = l.list(static_cast<idrm::VoxelId>(v)).size();
    longest = std::max(longest, n);
    int b = 0;
    while (b < 6 && n >= edges[b]) ++b;
    ++counts[b];
  }
  std::printf("%s (entries %zu, longest list %zu)\n", title, l.entries.size(), longest);
  const char* labels[] = {"0", "1-9", "10-99", "100-999", "1e3-1e4", "1e4-1e5", ">=1e5"};
  for (int b = 0; b < 7; ++b) std::printf("  %-8s %zu\n", labels[b], counts[b]);
}

int cmdBuild(const std::string& robot, std::size_t samples, double res, double extent, std::uint64_t seed,
             int orientations, const std::string& out) {
  const idrm::RobotModel m = robotOrDemo(robot);
  idrm::SamplingParams p;
  p.count = samples;
  p.seed = seed;
  p.orientations = orientations;
  idrm::SamplingStats st;
  const idrm::IdrmMap map = idrm::buildIdrm(m, p, res, extent, &st);
  idrm::MemoryBreakdown mb;
  idrm::saveMap(map, out, &mb);
  std::printf("samples %zu, attempts %zu, acceptance %.4f (IK failures %zu, outside grid %zu)\n", map.size(),
              st.attempts, st.acceptanceRate(), st.ik_failures, st.outside_grid);
  std::printf("wrote %s (%zu bytes)\n", out.c_str(), mb.total());
  return kExitOk;
}

int cmdQuery(const std::string& map_path, const std::string& robot, const std::string& env_path,
             const std::string& target, const std::string& planner, std::uint64_t seed, int budget) {
  const idrm::RobotModel m = robotOrDemo(robot);
  const idrm::IdrmMap map = idrm::loadMap(map_path, &m);
  idrm::Scenario s = env_path.empty() ? idrm::Scenario{} : idrm::loadScenario(env_path);
  if (!target.empty()) s.target = idrm::parseTargetPose(target);
  else if (env_path.empty()) throw idrm::ScenarioError("a target pose is required (--target or a scenario file)");
  const idrm::Configuration q0 = idrm::benchStart(m);
  idrm::PlanOptions opt;
  idrm::BaselineBudget b;
  b.seed = seed;
  if (budget > 0) b.max_iterations = budget;
  idrm::EndPoseResult r;
  switch (idrm::parsePlanner(planner)) {
    case idrm::Planner::kIdrm: r = idrm::planEndPose(map, m, q0, s.target, s.env, opt); break;
    case idrm::Planner::kIrm: r = idrm::irmPlan(map, m, q0, s.target, s.env, opt, b); break;
    case idrm::Planner::kRp: r = idrm::rpPlan(m, q0, s.target, s.env, b); break;
    case idrm::Planner::kRdrm: {
      const auto drm = idrm::FixedBaseDrm::Build(m, map);
      r = idrm::rdrmPlan(m, map, drm, q0, s.target, s.env, b);
      break;
    }
  }
  nlohmann::json j = idrm::resultToJson(r);
  j["planner"] = planner;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmdBench(const std::string& config, const std::string& out) {
  const idrm::BenchConfig cfg = idrm::loadBenchConfig(config);
  const idrm::RobotModel m = robotOrDemo(cfg.robot_path);
  const idrm::IdrmMap map = idrm::loadMap(cfg.map_path, &m);
  idrm::BenchContext ctx{&map, &m, nullptr};
  const idrm::BenchReport rep = idrm::runBenchmark(ctx, cfg);
  idrm::appendCsv(rep.rows, out);
  std::printf("%-6s %-7s %5s %9s %14s %14s %12s\n", "plan", "level", "runs", "success", "median_s", "mean_s",
              "median_cand");
  for (const auto& a : rep.aggregates)
    std::printf("%-6s %-7s %5d %9d %14.6f %14.6f %12.1f\n", a.planner.c_str(), a.difficulty.c_str(), a.runs,
                a.successes, a.median_time_s, a.mean_time_s, a.median_candidates);
  std::printf("appended %zu rows to %s\n", rep.rows.size(), out.c_str());
  return kExitOk;
}

int cmdInspect(const std::string& map_path, const std::string& robot) {
  std::unique_ptr<idrm::RobotModel> m;
  if (!robot.empty()) m = std::make_unique<idrm::RobotModel>(idrm::loadRobot(robot));
  idrm::MemoryBreakdown mb;
  const idrm::IdrmMap map = idrm::loadMap(map_path, m.get(), &mb);
  const auto& g = map.grid();
  std::printf("map %s\n", map_path.c_str());
  std::printf("  samples M        %zu\n", map.size());
  std::printf("  dof N            %ld\n", static_cast<long>(map.sample(0).q.joints.size()));
  std::printf("  voxels k         %zu (%d x %d x %d)\n", g.count(), g.dims()[0], g.dims()[1], g.dims()[2]);
  std::printf("  resolution       %.4f m\n", g.resolution());
  std::printf("  extent           %.4f m\n", map.meta().extent);
  std::printf("  origin           %.4f %.4f %.4f\n", g.origin().x(), g.origin().y(), g.origin().z());
  std::printf("  orientations K   %u\n", map.meta().orientations);
  std::printf("  seed             %llu\n", static_cast<unsigned long long>(map.meta().seed));
  std::printf("  robot digest     %016llx\n", static_cast<unsigned long long>(map.meta().robot_digest));
  printHistogram("reach list sizes", map.reach());
  printHistogram("occupation list sizes", map.occupation());
  const double total = static_cast<double>(mb.total());
  auto row = [&](const char* name, std::size_t b) {
    std::printf("  %-18s %12zu bytes %6.2f%%\n", name, b, 100.0 * static_cast<double>(b) / total);
  };
  std::printf("memory breakdown\n");
  row("header", mb.header);
  row("configurations", mb.configurations);
  row("sample metadata", mb.sample_metadata);
  row("reach lists", mb.reach_lists);
  row("occupation lists", mb.occupation_lists);
  row("total", mb.total());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse dynamic reachability map: build, query and benchmark end-pose planning"};
  app.require_subcommand(1);

  std::string robot, out, map_path, env_path, target, planner = "idrm", config, difficulty = "easy";
  std::size_t samples = 100000;
  double res = 0.1, extent = 2.0;
  std::uint64_t seed = 1;
  int orientations = 32, budget = 0, id = 0;

  auto* build = app.add_subcommand("build", "sample postures and build a map");
  build->add_option("--robot", robot, "robot description (JSON); default: built-in demo robot");
  build->add_option("--samples", samples, "number of samples M")->check(CLI::PositiveNumber);
  build->add_option("--resolution", res, "voxel size in metres")->check(CLI::PositiveNumber);
  build->add_option("--extent", extent, "grid side length in metres")->check(CLI::PositiveNumber);
  build->add_option("--seed", seed, "sampling seed");
  build->add_option("--orientations", orientations, "orientation set size K")->check(CLI::PositiveNumber);
  build->add_option("--out", out, "output map file")->required();

  auto* query = app.add_subcommand("query", "plan one end-pose and print a JSON report");
  query->add_option("--map", map_path, "map file")->required();
  query->add_option("--robot", robot, "robot description (JSON)");
  query->add_option("--env", env_path, "scenario or environment file (JSON)");
  query->add_option("--target", target, "target pose x,y,z,roll,pitch,yaw");
  query->add_option("--planner", planner, "idrm | irm | rp | rdrm");
  query->add_option("--seed", seed, "seed for randomised planners");
  query->add_option("--budget", budget, "iteration budget for baselines");

  auto* bench = app.add_subcommand("bench", "run the benchmark and append CSV rows");
  bench->add_option("--config", config, "benchmark config (JSON)")->required();
  bench->add_option("--out", out, "CSV report (appended)")->required();

  auto* inspect = app.add_subcommand("inspect", "print map header, list histograms and memory breakdown");
  inspect->add_option("--map", map_path, "map file")->required();
  inspect->add_option("--robot", robot, "check the map against this robot description");

  auto* scen = app.add_subcommand("scenario", "write a generated benchmark scenario");
  scen->add_option("--difficulty", difficulty, "easy | medium | hard");
  scen->add_option("--id", id, "sub-scenario id in [0, 10)");
  scen->add_option("--seed", seed, "scenario seed");
  scen->add_option("--out", out, "output file")->required();

  auto* rob = app.add_subcommand("robot", "write the built-in demo robot description");
  rob->add_option("--out", out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) return cmdBuild(robot, samples, res, extent, seed, orientations, out);
    if (*query) return cmdQuery(map_path, robot, env_path, target, planner, seed, budget);
    if (*bench) return cmdBench(config, out);
    if (*inspect) return cmdInspect(map_path, robot);
    if (*scen) {
      idrm::saveScenario(idrm::generateScenario(idrm::parseDifficulty(difficulty), id, seed), out);
      return kExitOk;
    }
    if (*rob) {
      idrm::saveRobot(idrm::demoRobot(), out);
      return kExitOk;
    }
  } catch (const idrm::MapFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const idrm::RobotModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const idrm::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const idrm::SamplingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const idrm::BuildError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const idrm::DimensionError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const idrm::GimbalLockError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const idrm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
