#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "idrm/baselines.hpp"
#include "idrm/idrm_map.hpp"
#include "idrm/scenario.hpp"

namespace idrm {

enum class Planner { kIdrm, kIrm, kRp, kRdrm };
const char* plannerName(Planner p);
Planner parsePlanner(const std::string& s);  // throws Error
/// RP and R-DRM are randomised; the other two run once per sub-scenario.
inline bool isRandomized(Planner p) { return p == Planner::kRp || p == Planner::kRdrm; }

struct BenchConfig {
  std::string map_path;
  std::string robot_path;  // empty: built-in demo robot
  std::vector<Planner> planners{Planner::kIdrm, Planner::kIrm, Planner::kRp, Planner::kRdrm};
  std::vector<Difficulty> difficulties{Difficulty::kEasy, Difficulty::kMedium, Difficulty::kHard};
  int sub_scenarios = 10;
  int trials = 10;  // per randomised planner and sub-scenario
  std::uint64_t seed = 1;
  int max_candidates = 50;        // iDRM
  int irm_max_candidates = 1000;  // IRM
  int baseline_iterations = 1000; // RP and R-DRM placements
};

/// Reads a JSON config: {"map", "robot", "planners", "difficulties",
/// "sub_scenarios", "trials", "seed", "max_candidates",
/// "irm_max_candidates", "baseline_iterations"}. Throws Error.
BenchConfig benchConfigFromJson(const nlohmann::json& j);
BenchConfig loadBenchConfig(const std::string& path);

struct BenchRow {
  std::string planner;
  std::string difficulty;
  int sub_scenario = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  std::string outcome;
  int candidates_tried = 0;
  std::size_t free_count = 0;
  std::size_t feasible_count = 0;
  double endpose_time_s = 0.0;
  double collision_us = 0.0;
  double feasibility_us = 0.0;
  double selection_us = 0.0;
  double ik_us = 0.0;
};

struct BenchAggregate {
  std::string planner;
  std::string difficulty;
  int runs = 0;
  int successes = 0;
  double mean_time_s = 0.0;
  double median_time_s = 0.0;
  double mean_candidates = 0.0;
  double median_candidates = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchAggregate> aggregates;
};

double median(std::vector<double> v);

/// Mean and median per (planner, difficulty), in order of first appearance.
std::vector<BenchAggregate> aggregateRows(const std::vector<BenchRow>& rows);

/// Shared inputs for repeated benchmark runs. The forward DRM is built on
/// first use by an R-DRM cell.
struct BenchContext {
  const IdrmMap* map = nullptr;
  const RobotModel* robot = nullptr;
  std::unique_ptr<FixedBaseDrm> drm;
};

BenchRow runCell(BenchContext& ctx, Planner p, const Scenario& s, int trial, std::uint64_t seed,
                 const BenchConfig& cfg);

/// Runs every (planner, difficulty, sub-scenario[, trial]) cell. Timings
/// exclude map loading. Deterministic apart from timing columns.
BenchReport runBenchmark(BenchContext& ctx, const BenchConfig& cfg);

/// Fixed column order, one line per row.
extern const char* const kCsvHeader;
std::string csvLine(const BenchRow& r);
/// Appends rows; writes the header first when the file is new or empty.
/// Throws Error when the file cannot be written.
void appendCsv(const std::vector<BenchRow>& rows, const std::string& path);
std::vector<BenchRow> readCsv(const std::string& path);

}  // namespace idrm
