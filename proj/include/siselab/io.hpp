#pragma once

#include "siselab/linear_system.hpp"
#include "siselab/sise.hpp"
#include "siselab/simulate.hpp"

#include <string>
#include <vector>

namespace siselab {

// System JSON: object with keys "A","G","C","H","Q","R" as row-major nested
// arrays ("H" may be omitted for a zero-feedthrough plant), optional "B","D".
// Dimensions are inferred; unknown keys are rejected.
LinearSystem read_system_json(const std::string& path);
void write_system_json(const std::string& path, const LinearSystem& sys);

// Trajectory CSV: header t,x_1..x_n,d_1..d_m,y_1..y_p, one row per step,
// every value printed with 17 significant digits (round-trip exact).
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

// Extracts just the y columns (accepts a full trajectory CSV or a reduced
// t,y_1..y_p file).
std::vector<Vector> read_measurements_csv(const std::string& path, int p);

// Estimates CSV: t,xhat_1..xhat_n,dhat_1..dhat_m,trP.
void write_estimates_csv(const std::string& path, const Estimates& est);

// Optional per-step gain dump, one JSON object per line.
void write_gains_jsonl(const std::string& path, const Estimates& est);

// 17-significant-digit decimal (round-trips a double exactly).
std::string format_double(double v);

}  // namespace siselab
