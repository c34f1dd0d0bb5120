// Command entry points for the isocurve tool.
#pragma once

#include <cstdint>
#include <string>

namespace isocurve {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitRegression = 4;

struct RunConfig {
  std::string command;
  std::string surface_path;
  double c = 1.0;
  std::string out_dir = ".";
  int grid = 64;
  double tol = -1.0;  // negative = per-command default
  std::uint64_t seed = 20240817;
  std::string format = "csv,json,svg";
};

int cmd_solve(const RunConfig& cfg);
int cmd_region_plot(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);

int run_cli(int argc, const char* const* argv);

}  // namespace isocurve
