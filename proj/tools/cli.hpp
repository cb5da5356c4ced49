#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

#include "dirand/guessprob.hpp"
#include "dirand/qstate.hpp"

namespace dirand::cli {

enum ExitCode { kSuccess = 0, kInputError = 1, kNumericalFailure = 2 };

/// Parses a grid expression: a comma list of values, or `start:stop:count`
/// for count evenly spaced values including both ends. Values may use `pi`,
/// as in `pi/4`, `3pi/16` or `0.5*pi`. Throws InputError on malformed input.
std::vector<double> parse_grid(const std::string& text);

/// One scalar in the same syntax as a grid element.
double parse_value(const std::string& text);

/// Resolved settings for one invocation. Inputs x*, y* are zero-based here;
/// the command line and the files use one-based inputs.
struct RunConfig {
  std::string subcommand;
  std::vector<double> v{1.0};
  std::vector<double> theta{0.7853981633974483};
  int mx = 2;
  int my = 2;
  int xstar = 0;
  int ystar = 0;
  int level = 2;
  double tolerance = 1e-8;
  int max_solver_iterations = 300;
  double epsilon = 1e-6;
  int starts = 8;
  std::uint64_t seed = 0;
  int max_iterations = 50;
  int threads = 0;  // 0: hardware concurrency
  std::string out;
  std::string trace;
  std::string behavior;
  std::vector<double> alice;
  std::vector<double> bob;
  std::string bell = "chsh";
  std::vector<double> bell_values;
  double beta = 0.0;
  bool beta_from_theta = true;
  int grid_size = 24;
  double refine_tolerance = 1e-5;
  int map_size = 0;  // 0: no angle maps

  sdp::SolverOptions solver_options() const;
};

/// Parses argv into a RunConfig with precedence command line > config file >
/// defaults and validates every range. Throws InputError on bad input.
/// Returns false when only help was requested.
bool parse_arguments(int argc, const char* const* argv, RunConfig& config, std::ostream& out);

/// Full entry point: parse, run the subcommand, map errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_certify(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_optimize(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_tomography(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_bellbound(const RunConfig& c, std::ostream& out, std::ostream& err);

/// Planar settings reaching the largest CHSH value of ρ(v,θ).
MeasurementSet max_chsh_settings(double v, double theta, int mx, int my);

/// Runs task(i) for i in [0, n) on a pool of workers. Results are written by
/// index, so output order never depends on completion order.
template <class Result>
std::vector<Result> parallel_map(std::size_t n, int threads, const std::function<Result(std::size_t)>& task) {
  std::vector<Result> results(n);
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                     : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = task(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  if (workers > 0) work();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace dirand::cli
