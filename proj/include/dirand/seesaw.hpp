#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dirand/guessprob.hpp"
#include "dirand/qstate.hpp"

namespace dirand {

struct SeesawOptions {
  double epsilon = 1e-6;           // stop once g_0 − g_1 ≤ epsilon
  int max_iterations = 50;         // outer iterations per start
  int starts = 8;                  // the first start uses canonical settings
  std::uint64_t seed = 0;
  double inner_tolerance = 1e-10;  // alternation stop for update_measurements
  int inner_max_passes = 500;
  sdp::SolverOptions solver = seesaw_solver_options();

  static sdp::SolverOptions seesaw_solver_options() {
    sdp::SolverOptions o = default_guess_options();
    o.tolerance = 1e-9;
    return o;
  }
};

/// One start of the see-saw: its initial settings and the guessing
/// probability after every outer iteration.
struct StartTrace {
  int start = 0;
  MeasurementSet initial = canonical_settings();
  MeasurementSet best = canonical_settings();
  double best_g = 1.0;
  std::vector<double> g;
  bool converged = false;
  bool aborted = false;
  std::string message;
};

struct OptResult {
  MeasurementSet best_meas = canonical_settings();
  GuessReport best_report;
  std::vector<double> trajectory;  // of the start that produced best_meas
  int best_start = -1;
  int starts_used = 0;
  bool converged = false;          // g_0 − g_1 ≤ epsilon reached on the best start
  std::vector<StartTrace> starts;
};

/// Minimizes f·p(π) over the measurements by exact one-sided updates,
/// alternating between Alice and Bob until the decrease is at most tolerance.
/// A projector is left unchanged when both eigenvalues of its update operator
/// coincide.
MeasurementSet update_measurements(const BellExpression& f, const DensityMatrix& state, const MeasurementSet& meas,
                                   double tolerance = 1e-10, int max_passes = 500);

/// Multistart see-saw over planar measurements: alternately certify the
/// current behavior and move the measurements against the certificate.
OptResult optimize(const DensityMatrix& state, int mx, int my, int level, int xstar, int ystar,
                   const SeesawOptions& opts = {});

struct TomographicOptimum {
  double alice_angle = 0.0;
  double bob_angle = 0.0;
  GuessReport report;
};

/// Grid scan of the tomographic program over (α, β) ∈ [0, π)², then a
/// shrinking pattern search down to refine_tolerance.
TomographicOptimum tomographic_optimize(const DensityMatrix& state, int grid_size = 24, double refine_tolerance = 1e-5);

/// Trace CSV `start,iteration,g,hmin` over all starts.
void write_trace_csv(std::ostream& out, const OptResult& r);

}  // namespace dirand
