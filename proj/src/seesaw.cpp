#include "dirand/seesaw.hpp"

#include <cmath>
#include <algorithm>
#include <iostream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace dirand {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double angle, double period) {
  double a = std::fmod(angle, period);
  if (a < 0.0) a += period;
  return a;
}

// Angle of the planar projector onto the real unit vector u.
double projector_angle(const Eigen::Vector2d& u) { return wrap(2.0 * std::atan2(u(1), u(0)), kTwoPi); }

// R with tr[ρ(π ⊗ B)] = tr(π R) when alice is true, tr[ρ(A ⊗ π)] = tr(π R)
// otherwise.
Eigen::Matrix2d partial(const Eigen::Matrix4d& rho, const Eigen::Matrix2d& op, bool alice) {
  Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          if (alice)
            r(i, j) += rho(2 * i + k, 2 * j + l) * op(l, k);
          else
            r(k, l) += rho(2 * i + k, 2 * j + l) * op(j, i);
        }
  return r;
}

// Best +1 projector angle for one input given its update operator Δ; keeps
// the current angle on ties or when it is already optimal.
double best_angle(const Eigen::Matrix2d& delta, double current) {
  const auto eig = num::sym_eig(num::SymMatrix(Eigen::MatrixXd(0.5 * (delta + delta.transpose()))));
  const double spread = eig.values(1) - eig.values(0);
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  if (spread <= 1e-14 * scale) return current;
  const double candidate = projector_angle(eig.vectors.col(0));
  const double now = (bloch_projector(current, +1).cwiseProduct(delta)).sum();
  if (now <= eig.values(0) + 1e-15 * scale) return current;
  return candidate;
}

double objective(const BellExpression& f, const DensityMatrix& state, const MeasurementSet& meas) {
  return f.evaluate(behavior(state, meas));
}

}  // namespace

MeasurementSet update_measurements(const BellExpression& f, const DensityMatrix& state, const MeasurementSet& meas,
                                   double tolerance, int max_passes) {
  if (f.mx != meas.mx() || f.my != meas.my())
    throw InputError("update_measurements: Bell expression is for a " + std::to_string(f.mx) + "x" +
                     std::to_string(f.my) + " scenario, measurements are " + std::to_string(meas.mx()) + "x" +
                     std::to_string(meas.my()));
  if (f.coeffs.size() != 4u * static_cast<std::size_t>(f.mx * f.my))
    throw InputError("update_measurements: coefficient vector has the wrong length");
  const Eigen::Matrix4d& rho = state.entries();
  const int mx = f.mx, my = f.my;
  auto coeff = [&](int a, int b, int x, int y) { return f.coeffs[Behavior::component_index(mx, my, a, b, x, y)]; };

  std::vector<double> alice = meas.alice_angles();
  std::vector<double> bob = meas.bob_angles();
  double value = objective(f, state, meas);
  for (int pass = 0; pass < max_passes; ++pass) {
    for (int x = 0; x < mx; ++x) {
      Eigen::Matrix2d delta = Eigen::Matrix2d::Zero();
      for (int a : {-1, 1}) {
        Eigen::Matrix2d op = Eigen::Matrix2d::Zero();
        for (int y = 0; y < my; ++y)
          for (int b : {-1, 1}) op += coeff(a, b, x, y) * bloch_projector(bob[static_cast<std::size_t>(y)], b);
        delta += a * partial(rho, op, true);
      }
      alice[static_cast<std::size_t>(x)] = best_angle(delta, alice[static_cast<std::size_t>(x)]);
    }
    for (int y = 0; y < my; ++y) {
      Eigen::Matrix2d delta = Eigen::Matrix2d::Zero();
      for (int b : {-1, 1}) {
        Eigen::Matrix2d op = Eigen::Matrix2d::Zero();
        for (int x = 0; x < mx; ++x)
          for (int a : {-1, 1}) op += coeff(a, b, x, y) * bloch_projector(alice[static_cast<std::size_t>(x)], a);
        delta += b * partial(rho, op, false);
      }
      bob[static_cast<std::size_t>(y)] = best_angle(delta, bob[static_cast<std::size_t>(y)]);
    }
    const double next = objective(f, state, MeasurementSet(alice, bob));
    const bool done = value - next <= tolerance;
    value = next;
    if (done) break;
  }
  return MeasurementSet(std::move(alice), std::move(bob));
}

OptResult optimize(const DensityMatrix& state, int mx, int my, int level, int xstar, int ystar,
                   const SeesawOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw InputError("optimize: epsilon must be > 0");
  if (opts.starts < 1) throw InputError("optimize: at least one start is required");
  if (opts.max_iterations < 1) throw InputError("optimize: the iteration cap must be positive");
  GuessingProgram program(mx, my, level, xstar, ystar);

  OptResult result;
  double best_g = std::numeric_limits<double>::infinity();
  for (int s = 0; s < opts.starts; ++s) {
    StartTrace trace;
    trace.start = s;
    if (s == 0) {
      trace.initial = canonical_settings(mx, my);
    } else {
      std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                        static_cast<std::uint32_t>(s)};
      std::mt19937_64 gen(seq);
      std::uniform_real_distribution<double> angle(0.0, kTwoPi);
      std::vector<double> a(static_cast<std::size_t>(mx)), b(static_cast<std::size_t>(my));
      for (double& t : a) t = angle(gen);
      for (double& t : b) t = angle(gen);
      trace.initial = MeasurementSet(std::move(a), std::move(b));
    }
    ++result.starts_used;

    MeasurementSet meas = trace.initial;
    GuessReport rep = program.solve(behavior(state, meas), opts.solver);
    if (!rep.usable()) {
      trace.aborted = true;
      trace.message = "solver " + sdp::to_string(rep.status) + " at the initial settings";
      std::clog << "optimize: start " << s << " aborted: " << trace.message << '\n';
      result.starts.push_back(std::move(trace));
      continue;
    }
    // g is the certified bound: the smaller of the new dual value and the
    // previous certificate evaluated at the new behavior.
    double g0 = rep.dual_bound;
    BellExpression f = rep.bell_expression;
    trace.g.push_back(g0);
    trace.best = meas;
    trace.best_g = g0;
    GuessReport start_best = rep;
    for (int it = 0; it < opts.max_iterations; ++it) {
      MeasurementSet next = update_measurements(f, state, meas, opts.inner_tolerance, opts.inner_max_passes);
      const Behavior p = behavior(state, next);
      GuessReport next_rep = program.solve(p, opts.solver);
      if (!next_rep.usable()) {
        trace.aborted = true;
        trace.message = "solver " + sdp::to_string(next_rep.status) + " at iteration " + std::to_string(it + 1);
        std::clog << "optimize: start " << s << " aborted: " << trace.message << '\n';
        break;
      }
      const double carried = f.evaluate(p);
      const double g1 = std::min(next_rep.dual_bound, carried);
      if (next_rep.dual_bound <= carried) f = next_rep.bell_expression;
      trace.g.push_back(g1);
      if (g1 < trace.best_g) {
        trace.best_g = g1;
        trace.best = next;
        start_best = next_rep;
      }
      if (g0 - g1 <= opts.epsilon) {
        trace.converged = true;
        break;
      }
      meas = std::move(next);
      g0 = g1;
    }
    if (trace.best_g < best_g) {
      best_g = trace.best_g;
      result.best_meas = trace.best;
      result.best_report = start_best;
      result.trajectory = trace.g;
      result.best_start = s;
      result.converged = trace.converged;
    }
    result.starts.push_back(std::move(trace));
  }
  if (result.best_start < 0) throw NumericalError("optimize: every start failed in the solver");
  return result;
}

TomographicOptimum tomographic_optimize(const DensityMatrix& state, int grid_size, double refine_tolerance) {
  if (grid_size < 8) throw InputError("tomographic_optimize: grid_size must be at least 8");
  if (!(refine_tolerance > 0.0)) throw InputError("tomographic_optimize: refine_tolerance must be positive");
  constexpr double kPi = std::numbers::pi;
  const sdp::SolverOptions opts = default_guess_options();

  auto evaluate = [&](double a, double b) {
    TomographicOptimum t;
    t.alice_angle = wrap(a, kPi);
    t.bob_angle = wrap(b, kPi);
    t.report = tomographic_guessing(state, t.alice_angle, t.bob_angle, opts);
    return t;
  };
  auto value = [](const TomographicOptimum& t) {
    return t.report.usable() ? t.report.guessing_probability : std::numeric_limits<double>::infinity();
  };

  const double step = kPi / grid_size;
  std::vector<TomographicOptimum> grid;
  grid.reserve(static_cast<std::size_t>(grid_size * grid_size));
  for (int i = 0; i < grid_size; ++i)
    for (int j = 0; j < grid_size; ++j) grid.push_back(evaluate(i * step, j * step));
  std::stable_sort(grid.begin(), grid.end(),
                   [&](const TomographicOptimum& l, const TomographicOptimum& r) { return value(l) < value(r); });
  if (!std::isfinite(value(grid.front()))) throw NumericalError("tomographic_optimize: no grid point solved");

  // The objective is a pointwise maximum and has ridges, so the local search
  // polls many directions and starts from several grid cells.
  constexpr int kDirections = 32;
  constexpr std::size_t kSeeds = 4;
  TomographicOptimum best = grid.front();
  for (std::size_t s = 0; s < std::min(kSeeds, grid.size()); ++s) {
    TomographicOptimum cur = grid[s];
    if (!std::isfinite(value(cur))) break;
    double h = step;
    while (h > refine_tolerance) {
      bool moved = false;
      for (int d = 0; d < kDirections; ++d) {
        const double phi = kTwoPi * d / kDirections;
        TomographicOptimum t = evaluate(cur.alice_angle + h * std::cos(phi), cur.bob_angle + h * std::sin(phi));
        if (value(t) < value(cur)) {
          cur = std::move(t);
          moved = true;
        }
      }
      if (!moved) h *= 0.5;
    }
    if (value(cur) < value(best)) best = std::move(cur);
  }
  return best;
}

void write_trace_csv(std::ostream& out, const OptResult& r) {
  out << "start,iteration,g,hmin\n";
  out.precision(12);
  for (const StartTrace& t : r.starts)
    for (std::size_t i = 0; i < t.g.size(); ++i) out << t.start << ',' << i << ',' << t.g[i] << ',' << -std::log2(t.g[i]) << '\n';
}

}  // namespace dirand
