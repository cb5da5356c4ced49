#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "dirand/analytic.hpp"
#include "dirand/seesaw.hpp"

namespace dirand::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct Point {
  double v;
  double theta;
};

std::vector<Point> grid_points(const RunConfig& c) {
  std::vector<Point> pts;
  for (double v : c.v)
    for (double t : c.theta) pts.push_back({v, t});
  return pts;
}

std::string join(const std::vector<double>& xs, char sep = ';') {
  std::ostringstream s;
  s << std::setprecision(12);
  for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? std::string(1, sep) : "") << xs[i];
  return s.str();
}

// Writes to --out when given, otherwise to the provided stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void validate(const RunConfig& c) {
  if (c.v.empty() || c.theta.empty()) throw InputError("the (v, theta) grid is empty");
  for (const Point& p : grid_points(c)) make_state(p.v, p.theta);
  if (c.level < 1 || c.level > 3) throw InputError("--level must be 1, 2 or 3");
  if (c.mx < 2 || c.my < 2 || c.mx > 3 || c.my > 3) throw InputError("--mx and --my must be 2 or 3");
  if (c.xstar < 0 || c.xstar >= c.mx) throw InputError("--xstar must lie in 1..mx");
  if (c.ystar < 0 || c.ystar >= c.my) throw InputError("--ystar must lie in 1..my");
  if (!(c.epsilon > 0.0)) throw InputError("--epsilon must be > 0");
  if (c.starts < 1) throw InputError("--starts must be at least 1");
  if (c.max_iterations < 1) throw InputError("--max-iterations must be at least 1");
  if (!(c.tolerance > 0.0)) throw InputError("--tolerance must be > 0");
  if (c.max_solver_iterations < 1) throw InputError("--solver-iterations must be at least 1");
  if (c.grid_size < 8) throw InputError("--grid-size must be at least 8");
  if (!(c.refine_tolerance > 0.0)) throw InputError("--refine-tolerance must be > 0");
  if (c.map_size < 0) throw InputError("--map-size must be non-negative");
  if (c.threads < 0) throw InputError("--threads must be non-negative");
  if (c.bell != "chsh" && c.bell != "ibeta") throw InputError("--bell must be chsh or ibeta");
  if (!c.alice.empty() && static_cast<int>(c.alice.size()) != c.mx)
    throw InputError("--alice needs one angle per Alice input");
  if (!c.bob.empty() && static_cast<int>(c.bob.size()) != c.my) throw InputError("--bob needs one angle per Bob input");
}

SeesawOptions seesaw_options(const RunConfig& c) {
  SeesawOptions o;
  o.epsilon = c.epsilon;
  o.starts = c.starts;
  o.seed = c.seed;
  o.max_iterations = c.max_iterations;
  o.solver = c.solver_options();
  o.solver.tolerance = std::min(o.solver.tolerance, 1e-9);
  return o;
}

std::string status_of(const GuessReport& r) { return sdp::to_string(r.status); }

}  // namespace

sdp::SolverOptions RunConfig::solver_options() const {
  sdp::SolverOptions o = default_guess_options();
  o.tolerance = tolerance;
  o.max_iterations = max_solver_iterations;
  return o;
}

MeasurementSet max_chsh_settings(double v, double theta, int mx, int my) {
  // Correlations of ρ(v,θ) in the x–z plane are diag(v·sin2θ, v).
  const double tx = v * std::sin(2.0 * theta);
  const double tz = v;
  const double phi = std::atan2(tx, tz);
  MeasurementSet base = canonical_settings(mx, my);
  std::vector<double> alice = base.alice_angles();
  std::vector<double> bob = base.bob_angles();
  alice[0] = 0.0;
  alice[1] = kPi / 2;
  bob[0] = phi;
  bob[1] = 2.0 * kPi - phi;
  return MeasurementSet(alice, bob);
}

bool parse_arguments(int argc, const char* const* argv, RunConfig& c, std::ostream& out) {
  CLI::App app{"Device-independent randomness bounds for two-qubit Bell experiments", "dirand"};
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
  app.require_subcommand(1);
  for (const char* name : {"certify", "optimize", "sweep", "tomography", "bellbound"}) app.add_subcommand(name)->fallthrough();
  app.get_subcommand("certify")->description("Guessing probability and Bell certificate for one behavior");
  app.get_subcommand("optimize")->description("See-saw optimization of the measurement settings");
  app.get_subcommand("sweep")->description("Optimized hmin and CHSH-only bound over a (v, theta) grid");
  app.get_subcommand("tomography")->description("Tomographic hmin over a (v, theta) grid");
  app.get_subcommand("bellbound")->description("hmin from a CHSH or I_beta value alone");

  std::string v = "1", theta = "pi/4", alice, bob, values, beta;
  int xstar = 1, ystar = 1;
  app.add_option("--v", v, "Visibility grid, e.g. 0.9 or 0.7,0.8 or 0.7:1:7");
  app.add_option("--theta", theta, "State angle grid, e.g. pi/8 or 0:pi/4:9");
  app.add_option("--mx", c.mx, "Alice inputs");
  app.add_option("--my", c.my, "Bob inputs");
  app.add_option("--xstar", xstar, "Alice generation input (one-based)");
  app.add_option("--ystar", ystar, "Bob generation input (one-based)");
  app.add_option("--level", c.level, "NPA level");
  app.add_option("--tolerance", c.tolerance, "SDP stopping tolerance");
  app.add_option("--solver-iterations", c.max_solver_iterations, "SDP iteration cap");
  app.add_option("--epsilon", c.epsilon, "See-saw stopping threshold");
  app.add_option("--starts", c.starts, "See-saw starts");
  app.add_option("--seed", c.seed, "Seed for the random starts");
  app.add_option("--max-iterations", c.max_iterations, "See-saw iteration cap per start");
  app.add_option("--threads", c.threads, "Worker threads, 0 for all cores");
  app.add_option("--out", c.out, "Output path (stdout when omitted)");
  app.add_option("--trace", c.trace, "optimize: trace CSV path");
  app.add_option("--behavior", c.behavior, "certify: behavior CSV path");
  app.add_option("--alice", alice, "certify: Alice angles, comma separated");
  app.add_option("--bob", bob, "certify: Bob angles, comma separated");
  app.add_option("--bell", c.bell, "bellbound: chsh or ibeta");
  app.add_option("--value", values, "bellbound: Bell value grid");
  app.add_option("--beta", beta, "bellbound: beta (default from the first theta)");
  app.add_option("--grid-size", c.grid_size, "tomography: coarse grid points per angle");
  app.add_option("--refine-tolerance", c.refine_tolerance, "tomography: local search resolution");
  app.add_option("--map-size", c.map_size, "tomography: angle map points per axis, 0 for none");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, out);
    return false;
  } catch (const CLI::ParseError& e) {
    throw InputError(e.what());
  }
  for (const char* name : {"certify", "optimize", "sweep", "tomography", "bellbound"})
    if (app.got_subcommand(name)) c.subcommand = name;
  c.v = parse_grid(v);
  c.theta = parse_grid(theta);
  c.xstar = xstar - 1;
  c.ystar = ystar - 1;
  if (!alice.empty()) c.alice = parse_grid(alice);
  if (!bob.empty()) c.bob = parse_grid(bob);
  if (!values.empty()) c.bell_values = parse_grid(values);
  if (!beta.empty()) {
    c.beta = parse_value(beta);
    c.beta_from_theta = false;
  }
  validate(c);
  return true;
}

int cmd_certify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::optional<Behavior> p;
  if (!c.behavior.empty()) {
    std::ifstream in(c.behavior);
    if (!in) throw InputError("cannot open behavior file '" + c.behavior + "'");
    p = read_behavior_csv(in);
    if (p->mx() != c.mx || p->my() != c.my)
      throw InputError("behavior file is " + std::to_string(p->mx()) + "x" + std::to_string(p->my()) +
                       " but --mx/--my give " + std::to_string(c.mx) + "x" + std::to_string(c.my));
  } else {
    if (c.v.size() != 1 || c.theta.size() != 1) throw InputError("certify takes a single (v, theta) point");
    MeasurementSet m = canonical_settings(c.mx, c.my);
    MeasurementSet meas(c.alice.empty() ? m.alice_angles() : c.alice, c.bob.empty() ? m.bob_angles() : c.bob);
    p = behavior(make_state(c.v[0], c.theta[0]), meas);
  }
  GuessingProgram program(c.mx, c.my, c.level, c.xstar, c.ystar);
  const GuessReport r = program.solve(*p, c.solver_options());
  Sink sink(c.out, out);
  write_report(sink.get(), r);
  if (!r.optimal()) {
    err << "certify: solver status " << status_of(r) << '\n';
    return kNumericalFailure;
  }
  return kSuccess;
}

int cmd_optimize(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto pts = grid_points(c);
  struct Row {
    std::optional<OptResult> result;
    double chsh = 0.0;
    std::string error;
  };
  const SeesawOptions opts = seesaw_options(c);
  auto rows = parallel_map<Row>(pts.size(), c.threads, [&](std::size_t i) {
    Row row;
    try {
      const DensityMatrix state = make_state(pts[i].v, pts[i].theta);
      row.result = optimize(state, c.mx, c.my, c.level, c.xstar, c.ystar, opts);
      row.chsh = chsh_value(behavior(state, row.result->best_meas));
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
    return row;
  });

  Sink sink(c.out, out);
  std::ostream& o = sink.get();
  o << std::setprecision(10);
  o << "v,theta,mx,my,level,xstar,ystar,hmin,g,chsh,starts,best_start,converged,status,alice_angles,bob_angles\n";
  int code = kSuccess;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    o << pts[i].v << ',' << pts[i].theta << ',' << c.mx << ',' << c.my << ',' << c.level << ',' << c.xstar + 1 << ','
      << c.ystar + 1 << ',';
    const Row& row = rows[i];
    if (!row.result) {
      err << "optimize: point " << i << " failed: " << row.error << '\n';
      o << "nan,nan,nan," << c.starts << ",-1,0,failed,,\n";
      code = kNumericalFailure;
      continue;
    }
    const OptResult& r = *row.result;
    o << r.best_report.hmin << ',' << r.best_report.guessing_probability << ',' << row.chsh << ',' << r.starts_used
      << ',' << r.best_start << ',' << (r.converged ? 1 : 0) << ',' << status_of(r.best_report) << ','
      << join(r.best_meas.alice_angles()) << ',' << join(r.best_meas.bob_angles()) << '\n';
    if (!r.best_report.usable()) code = kNumericalFailure;
  }

  if (!c.trace.empty()) {
    std::ofstream t(c.trace);
    if (!t) throw InputError("cannot open trace file '" + c.trace + "'");
    t << std::setprecision(12) << "v,theta,start,iteration,g,hmin\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!rows[i].result) continue;
      for (const StartTrace& s : rows[i].result->starts)
        for (std::size_t k = 0; k < s.g.size(); ++k)
          t << pts[i].v << ',' << pts[i].theta << ',' << s.start << ',' << k << ',' << s.g[k] << ','
            << -std::log2(s.g[k]) << '\n';
    }
  }
  return code;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto pts = grid_points(c);
  struct Row {
    double hmin = std::nan("");
    double chsh = std::nan("");
    double hmin_chsh = std::nan("");
    int starts = 0;
    bool converged = false;
    std::string status = "failed";
    bool ok = false;
  };
  const SeesawOptions opts = seesaw_options(c);
  const sdp::SolverOptions solver = c.solver_options();
  auto rows = parallel_map<Row>(pts.size(), c.threads, [&](std::size_t i) {
    Row row;
    try {
      const DensityMatrix state = make_state(pts[i].v, pts[i].theta);
      const OptResult r = optimize(state, c.mx, c.my, c.level, c.xstar, c.ystar, opts);
      row.hmin = r.best_report.hmin;
      row.starts = r.starts_used;
      row.converged = r.converged;
      row.chsh = chsh_value(behavior(state, max_chsh_settings(pts[i].v, pts[i].theta, c.mx, c.my)));
      const BellConstraint bc{chsh_coefficients(c.mx, c.my), std::min(row.chsh, 2.0 * std::numbers::sqrt2)};
      const GuessReport b = bell_constrained_bound(std::span(&bc, 1), c.mx, c.my, c.level, c.xstar, c.ystar, solver);
      row.hmin_chsh = b.hmin;
      row.ok = r.best_report.usable() && b.usable();
      row.status = row.ok ? (r.best_report.optimal() && b.optimal() ? "optimal" : "inexact")
                          : status_of(r.best_report.usable() ? b : r.best_report);
    } catch (const NumericalError& e) {
      row.status = std::string("failed: ") + e.what();
    }
    return row;
  });

  Sink sink(c.out, out);
  std::ostream& o = sink.get();
  o << std::setprecision(10);
  o << "v,theta,mx,my,level,hmin,chsh,starts,converged,hmin_chsh,status\n";
  int code = kSuccess;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Row& r = rows[i];
    o << pts[i].v << ',' << pts[i].theta << ',' << c.mx << ',' << c.my << ',' << c.level << ',' << r.hmin << ','
      << r.chsh << ',' << r.starts << ',' << (r.converged ? 1 : 0) << ',' << r.hmin_chsh << ',';
    const bool failed = r.status.rfind("failed", 0) == 0;
    o << (failed ? "failed" : r.status) << '\n';
    if (!r.ok) {
      err << "sweep: point " << i << " (v=" << pts[i].v << ", theta=" << pts[i].theta << "): " << r.status << '\n';
      code = kNumericalFailure;
    }
  }
  return code;
}

int cmd_tomography(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto pts = grid_points(c);
  if (c.map_size > 0 && c.out.empty()) throw InputError("--map-size needs --out to name the map files");
  struct Row {
    std::optional<TomographicOptimum> opt;
    std::string error;
  };
  auto rows = parallel_map<Row>(pts.size(), c.threads, [&](std::size_t i) {
    Row row;
    try {
      row.opt = tomographic_optimize(make_state(pts[i].v, pts[i].theta), c.grid_size, c.refine_tolerance);
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
    return row;
  });

  Sink sink(c.out, out);
  std::ostream& o = sink.get();
  o << std::setprecision(10);
  o << "v,theta,hmin,g,alpha1,beta1,status,analytic_hmin\n";
  int code = kSuccess;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    o << pts[i].v << ',' << pts[i].theta << ',';
    const Row& r = rows[i];
    if (!r.opt) {
      err << "tomography: point " << i << " failed: " << r.error << '\n';
      o << "nan,nan,nan,nan,failed,";
      code = kNumericalFailure;
    } else {
      o << r.opt->report.hmin << ',' << r.opt->report.guessing_probability << ',' << r.opt->alice_angle << ','
        << r.opt->bob_angle << ',' << status_of(r.opt->report) << ',';
      if (!r.opt->report.usable()) code = kNumericalFailure;
    }
    if (pts[i].v == 1.0) o << pure_state_guessing(pts[i].theta).hmin;
    o << '\n';
  }

  if (!c.out.empty()) {
    const std::filesystem::path csv(c.out);
    std::filesystem::path script = csv;
    script.replace_extension(".gp");
    std::ofstream gp(script);
    if (!gp) throw InputError("cannot write plot script '" + script.string() + "'");
    gp << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel 'theta'\n"
       << "set ylabel 'H_min (bits)'\n"
       << "set xrange [0:pi/4]\n"
       << "plot for [v in \"" << join(c.v, ' ') << "\"] '" << csv.filename().string()
       << "' using 2:($1==v+0 ? $3 : 1/0) with linespoints title sprintf('v = %s', v)\n";
  }

  if (c.map_size > 0) {
    const std::filesystem::path csv(c.out);
    const double step = kPi / c.map_size;
    const sdp::SolverOptions solver = c.solver_options();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const DensityMatrix state = make_state(pts[i].v, pts[i].theta);
      const auto n = static_cast<std::size_t>(c.map_size);
      auto cells = parallel_map<GuessReport>(n * n, c.threads, [&](std::size_t k) {
        return tomographic_guessing(state, static_cast<double>(k / n) * step, static_cast<double>(k % n) * step,
                                    solver);
      });
      std::filesystem::path map = csv.parent_path() / (csv.stem().string() + "_map_" + std::to_string(i) + ".csv");
      std::ofstream m(map);
      if (!m) throw InputError("cannot write angle map '" + map.string() + "'");
      m << std::setprecision(10) << "alpha1,beta1,hmin\n";
      for (std::size_t k = 0; k < n * n; ++k)
        m << static_cast<double>(k / n) * step << ',' << static_cast<double>(k % n) * step << ',' << cells[k].hmin
          << '\n';
    }
  }
  return code;
}

int cmd_bellbound(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.bell_values.empty()) throw InputError("bellbound needs --value");
  const double beta = c.bell == "ibeta" ? (c.beta_from_theta ? beta_coefficient(c.theta.front()) : c.beta) : 0.0;
  const std::vector<double> coeffs =
      c.bell == "chsh" ? chsh_coefficients(c.mx, c.my) : ibeta_coefficients(c.mx, c.my, beta);
  const sdp::SolverOptions solver = c.solver_options();
  auto rows = parallel_map<GuessReport>(c.bell_values.size(), c.threads, [&](std::size_t i) {
    const BellConstraint bc{coeffs, c.bell_values[i]};
    return bell_constrained_bound(std::span(&bc, 1), c.mx, c.my, c.level, c.xstar, c.ystar, solver);
  });
  Sink sink(c.out, out);
  std::ostream& o = sink.get();
  o << std::setprecision(10) << "bell,beta,value,mx,my,level,hmin,g,status\n";
  int code = kSuccess;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    o << c.bell << ',' << beta << ',' << c.bell_values[i] << ',' << c.mx << ',' << c.my << ',' << c.level << ','
      << rows[i].hmin << ',' << rows[i].guessing_probability << ',' << status_of(rows[i]) << '\n';
    if (!rows[i].optimal()) {
      err << "bellbound: value " << c.bell_values[i] << ": solver status " << status_of(rows[i]) << '\n';
      code = kNumericalFailure;
    }
  }
  return code;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    RunConfig c;
    if (!parse_arguments(argc, argv, c, out)) return kSuccess;
    if (c.subcommand == "certify") return cmd_certify(c, out, err);
    if (c.subcommand == "optimize") return cmd_optimize(c, out, err);
    if (c.subcommand == "sweep") return cmd_sweep(c, out, err);
    if (c.subcommand == "tomography") return cmd_tomography(c, out, err);
    return cmd_bellbound(c, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace dirand::cli
