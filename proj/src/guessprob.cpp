#include "dirand/guessprob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dirand {

namespace {

constexpr double kWeightFloor = 1e-9;

// Adds coeff·X[i][j] to a row, splitting off-diagonal coefficients over the
// two symmetric entries.
void add_position(sdp::Constraint& c, int block, int i, int j, double coeff) {
  c.add(block, i, j, i == j ? coeff : 0.5 * coeff);
}

void add_form(sdp::Constraint& c, const npa::MomentStructure& s, int block, const npa::LinearForm& form, double scale) {
  for (const auto& [id, coeff] : form.terms) {
    const auto [i, j] = s.representative(id);
    add_position(c, block, i, j, scale * coeff);
  }
}

void check_scenario(int mx, int my, int level, int xstar, int ystar) {
  if (mx < 1 || my < 1) throw InputError("need at least one input per party");
  if (level < 1 || level > npa::kMaxLevel) throw InputError("NPA level must be 1, 2 or 3");
  if (xstar < 0 || xstar >= mx || ystar < 0 || ystar >= my)
    throw InputError("generation setting (" + std::to_string(xstar + 1) + "," + std::to_string(ystar + 1) +
                     ") outside the scenario");
}

// Blocks, objective and structural rows shared by the behavior- and
// Bell-value-constrained programs. Row 0 is the normalization Σ_ab q_ab = 1.
sdp::SdpProblem skeleton(const npa::MomentStructure& s, const std::vector<npa::LinearForm>& map, int mx, int my,
                         int xstar, int ystar, std::vector<sdp::Constraint> middle_rows) {
  sdp::SdpProblem p;
  p.block_orders.assign(4, s.dim());

  sdp::Constraint norm;
  for (int blk = 0; blk < 4; ++blk) norm.add(blk, 0, 0, 1.0);
  norm.rhs = 1.0;
  p.constraints.push_back(std::move(norm));
  for (auto& r : middle_rows) p.constraints.push_back(std::move(r));

  for (int blk = 0; blk < 4; ++blk) {
    for (int i = 0; i < s.dim(); ++i)
      for (int j = i; j < s.dim(); ++j) {
        const int id = s.moment(i, j);
        const auto rep = s.representative(id);
        if (rep == std::pair{i, j}) continue;
        sdp::Constraint eq;
        add_position(eq, blk, rep.first, rep.second, 1.0);
        add_position(eq, blk, i, j, -1.0);
        p.constraints.push_back(std::move(eq));
      }
  }

  for (int a : {-1, 1})
    for (int b : {-1, 1}) {
      const int blk = attack_block(a, b);
      for (const auto& [id, coeff] : map[Behavior::component_index(mx, my, a, b, xstar, ystar)].terms) {
        const auto [i, j] = s.representative(id);
        p.add_objective(blk, i, j, i == j ? coeff : 0.5 * coeff);
      }
    }
  return p;
}

GuessReport make_report(const sdp::SdpSolution& sol, const npa::MomentStructure* s,
                        const std::vector<npa::LinearForm>* map, int level, int xstar, int ystar) {
  GuessReport r;
  r.level = level;
  r.xstar = xstar;
  r.ystar = ystar;
  r.status = sol.status;
  r.guessing_probability = sol.primal_objective;
  r.dual_bound = sol.dual_objective;
  if (r.guessing_probability > 0.0) {
    r.hmin = std::max(0.0, -std::log2(r.guessing_probability));
  } else {
    r.hmin = 0.0;
    if (r.status == sdp::Status::Optimal) r.status = sdp::Status::NumericalFailure;
  }
  r.iterations = sol.iterations;
  r.primal_infeasibility = sol.primal_infeasibility;
  r.dual_infeasibility = sol.dual_infeasibility;
  r.relative_gap = sol.relative_gap;
  r.dropped_rows = sol.dropped_rows;
  for (std::size_t blk = 0; blk < 4; ++blk) {
    const auto& x = sol.primal_blocks[blk];
    const double q = s ? x(0, 0) : x.trace();
    r.attack_weights[blk] = q < kWeightFloor ? 0.0 : q;
    if (s && map) {
      std::vector<double> pt(map->size());
      for (std::size_t c = 0; c < map->size(); ++c) {
        double v = 0.0;
        for (const auto& [id, coeff] : (*map)[c].terms) {
          const auto [i, j] = s->representative(id);
          v += coeff * x(i, j);
        }
        pt[c] = v;
      }
      r.attack_behaviors[blk] = std::move(pt);
    }
  }
  return r;
}

}  // namespace

double BellExpression::evaluate(const Behavior& p) const {
  if (p.mx() != mx || p.my() != my) throw InputError("BellExpression: scenario mismatch");
  double s = offset;
  for (std::size_t c = 0; c < coeffs.size(); ++c) s += coeffs[c] * p.probs()[c];
  return s;
}

sdp::SolverOptions default_guess_options() {
  sdp::SolverOptions o;
  o.tolerance = 1e-8;
  return o;
}

GuessingProgram::GuessingProgram(int mx, int my, int level, int xstar, int ystar)
    : mx_(mx), my_(my), level_(level), xstar_(xstar), ystar_(ystar),
      structure_((check_scenario(mx, my, level, xstar, ystar), npa::moment_structure(npa::monomials(level, mx, my)))),
      map_(npa::behavior_map(structure_, mx, my)) {
  std::vector<sdp::Constraint> rows(map_.size());
  for (std::size_t c = 0; c < map_.size(); ++c)
    for (int blk = 0; blk < 4; ++blk) add_form(rows[c], structure_, blk, map_[c], 1.0);
  template_ = skeleton(structure_, map_, mx, my, xstar, ystar, std::move(rows));
  presolve_ = sdp::presolve(template_);
}

sdp::SdpProblem GuessingProgram::problem(const Behavior& b) const {
  if (b.mx() != mx_ || b.my() != my_) throw InputError("GuessingProgram: behavior scenario mismatch");
  sdp::SdpProblem p = template_;
  for (std::size_t c = 0; c < b.size(); ++c) p.constraints[static_cast<std::size_t>(behavior_row(c))].rhs = b.probs()[c];
  return p;
}

GuessReport GuessingProgram::solve(const Behavior& b, const sdp::SolverOptions& opts) {
  const sdp::SdpProblem p = problem(b);
  const sdp::SdpSolution sol = solver_.solve(p, presolve_, opts);
  GuessReport r = make_report(sol, &structure_, &map_, level_, xstar_, ystar_);
  BellExpression& f = r.bell_expression;
  f.mx = mx_;
  f.my = my_;
  f.xstar = xstar_;
  f.ystar = ystar_;
  f.offset = sol.dual_vector[kNormalizationRow];
  f.coeffs.resize(b.size());
  for (std::size_t c = 0; c < b.size(); ++c) f.coeffs[c] = sol.dual_vector[static_cast<std::size_t>(behavior_row(c))];
  return r;
}

sdp::SdpProblem build_primal(const Behavior& b, int level, int xstar, int ystar) {
  GuessingProgram prog(b.mx(), b.my(), level, xstar, ystar);
  return prog.problem(b);
}

GuessReport guessing_probability(const Behavior& b, int level, int xstar, int ystar, const sdp::SolverOptions& opts) {
  GuessingProgram prog(b.mx(), b.my(), level, xstar, ystar);
  return prog.solve(b, opts);
}

std::vector<double> chsh_coefficients(int mx, int my) {
  if (mx < 2 || my < 2) throw InputError("CHSH needs at least two inputs per party");
  std::vector<double> f(static_cast<std::size_t>(4 * mx * my), 0.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const double sign = (x == 1 && y == 1) ? -1.0 : 1.0;
      for (int a : {-1, 1})
        for (int b : {-1, 1}) f[Behavior::component_index(mx, my, a, b, x, y)] = sign * a * b;
    }
  return f;
}

std::vector<double> ibeta_coefficients(int mx, int my, double beta) {
  std::vector<double> f = chsh_coefficients(mx, my);
  // <A_1> read from the (x=1, y=1) marginal.
  for (int a : {-1, 1})
    for (int b : {-1, 1}) f[Behavior::component_index(mx, my, a, b, 0, 0)] += beta * a;
  return f;
}

GuessReport bell_constrained_bound(std::span<const BellConstraint> constraints, int mx, int my, int level, int xstar,
                                   int ystar, const sdp::SolverOptions& opts) {
  check_scenario(mx, my, level, xstar, ystar);
  if (constraints.empty()) throw InputError("bell_constrained_bound: no Bell constraint supplied");
  const auto s = npa::moment_structure(npa::monomials(level, mx, my));
  const auto map = npa::behavior_map(s, mx, my);
  std::vector<sdp::Constraint> rows;
  for (const BellConstraint& bc : constraints) {
    if (bc.coeffs.size() != map.size())
      throw InputError("bell_constrained_bound: coefficient vector has " + std::to_string(bc.coeffs.size()) +
                       " entries, scenario needs " + std::to_string(map.size()));
    sdp::Constraint row;
    for (std::size_t c = 0; c < map.size(); ++c)
      if (bc.coeffs[c] != 0.0)
        for (int blk = 0; blk < 4; ++blk) add_form(row, s, blk, map[c], bc.coeffs[c]);
    row.rhs = bc.value;
    rows.push_back(std::move(row));
  }
  const sdp::SdpProblem p = skeleton(s, map, mx, my, xstar, ystar, std::move(rows));
  const sdp::SdpSolution sol = sdp::solve(p, opts);
  GuessReport r = make_report(sol, &s, &map, level, xstar, ystar);
  BellExpression& f = r.bell_expression;
  f.mx = mx;
  f.my = my;
  f.xstar = xstar;
  f.ystar = ystar;
  f.offset = sol.dual_vector[0];
  f.coeffs.assign(map.size(), 0.0);
  for (std::size_t k = 0; k < constraints.size(); ++k)
    for (std::size_t c = 0; c < map.size(); ++c) f.coeffs[c] += sol.dual_vector[k + 1] * constraints[k].coeffs[c];
  return r;
}

GuessReport tomographic_guessing(const DensityMatrix& state, double alice_angle, double bob_angle,
                                 const sdp::SolverOptions& opts) {
  if (!std::isfinite(alice_angle) || !std::isfinite(bob_angle)) throw InputError("tomographic_guessing: non-finite angle");
  sdp::SdpProblem p;
  p.block_orders.assign(4, 4);
  const Eigen::Matrix4d& rho = state.entries();
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      sdp::Constraint row;
      for (int blk = 0; blk < 4; ++blk) add_position(row, blk, i, j, 1.0);
      row.rhs = rho(i, j);
      p.constraints.push_back(std::move(row));
    }
  for (int a : {-1, 1})
    for (int b : {-1, 1}) {
      const Eigen::Matrix4d op = kron(bloch_projector(alice_angle, a), bloch_projector(bob_angle, b));
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
          if (op(i, j) != 0.0) p.add_objective(attack_block(a, b), i, j, op(i, j));
    }
  const sdp::SdpSolution sol = sdp::solve(p, opts);
  GuessReport r = make_report(sol, nullptr, nullptr, 0, 0, 0);
  Eigen::Matrix4d w;
  int row = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j, ++row) {
      const double y = sol.dual_vector[static_cast<std::size_t>(row)];
      w(i, j) = w(j, i) = i == j ? y : 0.5 * y;
    }
  r.witness = w;
  return r;
}

VerificationReport verify_bell_expression(const BellExpression& f, int samples, std::uint64_t seed) {
  if (f.mx < 1 || f.my < 1 || f.coeffs.size() != static_cast<std::size_t>(4 * f.mx * f.my))
    throw InputError("verify_bell_expression: malformed Bell expression");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> rank(1, 4);

  VerificationReport rep;
  rep.samples = samples;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const int r = rank(rng);
    Eigen::MatrixXd g(4, r);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < r; ++j) g(i, j) = gauss(rng);
    Eigen::Matrix4d rho = g * g.transpose();
    rho /= rho.trace();
    rho = 0.5 * (rho + rho.transpose()).eval();
    std::vector<double> alice(static_cast<std::size_t>(f.mx)), bob(static_cast<std::size_t>(f.my));
    for (double& a : alice) a = angle(rng);
    for (double& b : bob) b = angle(rng);
    const Behavior p = behavior(DensityMatrix(rho), MeasurementSet(alice, bob));
    const double bound = f.evaluate(p);
    for (int a : {-1, 1})
      for (int b : {-1, 1}) {
        const double margin = bound - p(a, b, f.xstar, f.ystar);
        if (margin < rep.worst_margin) {
          rep.worst_margin = margin;
          rep.worst_sample = k;
        }
      }
  }
  return rep;
}

}  // namespace dirand
