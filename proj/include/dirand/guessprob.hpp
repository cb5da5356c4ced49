#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dirand/npa.hpp"
#include "dirand/qstate.hpp"
#include "dirand/sdp.hpp"

namespace dirand {

/// Bell expression certifying a bound on Eve's guessing probability:
/// coeffs·p + offset ≥ p(a,b|x*,y*) for every quantum behavior p and every
/// outcome pair (a,b). Coefficients are indexed as Behavior::component_index.
struct BellExpression {
  int mx = 0;
  int my = 0;
  std::vector<double> coeffs;
  double offset = 0.0;
  int xstar = 0;
  int ystar = 0;

  double evaluate(const Behavior& p) const;
};

struct GuessReport {
  double guessing_probability = 1.0;
  double hmin = 0.0;
  /// Dual objective f·p + offset. An upper bound on the guessing probability
  /// whenever the dual slack is feasible, even if the solve did not converge.
  double dual_bound = 1.0;
  int level = 0;  // 0 for the tomographic program
  int xstar = 0;
  int ystar = 0;
  sdp::Status status = sdp::Status::NumericalFailure;
  /// Attack weights q_ab, indexed by block (outcome_index(a)·2 + outcome_index(b)).
  std::array<double, 4> attack_weights{};
  /// Eve's unnormalized conditional behaviors q_ab·p_ab, one per block.
  std::array<std::vector<double>, 4> attack_behaviors;
  BellExpression bell_expression;
  /// Dual operator of the tomographic program: <W, ρ> bounds G.
  std::optional<Eigen::Matrix4d> witness;
  int iterations = 0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  std::vector<int> dropped_rows;

  double q(int a, int b) const { return attack_weights[static_cast<std::size_t>(outcome_index(a) * 2 + outcome_index(b))]; }
  bool optimal() const { return status == sdp::Status::Optimal; }
  /// Optimal, or stopped early with residuals and gap all below tol. Extremal
  /// behaviors leave the relaxation without a strictly feasible point and
  /// typically end this way.
  bool usable(double tol = 1e-6) const {
    return optimal() || (status != sdp::Status::Infeasible && primal_infeasibility <= tol &&
                         dual_infeasibility <= tol && relative_gap <= tol);
  }
};

inline int attack_block(int a, int b) { return outcome_index(a) * 2 + outcome_index(b); }

/// Default solver settings for the guessing programs.
sdp::SolverOptions default_guess_options();

/// Relaxed guessing-probability program for a fixed scenario. Holds the
/// assembled coefficient matrices and the rank presolve so that repeated
/// solves for different behaviors only swap right-hand sides.
class GuessingProgram {
 public:
  GuessingProgram(int mx, int my, int level, int xstar, int ystar);

  int mx() const { return mx_; }
  int my() const { return my_; }
  int level() const { return level_; }
  const npa::MomentStructure& structure() const { return structure_; }

  /// Program for a concrete behavior.
  sdp::SdpProblem problem(const Behavior& b) const;
  GuessReport solve(const Behavior& b, const sdp::SolverOptions& opts = default_guess_options());

  static constexpr int kNormalizationRow = 0;
  int behavior_row(std::size_t component) const { return 1 + static_cast<int>(component); }

 private:
  int mx_, my_, level_, xstar_, ystar_;
  npa::MomentStructure structure_;
  std::vector<npa::LinearForm> map_;
  sdp::SdpProblem template_;
  sdp::Presolve presolve_;
  sdp::Solver solver_;
};

/// Four moment-matrix blocks (one per outcome pair), structural equalities,
/// normalization and behavior-matching rows; objective Σ_ab p̃_ab(a,b|x*,y*).
sdp::SdpProblem build_primal(const Behavior& b, int level, int xstar, int ystar);

GuessReport guessing_probability(const Behavior& b, int level, int xstar, int ystar,
                                 const sdp::SolverOptions& opts = default_guess_options());

/// Linear constraint Σ_c coeffs[c]·p[c] = value on the behavior.
struct BellConstraint {
  std::vector<double> coeffs;
  double value = 0.0;
};

std::vector<double> chsh_coefficients(int mx, int my);
std::vector<double> ibeta_coefficients(int mx, int my, double beta);

/// Guessing probability when Eve is constrained only by Bell values. Several
/// constraints may be imposed together.
GuessReport bell_constrained_bound(std::span<const BellConstraint> constraints, int mx, int my, int level,
                                   int xstar, int ystar, const sdp::SolverOptions& opts = default_guess_options());

/// Guessing probability when Eve must reproduce the full state:
/// max Σ_ab <ρ̃_ab, π^a⊗π^b> over ρ̃_ab ⪰ 0 with Σ_ab ρ̃_ab = ρ.
GuessReport tomographic_guessing(const DensityMatrix& state, double alice_angle, double bob_angle,
                                 const sdp::SolverOptions& opts = default_guess_options());

struct VerificationReport {
  int samples = 0;
  double worst_margin = 0.0;
  int worst_sample = -1;
};

/// Checks coeffs·p′ + offset − p′(a,b|x*,y*) ≥ 0 on random real two-qubit
/// states and planar measurements; reports the smallest margin.
VerificationReport verify_bell_expression(const BellExpression& f, int samples, std::uint64_t seed);

/// Structured text: key-value header then the coefficient table `a,b,x,y,f`.
void write_report(std::ostream& out, const GuessReport& r);

}  // namespace dirand
