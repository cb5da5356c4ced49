#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dirand/numerics.hpp"

namespace dirand::sdp {

using num::Matrix;
using num::Vector;

/// One entry of a symmetric coefficient matrix. Off-diagonal entries stand for
/// both (row, col) and (col, row); entries with row > col are normalized on
/// insertion.
struct Entry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Σ_i <A_i, X_i> = rhs.
struct Constraint {
  std::vector<Entry> entries;
  double rhs = 0.0;

  void add(int block, int row, int col, double value);
};

/// maximize Σ_i <C_i, X_i>  subject to the constraints and X_i ⪰ 0.
struct SdpProblem {
  std::vector<int> block_orders;
  std::vector<Entry> objective;
  std::vector<Constraint> constraints;

  void add_objective(int block, int row, int col, double value);
  int block_count() const { return static_cast<int>(block_orders.size()); }
  int constraint_count() const { return static_cast<int>(constraints.size()); }

  /// Throws InputError on dimension mismatch.
  void validate() const;

  std::vector<Matrix> objective_blocks() const;
  std::vector<Matrix> constraint_blocks(int j) const;

  /// Sparse text dump: header `nblocks, block orders, nconstraints`, then
  /// `constraint_index block i j value` (index 0 is the objective). A
  /// right-hand side b_j is written as `j -1 0 0 b_j`.
  void dump(std::ostream& out) const;
};

enum class Status { Optimal, MaxIterations, Infeasible, NumericalFailure };

std::string to_string(Status s);

struct SolverOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
  double step_fraction = 0.98;
  double rank_tolerance = 1e-10;
  bool verbose = false;
};

struct SdpSolution {
  std::vector<Matrix> primal_blocks;
  std::vector<Matrix> dual_slacks;  // Σ_j y_j A_j − C, per block
  std::vector<double> dual_vector;  // one multiplier per constraint; 0 on dropped rows
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  Status status = Status::NumericalFailure;
  int iterations = 0;
  std::vector<int> dropped_rows;
  double primal_infeasibility = 0.0;  // relative
  double dual_infeasibility = 0.0;    // relative
  double relative_gap = 0.0;
  std::string message;
};

/// Constraint rows kept after the rank check, in ascending order.
struct Presolve {
  std::vector<int> kept;
  std::vector<int> dropped;
};

/// Greedy rank-revealing pass: a row is dropped when it lies in the span of
/// rows already kept. Rows confined to one block are checked first, block by
/// block in original order, then rows coupling several blocks.
Presolve presolve(const SdpProblem& p, double rank_tolerance = 1e-10);

/// Primal-dual interior-point method on the homogeneous self-dual embedding,
/// with Nesterov-Todd scaling and a Mehrotra predictor-corrector. The embedding
/// starts from an infeasible point and needs no strictly feasible point of the
/// original problem; infeasibility is reported from certificates once the
/// homogenizing variable vanishes. One instance serves one solve at a time.
class Solver {
 public:
  SdpSolution solve(const SdpProblem& p, const SolverOptions& opts = {});
  /// Reuses a presolve computed for a problem with identical coefficient
  /// matrices (only right-hand sides may differ).
  SdpSolution solve(const SdpProblem& p, const Presolve& pre, const SolverOptions& opts = {});
};

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts = {});

struct ResidualReport {
  std::vector<double> constraint_residuals;  // b_j − Σ_i <A_ji, X_i>
  double max_constraint_residual = 0.0;
  double dual_slack_max_eigenvalue = 0.0;  // max eigenvalue of C_i − Σ_j y_j A_ji over blocks
  double gap = 0.0;                        // dual objective − primal objective
  std::vector<double> min_block_eigenvalues;
};

ResidualReport residuals(const SdpProblem& p, const SdpSolution& s);

}  // namespace dirand::sdp
