#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dirand/numerics.hpp"

namespace dirand {

// Outcomes are labelled -1 and +1. Inputs x, y are zero-based in the C++ and
// Python APIs and one-based in CSV files and on the command line.

inline int outcome_index(int outcome) { return outcome > 0 ? 1 : 0; }
inline int outcome_label(int index) { return index == 0 ? -1 : +1; }

/// Two-qubit state, stored as a real symmetric 4×4 matrix in the
/// |00>,|01>,|10>,|11> basis.
class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity.
  explicit DensityMatrix(const Eigen::Matrix4d& entries);

  const Eigen::Matrix4d& entries() const { return entries_; }
  std::optional<double> visibility() const { return v_; }
  std::optional<double> theta() const { return theta_; }

  Eigen::Vector4d eigenvalues() const;

 private:
  friend DensityMatrix make_state(double v, double theta);
  Eigen::Matrix4d entries_;
  std::optional<double> v_;
  std::optional<double> theta_;
};

/// ρ(v,θ) = v·|Ψθ><Ψθ| + (1−v)·I/4 with |Ψθ> = cosθ|00> + sinθ|11>.
DensityMatrix make_state(double v, double theta);

enum class Party { Alice = 0, Bob = 1 };

/// Projector onto the Bloch vector (sin φ, 0, cos φ) for outcome +1, and onto
/// its antipode for outcome -1.
Eigen::Matrix2d bloch_projector(double angle, int outcome);

/// A ⊗ B for single-qubit operators, Alice's qubit first.
Eigen::Matrix4d kron(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b);

/// Binary projective qubit measurements in the x–z plane, one angle per input.
class MeasurementSet {
 public:
  MeasurementSet(std::vector<double> alice_angles, std::vector<double> bob_angles);

  int mx() const { return static_cast<int>(alice_.size()); }
  int my() const { return static_cast<int>(bob_.size()); }
  const std::vector<double>& alice_angles() const { return alice_; }
  const std::vector<double>& bob_angles() const { return bob_; }
  double angle(Party party, int input) const;

  Eigen::Matrix2d projector(Party party, int input, int outcome) const;

 private:
  std::vector<double> alice_;
  std::vector<double> bob_;
};

/// Conditional probabilities p(a,b|x,y).
class Behavior {
 public:
  /// Validates the probability ranges and per-(x,y) normalization to
  /// `tolerance`.
  Behavior(int mx, int my, std::vector<double> probs, double tolerance = num::kTol.probability);

  static Behavior uniform(int mx, int my);
  static Behavior deterministic(int mx, int my, int a, int b);

  int mx() const { return mx_; }
  int my() const { return my_; }
  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }

  double operator()(int a, int b, int x, int y) const { return probs_[index(a, b, x, y)]; }
  std::size_t index(int a, int b, int x, int y) const { return component_index(mx_, my_, a, b, x, y); }

  static std::size_t component_index(int mx, int my, int a, int b, int x, int y) {
    const auto ai = static_cast<std::size_t>(outcome_index(a));
    const auto bi = static_cast<std::size_t>(outcome_index(b));
    return ((ai * 2 + bi) * static_cast<std::size_t>(mx) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(my) +
           static_cast<std::size_t>(y);
  }

  double marginal_alice(int a, int x, int y) const { return (*this)(a, -1, x, y) + (*this)(a, +1, x, y); }
  double marginal_bob(int b, int x, int y) const { return (*this)(-1, b, x, y) + (*this)(+1, b, x, y); }
  double correlator(int x, int y) const;
  double alice_mean(int x) const;  // <A_x>, taken at y = 0
  double bob_mean(int y) const;    // <B_y>, taken at x = 0

  /// Largest violation of no-signaling over all marginals.
  double signaling_violation() const;

 private:
  int mx_;
  int my_;
  std::vector<double> probs_;
};

Behavior behavior(const DensityMatrix& state, const MeasurementSet& meas);

double chsh_value(const Behavior& b);
double ibeta_value(const Behavior& b, double beta);
double beta_coefficient(double theta);

/// Alice angles (0, π/2), Bob angles (π/4, 3π/4, 0).
MeasurementSet canonical_settings();

/// canonical_settings() truncated to (mx, my), padded with evenly spaced angles.
MeasurementSet canonical_settings(int mx, int my);

/// CSV with header `a,b,x,y,p`; x, y one-based.
void write_behavior_csv(std::ostream& out, const Behavior& b);
Behavior read_behavior_csv(std::istream& in, double normalization_tolerance = 1e-6);

}  // namespace dirand
