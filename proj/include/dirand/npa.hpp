#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dirand/qstate.hpp"

namespace dirand::npa {

/// One generating operator: the +1-outcome projector of a party's input.
struct Letter {
  Party party;
  int input;  // zero-based

  auto operator<=>(const Letter&) const = default;
};

/// Word in the projectors, kept in canonical form by reduce(): Alice letters
/// before Bob letters and no two equal neighbours. The empty word is the
/// identity.
struct Monomial {
  std::vector<Letter> word;

  std::size_t length() const { return word.size(); }
  bool is_identity() const { return word.empty(); }
  /// Letters in reverse order, reduced: the adjoint operator.
  Monomial adjoint() const;
  std::string to_string() const;  // "1", "A1B2", ... (one-based inputs)

  auto operator<=>(const Monomial&) const = default;
};

/// Commutes Alice letters ahead of Bob letters and applies idempotence.
Monomial reduce(const std::vector<Letter>& word);

inline constexpr int kMaxLevel = 3;

/// Canonical monomials of length <= level, identity first, ordered by length,
/// then number of Bob letters, then letters.
std::vector<Monomial> monomials(int level, int mx, int my);

/// Moment matrix layout for a basis: which matrix entries share an
/// expectation value.
///
/// In the real-symmetric setting a word and its adjoint have equal
/// expectation, so both map to one moment identifier. `entry_word` keeps the
/// unidentified reduced word of every entry for inspection.
class MomentStructure {
 public:
  explicit MomentStructure(std::vector<Monomial> basis);

  const std::vector<Monomial>& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  int moment_count() const { return static_cast<int>(moment_words_.size()); }

  int moment(int i, int j) const { return entry_to_moment_[index(i, j)]; }
  const Monomial& entry_word(int i, int j) const { return entry_words_[index(i, j)]; }
  /// Canonical representative word of a moment identifier.
  const Monomial& moment_word(int id) const { return moment_words_[static_cast<std::size_t>(id)]; }
  /// First upper-triangular position (row <= col) holding the moment.
  std::pair<int, int> representative(int id) const { return representatives_[static_cast<std::size_t>(id)]; }
  /// Identifier of the moment of `word` (or its adjoint), or -1 if absent.
  int find(const Monomial& word) const;

  /// Number of distinct reduced words over all entries, without identifying
  /// a word with its adjoint.
  int distinct_word_count() const;

  /// One line per entry: `i j moment_id reduced_word`.
  void dump(std::ostream& out) const;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * basis_.size() + static_cast<std::size_t>(j); }

  std::vector<Monomial> basis_;
  std::vector<int> entry_to_moment_;
  std::vector<Monomial> entry_words_;
  std::vector<Monomial> moment_words_;
  std::vector<std::pair<int, int>> representatives_;
  std::map<Monomial, int> lookup_;
};

MomentStructure moment_structure(const std::vector<Monomial>& basis);

/// Sparse affine combination of moments.
struct LinearForm {
  std::vector<std::pair<int, double>> terms;  // (moment id, coefficient)
};

/// For each behavior component (indexed as Behavior::component_index), the
/// combination of moments giving that (unnormalized) probability.
std::vector<LinearForm> behavior_map(const MomentStructure& s, int mx, int my);

/// Expectation of every moment identifier for a concrete state and
/// measurements, computed by traces.
std::vector<double> exact_moments(const MomentStructure& s, const DensityMatrix& state, const MeasurementSet& meas);

/// Operator product of a word for concrete measurements (4×4).
Eigen::Matrix4d word_operator(const Monomial& m, const MeasurementSet& meas);

}  // namespace dirand::npa
