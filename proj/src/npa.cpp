#include "dirand/npa.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace dirand::npa {

Monomial reduce(const std::vector<Letter>& word) {
  std::vector<Letter> sorted;
  sorted.reserve(word.size());
  for (const Letter& l : word)
    if (l.party == Party::Alice) sorted.push_back(l);
  for (const Letter& l : word)
    if (l.party == Party::Bob) sorted.push_back(l);

  Monomial out;
  for (const Letter& l : sorted)
    if (out.word.empty() || out.word.back() != l) out.word.push_back(l);
  return out;
}

Monomial Monomial::adjoint() const {
  std::vector<Letter> rev(word.rbegin(), word.rend());
  return reduce(rev);
}

std::string Monomial::to_string() const {
  if (word.empty()) return "1";
  std::string s;
  for (const Letter& l : word) {
    s += l.party == Party::Alice ? 'A' : 'B';
    s += std::to_string(l.input + 1);
  }
  return s;
}

std::vector<Monomial> monomials(int level, int mx, int my) {
  if (level < 1 || level > kMaxLevel) throw InputError("monomials: level must be 1, 2 or 3");
  if (mx < 1 || my < 1) throw InputError("monomials: need at least one input per party");

  std::vector<Letter> letters;
  for (int x = 0; x < mx; ++x) letters.push_back({Party::Alice, x});
  for (int y = 0; y < my; ++y) letters.push_back({Party::Bob, y});

  std::set<Monomial> seen;
  std::vector<std::vector<Letter>> frontier{{}};
  seen.insert(Monomial{});
  for (int len = 1; len <= level; ++len) {
    std::vector<std::vector<Letter>> next;
    for (const auto& w : frontier)
      for (const Letter& l : letters) {
        auto ext = w;
        ext.push_back(l);
        seen.insert(reduce(ext));
        next.push_back(std::move(ext));
      }
    frontier = std::move(next);
  }

  std::vector<Monomial> out(seen.begin(), seen.end());
  auto bob_count = [](const Monomial& m) {
    return std::count_if(m.word.begin(), m.word.end(), [](const Letter& l) { return l.party == Party::Bob; });
  };
  std::stable_sort(out.begin(), out.end(), [&](const Monomial& a, const Monomial& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    const auto ba = bob_count(a);
    const auto bb = bob_count(b);
    if (ba != bb) return ba < bb;
    return a.word < b.word;
  });
  return out;
}

MomentStructure::MomentStructure(std::vector<Monomial> basis) : basis_(std::move(basis)) {
  if (basis_.empty() || !basis_.front().is_identity())
    throw InputError("moment_structure: basis must start with the identity");
  const std::size_t n = basis_.size();
  entry_to_moment_.assign(n * n, -1);
  entry_words_.resize(n * n);
  for (int i = 0; i < dim(); ++i) {
    for (int j = i; j < dim(); ++j) {
      std::vector<Letter> w(basis_[static_cast<std::size_t>(i)].word.rbegin(), basis_[static_cast<std::size_t>(i)].word.rend());
      const auto& right = basis_[static_cast<std::size_t>(j)].word;
      w.insert(w.end(), right.begin(), right.end());
      const Monomial reduced = reduce(w);
      const Monomial key = std::min(reduced, reduced.adjoint());
      auto [it, inserted] = lookup_.try_emplace(key, moment_count());
      if (inserted) {
        moment_words_.push_back(key);
        representatives_.emplace_back(i, j);
      }
      entry_to_moment_[index(i, j)] = it->second;
      entry_to_moment_[index(j, i)] = it->second;
      entry_words_[index(i, j)] = reduced;
      entry_words_[index(j, i)] = reduced.adjoint();
    }
  }
}

int MomentStructure::find(const Monomial& word) const {
  const Monomial key = std::min(word, word.adjoint());
  auto it = lookup_.find(key);
  return it == lookup_.end() ? -1 : it->second;
}

int MomentStructure::distinct_word_count() const {
  std::set<Monomial> words(entry_words_.begin(), entry_words_.end());
  return static_cast<int>(words.size());
}

void MomentStructure::dump(std::ostream& out) const {
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      out << i << ' ' << j << ' ' << moment(i, j) << ' ' << entry_word(i, j).to_string() << '\n';
}

MomentStructure moment_structure(const std::vector<Monomial>& basis) {
  std::set<Monomial> unique(basis.begin(), basis.end());
  if (unique.size() != basis.size()) throw InputError("moment_structure: basis contains duplicates");
  for (const Monomial& m : basis)
    if (reduce(m.word) != m) throw InputError("moment_structure: basis word " + m.to_string() + " is not canonical");
  return MomentStructure(basis);
}

std::vector<LinearForm> behavior_map(const MomentStructure& s, int mx, int my) {
  auto need = [&](const Monomial& m) {
    const int id = s.find(m);
    if (id < 0) throw InputError("behavior_map: structure lacks moment " + m.to_string());
    return id;
  };
  const int u = need(Monomial{});
  std::vector<LinearForm> out(static_cast<std::size_t>(4 * mx * my));
  for (int x = 0; x < mx; ++x) {
    const int ax = need(Monomial{{{Party::Alice, x}}});
    for (int y = 0; y < my; ++y) {
      const int by = need(Monomial{{{Party::Bob, y}}});
      const int ab = need(Monomial{{{Party::Alice, x}, {Party::Bob, y}}});
      out[Behavior::component_index(mx, my, +1, +1, x, y)].terms = {{ab, 1.0}};
      out[Behavior::component_index(mx, my, +1, -1, x, y)].terms = {{ax, 1.0}, {ab, -1.0}};
      out[Behavior::component_index(mx, my, -1, +1, x, y)].terms = {{by, 1.0}, {ab, -1.0}};
      out[Behavior::component_index(mx, my, -1, -1, x, y)].terms = {{u, 1.0}, {ax, -1.0}, {by, -1.0}, {ab, 1.0}};
    }
  }
  return out;
}

Eigen::Matrix4d word_operator(const Monomial& m, const MeasurementSet& meas) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d b = Eigen::Matrix2d::Identity();
  for (const Letter& l : m.word) {
    if (l.party == Party::Alice)
      a = a * meas.projector(Party::Alice, l.input, +1);
    else
      b = b * meas.projector(Party::Bob, l.input, +1);
  }
  return kron(a, b);
}

std::vector<double> exact_moments(const MomentStructure& s, const DensityMatrix& state, const MeasurementSet& meas) {
  std::vector<double> out(static_cast<std::size_t>(s.moment_count()));
  for (int id = 0; id < s.moment_count(); ++id)
    out[static_cast<std::size_t>(id)] = (state.entries() * word_operator(s.moment_word(id), meas)).trace();
  return out;
}

}  // namespace dirand::npa
