#include "dirand/sdp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <ostream>
#include <tuple>

namespace dirand::sdp {

namespace {

// Full (both triangles) nonzero of a coefficient matrix within one block.
struct Nz {
  int row;
  int col;
  double value;
};

// A constraint's nonzeros grouped per block.
struct CompiledRow {
  std::vector<std::pair<int, std::vector<Nz>>> blocks;  // (block, nonzeros)
  double rhs = 0.0;
};

void normalize(Entry& e) {
  if (e.row > e.col) std::swap(e.row, e.col);
}

std::vector<std::pair<int, std::vector<Nz>>> expand(const std::vector<Entry>& entries) {
  // Merge duplicates first so that each position carries one value.
  std::map<std::tuple<int, int, int>, double> merged;
  for (Entry e : entries) {
    normalize(e);
    merged[{e.block, e.row, e.col}] += e.value;
  }
  std::map<int, std::vector<Nz>> per_block;
  for (const auto& [key, v] : merged) {
    if (v == 0.0) continue;
    const auto [b, i, j] = key;
    auto& nz = per_block[b];
    nz.push_back({i, j, v});
    if (i != j) nz.push_back({j, i, v});
  }
  return {per_block.begin(), per_block.end()};
}

double apply_row(const std::vector<std::pair<int, std::vector<Nz>>>& row, const std::vector<Matrix>& y) {
  double s = 0.0;
  for (const auto& [b, nz] : row)
    for (const Nz& e : nz) s += e.value * y[static_cast<std::size_t>(b)](e.row, e.col);
  return s;
}

void accumulate(const std::vector<std::pair<int, std::vector<Nz>>>& row, double scale, std::vector<Matrix>& out) {
  for (const auto& [b, nz] : row)
    for (const Nz& e : nz) out[static_cast<std::size_t>(b)](e.row, e.col) += scale * e.value;
}

double inner(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double frobenius(const std::vector<Matrix>& a) { return std::sqrt(inner(a, a)); }

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

std::vector<Matrix> zeros(const std::vector<int>& orders) {
  std::vector<Matrix> out;
  out.reserve(orders.size());
  for (int n : orders) out.push_back(Matrix::Zero(n, n));
  return out;
}

}  // namespace

void Constraint::add(int block, int row, int col, double value) {
  Entry e{block, row, col, value};
  normalize(e);
  entries.push_back(e);
}

void SdpProblem::add_objective(int block, int row, int col, double value) {
  Entry e{block, row, col, value};
  normalize(e);
  objective.push_back(e);
}

void SdpProblem::validate() const {
  if (block_orders.empty()) throw InputError("sdp: problem has no blocks");
  for (int n : block_orders)
    if (n < 1) throw InputError("sdp: block order must be positive");
  auto check = [&](const Entry& e, const std::string& where) {
    if (e.block < 0 || e.block >= block_count())
      throw InputError("sdp: " + where + " references block " + std::to_string(e.block));
    const int n = block_orders[static_cast<std::size_t>(e.block)];
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n)
      throw InputError("sdp: " + where + " entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                       ") outside block of order " + std::to_string(n));
    if (!std::isfinite(e.value)) throw InputError("sdp: " + where + " has a non-finite coefficient");
  };
  for (const Entry& e : objective) check(e, "objective");
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    for (const Entry& e : constraints[j].entries) check(e, "constraint " + std::to_string(j));
    if (!std::isfinite(constraints[j].rhs)) throw InputError("sdp: non-finite right-hand side");
  }
}

std::vector<Matrix> SdpProblem::objective_blocks() const {
  auto out = zeros(block_orders);
  accumulate(expand(objective), 1.0, out);
  return out;
}

std::vector<Matrix> SdpProblem::constraint_blocks(int j) const {
  auto out = zeros(block_orders);
  accumulate(expand(constraints.at(static_cast<std::size_t>(j)).entries), 1.0, out);
  return out;
}

void SdpProblem::dump(std::ostream& out) const {
  const auto old = out.precision(17);
  out << block_count();
  for (int n : block_orders) out << ' ' << n;
  out << ' ' << constraint_count() << '\n';
  auto emit = [&](int index, const std::vector<Entry>& entries) {
    std::map<std::tuple<int, int, int>, double> merged;
    for (Entry e : entries) {
      normalize(e);
      merged[{e.block, e.row, e.col}] += e.value;
    }
    for (const auto& [key, v] : merged) {
      if (v == 0.0) continue;
      const auto [b, i, j] = key;
      out << index << ' ' << b << ' ' << i << ' ' << j << ' ' << v << '\n';
    }
  };
  emit(0, objective);
  for (int j = 0; j < constraint_count(); ++j) {
    const auto& c = constraints[static_cast<std::size_t>(j)];
    emit(j + 1, c.entries);
    if (c.rhs != 0.0) out << j + 1 << " -1 0 0 " << c.rhs << '\n';
  }
  out.precision(old);
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::MaxIterations: return "max_iterations";
    case Status::Infeasible: return "infeasible";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

// Rows as sparse vectors in the trace inner product, indexed by
// upper-triangular position, plus the set of blocks each row touches.
struct RowGeometry {
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<std::vector<std::pair<int, double>>> by_position;
  std::vector<int> home_block;  // block of a single-block row, -1 for coupling rows
};

RowGeometry geometry(const SdpProblem& p) {
  RowGeometry g;
  const int m = p.constraint_count();
  std::map<std::tuple<int, int, int>, int> position;
  g.rows.resize(static_cast<std::size_t>(m));
  g.home_block.assign(static_cast<std::size_t>(m), -1);
  for (int j = 0; j < m; ++j) {
    std::map<int, double> acc;
    int home = -2;
    for (Entry e : p.constraints[static_cast<std::size_t>(j)].entries) {
      normalize(e);
      auto [it, _] = position.try_emplace({e.block, e.row, e.col}, static_cast<int>(position.size()));
      acc[it->second] += (e.row == e.col ? 1.0 : std::sqrt(2.0)) * e.value;
      home = (home == -2 || home == e.block) ? e.block : -1;
    }
    for (const auto& [k, v] : acc)
      if (v != 0.0) g.rows[static_cast<std::size_t>(j)].emplace_back(k, v);
    g.home_block[static_cast<std::size_t>(j)] = home < 0 ? -1 : home;
  }
  g.by_position.resize(position.size());
  for (int j = 0; j < m; ++j)
    for (const auto& [k, v] : g.rows[static_cast<std::size_t>(j)]) g.by_position[static_cast<std::size_t>(k)].emplace_back(j, v);
  return g;
}

// Incremental Cholesky factor of a Gram matrix, grown one row at a time.
class GramFactor {
 public:
  // Tries to append a row with Gram vector g (against rows already held) and
  // squared norm self. Returns false when the row is numerically dependent.
  bool try_append(const Vector& g, double self, double tol) {
    const auto k = size_;
    Vector coeff = k > 0 ? Vector(l_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(g)) : Vector();
    const double residual = self - (k > 0 ? coeff.squaredNorm() : 0.0);
    if (residual <= tol * self) return false;
    if (l_.rows() <= k) {
      const Eigen::Index cap = std::max<Eigen::Index>(2 * k, 16);
      l_.conservativeResize(cap, cap);
    }
    l_.row(k).setZero();
    if (k > 0) l_.row(k).head(k) = coeff.transpose();
    l_(k, k) = std::sqrt(residual);
    ++size_;
    return true;
  }
  Eigen::Index size() const { return size_; }

 private:
  Matrix l_;
  Eigen::Index size_ = 0;
};

}  // namespace

Presolve presolve(const SdpProblem& p, double rank_tolerance) {
  p.validate();
  const int m = p.constraint_count();
  const RowGeometry geo = geometry(p);

  // Rows confined to one block can only depend on other rows of that block
  // (the Gram matrix is block diagonal there), so they are checked per block
  // first. Coupling rows are then checked against everything kept.
  std::vector<int> order;
  for (int blk = 0; blk < p.block_count(); ++blk)
    for (int j = 0; j < m; ++j)
      if (geo.home_block[static_cast<std::size_t>(j)] == blk) order.push_back(j);
  for (int j = 0; j < m; ++j)
    if (geo.home_block[static_cast<std::size_t>(j)] < 0) order.push_back(j);

  std::vector<GramFactor> local(static_cast<std::size_t>(p.block_count()));
  std::vector<int> slot(static_cast<std::size_t>(m), -1);
  std::vector<int> slot_block(static_cast<std::size_t>(m), -1);
  std::vector<bool> keep(static_cast<std::size_t>(m), false);

  auto gram_with = [&](int j, auto&& accept) {
    double self = 0.0;
    for (const auto& [pos, v] : geo.rows[static_cast<std::size_t>(j)]) {
      self += v * v;
      for (const auto& [other, w] : geo.by_position[static_cast<std::size_t>(pos)])
        if (other != j && keep[static_cast<std::size_t>(other)]) accept(other, v * w);
    }
    return self;
  };

  // Local rows.
  std::size_t cursor = 0;
  for (; cursor < order.size(); ++cursor) {
    const int j = order[cursor];
    const int blk = geo.home_block[static_cast<std::size_t>(j)];
    if (blk < 0) break;
    GramFactor& f = local[static_cast<std::size_t>(blk)];
    Vector g = Vector::Zero(f.size());
    const double self = gram_with(j, [&](int other, double v) { g(slot[static_cast<std::size_t>(other)]) += v; });
    if (self > 0.0 && f.try_append(g, self, rank_tolerance)) {
      slot[static_cast<std::size_t>(j)] = static_cast<int>(f.size() - 1);
      slot_block[static_cast<std::size_t>(j)] = blk;
      keep[static_cast<std::size_t>(j)] = true;
    }
  }

  // Coupling rows: project out the span of kept local rows block by block,
  // then run an incremental factorization on the projected rows.
  std::vector<int> kept_local_count(static_cast<std::size_t>(p.block_count()), 0);
  for (int j = 0; j < m; ++j)
    if (keep[static_cast<std::size_t>(j)]) ++kept_local_count[static_cast<std::size_t>(slot_block[static_cast<std::size_t>(j)])];
  // Dense local Gram factors are needed for the projection; rebuild them from
  // the kept rows in slot order.
  std::vector<Matrix> local_gram(static_cast<std::size_t>(p.block_count()));
  std::vector<std::vector<int>> local_rows(static_cast<std::size_t>(p.block_count()));
  for (int blk = 0; blk < p.block_count(); ++blk)
    local_rows[static_cast<std::size_t>(blk)].resize(static_cast<std::size_t>(kept_local_count[static_cast<std::size_t>(blk)]));
  for (int j = 0; j < m; ++j)
    if (keep[static_cast<std::size_t>(j)])
      local_rows[static_cast<std::size_t>(slot_block[static_cast<std::size_t>(j)])][static_cast<std::size_t>(slot[static_cast<std::size_t>(j)])] = j;
  std::vector<Eigen::LLT<Matrix>> local_llt(static_cast<std::size_t>(p.block_count()));
  for (int blk = 0; blk < p.block_count(); ++blk) {
    const auto& rows = local_rows[static_cast<std::size_t>(blk)];
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix gm = Matrix::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const int j = rows[static_cast<std::size_t>(a)];
      for (const auto& [pos, v] : geo.rows[static_cast<std::size_t>(j)])
        for (const auto& [other, w] : geo.by_position[static_cast<std::size_t>(pos)])
          if (keep[static_cast<std::size_t>(other)] && slot_block[static_cast<std::size_t>(other)] == blk)
            gm(a, slot[static_cast<std::size_t>(other)]) += v * w;
    }
    local_llt[static_cast<std::size_t>(blk)].compute(gm);
  }

  // Each coupling row r is replaced by its residual after projection onto
  // the local span: inner products become <r,s> − g_rᵀ G⁻¹ g_s per block.
  std::vector<int> coupling;
  std::vector<std::vector<Vector>> coupling_g;
  GramFactor cf;
  for (; cursor < order.size(); ++cursor) {
    const int j = order[cursor];
    std::vector<Vector> gb(static_cast<std::size_t>(p.block_count()));
    for (int blk = 0; blk < p.block_count(); ++blk) gb[static_cast<std::size_t>(blk)] = Vector::Zero(kept_local_count[static_cast<std::size_t>(blk)]);
    std::map<int, double> with_coupling;
    double self = 0.0;
    for (const auto& [pos, v] : geo.rows[static_cast<std::size_t>(j)]) {
      self += v * v;
      for (const auto& [other, w] : geo.by_position[static_cast<std::size_t>(pos)]) {
        if (other == j || !keep[static_cast<std::size_t>(other)]) continue;
        const int blk = slot_block[static_cast<std::size_t>(other)];
        if (blk >= 0)
          gb[static_cast<std::size_t>(blk)](slot[static_cast<std::size_t>(other)]) += v * w;
        else
          with_coupling[other] += v * w;
      }
    }
    if (self == 0.0) continue;
    std::vector<Vector> ginv(static_cast<std::size_t>(p.block_count()));
    double proj_self = self;
    for (int blk = 0; blk < p.block_count(); ++blk) {
      const auto& gk = gb[static_cast<std::size_t>(blk)];
      if (gk.size() == 0) continue;
      ginv[static_cast<std::size_t>(blk)] = local_llt[static_cast<std::size_t>(blk)].solve(gk);
      proj_self -= gk.dot(ginv[static_cast<std::size_t>(blk)]);
    }
    Vector g(static_cast<Eigen::Index>(coupling.size()));
    for (std::size_t t = 0; t < coupling.size(); ++t) {
      double v = 0.0;
      if (auto it = with_coupling.find(coupling[t]); it != with_coupling.end()) v = it->second;
      for (int blk = 0; blk < p.block_count(); ++blk) {
        const auto& gk = gb[static_cast<std::size_t>(blk)];
        if (gk.size() == 0) continue;
        v -= coupling_g[t][static_cast<std::size_t>(blk)].dot(ginv[static_cast<std::size_t>(blk)]);
      }
      g(static_cast<Eigen::Index>(t)) = v;
    }
    // Compare against the unprojected norm so that rows lying in the local
    // span are dropped too.
    const double floor = rank_tolerance * self;
    if (proj_self <= floor) continue;
    if (!cf.try_append(g, proj_self, floor / proj_self)) continue;
    keep[static_cast<std::size_t>(j)] = true;
    coupling.push_back(j);
    coupling_g.push_back(std::move(gb));
  }

  Presolve out;
  for (int j = 0; j < m; ++j) (keep[static_cast<std::size_t>(j)] ? out.kept : out.dropped).push_back(j);
  return out;
}

namespace {

// Schur complement of the HKM normal equations, stored as a bordered block
// diagonal matrix: rows confined to one block form that block's diagonal
// part, rows touching several blocks form the border.
class BorderedSchur {
 public:
  BorderedSchur(int blocks, std::vector<std::vector<int>> local, std::vector<int> coupling, int m)
      : local_(std::move(local)), coupling_(std::move(coupling)), m_(m) {
    d_.resize(static_cast<std::size_t>(blocks));
    b_.resize(static_cast<std::size_t>(blocks));
    y_.resize(static_cast<std::size_t>(blocks));
    llt_.resize(static_cast<std::size_t>(blocks));
    slot_.assign(static_cast<std::size_t>(m), -1);
    for (const auto& rows : local_)
      for (std::size_t a = 0; a < rows.size(); ++a) slot_[static_cast<std::size_t>(rows[a])] = static_cast<int>(a);
    for (std::size_t c = 0; c < coupling_.size(); ++c) slot_[static_cast<std::size_t>(coupling_[c])] = static_cast<int>(c);
    home_.assign(static_cast<std::size_t>(m), -1);
    for (std::size_t k = 0; k < local_.size(); ++k)
      for (int r : local_[k]) home_[static_cast<std::size_t>(r)] = static_cast<int>(k);
  }

  void reset() {
    const auto nc = static_cast<Eigen::Index>(coupling_.size());
    for (std::size_t k = 0; k < local_.size(); ++k) {
      const auto nk = static_cast<Eigen::Index>(local_[k].size());
      d_[k].setZero(nk, nk);
      b_[k].setZero(nk, nc);
    }
    e_.setZero(nc, nc);
  }

  // Adds v to entry (i, j) of the contribution of block k; only called with
  // i, j both touching block k.
  void add(int k, int i, int j, double v) {
    const int si = slot_[static_cast<std::size_t>(i)];
    const int sj = slot_[static_cast<std::size_t>(j)];
    const bool li = home_[static_cast<std::size_t>(i)] >= 0;
    const bool lj = home_[static_cast<std::size_t>(j)] >= 0;
    if (li && lj)
      d_[static_cast<std::size_t>(k)](si, sj) += v;
    else if (li)
      b_[static_cast<std::size_t>(k)](si, sj) += v;
    else if (!lj)
      e_(si, sj) += v;
  }

  bool factor() {
    const auto nc = static_cast<Eigen::Index>(coupling_.size());
    Matrix s = e_;
    for (std::size_t k = 0; k < local_.size(); ++k) {
      if (d_[k].rows() == 0) {
        y_[k].resize(0, nc);
        continue;
      }
      if (!shifted_llt(d_[k], llt_[k])) return false;
      y_[k] = llt_[k].solve(b_[k]);
      if (nc > 0) s.noalias() -= b_[k].transpose() * y_[k];
    }
    if (nc > 0) return shifted_llt(s, llt_s_);
    return true;
  }

  Vector solve(const Vector& r) const {
    Vector x = solve_once(r);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector res = r - multiply(x);
      x += solve_once(res);
    }
    return x;
  }

 private:
  static bool shifted_llt(const Matrix& a, Eigen::LLT<Matrix>& out) {
    out.compute(a);
    if (out.info() == Eigen::Success) return true;
    const double scale = std::max(a.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double shift = 1e-14; shift <= 1e-4; shift *= 100.0) {
      Matrix t = a;
      t.diagonal().array() += shift * scale;
      out.compute(t);
      if (out.info() == Eigen::Success) return true;
    }
    return false;
  }

  Vector solve_once(const Vector& r) const {
    Vector x = Vector::Zero(m_);
    const auto nc = static_cast<Eigen::Index>(coupling_.size());
    Vector t(nc);
    for (Eigen::Index c = 0; c < nc; ++c) t(c) = r(coupling_[static_cast<std::size_t>(c)]);
    std::vector<Vector> rl(local_.size());
    for (std::size_t k = 0; k < local_.size(); ++k) {
      rl[k].resize(static_cast<Eigen::Index>(local_[k].size()));
      for (std::size_t a = 0; a < local_[k].size(); ++a) rl[k](static_cast<Eigen::Index>(a)) = r(local_[k][a]);
      if (nc > 0 && rl[k].size() > 0) t.noalias() -= y_[k].transpose() * rl[k];
    }
    Vector w = nc > 0 ? Vector(llt_s_.solve(t)) : Vector();
    for (std::size_t k = 0; k < local_.size(); ++k) {
      if (rl[k].size() == 0) continue;
      Vector rhs = rl[k];
      if (nc > 0) rhs.noalias() -= b_[k] * w;
      const Vector u = llt_[k].solve(rhs);
      for (std::size_t a = 0; a < local_[k].size(); ++a) x(local_[k][a]) = u(static_cast<Eigen::Index>(a));
    }
    for (Eigen::Index c = 0; c < nc; ++c) x(coupling_[static_cast<std::size_t>(c)]) = w(c);
    return x;
  }

  Vector multiply(const Vector& x) const {
    Vector out = Vector::Zero(m_);
    const auto nc = static_cast<Eigen::Index>(coupling_.size());
    Vector w(nc);
    for (Eigen::Index c = 0; c < nc; ++c) w(c) = x(coupling_[static_cast<std::size_t>(c)]);
    Vector oc = nc > 0 ? Vector(e_ * w) : Vector();
    for (std::size_t k = 0; k < local_.size(); ++k) {
      const auto nk = static_cast<Eigen::Index>(local_[k].size());
      if (nk == 0) continue;
      Vector u(nk);
      for (Eigen::Index a = 0; a < nk; ++a) u(a) = x(local_[k][static_cast<std::size_t>(a)]);
      Vector ol = d_[k] * u;
      if (nc > 0) {
        ol.noalias() += b_[k] * w;
        oc.noalias() += b_[k].transpose() * u;
      }
      for (Eigen::Index a = 0; a < nk; ++a) out(local_[k][static_cast<std::size_t>(a)]) = ol(a);
    }
    for (Eigen::Index c = 0; c < nc; ++c) out(coupling_[static_cast<std::size_t>(c)]) = oc(c);
    return out;
  }

  std::vector<std::vector<int>> local_;
  std::vector<int> coupling_;
  int m_;
  std::vector<int> slot_;
  std::vector<int> home_;
  std::vector<Matrix> d_;
  std::vector<Matrix> b_;
  std::vector<Matrix> y_;
  Matrix e_;
  std::vector<Eigen::LLT<Matrix>> llt_;
  Eigen::LLT<Matrix> llt_s_;
};

struct Iterate {
  std::vector<Matrix> x;
  std::vector<Matrix> z;
  Vector y;
};

}  // namespace

SdpSolution Solver::solve(const SdpProblem& p, const SolverOptions& opts) {
  return solve(p, presolve(p, opts.rank_tolerance), opts);
}

SdpSolution Solver::solve(const SdpProblem& p, const Presolve& pre, const SolverOptions& opts) {
  p.validate();
  if (pre.kept.size() + pre.dropped.size() != p.constraints.size())
    throw InputError("solve: presolve does not match the problem");
  if (!(opts.tolerance > 0.0) || opts.max_iterations <= 0 || !(opts.step_fraction > 0.0 && opts.step_fraction < 1.0))
    throw InputError("solve: invalid solver options");

  const int nb = p.block_count();
  const int m = static_cast<int>(pre.kept.size());
  std::vector<std::vector<std::pair<int, std::vector<Nz>>>> rows;
  rows.reserve(static_cast<std::size_t>(m));
  Vector b(m);
  for (int t = 0; t < m; ++t) {
    const auto& c = p.constraints[static_cast<std::size_t>(pre.kept[static_cast<std::size_t>(t)])];
    rows.push_back(expand(c.entries));
    b(t) = c.rhs;
  }
  const std::vector<Matrix> cmat = p.objective_blocks();

  // Rows touching each block, and the local/coupling split.
  std::vector<std::vector<std::pair<int, const std::vector<Nz>*>>> touching(static_cast<std::size_t>(nb));
  std::vector<std::vector<int>> local(static_cast<std::size_t>(nb));
  std::vector<int> coupling;
  for (int t = 0; t < m; ++t) {
    const auto& r = rows[static_cast<std::size_t>(t)];
    for (const auto& [blk, nz] : r) touching[static_cast<std::size_t>(blk)].emplace_back(t, &nz);
    if (r.size() == 1)
      local[static_cast<std::size_t>(r.front().first)].push_back(t);
    else
      coupling.push_back(t);
  }
  BorderedSchur schur(nb, local, coupling, m);

  auto op_a = [&](const std::vector<Matrix>& x) {
    Vector out(m);
    for (int t = 0; t < m; ++t) out(t) = apply_row(rows[static_cast<std::size_t>(t)], x);
    return out;
  };
  auto op_at = [&](const Vector& y) {
    std::vector<Matrix> out = zeros(p.block_orders);
    for (int t = 0; t < m; ++t) accumulate(rows[static_cast<std::size_t>(t)], y(t), out);
    return out;
  };

  int n_total = 0;
  for (int n : p.block_orders) n_total += n;
  const double norm_b = b.norm();
  const double norm_c = frobenius(cmat);

  auto assemble = [&](BorderedSchur& out, const std::vector<Matrix>& ws) {
    out.reset();
    for (int k = 0; k < nb; ++k) {
      const Matrix& wk = ws[static_cast<std::size_t>(k)];
      const auto n = wk.rows();
      const auto& tr = touching[static_cast<std::size_t>(k)];
      Matrix pmat(n, n);
      for (std::size_t a = 0; a < tr.size(); ++a) {
        pmat.setZero();
        for (const Nz& e : *tr[a].second) pmat.noalias() += e.value * wk.col(e.row) * wk.row(e.col);
        for (std::size_t c = a; c < tr.size(); ++c) {
          double v = 0.0;
          for (const Nz& e : *tr[c].second) v += e.value * pmat(e.row, e.col);
          out.add(k, tr[a].first, tr[c].first, v);
          if (c != a) out.add(k, tr[c].first, tr[a].first, v);
        }
      }
    }
  };

  // Homogeneous self-dual embedding: (X, y, Z, τ, κ) with
  //   A(X) = bτ,  Aᵀy − Cτ = Z,  <C,X> − bᵀy = κ,
  // so that no strictly feasible point of the original pair is needed.
  Iterate it;
  for (int n : p.block_orders) {
    it.x.push_back(Matrix::Identity(n, n));
    it.z.push_back(Matrix::Identity(n, n));
  }
  it.y = Vector::Zero(m);
  double tau = 1.0, kappa = 1.0;

  SdpSolution sol;
  double pinf = 0.0, dinf = 0.0, relgap = 0.0, pobj = 0.0, dobj = 0.0;
  auto measure = [&](const Iterate& s, double t) {
    const Vector rp = b - op_a(s.x) / t;
    std::vector<Matrix> at = op_at(s.y);
    double rd = 0.0;
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      rd += (cmat[ks] + (s.z[ks] - at[ks]) / t).squaredNorm();
    }
    pinf = rp.norm() / (1.0 + norm_b);
    dinf = std::sqrt(rd) / (1.0 + norm_c);
    pobj = inner(cmat, s.x) / t;
    dobj = b.dot(s.y) / t;
    relgap = std::abs(dobj - pobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  };

  // On problems without a strictly feasible primal point the gap can stall
  // while the iterates still improve, so the latest iterate is returned
  // unless its residuals have blown up relative to the most feasible one.
  Iterate most_feasible = it;
  double most_feasible_tau = tau;
  double best_feas = std::numeric_limits<double>::infinity();
  double best_merit = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  constexpr int kStallWindow = 20;

  Status status = Status::MaxIterations;
  std::string message = "iteration limit reached";
  int iter = 0;
  for (; iter <= opts.max_iterations; ++iter) {
    measure(it, tau);
    const double merit = std::max({pinf, dinf, relgap});
    if (merit < 0.9 * best_merit) {
      best_iter = iter;
      best_merit = merit;
    }
    if (std::max(pinf, dinf) < best_feas) {
      best_feas = std::max(pinf, dinf);
      most_feasible = it;
      most_feasible_tau = tau;
    }
    if (opts.verbose)
      std::cerr << "iter " << iter << " pobj " << pobj << " dobj " << dobj << " pinf " << pinf << " dinf " << dinf
                << " gap " << relgap << " tau " << tau << " kappa " << kappa << '\n';
    // Residuals of size tol can hide a weak-duality violation of the same
    // size, so optimality also asks the dual bound to stay above the primal.
    const bool weakly_dual = dobj >= pobj - 0.1 * opts.tolerance * (1.0 + std::abs(pobj));
    if (pinf <= opts.tolerance && dinf <= opts.tolerance && relgap <= opts.tolerance && weakly_dual) {
      status = Status::Optimal;
      message = "converged";
      break;
    }
    // Infeasibility certificates appear once τ vanishes against κ.
    if (tau < 1e-8 * std::max(1.0, kappa)) {
      const double by = b.dot(it.y);
      const double cx = inner(cmat, it.x);
      double aty_z = 0.0;
      const std::vector<Matrix> at = op_at(it.y);
      for (int k = 0; k < nb; ++k) aty_z += (at[static_cast<std::size_t>(k)] - it.z[static_cast<std::size_t>(k)]).squaredNorm();
      if (by < 0.0 && std::sqrt(aty_z) <= 1e-6 * -by) {
        status = Status::Infeasible;
        message = "primal infeasible: found y with Aᵀy ⪰ 0 and bᵀy < 0";
        break;
      }
      if (cx > 0.0 && op_a(it.x).norm() <= 1e-6 * cx) {
        status = Status::Infeasible;
        message = "dual infeasible: found X ⪰ 0 with A(X) = 0 and <C,X> > 0";
        break;
      }
    }
    if (iter == opts.max_iterations) break;
    if (iter - best_iter >= kStallWindow) {
      status = Status::NumericalFailure;
      message = "no progress: the problem may lack a strictly feasible point";
      break;
    }

    // Nesterov-Todd scaling: G with W = G Gᵀ, W Z W = X, and
    // G⁻¹ X G⁻ᵀ = Gᵀ Z G = V diagonal.
    std::vector<Matrix> w(static_cast<std::size_t>(nb)), gs(static_cast<std::size_t>(nb));
    std::vector<Vector> v(static_cast<std::size_t>(nb));
    bool ok = true;
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      Eigen::LLT<Matrix> llt(it.x[ks]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      const Matrix l = llt.matrixL();
      const auto eig = num::sym_eig(num::SymMatrix::symmetrized(l.transpose() * it.z[ks] * l));
      if (eig.values.minCoeff() <= 0.0) {
        ok = false;
        break;
      }
      v[ks] = eig.values.cwiseSqrt();
      const Vector q4 = eig.values.array().pow(0.25);
      gs[ks] = l * eig.vectors * q4.cwiseInverse().asDiagonal();
      w[ks] = sym(gs[ks] * gs[ks].transpose());
    }
    if (!ok) {
      status = Status::NumericalFailure;
      message = "iterate lost definiteness";
      break;
    }

    // Schur complement M_ij = tr(A_i W A_j W).
    assemble(schur, w);
    if (!schur.factor()) {
      status = Status::NumericalFailure;
      message = "Schur complement factorization failed";
      break;
    }

    const std::vector<Matrix> at = op_at(it.y);
    std::vector<Matrix> rd(static_cast<std::size_t>(nb)), wcw(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      rd[ks] = at[ks] - tau * cmat[ks] - it.z[ks];
      wcw[ks] = w[ks] * cmat[ks] * w[ks];
    }
    const Vector rp = op_a(it.x) - tau * b;
    const double rg = inner(cmat, it.x) - b.dot(it.y) - kappa;
    const double mu = (inner(it.x, it.z) + tau * kappa) / (n_total + 1);

    // τ-direction of the reduced system, shared by predictor and corrector.
    const Vector dy2 = schur.solve(op_a(wcw) - b);
    std::vector<Matrix> dx2 = op_at(dy2);
    double denom = kappa / tau;
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const Matrix d = dx2[ks] - cmat[ks];
      dx2[ks] = -sym(w[ks] * d * w[ks]);
      denom -= inner({d}, {dx2[ks]});
    }

    // Direction for the scaled complementarity right-hand side r, i.e.
    // V(dX̃ + dZ̃) + (dX̃ + dZ̃)V = r with dX̃ = G⁻¹ dX G⁻ᵀ and dZ̃ = Gᵀ dZ G,
    // τ-κ right-hand side rk and residual reduction factor eta.
    struct Direction {
      std::vector<Matrix> dx, dz, sx, sz;
      Vector dy;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto direction = [&](const std::vector<Matrix>& r, double rk, double eta) {
      Direction d;
      std::vector<Matrix> kk(static_cast<std::size_t>(nb)), rc(static_cast<std::size_t>(nb)), rhs(static_cast<std::size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const auto n = r[ks].rows();
        kk[ks].resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j) kk[ks](i, j) = r[ks](i, j) / (v[ks](i) + v[ks](j));
        kk[ks] = sym(kk[ks]);
        rc[ks] = sym(gs[ks] * kk[ks] * gs[ks].transpose());
        rhs[ks] = rc[ks] - eta * w[ks] * rd[ks] * w[ks];
      }
      const Vector dy1 = schur.solve(op_a(rhs) + eta * rp);
      std::vector<Matrix> dx1 = op_at(dy1);
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        dx1[ks] = sym(rc[ks] - w[ks] * (dx1[ks] + eta * rd[ks]) * w[ks]);
      }
      d.dtau = (-eta * rg - inner(cmat, dx1) + b.dot(dy1) + rk / tau) / denom;
      d.dkappa = (rk - kappa * d.dtau) / tau;
      d.dy = dy1 + d.dtau * dy2;
      d.dz = op_at(d.dy);
      d.dx.resize(static_cast<std::size_t>(nb));
      d.sx.resize(static_cast<std::size_t>(nb));
      d.sz.resize(static_cast<std::size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        d.dz[ks] += eta * rd[ks] - d.dtau * cmat[ks];
        d.sz[ks] = sym(gs[ks].transpose() * d.dz[ks] * gs[ks]);
        d.sx[ks] = kk[ks] - d.sz[ks];
        d.dx[ks] = sym(gs[ks] * d.sx[ks] * gs[ks].transpose());
      }
      return d;
    };
    // Largest step keeping V + t·S ⪰ 0 for diagonal V.
    auto scaled_step = [](const Vector& vk, const Matrix& sk) {
      const Vector is = vk.cwiseSqrt().cwiseInverse();
      const Matrix mm = is.asDiagonal() * sk * is.asDiagonal();
      const double lo = num::min_eigenvalue(num::SymMatrix::symmetrized(mm));
      return lo >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
    };
    auto step = [&](const Direction& d) {
      double a = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nb; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        a = std::min({a, scaled_step(v[ks], d.sx[ks]), scaled_step(v[ks], d.sz[ks])});
      }
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    // Predictor.
    std::vector<Matrix> r0(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      r0[ks] = Matrix(-2.0 * v[ks].cwiseAbs2().asDiagonal());
    }
    const Direction pred = direction(r0, -tau * kappa, 1.0);
    const double a_aff = std::min(1.0, step(pred));
    double mu_aff = (tau + a_aff * pred.dtau) * (kappa + a_aff * pred.dkappa);
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      mu_aff += (it.x[ks] + a_aff * pred.dx[ks]).cwiseProduct(it.z[ks] + a_aff * pred.dz[ks]).sum();
    }
    mu_aff /= n_total + 1;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector with the second-order term of the predictor.
    std::vector<Matrix> r(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      r[ks] = r0[ks] - (pred.sx[ks] * pred.sz[ks] + pred.sz[ks] * pred.sx[ks]);
      r[ks].diagonal().array() += 2.0 * sigma * mu;
    }
    const Direction corr =
        direction(r, sigma * mu - tau * kappa - pred.dtau * pred.dkappa, 1.0 - sigma);
    const double alpha = std::min(1.0, opts.step_fraction * step(corr));
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      status = Status::NumericalFailure;
      message = "zero step length";
      break;
    }
    if (opts.verbose) std::cerr << "  mu " << mu << " sigma " << sigma << " alpha " << alpha << '\n';
    for (int k = 0; k < nb; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      it.x[ks] = sym(it.x[ks] + alpha * corr.dx[ks]);
      it.z[ks] = sym(it.z[ks] + alpha * corr.dz[ks]);
    }
    it.y += alpha * corr.dy;
    tau += alpha * corr.dtau;
    kappa += alpha * corr.dkappa;
  }

  if (status == Status::Infeasible) {
    // Report the certificate direction rather than a normalized iterate.
    const double scale = 1.0 / std::max({it.y.norm(), frobenius(it.x), 1e-300});
    for (auto& x : it.x) x *= scale;
    for (auto& z : it.z) z *= scale;
    it.y *= scale;
    tau = 1.0;
  } else {
    measure(it, tau);
    if (status != Status::Optimal && std::max(pinf, dinf) > 100.0 * best_feas && std::max(pinf, dinf) > opts.tolerance) {
      it = most_feasible;
      tau = most_feasible_tau;
    }
    for (auto& x : it.x) x /= tau;
    for (auto& z : it.z) z /= tau;
    it.y /= tau;
  }
  measure(it, 1.0);
  sol.iterations = std::min(iter, opts.max_iterations);
  sol.primal_blocks = it.x;
  sol.dual_vector.assign(p.constraints.size(), 0.0);
  for (int t = 0; t < m; ++t) sol.dual_vector[static_cast<std::size_t>(pre.kept[static_cast<std::size_t>(t)])] = it.y(t);
  sol.dual_slacks = op_at(it.y);
  for (int k = 0; k < nb; ++k) sol.dual_slacks[static_cast<std::size_t>(k)] -= cmat[static_cast<std::size_t>(k)];
  sol.primal_objective = pobj;
  sol.dual_objective = dobj;
  sol.primal_infeasibility = pinf;
  sol.dual_infeasibility = dinf;
  sol.relative_gap = relgap;
  sol.dropped_rows = pre.dropped;
  sol.status = status;
  sol.message = message;

  if (status == Status::Optimal) {
    // Dropped rows are linear combinations of kept ones; their right-hand
    // sides must agree with the solution or the system is inconsistent.
    for (int j : pre.dropped) {
      const auto& c = p.constraints[static_cast<std::size_t>(j)];
      const double res = c.rhs - apply_row(expand(c.entries), sol.primal_blocks);
      if (std::abs(res) > 1e3 * opts.tolerance * (1.0 + std::abs(c.rhs))) {
        sol.status = Status::Infeasible;
        sol.message = "dropped constraint " + std::to_string(j) + " is inconsistent with the kept ones";
        break;
      }
    }
  }
  return sol;
}

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts) {
  Solver s;
  return s.solve(p, opts);
}

ResidualReport residuals(const SdpProblem& p, const SdpSolution& s) {
  p.validate();
  if (s.primal_blocks.size() != p.block_orders.size() || s.dual_vector.size() != p.constraints.size())
    throw InputError("residuals: solution shape does not match the problem");
  ResidualReport r;
  for (const auto& c : p.constraints) {
    const double res = c.rhs - apply_row(expand(c.entries), s.primal_blocks);
    r.constraint_residuals.push_back(res);
    r.max_constraint_residual = std::max(r.max_constraint_residual, std::abs(res));
  }
  std::vector<Matrix> slack = p.objective_blocks();
  double dobj = 0.0;
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    accumulate(expand(p.constraints[j].entries), -s.dual_vector[j], slack);
    dobj += s.dual_vector[j] * p.constraints[j].rhs;
  }
  r.dual_slack_max_eigenvalue = -std::numeric_limits<double>::infinity();
  for (const Matrix& m : slack) r.dual_slack_max_eigenvalue = std::max(r.dual_slack_max_eigenvalue, num::max_eigenvalue(num::SymMatrix::symmetrized(m)));
  r.gap = dobj - inner(p.objective_blocks(), s.primal_blocks);
  for (const Matrix& x : s.primal_blocks) r.min_block_eigenvalues.push_back(num::min_eigenvalue(num::SymMatrix::symmetrized(x)));
  return r;
}

}  // namespace dirand::sdp
