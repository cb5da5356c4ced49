#include "dirand/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

namespace dirand {

namespace {

void check_state_matrix(const Eigen::Matrix4d& m) {
  if (!m.allFinite()) throw InputError("DensityMatrix: non-finite entry");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > num::kTol.symmetry)
    throw InputError("DensityMatrix: matrix is not symmetric");
  if (std::abs(m.trace() - 1.0) > num::kTol.trace)
    throw InputError("DensityMatrix: trace differs from 1");
  const double lo = num::min_eigenvalue(num::SymMatrix(Eigen::MatrixXd(m)));
  if (lo < -num::kTol.psd) throw InputError("DensityMatrix: negative eigenvalue " + std::to_string(lo));
}

void check_angles(const std::vector<double>& angles, const char* who) {
  if (angles.empty()) throw InputError(std::string("MeasurementSet: ") + who + " needs at least one input");
  for (double a : angles)
    if (!std::isfinite(a)) throw InputError(std::string("MeasurementSet: non-finite ") + who + " angle");
}

}  // namespace

DensityMatrix::DensityMatrix(const Eigen::Matrix4d& entries) : entries_(entries) {
  check_state_matrix(entries_);
}

Eigen::Vector4d DensityMatrix::eigenvalues() const {
  return num::sym_eig(num::SymMatrix(Eigen::MatrixXd(entries_))).values;
}

DensityMatrix make_state(double v, double theta) {
  if (!(v >= 0.0 && v <= 1.0)) throw InputError("make_state: visibility must lie in [0, 1]");
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 4 + 1e-12))
    throw InputError("make_state: theta must lie in [0, pi/4]");
  Eigen::Vector4d psi(std::cos(theta), 0.0, 0.0, std::sin(theta));
  Eigen::Matrix4d rho = v * psi * psi.transpose() + (1.0 - v) * 0.25 * Eigen::Matrix4d::Identity();
  DensityMatrix out(rho);
  out.v_ = v;
  out.theta_ = theta;
  return out;
}

Eigen::Matrix2d bloch_projector(double angle, int outcome) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double sign = outcome > 0 ? 1.0 : -1.0;
  Eigen::Matrix2d p;
  p << 0.5 * (1.0 + sign * c), 0.5 * sign * s,
       0.5 * sign * s, 0.5 * (1.0 - sign * c);
  return p;
}

Eigen::Matrix4d kron(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
  Eigen::Matrix4d out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

MeasurementSet::MeasurementSet(std::vector<double> alice_angles, std::vector<double> bob_angles)
    : alice_(std::move(alice_angles)), bob_(std::move(bob_angles)) {
  check_angles(alice_, "Alice");
  check_angles(bob_, "Bob");
}

double MeasurementSet::angle(Party party, int input) const {
  const auto& v = party == Party::Alice ? alice_ : bob_;
  if (input < 0 || input >= static_cast<int>(v.size())) throw InputError("MeasurementSet: input out of range");
  return v[static_cast<std::size_t>(input)];
}

Eigen::Matrix2d MeasurementSet::projector(Party party, int input, int outcome) const {
  return bloch_projector(angle(party, input), outcome);
}

Behavior::Behavior(int mx, int my, std::vector<double> probs, double tolerance)
    : mx_(mx), my_(my), probs_(std::move(probs)) {
  if (mx < 1 || my < 1) throw InputError("Behavior: need at least one input per party");
  if (probs_.size() != static_cast<std::size_t>(4 * mx * my))
    throw InputError("Behavior: expected " + std::to_string(4 * mx * my) + " components, got " +
                     std::to_string(probs_.size()));
  for (double p : probs_)
    if (!std::isfinite(p) || p < -tolerance || p > 1.0 + tolerance)
      throw InputError("Behavior: probability out of range");
  for (int x = 0; x < mx; ++x)
    for (int y = 0; y < my; ++y) {
      double s = 0.0;
      for (int a : {-1, 1})
        for (int b : {-1, 1}) s += (*this)(a, b, x, y);
      if (std::abs(s - 1.0) > tolerance)
        throw InputError("Behavior: probabilities for x=" + std::to_string(x + 1) + ", y=" +
                         std::to_string(y + 1) + " sum to " + std::to_string(s));
    }
}

Behavior Behavior::uniform(int mx, int my) {
  return Behavior(mx, my, std::vector<double>(static_cast<std::size_t>(4 * mx * my), 0.25));
}

Behavior Behavior::deterministic(int mx, int my, int a, int b) {
  std::vector<double> p(static_cast<std::size_t>(4 * mx * my), 0.0);
  for (int x = 0; x < mx; ++x)
    for (int y = 0; y < my; ++y) p[component_index(mx, my, a, b, x, y)] = 1.0;
  return Behavior(mx, my, std::move(p));
}

double Behavior::correlator(int x, int y) const {
  double s = 0.0;
  for (int a : {-1, 1})
    for (int b : {-1, 1}) s += a * b * (*this)(a, b, x, y);
  return s;
}

double Behavior::alice_mean(int x) const { return marginal_alice(1, x, 0) - marginal_alice(-1, x, 0); }
double Behavior::bob_mean(int y) const { return marginal_bob(1, 0, y) - marginal_bob(-1, 0, y); }

double Behavior::signaling_violation() const {
  double worst = 0.0;
  for (int a : {-1, 1})
    for (int x = 0; x < mx_; ++x)
      for (int y = 1; y < my_; ++y)
        worst = std::max(worst, std::abs(marginal_alice(a, x, y) - marginal_alice(a, x, 0)));
  for (int b : {-1, 1})
    for (int y = 0; y < my_; ++y)
      for (int x = 1; x < mx_; ++x)
        worst = std::max(worst, std::abs(marginal_bob(b, x, y) - marginal_bob(b, 0, y)));
  return worst;
}

Behavior behavior(const DensityMatrix& state, const MeasurementSet& meas) {
  const int mx = meas.mx();
  const int my = meas.my();
  std::vector<double> p(static_cast<std::size_t>(4 * mx * my));
  for (int x = 0; x < mx; ++x)
    for (int y = 0; y < my; ++y)
      for (int a : {-1, 1})
        for (int b : {-1, 1}) {
          const Eigen::Matrix4d op = kron(meas.projector(Party::Alice, x, a),
                                                             meas.projector(Party::Bob, y, b));
          double v = (state.entries() * op).trace();
          // Clamp rounding noise; the trace is a probability.
          v = std::clamp(v, 0.0, 1.0);
          p[Behavior::component_index(mx, my, a, b, x, y)] = v;
        }
  return Behavior(mx, my, std::move(p));
}

double chsh_value(const Behavior& b) {
  if (b.mx() < 2 || b.my() < 2) throw InputError("chsh_value: needs at least two inputs per party");
  return b.correlator(0, 0) + b.correlator(0, 1) + b.correlator(1, 0) - b.correlator(1, 1);
}

double ibeta_value(const Behavior& b, double beta) { return chsh_value(b) + beta * b.alice_mean(0); }

double beta_coefficient(double theta) {
  const double s = std::sin(2.0 * theta);
  return 2.0 * std::cos(2.0 * theta) / std::sqrt(1.0 + s * s);
}

MeasurementSet canonical_settings() {
  using std::numbers::pi;
  return MeasurementSet({0.0, pi / 2}, {pi / 4, 3 * pi / 4, 0.0});
}

MeasurementSet canonical_settings(int mx, int my) {
  if (mx < 1 || my < 1) throw InputError("canonical_settings: need at least one input per party");
  const MeasurementSet base = canonical_settings();
  auto fill = [](std::vector<double> v, int n) {
    const int have = static_cast<int>(v.size());
    v.resize(static_cast<std::size_t>(n));
    for (int k = have; k < n; ++k) v[static_cast<std::size_t>(k)] = std::numbers::pi * (k - have + 0.5) / (n - have + 1);
    return v;
  };
  return MeasurementSet(fill(base.alice_angles(), mx), fill(base.bob_angles(), my));
}

void write_behavior_csv(std::ostream& out, const Behavior& b) {
  const auto old_precision = out.precision(17);
  out << "a,b,x,y,p\n";
  for (int a : {-1, 1})
    for (int bb : {-1, 1})
      for (int x = 0; x < b.mx(); ++x)
        for (int y = 0; y < b.my(); ++y) out << a << ',' << bb << ',' << x + 1 << ',' << y + 1 << ',' << b(a, bb, x, y) << '\n';
  out.precision(old_precision);
}

Behavior read_behavior_csv(std::istream& in, double normalization_tolerance) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("behavior CSV: empty input");
  auto trim = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
  };
  if (trim(line) != "a,b,x,y,p") throw InputError("behavior CSV: expected header 'a,b,x,y,p'");

  std::map<std::tuple<int, int, int, int>, double> rows;
  int mx = 0;
  int my = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw InputError("behavior CSV line " + std::to_string(lineno) + ": expected 5 fields");
    int a, b, x, y;
    double p;
    try {
      a = std::stoi(fields[0]);
      b = std::stoi(fields[1]);
      x = std::stoi(fields[2]);
      y = std::stoi(fields[3]);
      p = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw InputError("behavior CSV line " + std::to_string(lineno) + ": unparsable field");
    }
    if ((a != 1 && a != -1) || (b != 1 && b != -1) || x < 1 || y < 1)
      throw InputError("behavior CSV line " + std::to_string(lineno) + ": invalid labels");
    if (!rows.emplace(std::make_tuple(a, b, x, y), p).second)
      throw InputError("behavior CSV line " + std::to_string(lineno) + ": duplicate row");
    mx = std::max(mx, x);
    my = std::max(my, y);
  }
  if (rows.empty()) throw InputError("behavior CSV: no data rows");

  std::vector<double> probs(static_cast<std::size_t>(4 * mx * my));
  for (int a : {-1, 1})
    for (int b : {-1, 1})
      for (int x = 1; x <= mx; ++x)
        for (int y = 1; y <= my; ++y) {
          auto it = rows.find({a, b, x, y});
          if (it == rows.end())
            throw InputError("behavior CSV: missing row (a,b,x,y) = (" + std::to_string(a) + "," + std::to_string(b) +
                             "," + std::to_string(x) + "," + std::to_string(y) + ")");
          probs[Behavior::component_index(mx, my, a, b, x - 1, y - 1)] = it->second;
        }
  return Behavior(mx, my, std::move(probs), normalization_tolerance);
}

}  // namespace dirand
