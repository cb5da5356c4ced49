#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "dirand/qstate.hpp"

using namespace dirand;
using std::numbers::pi;
using std::numbers::sqrt2;

TEST(MakeState, FullyMixed) {
  const DensityMatrix s = make_state(0.0, 0.3);
  EXPECT_LE((s.entries() - 0.25 * Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(s.eigenvalues()(i), 0.25, 1e-12);
}

TEST(MakeState, MaximallyEntangledProjector) {
  const DensityMatrix s = make_state(1.0, pi / 4);
  Eigen::Vector4d phi(1, 0, 0, 1);
  phi /= sqrt2;
  EXPECT_LE((s.entries() - phi * phi.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(s.visibility(), 1.0);
}

TEST(MakeState, HalfWernerSpectrum) {
  Eigen::Vector4d ev = make_state(0.5, pi / 4).eigenvalues();
  std::sort(ev.data(), ev.data() + 4);
  EXPECT_NEAR(ev(0), 0.125, 1e-12);
  EXPECT_NEAR(ev(1), 0.125, 1e-12);
  EXPECT_NEAR(ev(2), 0.125, 1e-12);
  EXPECT_NEAR(ev(3), 0.625, 1e-12);
}

TEST(MakeState, RejectsOutOfRange) {
  EXPECT_THROW(make_state(-0.1, 0.0), InputError);
  EXPECT_THROW(make_state(1.1, 0.0), InputError);
  EXPECT_THROW(make_state(0.5, 1.0), InputError);
}

TEST(DensityMatrix, RejectsInvalidMatrices) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity() * 0.25;
  m(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{m}, InputError);  // not symmetric
  EXPECT_THROW(DensityMatrix{Eigen::Matrix4d::Identity()}, InputError);  // trace 4
  Eigen::Matrix4d neg = Eigen::Matrix4d::Zero();
  neg.diagonal() << 1.5, -0.5, 0, 0;
  EXPECT_THROW(DensityMatrix{neg}, InputError);
}

TEST(Projector, RankOneCompleteAndOrthogonal) {
  for (double phi : {0.0, 0.3, pi / 2, 2.0, 5.5}) {
    const auto p = bloch_projector(phi, 1);
    const auto m = bloch_projector(phi, -1);
    EXPECT_LE((p + m - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((p * m).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(p.trace(), 1.0, 1e-12);
    EXPECT_NEAR(p(0, 0) - p(1, 1), std::cos(phi), 1e-12);
    EXPECT_NEAR(2 * p(0, 1), std::sin(phi), 1e-12);
  }
}

TEST(Behavior, MixedStateIsUniform) {
  const Behavior b = behavior(make_state(0.0, 0.2), MeasurementSet({0.1, 1.0}, {2.0, 0.4, 3.0}));
  for (double p : b.probs()) EXPECT_NEAR(p, 0.25, 1e-12);
}

TEST(Behavior, PerfectZZCorrelation) {
  const Behavior b = behavior(make_state(1.0, pi / 4), MeasurementSet({0.0}, {0.0}));
  EXPECT_NEAR(b(1, 1, 0, 0), 0.5, 1e-12);
  EXPECT_NEAR(b(-1, -1, 0, 0), 0.5, 1e-12);
  EXPECT_NEAR(b(1, -1, 0, 0), 0.0, 1e-12);
  EXPECT_NEAR(b(-1, 1, 0, 0), 0.0, 1e-12);
}

TEST(Behavior, ChshOptimalAngles) {
  const Behavior b = behavior(make_state(1.0, pi / 4), MeasurementSet({0.0, pi / 2}, {pi / 4, -pi / 4}));
  const double same = (1.0 + 1.0 / sqrt2) / 4.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      if (x == 1 && y == 1) continue;
      EXPECT_NEAR(b(1, 1, x, y), same, 1e-12);
      EXPECT_NEAR(b(-1, -1, x, y), same, 1e-12);
    }
  EXPECT_NEAR(chsh_value(b), 2.0 * sqrt2, 1e-10);
  EXPECT_NEAR(chsh_value(behavior(make_state(0.5, pi / 4), MeasurementSet({0.0, pi / 2}, {pi / 4, -pi / 4}))), sqrt2,
              1e-10);
}

TEST(Behavior, AffineInVisibility) {
  const MeasurementSet m({0.3, 1.7}, {0.9, 2.4});
  const Behavior p1 = behavior(make_state(1.0, 0.4), m);
  const Behavior p0 = behavior(make_state(0.0, 0.4), m);
  const Behavior pv = behavior(make_state(0.37, 0.4), m);
  for (std::size_t i = 0; i < pv.size(); ++i)
    EXPECT_NEAR(pv.probs()[i], 0.37 * p1.probs()[i] + 0.63 * p0.probs()[i], 1e-12);
  EXPECT_LE(pv.signaling_violation(), 1e-9);
}

TEST(Behavior, ValidatesNormalization) {
  std::vector<double> probs(4, 0.3);
  EXPECT_THROW(Behavior(1, 1, probs), InputError);
  EXPECT_THROW(Behavior(1, 1, {0.5, 0.5, 0.5, -0.5}), InputError);
}

TEST(Chsh, UniformAndDeterministic) {
  EXPECT_NEAR(chsh_value(Behavior::uniform(2, 2)), 0.0, 1e-15);
  const Behavior det = Behavior::deterministic(2, 2, 1, 1);
  EXPECT_NEAR(chsh_value(det), 2.0, 1e-15);
  EXPECT_NEAR(ibeta_value(det, 0.7), 2.7, 1e-15);
  EXPECT_NEAR(ibeta_value(Behavior::uniform(2, 2), 1.3), 0.0, 1e-15);
  EXPECT_THROW(chsh_value(Behavior::uniform(1, 2)), InputError);
}

TEST(Chsh, IbetaReducesAtZeroBeta) {
  const Behavior b = behavior(make_state(0.8, 0.3), MeasurementSet({0.2, 1.1}, {0.5, 2.2}));
  EXPECT_DOUBLE_EQ(ibeta_value(b, 0.0), chsh_value(b));
}

TEST(Chsh, WithinTsirelsonBound) {
  for (int k = 0; k < 20; ++k) {
    const MeasurementSet m({0.31 * k, 1.3 + 0.7 * k}, {0.11 * k * k, 2.0 - 0.5 * k});
    EXPECT_LE(std::abs(chsh_value(behavior(make_state(1.0, 0.05 * k > pi / 4 ? pi / 4 : 0.05 * k), m))),
              2.0 * sqrt2 + 1e-9);
  }
}

TEST(Chsh, RelabelingAliceInputNegatesItsCorrelators) {
  const DensityMatrix s = make_state(0.9, 0.3);
  const Behavior b = behavior(s, MeasurementSet({0.4, 1.9}, {0.7, 2.5}));
  const Behavior r = behavior(s, MeasurementSet({0.4 + pi, 1.9}, {0.7, 2.5}));
  EXPECT_NEAR(r.alice_mean(0), -b.alice_mean(0), 1e-12);
  EXPECT_NEAR(r.alice_mean(1), b.alice_mean(1), 1e-12);
  for (int y = 0; y < 2; ++y) {
    EXPECT_NEAR(r.correlator(0, y), -b.correlator(0, y), 1e-12);
    EXPECT_NEAR(r.correlator(1, y), b.correlator(1, y), 1e-12);
  }
}

TEST(Beta, Values) {
  EXPECT_NEAR(beta_coefficient(pi / 4), 0.0, 1e-15);
  EXPECT_NEAR(beta_coefficient(0.0), 2.0, 1e-15);
  EXPECT_NEAR(beta_coefficient(pi / 8), 2.0 / std::sqrt(3.0), 1e-12);
}

TEST(Canonical, SettingsAndGenerationBehavior) {
  const MeasurementSet m = canonical_settings();
  ASSERT_EQ(m.mx(), 2);
  ASSERT_EQ(m.my(), 3);
  EXPECT_NEAR(m.alice_angles()[1], pi / 2, 1e-15);
  EXPECT_NEAR(m.bob_angles()[0], pi / 4, 1e-15);
  EXPECT_NEAR(m.bob_angles()[1], 3 * pi / 4, 1e-15);
  EXPECT_NEAR(m.bob_angles()[2], 0.0, 1e-15);
  Eigen::Matrix2d zero = Eigen::Matrix2d::Zero();
  zero(0, 0) = 1;
  EXPECT_LE((m.projector(Party::Alice, 0, 1) - zero).cwiseAbs().maxCoeff(), 1e-15);
  const Behavior b = behavior(make_state(1.0, pi / 4), m);
  for (int a : {-1, 1})
    for (int bb : {-1, 1}) EXPECT_NEAR(b(a, bb, 1, 2), 0.25, 1e-12);
  const MeasurementSet t = canonical_settings(2, 2);
  EXPECT_EQ(t.my(), 2);
  EXPECT_EQ(canonical_settings(3, 4).my(), 4);
}

TEST(BehaviorCsv, RoundTrip) {
  const Behavior b = behavior(make_state(0.8, 0.3), canonical_settings());
  std::stringstream s;
  write_behavior_csv(s, b);
  EXPECT_EQ(s.str().substr(0, 10), "a,b,x,y,p\n");
  const Behavior r = read_behavior_csv(s);
  ASSERT_EQ(r.mx(), 2);
  ASSERT_EQ(r.my(), 3);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(r.probs()[i], b.probs()[i], 1e-12);
}

TEST(BehaviorCsv, MissingRowIsNamed) {
  std::stringstream s;
  write_behavior_csv(s, Behavior::uniform(2, 2));
  std::string text = s.str();
  const auto pos = text.find("\n1,1,2,2,") + 1;
  ASSERT_NE(pos, std::string::npos);
  text.erase(pos, text.find('\n', pos) - pos + 1);
  std::istringstream in(text);
  try {
    read_behavior_csv(in);
    FAIL() << "missing row accepted";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("(1,1,2,2)"), std::string::npos) << e.what();
  }
}

TEST(BehaviorCsv, BadNormalizationRejected) {
  std::istringstream in("a,b,x,y,p\n-1,-1,1,1,0.3\n-1,1,1,1,0.3\n1,-1,1,1,0.3\n1,1,1,1,0.3\n");
  EXPECT_THROW(read_behavior_csv(in), InputError);
}
