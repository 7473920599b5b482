#include <gtest/gtest.h>

#include <cmath>

#include "epdiff/errors.hpp"
#include "epdiff/flow_solver.hpp"

using namespace epdiff;

namespace {

FourierField sine(int n) {
  FourierField u(n);
  u.set(1, {0.0, -0.5});
  return u;
}

FourierField cosine(int n) {
  FourierField u(n);
  u.set(1, 0.5);
  return u;
}

double max_diff(const FourierField& a, const FourierField& b) {
  double m = 0.0;
  for (int k = 0; k <= std::max(a.bandwidth(), b.bandwidth()); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

const InertiaOperator& sobolev32() {
  static const InertiaOperator op = InertiaOperator::create(make_builtin(Builtin::sobolev_32));
  return op;
}

const InertiaOperator& burgers() {
  static const InertiaOperator op = [] {
    InertiaOptions o;
    return InertiaOperator::create(make_builtin(Builtin::burgers), o);
  }();
  return op;
}

// two-sided convolution, returned as a field of bandwidth n
FourierField convolve(const FourierField& u, const FourierField& v, int n) {
  FourierField out(n);
  for (int k = 0; k <= n; ++k) {
    Complex s{0.0, 0.0};
    for (int m = -v.bandwidth(); m <= v.bandwidth(); ++m) s += u[k - m] * v[m];
    out.set(k, k == 0 ? Complex{s.real(), 0.0} : s);
  }
  return out;
}

SolverConfig small_config(FourierField u0, double horizon) {
  SolverConfig c;
  c.bandwidth = u0.bandwidth();
  c.u0 = std::move(u0);
  c.horizon = horizon;
  return c;
}

}  // namespace

TEST(Rhs, BurgersSine) {
  const auto r = rhs(sine(16), burgers());
  FourierField expected(16);
  expected.set(2, {0.0, 0.75});  // -(3/2) sin 2x
  EXPECT_LT(max_diff(r, expected), 1e-15);
}

TEST(Rhs, ConstantsAreEquilibria) {
  for (const auto* op : {&burgers(), &sobolev32()}) {
    EXPECT_LT(max_diff(rhs(FourierField::constant(0.7, 32), *op), FourierField(32)), 1e-16);
    EXPECT_LT(max_diff(rhs_gradient_form(FourierField::constant(0.7, 32), *op), FourierField(32)), 1e-16);
  }
  SolverState s{0.0, FourierField::constant(-1.3, 32), 0.01};
  const auto next = step(s, sobolev32());
  EXPECT_DOUBLE_EQ(next.t, 0.01);
  EXPECT_LT(max_diff(next.u, s.u), 1e-16);
}

TEST(Rhs, MatchesConvolutionOracle) {
  const auto& op = sobolev32();
  FourierField u = cosine(24);
  u.set(2, {0.1, -0.2});
  u.set(3, {0.0, 0.05});
  const auto m = apply(op.symbol(), u);
  const auto g = convolve(u, derivative(m, 1), 24) + 2.0 * convolve(derivative(u, 1), m, 24);
  const auto expected = -1.0 * apply(op.inverse(), g);
  EXPECT_LT(max_diff(rhs(u, op), expected), 1e-12);
}

TEST(Rhs, GradientFormIdentity) {
  FourierField u = cosine(32);
  u.set(4, {0.02, 0.03});
  for (const auto* op : {&burgers(), &sobolev32()}) {
    EXPECT_LT(max_diff(rhs_gradient_form(u, *op), derivative(rhs(u, *op), 1)), 1e-11);
  }
  // A = Id, u = sin x: D(-3uu_x) = -3(u_x² + uu_xx) = -3cos 2x
  FourierField expected(16);
  expected.set(2, -1.5);
  EXPECT_LT(max_diff(rhs_gradient_form(sine(16), burgers()), expected), 1e-14);
}

TEST(Step, EnergyDriftPerStep) {
  const auto& op = sobolev32();
  SolverState s{0.0, sine(128), 0.0};
  s.dt = cfl_time_step(s.u, 0.3, 1e-2);
  const double e0 = energy(s.u, op);
  for (int i = 0; i < 20; ++i) {
    const auto next = step(s, op);
    EXPECT_LE(std::abs(energy(next.u, op) - energy(s.u, op)), 1e-10 * e0);
    s = next;
  }
}

TEST(Step, OverflowRaises) {
  SolverState s{0.0, FourierField::constant(1.0, 16), 0.1};
  s.u.set(3, {1e300, 1e300});
  EXPECT_THROW(step(s, burgers()), NumericalOverflowError);
}

TEST(Cfl, Policy) {
  EXPECT_DOUBLE_EQ(cfl_time_step(FourierField(256), 0.3, 1e-2), 1e-2 < 0.3 * kTwoPi / fft_size_at_least(769)
                                                                   ? 1e-2
                                                                   : 0.3 * kTwoPi / fft_size_at_least(769));
  const auto big = 10.0 * sine(64);
  EXPECT_LT(cfl_time_step(big, 0.3, 1e-2), cfl_time_step(sine(64), 0.3, 1e-2));
}

TEST(Run, ZeroInitialDataStaysZero) {
  auto c = small_config(FourierField(32), 0.5);
  c.snapshot_every = 5;
  const auto tr = run(c, sobolev32());
  EXPECT_EQ(tr.termination, Termination::horizon);
  EXPECT_EQ(tr.verdict, BlowupVerdict::none);
  for (const auto& s : tr.snapshots) EXPECT_TRUE(s.u.is_zero());
  EXPECT_NEAR(tr.records.back().t, 0.5, 1e-14);
}

TEST(Run, ConfigErrors) {
  auto c = small_config(sine(32), 1.0);
  c.bandwidth = 8;
  EXPECT_THROW(run(c, sobolev32()), ConfigError);
  c = small_config(sine(32), -1.0);
  EXPECT_THROW(run(c, sobolev32()), ConfigError);
  c = small_config(sine(32), 1.0);
  c.cfl = 1.5;
  EXPECT_THROW(run(c, sobolev32()), ConfigError);
  c = small_config(sine(32), 1.0);
  c.fixed_dt = 0.0;
  EXPECT_THROW(run(c, sobolev32()), ConfigError);
}

TEST(Run, DegenerateOperatorRefused) {
  const auto wp = InertiaOperator::create(make_builtin(Builtin::weil_petersson));
  EXPECT_THROW(run(small_config(sine(32), 0.1), wp), DegeneracyError);
}

TEST(Run, BurgersBlowsUpNearOneThird) {
  auto c = small_config(sine(256), 1.0);
  const auto tr = run(c, burgers());
  EXPECT_EQ(tr.verdict, BlowupVerdict::certain);
  ASSERT_TRUE(tr.t_event);
  EXPECT_GT(*tr.t_event, 0.30);
  EXPECT_LT(*tr.t_event, 0.40);
  EXPECT_NE(tr.termination, Termination::horizon);
}

TEST(Run, SobolevSmoothRegimeConservesEnergy) {
  const auto tr = run(small_config(sine(64), 1.0), sobolev32());
  ASSERT_EQ(tr.termination, Termination::horizon);
  EXPECT_EQ(tr.verdict, BlowupVerdict::none);
  const double e0 = tr.records.front().energy;
  for (const auto& r : tr.records) EXPECT_LE(std::abs(r.energy - e0), 1e-10 * e0);
  EXPECT_GE(tr.snapshots.size(), 100u);
}

TEST(Run, TimeReversal) {
  const auto& op = sobolev32();
  auto c = small_config(sine(64), 1.0);
  c.fixed_dt = 1e-2;
  const auto fwd = run(c, op);
  ASSERT_EQ(fwd.termination, Termination::horizon);
  auto back_cfg = small_config(-1.0 * fwd.snapshots.back().u, 1.0);
  back_cfg.fixed_dt = 1e-2;
  const auto back = run(back_cfg, op);
  EXPECT_LT(max_diff(-1.0 * back.snapshots.back().u, sine(64)), 1e-6);
}

TEST(Run, ResolutionRobustness) {
  auto c64 = small_config(sine(64), 1.0);
  auto c128 = small_config(sine(128), 1.0);
  c64.fixed_dt = c128.fixed_dt = 5e-3;
  const auto a = run(c64, sobolev32());
  const auto b = run(c128, sobolev32());
  const auto& ra = a.records.back();
  const auto& rb = b.records.back();
  EXPECT_NEAR(ra.h32, rb.h32, 1e-6 * rb.h32);
  EXPECT_NEAR(ra.sup_ux, rb.sup_ux, 1e-6 * rb.sup_ux);
}

TEST(Run, Rk4FourthOrder) {
  // pre-shock Burgers at horizon 0.2, spatial error identical across runs
  std::vector<FourierField> finals;
  for (double dt : {0.01, 0.005, 0.0025}) {
    auto c = small_config(sine(64), 0.2);
    c.fixed_dt = dt;
    c.integrate_only = true;
    finals.push_back(run(c, burgers()).snapshots.back().u);
  }
  auto c = small_config(sine(64), 0.2);
  c.fixed_dt = 0.0025 / 16;
  c.integrate_only = true;
  const auto ref = run(c, burgers()).snapshots.back().u;
  const double e1 = max_diff(finals[0], ref);
  const double e2 = max_diff(finals[1], ref);
  const double e3 = max_diff(finals[2], ref);
  EXPECT_GT(e1 / e2, 13.0);
  EXPECT_LT(e1 / e2, 19.0);
  EXPECT_GT(e2 / e3, 13.0);
  EXPECT_LT(e2 / e3, 19.0);
}

TEST(DetectBlowup, NeedsTenRecords) {
  std::vector<DiagnosticsRecord> h(5);
  for (auto& r : h) r.sup_ux = 1e6, r.tail_fraction = 0.9;
  h[0].sup_ux = 1.0;
  EXPECT_EQ(detect_blowup(h, {}).verdict, BlowupVerdict::none);
}

TEST(DetectBlowup, SuspectedWithoutProbes) {
  std::vector<DiagnosticsRecord> h(20);
  for (int i = 0; i < 20; ++i) {
    h[i].t = 0.1 * i;
    h[i].sup_ux = i < 15 ? 1.0 : 100.0;
    h[i].tail_fraction = i < 15 ? 0.0 : 0.5;
  }
  const auto v = detect_blowup(h, {});
  EXPECT_EQ(v.verdict, BlowupVerdict::suspected);
  ASSERT_TRUE(v.t_event);
  EXPECT_NEAR(*v.t_event, 1.5, 1e-12);
  // refinement that tames the growth keeps the verdict at suspected
  std::vector<RefinementProbe> tame{[](double) { return std::optional<double>(2.0); }};
  EXPECT_EQ(detect_blowup(h, {}, tame).verdict, BlowupVerdict::suspected);
  std::vector<RefinementProbe> wild{[](double) { return std::optional<double>(120.0); },
                                    [](double) { return std::optional<double>(); }};
  EXPECT_EQ(detect_blowup(h, {}, wild).verdict, BlowupVerdict::certain);
}

TEST(DetectBlowup, ConstantHistoryIsNone) {
  std::vector<DiagnosticsRecord> h(50);
  for (auto& r : h) r.sup_ux = 0.0;
  EXPECT_EQ(detect_blowup(h, {}).verdict, BlowupVerdict::none);
}

TEST(FlowMap, IdentityForZeroField) {
  auto c = small_config(FourierField(16), 0.2);
  c.snapshot_every = 1;
  const auto tr = run(c, sobolev32());
  const auto maps = evolve_flow_map(tr, sobolev32(), 64);
  ASSERT_EQ(maps.size(), tr.snapshots.size());
  for (const auto& m : maps) {
    for (double d : m.displacement.values) EXPECT_EQ(d, 0.0);
    for (double j : m.jacobian.values) EXPECT_EQ(j, 1.0);
  }
}

TEST(FlowMap, RigidRotationForConstantField) {
  auto c = small_config(FourierField::constant(0.4, 16), 0.5);
  c.snapshot_every = 1;
  const auto tr = run(c, sobolev32());
  const auto maps = evolve_flow_map(tr, sobolev32(), 64);
  for (const auto& m : maps) {
    for (double d : m.displacement.values) EXPECT_NEAR(d, 0.4 * m.t, 1e-13);
    for (double j : m.jacobian.values) EXPECT_NEAR(j, 1.0, 1e-13);
  }
}

TEST(FlowMap, CadenceError) {
  auto c = small_config(sine(16), 0.5);
  c.snapshot_every = 3;
  const auto tr = run(c, sobolev32());
  EXPECT_THROW(evolve_flow_map(tr, sobolev32()), CadenceError);
}

TEST(FlowMap, SupNormPreservedUnderComposition) {
  auto c = small_config(sine(32), 0.5);
  c.snapshot_every = 1;
  const auto tr = run(c, sobolev32());
  const auto maps = evolve_flow_map(tr, sobolev32());
  for (std::size_t i = 0; i < maps.size(); i += 10) {
    const auto ux = compose(derivative(tr.snapshots[i].u, 1), maps[i]);
    double m = 0.0;
    for (double v : ux.values) m = std::max(m, std::abs(v));
    // grid samples of u_x∘φ are a lower bound; the maximum sits near a node
    EXPECT_LE(m, sup_norm(derivative(tr.snapshots[i].u, 1)) + 1e-12);
    EXPECT_GE(m, 0.99 * sup_norm(derivative(tr.snapshots[i].u, 1)));
  }
}

TEST(FlowMap, InversePointsAndComposition) {
  FourierField d(4);
  d.set(1, {0.1, 0.05});
  d.set(2, {0.0, 0.02});
  const auto phi = FlowMap::from_displacement(d, 128);
  const auto inv = inverse_points(phi);
  const auto x = GridField::nodes(128);
  for (int j = 0; j < 128; ++j) {
    EXPECT_NEAR(inv[j] + evaluate(d, inv[j]), x[j], 1e-12);
  }
  const auto id = compose(phi, FlowMap::identity(128));
  for (int j = 0; j < 128; ++j) EXPECT_NEAR(id.displacement.values[j], phi.displacement.values[j], 1e-12);
  FlowMap bad = FlowMap::identity(16);
  bad.jacobian.values[3] = -0.1;
  EXPECT_THROW(compose(bad, FlowMap::identity(16)), DiffeomorphismLossError);
}

TEST(Metric, IdentityEqualsPairing) {
  const auto a = make_builtin(Builtin::sobolev_32);
  const int P = 128;
  const auto x = GridField::nodes(P);
  GridField h{std::vector<double>(P)}, k{std::vector<double>(P)};
  for (int j = 0; j < P; ++j) {
    h.values[j] = std::cos(x[j]) + 0.3 * std::sin(2 * x[j]);
    k.values[j] = std::cos(x[j]) - 0.1 * std::cos(3 * x[j]);
  }
  const double g = metric_eval(FlowMap::identity(P), h, k, a);
  EXPECT_NEAR(g, pairing(analyze(h, 63), analyze(k, 63), a), 1e-12);
  EXPECT_GT(metric_eval(FlowMap::identity(P), h, h, a), 0.0);
}

TEST(Metric, RightInvariance) {
  const auto a = make_builtin(Builtin::sobolev_32);
  const int P = 256;
  FourierField dphi(6), dpsi(6);
  dphi.set(1, {0.15, -0.1});
  dphi.set(3, {0.01, 0.02});
  dpsi.set(1, {-0.05, 0.1});
  dpsi.set(2, {0.03, 0.0});
  const auto phi = FlowMap::from_displacement(dphi, P);
  const auto psi = FlowMap::from_displacement(dpsi, P);
  const auto x = GridField::nodes(P);
  GridField h{std::vector<double>(P)}, k{std::vector<double>(P)};
  for (int j = 0; j < P; ++j) {
    h.values[j] = std::cos(x[j]) + 0.3 * std::sin(2 * x[j]);
    k.values[j] = 0.5 - std::sin(x[j]) + 0.1 * std::cos(4 * x[j]);
  }
  const double lhs = metric_eval(compose(phi, psi), compose(h, psi), compose(k, psi), a);
  const double rhs_value = metric_eval(phi, h, k, a);
  EXPECT_NEAR(lhs, rhs_value, 1e-6 * std::max(1.0, std::abs(rhs_value)));
  EXPECT_GT(metric_eval(phi, h, h, a), 0.0);
}

TEST(Metric, NonInvertibleMapRaises) {
  FlowMap bad = FlowMap::identity(32);
  bad.jacobian.values[5] = 0.0;
  GridField h{std::vector<double>(32, 1.0)};
  EXPECT_THROW(metric_eval(bad, h, h, make_sobolev(3.0)), DiffeomorphismLossError);
}
