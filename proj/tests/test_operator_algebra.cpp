#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "epdiff/errors.hpp"
#include "epdiff/operator_algebra.hpp"

using namespace epdiff;

namespace {

FourierField sample_field(int n) {
  FourierField u(n);
  u.set(0, 0.3);
  for (int k = 1; k <= n; ++k) u.set(k, {std::cos(1.7 * k) / (k * k), std::sin(0.9 * k) / (k * k)});
  return u;
}

// Binomial series of (1 + k^-2)^{3/2}: 1 + (3/2)k^-2 + (3/8)k^-4 - (1/16)k^-6 ...
constexpr double kBinomial[5] = {1.0, 0.0, 1.5, 0.0, 0.375};

}  // namespace

TEST(Sobolev, Values) {
  const auto a = make_sobolev(3.0);
  EXPECT_DOUBLE_EQ(a(0).real(), 1.0);
  EXPECT_NEAR(a(1).real(), 2.828427124746, 1e-12);
  EXPECT_NEAR(a(2).real(), 11.180339887499, 1e-11);
  EXPECT_EQ(a.order(), 3.0);
  EXPECT_EQ(a.parity(), Parity::even);
  for (int k = -5; k <= 5; ++k) {
    EXPECT_DOUBLE_EQ(make_sobolev(0.0)(k).real(), 1.0);
    EXPECT_NEAR(make_sobolev(2.0)(k).real(), 1.0 + k * k, 1e-12);
  }
}

TEST(Builtins, Values) {
  EXPECT_EQ(make_builtin(Builtin::weil_petersson)(-1).real(), 0.0);
  EXPECT_EQ(make_builtin(Builtin::weil_petersson)(0).real(), 0.0);
  EXPECT_EQ(make_builtin(Builtin::weil_petersson)(1).real(), 0.0);
  EXPECT_EQ(make_builtin(Builtin::weil_petersson)(3).real(), 24.0);
  EXPECT_EQ(make_builtin(Builtin::one_minus_HD3)(2).real(), 9.0);
  EXPECT_EQ(make_builtin(Builtin::mclm)(-3).real(), 3.0);
  EXPECT_EQ(make_builtin(Builtin::burgers)(17).real(), 1.0);
  EXPECT_EQ(make_builtin(Builtin::camassa_holm)(3).real(), 10.0);
  EXPECT_NEAR(make_builtin(Builtin::sobolev_32)(2).real(), std::pow(5.0, 1.5), 1e-12);
  for (auto name : {"burgers", "camassa_holm", "mclm", "weil_petersson", "one_minus_HD3", "sobolev_32"}) {
    ASSERT_TRUE(parse_builtin(name));
    EXPECT_EQ(to_string(*parse_builtin(name)), name);
  }
  EXPECT_FALSE(parse_builtin("nope"));
  EXPECT_THROW(symbol_by_name("nope"), ConfigError);
}

TEST(Certify, Sobolev32Passes) {
  const auto r = certify(make_builtin(Builtin::sobolev_32), 512);
  EXPECT_TRUE(r.passes());
  EXPECT_NEAR(r.ellipticity_constant, 1.0, 1e-14);
  EXPECT_NEAR(r.growth_constant, 1.0, 1e-14);
  EXPECT_TRUE(r.kernel_modes.empty());
}

TEST(Certify, WeilPeterssonFailsPositivityAndEllipticity) {
  const auto r = certify(make_builtin(Builtin::weil_petersson), 512);
  EXPECT_FALSE(r.positive);
  EXPECT_FALSE(r.elliptic);
  EXPECT_EQ(r.min_value, 0.0);
  EXPECT_EQ(r.argmin, 0);
  EXPECT_EQ(r.kernel_modes, (std::vector<std::int64_t>{-1, 0, 1}));
  ASSERT_TRUE(r.expansion);
  const double expected[5] = {1.0, 0.0, -1.0, 0.0, 0.0};
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(r.expansion->coefficients[j], expected[j], 1e-6);
}

TEST(Certify, BurgersFailsEllipticityAndExpansion) {
  const auto small = certify(make_builtin(Builtin::burgers), 64);
  const auto large = certify(make_builtin(Builtin::burgers), 512);
  EXPECT_FALSE(large.elliptic);
  EXPECT_LT(large.ellipticity_constant, small.ellipticity_constant);
  EXPECT_NEAR(large.ellipticity_constant, std::pow(1.0 + 512.0 * 512.0, -1.5), 1e-20);
  EXPECT_FALSE(large.expansion);
  EXPECT_THROW(asymptotic_coefficients(make_builtin(Builtin::burgers)), ExpansionError);
}

TEST(Certify, SmallBandwidthRejected) {
  EXPECT_THROW(certify(make_sobolev(3.0), 8), PreconditionError);
}

TEST(Asymptotic, Sobolev3MatchesBinomialOracle) {
  const auto e = asymptotic_coefficients(make_sobolev(3.0));
  ASSERT_EQ(e.coefficients.size(), 5u);
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(e.coefficients[j], kBinomial[j], 1e-6) << j;
  EXPECT_EQ(e.coefficients[1], 0.0);
}

TEST(Asymptotic, PolynomialSymbol) {
  const auto e = asymptotic_coefficients(make_builtin(Builtin::one_minus_HD3));
  const double expected[5] = {1.0, 0.0, 0.0, 1.0, 0.0};
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(e.coefficients[j], expected[j], 1e-6) << j;
}

TEST(Asymptotic, NonIntegerPowersDoNotConverge) {
  Symbol odd("k3_plus_k2.5",
             [](std::int64_t k) {
               const double m = std::abs(static_cast<double>(k));
               return Complex{1.0 + m * m * m + std::pow(m, 2.5), 0.0};
             },
             3.0, Parity::even, true);
  EXPECT_THROW(asymptotic_coefficients(odd), ExpansionError);
}

TEST(Remainder, Sobolev32) {
  const auto op = InertiaOperator::create(make_builtin(Builtin::sobolev_32));
  ASSERT_TRUE(op.in_class());
  EXPECT_NEAR(op.a3(), 1.0, 1e-9);
  EXPECT_EQ(op.a2(), 0.0);
  const auto r2 = remainder(op, RemainderLevel::R2);
  EXPECT_NEAR(r2(2).real(), std::pow(5.0, 1.5) - 8.0, 1e-6);
  EXPECT_EQ(r2.order(), 2.0);
  const auto r1 = remainder(op, RemainderLevel::R1);
  EXPECT_EQ(r1.order(), 1.0);
  EXPECT_NEAR(r1(100000).real() / 100000.0, 1.5, 1e-4);
  for (int k = -200; k <= 200; ++k) {
    const double m = std::abs(k);
    EXPECT_NEAR(op.symbol()(k).real(), op.a3() * m * m * m + op.a2() * m * m + r1(k).real(), 1e-6 * (1 + m * m * m));
    EXPECT_LE(std::abs(r1(k)), 2.0 * std::sqrt(1.0 + m * m));
  }
}

TEST(Remainder, OneMinusHD3IsOne) {
  const auto op = InertiaOperator::create(make_builtin(Builtin::one_minus_HD3));
  const auto r1 = op.remainder1();
  for (int k = -50; k <= 50; ++k) EXPECT_NEAR(r1(k).real(), 1.0, 1e-6 * (1.0 + std::pow(std::abs(k), 3)));
}

TEST(Invert, ValuesAndInvolution) {
  const auto a = make_builtin(Builtin::sobolev_32);
  const auto inv = invert(a, 64);
  EXPECT_NEAR(inv(1).real(), 0.353553390593, 1e-12);
  EXPECT_EQ(inv.order(), -3.0);
  const auto twice = invert(inv, 64);
  for (int k = -64; k <= 64; ++k) EXPECT_NEAR(twice(k).real(), a(k).real(), 1e-12 * a(k).real());
  const auto u = sample_field(32);
  const auto back = apply(inv, apply(a, u));
  for (int k = 0; k <= 32; ++k) EXPECT_LT(std::abs(back[k] - u[k]), 1e-15);
}

TEST(Invert, WeilPeterssonDegenerate) {
  const auto wp = make_builtin(Builtin::weil_petersson);
  try {
    invert(wp, 64);
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    EXPECT_NE(std::string(e.what()).find("0"), std::string::npos);
  }
  const auto p = invert_projected(wp, 64);
  EXPECT_EQ(p(0), Complex(0.0, 0.0));
  EXPECT_EQ(p(1), Complex(0.0, 0.0));
  EXPECT_NEAR(p(2).real(), 1.0 / 6.0, 1e-15);

  const auto op = InertiaOperator::create(wp);
  EXPECT_TRUE(op.degenerate());
  EXPECT_THROW(op.inverse(), DegeneracyError);
  InertiaOptions opts;
  opts.allow_degenerate = true;
  EXPECT_NO_THROW(InertiaOperator::create(wp, opts).inverse());
}

TEST(SupConstant, ClosedFormSum) {
  // Σ_m (1+m²)^{-2} = (π/2) coth π + (π²/2) csch² π
  const double pi = std::acos(-1.0);
  const double closed = 0.5 * pi / std::tanh(pi) + 0.5 * pi * pi / std::pow(std::sinh(pi), 2);
  const auto c = sup_constant(make_sobolev(-2.0));
  EXPECT_NEAR(c.growth, 1.0, 1e-15);
  EXPECT_LE(c.partial_sum, closed);
  EXPECT_GE(c.partial_sum + c.tail_bound, closed * (1 - 1e-14));
  EXPECT_NEAR(c.value, std::sqrt(closed), 1e-9);

  // coth identity for the order -1 sum: Σ(1+m²)^{-1} = π coth π
  const auto c1 = sup_constant(make_sobolev(-1.0), 1 << 16);
  EXPECT_NEAR(c1.value * c1.value, pi / std::tanh(pi), 1e-4);
}

TEST(SupConstant, BoundHoldsAndDivergesAtLowOrder) {
  const auto op = InertiaOperator::create(make_builtin(Builtin::sobolev_32));
  const auto b = op.inverse() * derivative_symbol(1);
  EXPECT_EQ(b.order(), -2.0);
  const auto c = sup_constant(b);
  EXPECT_TRUE(std::isfinite(c.value));
  EXPECT_GT(c.value, 0.0);

  Symbol quarter("abs^-1/4", [](std::int64_t k) {
    return Complex{k == 0 ? 1.0 : std::pow(std::abs(static_cast<double>(k)), -0.25), 0.0};
  }, -0.25, Parity::even, true);
  EXPECT_THROW(sup_constant(quarter), DivergentSumError);
  EXPECT_THROW(sup_constant(make_sobolev(-1.0 + 0.5)), DivergentSumError);
}

TEST(Energy, SingleModeAndEquivalence) {
  const auto op = InertiaOperator::create(make_builtin(Builtin::sobolev_32));
  FourierField c(4);
  c.set(1, 0.5);
  const double pi = std::acos(-1.0);
  EXPECT_NEAR(energy(c, op), std::pow(2.0, 1.5) * pi, 1e-12);
  EXPECT_EQ(energy(FourierField(4), op), 0.0);

  const auto hd3 = InertiaOperator::create(make_builtin(Builtin::one_minus_HD3));
  const auto u = sample_field(64);
  const double h = std::pow(sobolev_norm(u, 1.5), 2);
  const double e = energy(u, hd3) / kTwoPi;
  EXPECT_GT(e, 0.0);
  EXPECT_LE(hd3.report().ellipticity_constant * h, e * (1 + 1e-12));
  EXPECT_GE(hd3.report().growth_constant * h, e * (1 - 1e-12));
}

TEST(Apply, CommutesAndSelfAdjoint) {
  const auto a = make_builtin(Builtin::one_minus_HD3);
  const auto u = sample_field(24);
  auto v = sample_field(24);
  v.set(3, {0.7, -0.2});
  const auto lhs = apply(a, derivative(u, 1));
  const auto rhs = derivative(apply(a, u), 1);
  for (int k = 0; k <= 24; ++k) EXPECT_LT(std::abs(lhs[k] - rhs[k]), 1e-12);
  EXPECT_NEAR(pairing(u, v, a), pairing(v, u, a), 1e-13);
  EXPECT_THROW(apply(derivative_symbol(1) * Symbol("bad", [](std::int64_t) { return Complex{0.0, 1.0}; }, 0.0,
                                                      Parity::none, false),
                     u),
               DomainError);
}

TEST(Symbol, MemoizedTableSharedAcrossCopies) {
  const auto a = make_sobolev(3.0);
  const auto copy = a;
  const auto t1 = a.table(32);
  const auto t2 = copy.table(32);
  EXPECT_EQ(t1.get(), t2.get());
  EXPECT_EQ((*t1)[5], a(5));
}

TEST(SymbolCsv, EvenExtensionAndBounds) {
  const auto path = std::filesystem::temp_directory_path() / "epdiff_symbol_test.csv";
  {
    std::ofstream f(path);
    f.precision(17);
    f << "k,a\n";
    for (int k = 0; k <= 64; ++k) f << k << ',' << std::pow(1.0 + k * k, 1.5) << '\n';
  }
  const auto s = load_symbol_csv(path);
  EXPECT_NEAR(s(-3).real(), std::pow(10.0, 1.5), 1e-9);
  EXPECT_NEAR(s.order(), 3.0, 0.05);
  EXPECT_THROW(s(65), Error);
  std::filesystem::remove(path);
}
