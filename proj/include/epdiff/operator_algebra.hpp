#pragma once

// Fourier multipliers on S¹ and the inertia operators built from them.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epdiff/spectral_core.hpp"

namespace epdiff {

enum class Parity { even, odd, none };

// Symbol k ↦ a(k) of a Fourier multiplier, with order metadata.
//
// Values are memoized per bandwidth on first use; copies share the table.
// `hermitian` means a(-k) = conj(a(k)), i.e. the multiplier maps real fields
// to real fields. An optional extended-precision evaluator of the real-line
// extension a(ξ), ξ > 0, feeds the asymptotic fit.
class Symbol {
 public:
  using Eval = std::function<Complex(std::int64_t)>;
  using Extension = std::function<long double(long double)>;

  Symbol(std::string name, Eval eval, double order, Parity parity, bool hermitian,
         Extension extension = {});

  Complex operator()(std::int64_t k) const;
  // a(k) for k = 0..bandwidth. Thread-safe; the returned table stays valid.
  std::shared_ptr<const std::vector<Complex>> table(int bandwidth) const;

  const std::string& name() const;
  double order() const;
  Parity parity() const;
  bool hermitian() const;

  bool has_extension() const;
  // a(ξ) in extended precision; falls back to the integer evaluator.
  long double extended(long double xi) const;

  Symbol renamed(std::string name) const;
  Symbol with_order(double order) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Composition (AB)(k) = a(k) b(k).
Symbol operator*(const Symbol& a, const Symbol& b);

enum class Builtin { burgers, camassa_holm, mclm, weil_petersson, one_minus_HD3, sobolev_32 };

std::optional<Builtin> parse_builtin(std::string_view name);
std::string_view to_string(Builtin b);

// (1+k²)^{s/2}, order s.
Symbol make_sobolev(double s);
Symbol make_builtin(Builtin b);
// (ik)^order.
Symbol derivative_symbol(int order);
// -i sgn(k).
Symbol hilbert_symbol();

// Catalogue lookup: a builtin name, or "sobolev" with the given s.
Symbol symbol_by_name(std::string_view name, std::optional<double> s = std::nullopt);

// Tabulated symbol from a CSV of "k,a" rows (header optional). Rows for
// k >= 0 only are extended evenly. Evaluation outside the table throws.
Symbol load_symbol_csv(const std::filesystem::path& path);

// 1/a(k). Throws DegeneracyError if a(k) = 0 for some |k| <= bandwidth.
Symbol invert(const Symbol& a, int bandwidth);
// 1/a(k) off the kernel {k : a(k) = 0}, zero on it. Inverts the operator on
// the orthogonal complement of its kernel modes.
Symbol invert_projected(const Symbol& a, int bandwidth);

// (Au)_k = a(k) u_k. Requires a hermitian symbol.
FourierField apply(const Symbol& a, const FourierField& u);

struct AsymptoticExpansion {
  // a_3, a_2, ..., a_{3-depth+1}
  std::vector<double> coefficients;
  // max over the upper half of the fit window of |a(k) - Σ a_j k^j| k^{depth-3}
  double residual = 0.0;
  // max coefficient change when the fit window is shifted up one octave
  double window_drift = 0.0;
  int fit_low = 0;
  int fit_high = 0;
};

struct ExpansionOptions {
  int depth = 5;
  // Top of the fit window [K/8, K]; the drift check uses [K/4, 2K].
  int fit_bandwidth = 64;
  // Degree of the least-squares polynomial in 1/k.
  int degree = 10;
};

// Coefficients of a(k) ~ Σ_j a_{3-j} |k|^{3-j}. The scaled symbol a(k)/k³ is
// fit as a polynomial in 1/k by extended-precision least squares on a
// window of integer frequencies; the fit is repeated one octave higher and
// both must agree. Throws ExpansionError when a_3 vanishes, the windows
// disagree, or the residual grows.
AsymptoticExpansion asymptotic_coefficients(const Symbol& a, const ExpansionOptions& opts = {});

struct ClassReport {
  int bandwidth = 0;
  double target_order = 3.0;

  bool real = false;
  double max_imag = 0.0;

  bool positive = false;
  double min_value = 0.0;
  std::int64_t argmin = 0;
  std::vector<std::int64_t> kernel_modes;

  // c = min a(k)/(1+k²)^{r/2}; elliptic iff c > 0 and the ratio does not
  // decay across the top octaves.
  bool elliptic = false;
  double ellipticity_constant = 0.0;

  // C = max a(k)/(1+k²)^{r/2}; bounded iff it does not grow across octaves.
  bool bounded_growth = false;
  double growth_constant = 0.0;

  // Finite-difference proxy for |Δ^l a(k)| = O(k^{r-l}), l = 1, 2.
  bool derivative_decay = false;
  double derivative_constants[2] = {0.0, 0.0};

  std::optional<AsymptoticExpansion> expansion;
  std::string expansion_error;

  // Certified member of the class up to `bandwidth`.
  bool passes() const {
    return real && positive && elliptic && bounded_growth && derivative_decay &&
           expansion.has_value();
  }
};

// Requires bandwidth >= 16.
ClassReport certify(const Symbol& a, int bandwidth, double target_order = 3.0,
                    const ExpansionOptions& expansion = {});

struct SupConstant {
  double value = 0.0;         // C = C̃ (partial + tail)^{1/2}
  double growth = 0.0;        // C̃ = max |b(m)| / (1+m²)^{s/2}
  double partial_sum = 0.0;   // Σ_{|m|<=K} (1+m²)^s
  double tail_bound = 0.0;    // bound on Σ_{|m|>K} (1+m²)^s
  int bandwidth = 0;
};

// Constant C with ‖Bu‖_{L∞} <= C ‖u‖_{L²} for a symbol of order s < -1/2.
// Throws DivergentSumError otherwise.
SupConstant sup_constant(const Symbol& b, int bandwidth = 4096);

// max_{|k|<=K} |b(k)| / (1+k²)^{r/2}.
double growth_constant(const Symbol& b, double order, int bandwidth);

struct InertiaOptions {
  bool allow_degenerate = false;
  int certify_bandwidth = 1024;
  ExpansionOptions expansion{};
};

// A positive multiplier A together with its inverse, class report and, when
// the expansion exists, a_3, a_2 and the remainders
//   R₂ = a - a_3|k|³,  R₁ = R₂ - a_2 k².
class InertiaOperator {
 public:
  static InertiaOperator create(const Symbol& symbol, const InertiaOptions& opts = {});

  const Symbol& symbol() const { return symbol_; }
  // Throws DegeneracyError for degenerate operators without the opt-in.
  const Symbol& inverse() const;
  const ClassReport& report() const { return report_; }
  bool degenerate() const { return !report_.kernel_modes.empty() || !report_.positive; }
  bool in_class() const { return report_.passes(); }
  const std::string& name() const { return symbol_.name(); }

  bool has_decomposition() const { return decomposition_.has_value(); }
  double a3() const;
  double a2() const;
  const Symbol& remainder1() const;
  const Symbol& remainder2() const;

 private:
  struct Decomposition {
    double a3;
    double a2;
    Symbol r1;
    Symbol r2;
  };

  InertiaOperator(Symbol symbol, ClassReport report) : symbol_(std::move(symbol)), report_(std::move(report)) {}
  const Decomposition& decomposition() const;

  Symbol symbol_;
  ClassReport report_;
  std::optional<Symbol> inverse_;
  std::optional<Decomposition> decomposition_;
};

enum class RemainderLevel { R1, R2 };
Symbol remainder(const InertiaOperator& op, RemainderLevel level);

// 2π Σ_k a(k) |u_k|², i.e. ∫ u Au dx.
double energy(const FourierField& u, const InertiaOperator& op);
double energy(const FourierField& u, const Symbol& a);
// 2π Re Σ_k a(k) u_k conj(v_k), i.e. ∫ (Au) v dx.
double pairing(const FourierField& u, const FourierField& v, const Symbol& a);

}  // namespace epdiff
