#include "epdiff/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "epdiff/errors.hpp"

namespace epdiff {

struct Symbol::Impl {
  std::string name;
  Eval eval;
  double order;
  Parity parity;
  bool hermitian;
  Extension extension;

  mutable std::mutex mutex;
  mutable std::shared_ptr<const std::vector<Complex>> cache;
};

Symbol::Symbol(std::string name, Eval eval, double order, Parity parity, bool hermitian,
               Extension extension) {
  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->eval = std::move(eval);
  impl->order = order;
  impl->parity = parity;
  impl->hermitian = hermitian;
  impl->extension = std::move(extension);
  impl_ = std::move(impl);
}

Complex Symbol::operator()(std::int64_t k) const { return impl_->eval(k); }

std::shared_ptr<const std::vector<Complex>> Symbol::table(int bandwidth) const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  const auto& cache = impl_->cache;
  if (cache && static_cast<int>(cache->size()) > bandwidth) return cache;
  const std::size_t old = cache ? cache->size() : 0;
  const std::size_t size = std::max<std::size_t>(static_cast<std::size_t>(bandwidth) + 1, 2 * old);
  auto fresh = std::make_shared<std::vector<Complex>>(size);
  for (std::size_t k = 0; k < old; ++k) (*fresh)[k] = (*cache)[k];
  for (std::size_t k = old; k < size; ++k) (*fresh)[k] = impl_->eval(static_cast<std::int64_t>(k));
  impl_->cache = fresh;
  return impl_->cache;
}

const std::string& Symbol::name() const { return impl_->name; }
double Symbol::order() const { return impl_->order; }
Parity Symbol::parity() const { return impl_->parity; }
bool Symbol::hermitian() const { return impl_->hermitian; }
bool Symbol::has_extension() const { return static_cast<bool>(impl_->extension); }

long double Symbol::extended(long double xi) const {
  if (impl_->extension) return impl_->extension(xi);
  return static_cast<long double>(impl_->eval(static_cast<std::int64_t>(std::llround(xi))).real());
}

Symbol Symbol::renamed(std::string name) const {
  return Symbol(std::move(name), impl_->eval, impl_->order, impl_->parity, impl_->hermitian,
                impl_->extension);
}

Symbol Symbol::with_order(double order) const {
  return Symbol(impl_->name, impl_->eval, order, impl_->parity, impl_->hermitian, impl_->extension);
}

namespace {

Parity combine(Parity a, Parity b) {
  if (a == Parity::none || b == Parity::none) return Parity::none;
  return a == b ? Parity::even : Parity::odd;
}

double abs_k(std::int64_t k) { return static_cast<double>(k < 0 ? -k : k); }

Symbol real_even(std::string name, std::function<double(double)> f,
                 std::function<long double(long double)> ext, double order) {
  return Symbol(
      std::move(name), [f](std::int64_t k) { return Complex{f(abs_k(k)), 0.0}; }, order,
      Parity::even, true, std::move(ext));
}

}  // namespace

Symbol operator*(const Symbol& a, const Symbol& b) {
  Symbol::Extension ext;
  if (a.has_extension() && b.has_extension()) {
    ext = [a, b](long double xi) { return a.extended(xi) * b.extended(xi); };
  }
  return Symbol(
      a.name() + "*" + b.name(), [a, b](std::int64_t k) { return a(k) * b(k); },
      a.order() + b.order(), combine(a.parity(), b.parity()), a.hermitian() && b.hermitian(),
      std::move(ext));
}

std::optional<Builtin> parse_builtin(std::string_view name) {
  static const std::map<std::string_view, Builtin> table = {
      {"burgers", Builtin::burgers},
      {"camassa_holm", Builtin::camassa_holm},
      {"mclm", Builtin::mclm},
      {"weil_petersson", Builtin::weil_petersson},
      {"one_minus_HD3", Builtin::one_minus_HD3},
      {"sobolev_32", Builtin::sobolev_32},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(Builtin b) {
  switch (b) {
    case Builtin::burgers: return "burgers";
    case Builtin::camassa_holm: return "camassa_holm";
    case Builtin::mclm: return "mclm";
    case Builtin::weil_petersson: return "weil_petersson";
    case Builtin::one_minus_HD3: return "one_minus_HD3";
    case Builtin::sobolev_32: return "sobolev_32";
  }
  return "";
}

Symbol make_sobolev(double s) {
  const long double half = static_cast<long double>(s) / 2;
  std::ostringstream name;
  name << "sobolev(s=" << s << ")";
  return real_even(
      name.str(), [s](double k) { return std::pow(1.0 + k * k, s / 2.0); },
      [half](long double xi) { return std::pow(1.0L + xi * xi, half); }, s);
}

Symbol make_builtin(Builtin b) {
  const std::string name{to_string(b)};
  switch (b) {
    case Builtin::burgers:
      return real_even(
          name, [](double) { return 1.0; }, [](long double) { return 1.0L; }, 0.0);
    case Builtin::camassa_holm:
      return real_even(
          name, [](double k) { return 1.0 + k * k; },
          [](long double xi) { return 1.0L + xi * xi; }, 2.0);
    case Builtin::mclm:
      return real_even(
          name, [](double k) { return k; }, [](long double xi) { return xi; }, 1.0);
    case Builtin::weil_petersson:
      return real_even(
          name, [](double k) { return k * k * k - k; },
          [](long double xi) { return xi * xi * xi - xi; }, 3.0);
    case Builtin::one_minus_HD3:
      // -H∂³ = op(|k|³)
      return real_even(
          name, [](double k) { return 1.0 + k * k * k; },
          [](long double xi) { return 1.0L + xi * xi * xi; }, 3.0);
    case Builtin::sobolev_32:
      return make_sobolev(3.0).renamed(name);
  }
  throw ConfigError("unknown builtin operator");
}

Symbol derivative_symbol(int order) {
  if (order < 0) throw DomainError("derivative order must be nonnegative");
  return Symbol(
      "D^" + std::to_string(order),
      [order](std::int64_t k) {
        Complex f{1.0, 0.0};
        for (int i = 0; i < order; ++i) f *= Complex{0.0, static_cast<double>(k)};
        return f;
      },
      order, order % 2 == 0 ? Parity::even : Parity::odd, true);
}

Symbol hilbert_symbol() {
  return Symbol(
      "H",
      [](std::int64_t k) {
        return k == 0 ? Complex{0.0, 0.0} : Complex{0.0, k > 0 ? -1.0 : 1.0};
      },
      0.0, Parity::odd, true);
}

Symbol symbol_by_name(std::string_view name, std::optional<double> s) {
  if (name == "sobolev") {
    if (!s) throw ConfigError("operator 'sobolev' needs an order s");
    return make_sobolev(*s);
  }
  if (auto b = parse_builtin(name)) return make_builtin(*b);
  throw ConfigError("unknown operator '" + std::string(name) + "'");
}

Symbol load_symbol_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open symbol file " + path.string());
  std::map<std::int64_t, double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    long long k = 0;
    double a = 0.0;
    if (!(row >> k >> a)) continue;  // header or junk
    values[k] = a;
  }
  if (values.empty()) throw ConfigError("symbol file " + path.string() + " has no (k, a) rows");

  bool has_negative = values.begin()->first < 0;
  bool even = true;
  if (has_negative) {
    for (const auto& [k, a] : values) {
      auto mirror = values.find(-k);
      if (mirror == values.end() ||
          std::abs(mirror->second - a) > 1e-12 * std::max(1.0, std::abs(a))) {
        even = false;
      }
    }
  }
  const std::int64_t kmax = values.rbegin()->first;
  // order estimated from the last octave of the table
  double order = 0.0;
  if (kmax >= 4 && values.count(kmax) && values.count(kmax / 2)) {
    const double hi = std::abs(values.at(kmax));
    const double lo = std::abs(values.at(kmax / 2));
    if (hi > 0.0 && lo > 0.0) order = std::log(hi / lo) / std::log(static_cast<double>(kmax) / (kmax / 2));
  }
  auto table = std::make_shared<const std::map<std::int64_t, double>>(std::move(values));
  const std::string name = path.filename().string();
  return Symbol(
      name,
      [table, has_negative, name](std::int64_t k) {
        const std::int64_t key = has_negative ? k : (k < 0 ? -k : k);
        auto it = table->find(key);
        if (it == table->end()) {
          throw DomainError("symbol '" + name + "' is not tabulated at k = " + std::to_string(k));
        }
        return Complex{it->second, 0.0};
      },
      order, even ? Parity::even : Parity::none, even);
}

namespace {

std::vector<std::int64_t> zero_modes(const Symbol& a, int bandwidth) {
  double scale = 0.0;
  for (std::int64_t k = -bandwidth; k <= bandwidth; ++k) scale = std::max(scale, std::abs(a(k)));
  std::vector<std::int64_t> zeros;
  const double tol = 1e-14 * std::max(scale, 1e-300);
  for (std::int64_t k = -bandwidth; k <= bandwidth; ++k) {
    if (std::abs(a(k)) <= std::max(tol, std::numeric_limits<double>::min())) zeros.push_back(k);
  }
  return zeros;
}

}  // namespace

Symbol invert(const Symbol& a, int bandwidth) {
  const auto zeros = zero_modes(a, bandwidth);
  if (!zeros.empty()) {
    std::ostringstream msg;
    msg << "symbol '" << a.name() << "' is degenerate: a(k) = 0 at k =";
    for (auto k : zeros) msg << ' ' << k;
    throw DegeneracyError(msg.str());
  }
  Symbol::Extension ext;
  if (a.has_extension()) ext = [a](long double xi) { return 1.0L / a.extended(xi); };
  const std::string name = a.name();
  return Symbol(
      "inv(" + name + ")",
      [a, name](std::int64_t k) {
        const Complex v = a(k);
        if (v == Complex{0.0, 0.0}) {
          throw DegeneracyError("symbol '" + name + "' vanishes at k = " + std::to_string(k));
        }
        return 1.0 / v;
      },
      -a.order(), a.parity(), a.hermitian(), std::move(ext));
}

Symbol invert_projected(const Symbol& a, int bandwidth) {
  const auto zeros = zero_modes(a, bandwidth);
  auto kernel = std::make_shared<const std::vector<std::int64_t>>(zeros);
  return Symbol(
      "pinv(" + a.name() + ")",
      [a, kernel](std::int64_t k) {
        if (std::find(kernel->begin(), kernel->end(), k) != kernel->end()) return Complex{0.0, 0.0};
        return 1.0 / a(k);
      },
      -a.order(), a.parity(), a.hermitian());
}

FourierField apply(const Symbol& a, const FourierField& u) {
  if (!a.hermitian()) {
    throw DomainError("symbol '" + a.name() + "' does not map real fields to real fields");
  }
  const int n = u.bandwidth();
  const auto tab = a.table(n);
  std::vector<Complex> out(static_cast<std::size_t>(n) + 1);
  const auto c = u.nonnegative();
  for (int k = 0; k <= n; ++k) out[k] = (*tab)[k] * c[k];
  out[0] = Complex{out[0].real(), 0.0};
  return FourierField::from_nonnegative(std::move(out));
}

namespace {

// Least-squares fit of f(h) ≈ Σ_j c_j h^j over the integer window, with the
// variable scaled to t = h·lo ∈ [lo/hi, 1]. Householder QR in long double.
std::vector<long double> fit_window(const Symbol& a, int lo, int hi, int degree) {
  const int rows = hi - lo + 1;
  const int cols = degree + 1;
  if (rows < cols) throw ExpansionError("fit window too narrow for the polynomial degree");
  std::vector<std::vector<long double>> m(static_cast<std::size_t>(rows),
                                          std::vector<long double>(static_cast<std::size_t>(cols)));
  std::vector<long double> rhs(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    const long double k = lo + i;
    const long double t = static_cast<long double>(lo) / k;
    long double p = 1.0L;
    for (int j = 0; j < cols; ++j) {
      m[i][j] = p;
      p *= t;
    }
    rhs[i] = a.extended(k) / (k * k * k);
  }
  for (int j = 0; j < cols; ++j) {
    long double norm = 0.0L;
    for (int i = j; i < rows; ++i) norm += m[i][j] * m[i][j];
    norm = std::sqrt(norm);
    if (norm == 0.0L) throw ExpansionError("singular fit matrix");
    const long double alpha = m[j][j] > 0 ? -norm : norm;
    std::vector<long double> v(static_cast<std::size_t>(rows), 0.0L);
    for (int i = j; i < rows; ++i) v[i] = m[i][j];
    v[j] -= alpha;
    long double vnorm = 0.0L;
    for (int i = j; i < rows; ++i) vnorm += v[i] * v[i];
    if (vnorm == 0.0L) continue;
    for (int c = j; c < cols; ++c) {
      long double dot = 0.0L;
      for (int i = j; i < rows; ++i) dot += v[i] * m[i][c];
      const long double f = 2.0L * dot / vnorm;
      for (int i = j; i < rows; ++i) m[i][c] -= f * v[i];
    }
    long double dot = 0.0L;
    for (int i = j; i < rows; ++i) dot += v[i] * rhs[i];
    const long double f = 2.0L * dot / vnorm;
    for (int i = j; i < rows; ++i) rhs[i] -= f * v[i];
  }
  std::vector<long double> c(static_cast<std::size_t>(cols));
  for (int j = cols - 1; j >= 0; --j) {
    long double s = rhs[j];
    for (int q = j + 1; q < cols; ++q) s -= m[j][q] * c[q];
    c[j] = s / m[j][j];
  }
  // undo the scaling t = lo·h
  long double scale = 1.0L;
  for (int j = 0; j < cols; ++j) {
    c[j] *= scale;
    scale *= lo;
  }
  return c;
}

}  // namespace

AsymptoticExpansion asymptotic_coefficients(const Symbol& a, const ExpansionOptions& opts) {
  if (opts.depth < 1) throw ExpansionError("expansion depth must be positive");
  if (a.order() > 3.0 + 1e-12) throw ExpansionError("symbol order exceeds 3");
  const int degree = std::max(opts.degree, opts.depth);
  const int hi = opts.fit_bandwidth;
  const int lo = std::max(2, hi / 8);

  const auto base = fit_window(a, lo, hi, degree);
  const auto shifted = fit_window(a, 2 * lo, 2 * hi, degree);

  AsymptoticExpansion out;
  out.fit_low = lo;
  out.fit_high = hi;
  double cmax = 1.0;
  for (int j = 0; j < opts.depth; ++j) {
    out.coefficients.push_back(static_cast<double>(base[j]));
    cmax = std::max(cmax, std::abs(static_cast<double>(base[j])));
    out.window_drift = std::max(out.window_drift, static_cast<double>(std::abs(base[j] - shifted[j])));
  }

  auto normalized_residual = [&](int k) {
    const long double kk = k;
    long double model = 0.0L;
    for (int j = 0; j < opts.depth; ++j) model += base[j] * std::pow(kk, 3.0L - j);
    const long double rho = a.extended(kk) - model;
    return static_cast<double>(std::abs(rho) * std::pow(kk, static_cast<long double>(opts.depth - 3)));
  };
  double lower = 0.0;
  for (int k = lo; k < (lo + hi) / 2; ++k) lower = std::max(lower, normalized_residual(k));
  double upper = 0.0;
  for (int k = (lo + hi) / 2; k <= hi; ++k) upper = std::max(upper, normalized_residual(k));
  out.residual = upper;

  std::ostringstream trace;
  trace << "coefficients:";
  for (double c : out.coefficients) trace << ' ' << c;
  trace << "; window drift " << out.window_drift << "; residual " << lower << " -> " << upper;

  if (std::abs(out.coefficients[0]) < 1e-8) {
    throw ExpansionError("leading coefficient a3 vanishes (" + trace.str() + ")");
  }
  if (out.window_drift > 1e-6 * cmax) {
    throw ExpansionError("expansion does not converge under window shift (" + trace.str() + ")");
  }
  const double floor = 1e-8 * cmax;
  if (upper > floor && upper > 2.0 * lower) {
    throw ExpansionError("residual grows across the fit window (" + trace.str() + ")");
  }
  // fit noise, not a coefficient
  for (double& c : out.coefficients) {
    if (std::abs(c) < 1e-10 * cmax) c = 0.0;
  }
  return out;
}

double growth_constant(const Symbol& b, double order, int bandwidth) {
  double c = 0.0;
  for (std::int64_t k = -bandwidth; k <= bandwidth; ++k) {
    const double w = std::pow(1.0 + static_cast<double>(k) * k, order / 2.0);
    c = std::max(c, std::abs(b(k)) / w);
  }
  return c;
}

ClassReport certify(const Symbol& a, int bandwidth, double target_order,
                    const ExpansionOptions& expansion) {
  if (bandwidth < 16) throw PreconditionError("certification bandwidth must be at least 16");
  ClassReport r;
  r.bandwidth = bandwidth;
  r.target_order = target_order;

  const int K = bandwidth;
  std::vector<double> re(static_cast<std::size_t>(2 * K + 1));
  double scale = 0.0;
  for (std::int64_t k = -K; k <= K; ++k) {
    const Complex v = a(k);
    re[k + K] = v.real();
    r.max_imag = std::max(r.max_imag, std::abs(v.imag()));
    scale = std::max(scale, std::abs(v));
  }
  r.real = r.max_imag <= 1e-14 * std::max(scale, 1e-300);

  r.min_value = re[0 + K];
  r.argmin = 0;
  for (std::int64_t k = -K; k <= K; ++k) {
    if (re[k + K] < r.min_value) {
      r.min_value = re[k + K];
      r.argmin = k;
    }
    if (std::abs(re[k + K]) <= 1e-14 * std::max(scale, 1e-300)) r.kernel_modes.push_back(k);
  }
  // prefer the mode of smallest |k| among ties
  for (std::int64_t k = 0; k <= K; ++k) {
    if (re[k + K] == r.min_value) { r.argmin = k; break; }
    if (re[-k + K] == r.min_value) { r.argmin = -k; break; }
  }
  r.positive = r.min_value > 0.0 && r.kernel_modes.empty();

  auto ratio = [&](std::int64_t k) {
    return re[k + K] / std::pow(1.0 + static_cast<double>(k) * k, target_order / 2.0);
  };
  auto octave_min = [&](int from, int to) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = from; k <= to; ++k) m = std::min({m, ratio(k), ratio(-k)});
    return m;
  };
  auto octave_max = [&](int from, int to) {
    double m = -std::numeric_limits<double>::infinity();
    for (int k = from; k <= to; ++k) m = std::max({m, ratio(k), ratio(-k)});
    return m;
  };
  r.ellipticity_constant = octave_min(0, K);
  r.growth_constant = octave_max(0, K);
  const double top_min = octave_min(K / 2, K);
  const double prev_min = octave_min(K / 4, K / 2);
  const double top_max = octave_max(K / 2, K);
  const double prev_max = octave_max(K / 4, K / 2);
  r.elliptic = r.ellipticity_constant > 0.0 && top_min >= 0.5 * prev_min;
  r.bounded_growth = std::isfinite(r.growth_constant) && top_max <= 2.0 * prev_max;

  // |Δ^l a(k)| / (1+k)^{r-l} over the top two octaves
  bool decay = true;
  for (int l = 1; l <= 2; ++l) {
    auto diff = [&](int k) {
      return l == 1 ? re[k + 1 + K] - re[k + K] : re[k + 1 + K] - 2.0 * re[k + K] + re[k - 1 + K];
    };
    auto band = [&](int from, int to) {
      double m = 0.0;
      for (int k = from; k < to; ++k) {
        m = std::max(m, std::abs(diff(k)) / std::pow(1.0 + k, target_order - l));
      }
      return m;
    };
    const double top = band(K / 2, K - 1);
    const double prev = band(K / 4, K / 2);
    r.derivative_constants[l - 1] = std::max(top, prev);
    if (!(std::isfinite(top) && top <= 2.0 * prev + 1e-12)) decay = false;
  }
  r.derivative_decay = decay;

  try {
    r.expansion = asymptotic_coefficients(a, expansion);
  } catch (const ExpansionError& e) {
    r.expansion_error = e.what();
  }
  return r;
}

SupConstant sup_constant(const Symbol& b, int bandwidth) {
  const double s = b.order();
  if (!(s < -0.5)) {
    std::ostringstream msg;
    msg << "symbol '" << b.name() << "' has order " << s
        << " >= -1/2; the series Σ(1+m²)^s diverges";
    throw DivergentSumError(msg.str());
  }
  SupConstant out;
  out.bandwidth = bandwidth;
  out.growth = growth_constant(b, s, bandwidth);
  double sum = 1.0;
  for (int m = bandwidth; m >= 1; --m) sum += 2.0 * std::pow(1.0 + static_cast<double>(m) * m, s);
  out.partial_sum = sum;
  // (1+m²)^s <= m^{2s}, decreasing: Σ_{m>K} m^{2s} <= ∫_K^∞ x^{2s} dx
  out.tail_bound = 2.0 * std::pow(static_cast<double>(bandwidth), 2.0 * s + 1.0) / (-2.0 * s - 1.0);
  out.value = out.growth * std::sqrt(out.partial_sum + out.tail_bound);
  return out;
}

InertiaOperator InertiaOperator::create(const Symbol& symbol, const InertiaOptions& opts) {
  InertiaOperator op(symbol, certify(symbol, opts.certify_bandwidth, 3.0, opts.expansion));
  if (op.report_.positive) {
    op.inverse_ = invert(symbol, opts.certify_bandwidth);
  } else if (opts.allow_degenerate) {
    op.inverse_ = invert_projected(symbol, opts.certify_bandwidth);
  }
  if (op.report_.expansion) {
    const auto& c = op.report_.expansion->coefficients;
    const double a3 = c.at(0);
    const double a2 = c.size() > 1 ? c[1] : 0.0;
    Symbol r2(
        "R2(" + symbol.name() + ")",
        [symbol, a3](std::int64_t k) {
          const double ak = abs_k(k);
          return symbol(k) - Complex{a3 * ak * ak * ak, 0.0};
        },
        2.0, Parity::even, symbol.hermitian());
    Symbol r1(
        "R1(" + symbol.name() + ")",
        [symbol, a3, a2](std::int64_t k) {
          const double ak = abs_k(k);
          return symbol(k) - Complex{a3 * ak * ak * ak + a2 * ak * ak, 0.0};
        },
        1.0, Parity::even, symbol.hermitian());
    op.decomposition_ = Decomposition{a3, a2, std::move(r1), std::move(r2)};
  }
  return op;
}

const Symbol& InertiaOperator::inverse() const {
  if (!inverse_) {
    std::ostringstream msg;
    msg << "operator '" << symbol_.name() << "' is degenerate (kernel modes:";
    for (auto k : report_.kernel_modes) msg << ' ' << k;
    msg << "); pass allow-degenerate to use the projected inverse";
    throw DegeneracyError(msg.str());
  }
  return *inverse_;
}

const InertiaOperator::Decomposition& InertiaOperator::decomposition() const {
  if (!decomposition_) {
    throw ExpansionError("operator '" + symbol_.name() +
                         "' has no asymptotic decomposition: " + report_.expansion_error);
  }
  return *decomposition_;
}

double InertiaOperator::a3() const { return decomposition().a3; }
double InertiaOperator::a2() const { return decomposition().a2; }
const Symbol& InertiaOperator::remainder1() const { return decomposition().r1; }
const Symbol& InertiaOperator::remainder2() const { return decomposition().r2; }

Symbol remainder(const InertiaOperator& op, RemainderLevel level) {
  return level == RemainderLevel::R1 ? op.remainder1() : op.remainder2();
}

double energy(const FourierField& u, const Symbol& a) {
  const int n = u.bandwidth();
  const auto tab = a.table(n);
  const auto c = u.nonnegative();
  double sum = (*tab)[0].real() * std::norm(c[0]);
  for (int k = 1; k <= n; ++k) sum += 2.0 * (*tab)[k].real() * std::norm(c[k]);
  return kTwoPi * sum;
}

double energy(const FourierField& u, const InertiaOperator& op) { return energy(u, op.symbol()); }

double pairing(const FourierField& u, const FourierField& v, const Symbol& a) {
  const int n = std::max(u.bandwidth(), v.bandwidth());
  const auto tab = a.table(n);
  double sum = ((*tab)[0] * u[0] * std::conj(v[0])).real();
  for (int k = 1; k <= n; ++k) sum += 2.0 * ((*tab)[k] * u[k] * std::conj(v[k])).real();
  return kTwoPi * sum;
}

}  // namespace epdiff
