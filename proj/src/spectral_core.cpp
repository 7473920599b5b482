#include "epdiff/spectral_core.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "epdiff/errors.hpp"

namespace epdiff {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is. Plans are
// created once per size under a lock and never destroyed.
struct RealPlans {
  fftw_plan forward = nullptr;   // r2c
  fftw_plan backward = nullptr;  // c2r
};

const RealPlans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, RealPlans> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> re(static_cast<std::size_t>(n));
  std::vector<Complex> sp(static_cast<std::size_t>(n / 2 + 1));
  auto* spec = reinterpret_cast<fftw_complex*>(sp.data());
  RealPlans p;
  p.forward = fftw_plan_dft_r2c_1d(n, re.data(), spec, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.backward = fftw_plan_dft_c2r_1d(n, spec, re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(n, p).first->second;
}

void check_resolution(int points, int bandwidth) {
  if (points < 2 * bandwidth + 1) {
    throw ResolutionError("grid of " + std::to_string(points) + " points cannot resolve bandwidth " +
                          std::to_string(bandwidth) + " (need M >= 2N+1)");
  }
}

// Spectrum (k = 0..N) to M grid values.
std::vector<double> to_grid(std::span<const Complex> coeffs, int points) {
  std::vector<Complex> spec(static_cast<std::size_t>(points / 2 + 1), Complex{0.0, 0.0});
  std::copy(coeffs.begin(), coeffs.end(), spec.begin());
  std::vector<double> out(static_cast<std::size_t>(points));
  fftw_execute_dft_c2r(plans_for(points).backward, reinterpret_cast<fftw_complex*>(spec.data()),
                       out.data());
  return out;
}

// M grid values to normalized coefficients k = 0..N.
std::vector<Complex> to_spectrum(std::span<const double> values, int bandwidth) {
  const int points = static_cast<int>(values.size());
  std::vector<double> in(values.begin(), values.end());
  std::vector<Complex> spec(static_cast<std::size_t>(points / 2 + 1));
  fftw_execute_dft_r2c(plans_for(points).forward, in.data(),
                       reinterpret_cast<fftw_complex*>(spec.data()));
  std::vector<Complex> out(static_cast<std::size_t>(bandwidth + 1));
  const double scale = 1.0 / points;
  for (int k = 0; k <= bandwidth; ++k) out[k] = spec[k] * scale;
  out[0] = Complex{out[0].real(), 0.0};
  return out;
}

Complex ik_power(int k, int order) {
  Complex f{1.0, 0.0};
  const Complex ik{0.0, static_cast<double>(k)};
  for (int i = 0; i < order; ++i) f *= ik;
  return f;
}

}  // namespace

int fft_size_at_least(int n) {
  n = std::max(n, 1);
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

FourierField::FourierField(int bandwidth) {
  if (bandwidth < 0) throw DomainError("negative bandwidth");
  coeffs_.assign(static_cast<std::size_t>(bandwidth) + 1, Complex{0.0, 0.0});
}

FourierField FourierField::from_nonnegative(std::vector<Complex> coeffs) {
  if (coeffs.empty()) throw DomainError("empty coefficient list");
  double scale = 0.0;
  for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
  if (std::abs(coeffs[0].imag()) > 1e-12 * std::max(scale, 1e-300)) {
    throw DomainError("mean coefficient u_0 must be real for a real-valued field");
  }
  coeffs[0] = Complex{coeffs[0].real(), 0.0};
  FourierField u;
  u.coeffs_ = std::move(coeffs);
  return u;
}

FourierField FourierField::from_two_sided(std::span<const Complex> coeffs) {
  if (coeffs.size() % 2 == 0) throw DomainError("two-sided coefficient list must have odd length");
  const int n = static_cast<int>(coeffs.size() / 2);
  double scale = 0.0;
  for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  FourierField u(n);
  for (int k = 0; k <= n; ++k) {
    const Complex pos = coeffs[n + k];
    const Complex neg = coeffs[n - k];
    if (std::abs(pos - std::conj(neg)) > tol) {
      throw DomainError("coefficients violate conjugate symmetry at k = " + std::to_string(k));
    }
    u.coeffs_[k] = 0.5 * (pos + std::conj(neg));
  }
  u.coeffs_[0] = Complex{u.coeffs_[0].real(), 0.0};
  return u;
}

FourierField FourierField::constant(double c, int bandwidth) {
  FourierField u(bandwidth);
  u.coeffs_[0] = Complex{c, 0.0};
  return u;
}

Complex FourierField::operator[](std::int64_t k) const {
  const std::int64_t n = bandwidth();
  if (k > n || k < -n) return Complex{0.0, 0.0};
  return k >= 0 ? coeffs_[static_cast<std::size_t>(k)]
                : std::conj(coeffs_[static_cast<std::size_t>(-k)]);
}

void FourierField::set(int k, Complex value) {
  if (k < -bandwidth() || k > bandwidth()) throw DomainError("mode outside band");
  if (k == 0) {
    if (value.imag() != 0.0) throw DomainError("u_0 must be real");
    coeffs_[0] = value;
  } else if (k > 0) {
    coeffs_[k] = value;
  } else {
    coeffs_[-k] = std::conj(value);
  }
}

std::vector<Complex> FourierField::two_sided() const {
  const int n = bandwidth();
  std::vector<Complex> out(static_cast<std::size_t>(2 * n + 1));
  for (int k = -n; k <= n; ++k) out[k + n] = (*this)[k];
  return out;
}

FourierField FourierField::resized(int bandwidth) const {
  FourierField u(bandwidth);
  const int m = std::min(bandwidth, this->bandwidth());
  std::copy(coeffs_.begin(), coeffs_.begin() + m + 1, u.coeffs_.begin());
  return u;
}

bool FourierField::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const Complex& c) { return c == Complex{0.0, 0.0}; });
}

FourierField& FourierField::operator+=(const FourierField& other) {
  if (other.bandwidth() > bandwidth()) *this = resized(other.bandwidth());
  for (int k = 0; k <= other.bandwidth(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
  if (other.bandwidth() > bandwidth()) *this = resized(other.bandwidth());
  for (int k = 0; k <= other.bandwidth(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

FourierField& FourierField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

std::vector<double> GridField::nodes(int points) {
  std::vector<double> x(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) x[j] = kTwoPi * j / points;
  return x;
}

FourierField analyze(const GridField& g, int bandwidth) {
  check_resolution(g.points(), bandwidth);
  return FourierField::from_nonnegative(to_spectrum(g.values, bandwidth));
}

GridField synthesize(const FourierField& u, int points) {
  check_resolution(points, u.bandwidth());
  return GridField{to_grid(u.nonnegative(), points)};
}

double evaluate(const FourierField& u, double x, int order) {
  const auto c = u.nonnegative();
  double sum = order == 0 ? c[0].real() : 0.0;
  Complex z{1.0, 0.0};
  const Complex step = std::polar(1.0, x);
  for (int k = 1; k <= u.bandwidth(); ++k) {
    // re-seed the recurrence periodically to bound drift
    z = (k % 64 == 0) ? std::polar(1.0, k * x) : z * step;
    sum += 2.0 * (ik_power(k, order) * c[k] * z).real();
  }
  return sum;
}

std::vector<double> evaluate(const FourierField& u, std::span<const double> xs, int order) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate(u, xs[i], order);
  return out;
}

FourierField derivative(const FourierField& u, int order) {
  if (order < 0) throw DomainError("derivative order must be nonnegative");
  FourierField out = u;
  for (int k = 0; k <= u.bandwidth(); ++k) {
    out.set(k, k == 0 ? (order == 0 ? u[0] : Complex{0.0, 0.0}) : ik_power(k, order) * u[k]);
  }
  return out;
}

FourierField hilbert(const FourierField& u) {
  FourierField out(u.bandwidth());
  for (int k = 1; k <= u.bandwidth(); ++k) out.set(k, Complex{0.0, -1.0} * u[k]);
  return out;
}

FourierField multiply(const FourierField& u, const FourierField& v, int out_bandwidth) {
  const int nu = u.bandwidth();
  const int nv = v.bandwidth();
  // Product modes reach nu+nv; a mode p aliases onto p-M, which must stay
  // outside the retained band.
  const int points = fft_size_at_least(std::max(nu + nv + out_bandwidth + 1, 2 * out_bandwidth + 1));
  auto gu = to_grid(u.nonnegative(), points);
  const auto gv = to_grid(v.nonnegative(), points);
  for (int j = 0; j < points; ++j) gu[j] *= gv[j];
  return FourierField::from_nonnegative(to_spectrum(gu, out_bandwidth));
}

FourierField multiply(const FourierField& u, const FourierField& v) {
  return multiply(u, v, std::max(u.bandwidth(), v.bandwidth()));
}

FourierField multiply_exact(const FourierField& u, const FourierField& v) {
  return multiply(u, v, u.bandwidth() + v.bandwidth());
}

FourierField bracket(const FourierField& u, const FourierField& w) {
  return multiply(derivative(u, 1), w) - multiply(u, derivative(w, 1));
}

double sobolev_norm(const FourierField& u, double q) {
  const auto c = u.nonnegative();
  double sum = std::norm(c[0]);
  for (int k = 1; k <= u.bandwidth(); ++k) {
    sum += 2.0 * std::pow(1.0 + static_cast<double>(k) * k, q) * std::norm(c[k]);
  }
  return std::sqrt(sum);
}

double sup_norm(const FourierField& u, const SupNormOptions& opts) {
  const int n = u.bandwidth();
  const int points = std::max({64, opts.oversample * n, 2 * n + 1});
  const auto g = to_grid(u.nonnegative(), points);
  double best = 0.0;
  for (double v : g) best = std::max(best, std::abs(v));
  if (!opts.refine || n == 0 || best == 0.0) return best;

  // Local maxima of |u| on the scan grid, strongest first.
  std::vector<int> candidates;
  for (int j = 0; j < points; ++j) {
    const double a = std::abs(g[j]);
    if (a >= std::abs(g[(j + points - 1) % points]) && a >= std::abs(g[(j + 1) % points]) &&
        a >= 0.9 * best) {
      candidates.push_back(j);
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](int a, int b) { return std::abs(g[a]) > std::abs(g[b]); });
  if (candidates.size() > 8) candidates.resize(8);

  const double h = kTwoPi / points;
  for (int j : candidates) {
    const double x0 = h * j;
    double x = x0;
    for (int it = 0; it < 30; ++it) {
      const double d1 = evaluate(u, x, 1);
      const double d2 = evaluate(u, x, 2);
      if (d2 == 0.0) break;
      const double step = std::clamp(-d1 / d2, -h, h);
      x = std::clamp(x + step, x0 - h, x0 + h);
      if (std::abs(step) < 1e-15) break;
    }
    best = std::max(best, std::abs(evaluate(u, x, 0)));
  }
  return best;
}

}  // namespace epdiff
