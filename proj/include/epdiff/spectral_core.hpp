#pragma once

// Fourier-coefficient algebra for real 2π-periodic functions.
//
// Convention: u(x) = Σ_k u_k e^{ikx}, u_k = (1/2π)∫ u e^{-ikx} dx. Norms are
// weighted ℓ² norms of the coefficient sequence (they differ from the L²(dx)
// norms by √(2π)).

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace epdiff {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Band-limited real field. Only k = 0..N is stored; the negative half is the
// complex conjugate, so conjugate symmetry holds exactly by construction.
class FourierField {
 public:
  FourierField() = default;
  explicit FourierField(int bandwidth);

  // coeffs[k] holds u_k for k = 0..N. Im(u_0) must vanish to round-off.
  static FourierField from_nonnegative(std::vector<Complex> coeffs);
  // coeffs[j] holds u_{j-N} for j = 0..2N. Throws DomainError when the
  // sequence is not conjugate symmetric to 1e-12 relative.
  static FourierField from_two_sided(std::span<const Complex> coeffs);
  static FourierField constant(double c, int bandwidth);

  int bandwidth() const { return static_cast<int>(coeffs_.size()) - 1; }

  // u_k for any integer k; zero outside the band.
  Complex operator[](std::int64_t k) const;
  // Sets u_k and u_{-k} = conj(u_k). k = 0 requires a real value.
  void set(int k, Complex value);

  std::span<const Complex> nonnegative() const { return coeffs_; }
  std::vector<Complex> two_sided() const;

  // Zero-pads or truncates to a new bandwidth.
  FourierField resized(int bandwidth) const;

  double mean() const { return coeffs_.empty() ? 0.0 : coeffs_[0].real(); }
  bool is_zero() const;

  FourierField& operator+=(const FourierField& other);
  FourierField& operator-=(const FourierField& other);
  FourierField& operator*=(double s);

  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(double s, FourierField a) { return a *= s; }
  friend FourierField operator*(FourierField a, double s) { return a *= s; }
  FourierField operator-() const { return -1.0 * *this; }

 private:
  std::vector<Complex> coeffs_{Complex{0.0, 0.0}};
};

// Samples at x_j = 2πj/M, j = 0..M-1.
struct GridField {
  std::vector<double> values;

  int points() const { return static_cast<int>(values.size()); }
  static std::vector<double> nodes(int points);
};

// Discrete Fourier coefficients of grid samples, truncated to bandwidth N.
// Requires M >= 2N+1 (ResolutionError otherwise).
FourierField analyze(const GridField& g, int bandwidth);
// Evaluates Σ u_k e^{ikx_j}. Requires M >= 2N+1.
GridField synthesize(const FourierField& u, int points);

// Point evaluation of the order-th derivative by direct summation.
double evaluate(const FourierField& u, double x, int order = 0);
std::vector<double> evaluate(const FourierField& u, std::span<const double> xs, int order = 0);

FourierField derivative(const FourierField& u, int order = 1);
// Symbol -i sgn(k), sgn(0) = 0.
FourierField hilbert(const FourierField& u);

// Pointwise product truncated to max(N_u, N_v). Dealiased: the padded grid
// has at least N_u + N_v + N_out + 1 points, so retained modes are exact.
FourierField multiply(const FourierField& u, const FourierField& v);
// Pointwise product at its full bandwidth N_u + N_v (no truncation).
FourierField multiply_exact(const FourierField& u, const FourierField& v);
FourierField multiply(const FourierField& u, const FourierField& v, int out_bandwidth);

// Lie bracket [u, w] = u_x w - u w_x.
FourierField bracket(const FourierField& u, const FourierField& w);

// (Σ_k (1+k²)^q |u_k|²)^{1/2}.
double sobolev_norm(const FourierField& u, double q);

struct SupNormOptions {
  // Scan grid has oversample·N points (at least 64).
  int oversample = 8;
  // Polish the best grid candidates by Newton iteration on u'.
  bool refine = true;
};

// max_x |u(x)|. Grid scan plus optional local refinement; always a value
// attained by u, hence a lower bound on the true supremum.
double sup_norm(const FourierField& u, const SupNormOptions& opts = {});

// Smallest 2^a 3^b 5^c that is >= n.
int fft_size_at_least(int n);

}  // namespace epdiff
