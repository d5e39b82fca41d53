#include "qiblab/series.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qiblab/error.hpp"

namespace qiblab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;
constexpr double kMaxL = 5e6;

double log_binomial(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

// (e^z - 1)/z
cplx phi1(cplx z) {
  if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return (std::exp(z) - 1.0) / z;
}

// Coefficients of arcsin(x)/(π/2); only odd powers are nonzero.
std::vector<double> arcsin_base(int L) {
  std::vector<double> a(L + 1, 0.0);
  double c = 1.0;  // (2n)!/(4^n (n!)^2 (2n+1)) for n = 0
  for (int n = 0; 2 * n + 1 <= L; ++n) {
    if (n > 0) c *= (2.0 * n - 1) * (2.0 * n - 1) / ((2.0 * n) * (2.0 * n + 1));
    a[2 * n + 1] = c * 2.0 / kPi;
  }
  return a;
}

// Truncated product of an odd series `odd` with a general series `p`.
std::vector<double> odd_times(const std::vector<double>& odd, const std::vector<double>& p) {
  const int L = static_cast<int>(p.size()) - 1;
  std::vector<double> out(L + 1, 0.0);
  for (int i = 1; i <= L; i += 2) {
    const double a = odd[i];
    for (int n = i; n <= L; ++n) out[n] += a * p[n - i];
  }
  return out;
}

}  // namespace

std::vector<double> taylor_log_coeffs(int K) {
  if (K < 1) throw ValidationError("Taylor order K must be at least 1", "order");
  std::vector<double> a(K + 1, 0.0);
  for (int n = 1; n <= K; ++n) a[n] = (n % 2 == 1 ? 1.0 : -1.0) / n;
  return a;
}

double taylor_log_eval(const std::vector<double>& coeffs, double x) {
  const double y = x - 1.0;
  double acc = 0.0;
  for (std::size_t n = coeffs.size(); n-- > 1;) acc = (acc + coeffs[n]) * y;
  return acc;
}

int taylor_order_bound(double alpha, double epsilon) {
  if (!(alpha > 1.0) || !(epsilon > 0.0)) throw ValidationError("need α > 1 and ε > 0", "domain");
  return static_cast<int>(std::ceil(std::log(3.0 / epsilon) / std::log(alpha / (alpha - 1.0))));
}

double harmonic_number(int K) {
  double h = 0.0;
  for (int k = 1; k <= K; ++k) h += 1.0 / k;
  return h;
}

std::vector<double> arcsin_power_coeffs(int k, int L) {
  if (k < 1 || L < k) throw ValidationError("arcsin power coefficients need k >= 1 and L >= k", "order");
  const auto base = arcsin_base(L);
  std::vector<double> p = base;
  for (int i = 1; i < k; ++i) p = odd_times(base, p);
  return p;
}

std::vector<double> combined_sine_coeffs(int K, int L) {
  if (K < 1 || L < 1) throw ValidationError("series orders must be positive", "order");
  const auto base = arcsin_base(L);
  // Horner form of -Σ_k A^k/k = A(-1 + A(-1/2 + ... + A(-1/K))).
  std::vector<double> p(L + 1, 0.0);
  p[0] = -1.0 / K;
  for (int j = K - 1; j >= 1; --j) {
    p = odd_times(base, p);
    p[0] -= 1.0 / j;
  }
  return odd_times(base, p);
}

double sine_series_eval(const std::vector<double>& d, double lambda) {
  const double s = std::sin(kPi * (1.0 - lambda) / 2.0);
  double acc = 0.0;
  for (std::size_t l = d.size(); l-- > 0;) acc = acc * s + d[l];
  return acc;
}

FourierLogSeries::FourierLogSeries(int max_frequency, std::vector<cplx> coeffs) : J_(max_frequency), c_(std::move(coeffs)) {
  if (static_cast<int>(c_.size()) != 2 * J_ + 1) throw ValidationError("Fourier coefficient count mismatch", "dimension_mismatch");
}

double FourierLogSeries::one_norm() const {
  double s = 0.0;
  for (const auto& c : c_) s += std::abs(c);
  return s;
}

// Phases e^{iπjλ/2} by recurrence from e^{iπλ/2}; the drift over 2M steps stays near 1e-13.
cplx FourierLogSeries::eval(double lambda) const {
  const cplx z = std::polar(1.0, kPi * lambda / 2.0);
  cplx w = 1.0, acc = c_[J_];
  for (int j = 1; j <= J_; ++j) {
    w *= z;
    acc += c_[J_ + j] * w + c_[J_ - j] * std::conj(w);
  }
  return acc;
}

cplx FourierLogSeries::derivative(double lambda) const {
  const cplx z = std::polar(1.0, kPi * lambda / 2.0);
  cplx w = 1.0, acc = 0.0;
  for (int j = 1; j <= J_; ++j) {
    w *= z;
    acc += cplx(0, kPi * j / 2.0) * (c_[J_ + j] * w - c_[J_ - j] * std::conj(w));
  }
  return acc;
}

cplx FourierLogSeries::divided_difference(double lambda_p, double lambda_q) const {
  const double delta = lambda_p - lambda_q;
  if (delta == 0.0) return derivative(lambda_p);
  // Well-separated pairs: plain difference quotient, cancellation stays below 1e-11.
  if (std::abs(delta) >= 1e-2) return (eval(lambda_p) - eval(lambda_q)) / delta;
  cplx acc = 0.0;
  for (int j = -J_; j <= J_; ++j) {
    if (j == 0) continue;
    const double a = kPi * j / 2.0;
    acc += c_[j + J_] * cplx(0, a) * std::polar(1.0, a * lambda_q) * phi1(cplx(0, a * delta));
  }
  return acc;
}

FourierLogSeries fourier_log_coeffs(int K, int L, int M) {
  if (M < 1) throw ValidationError("Fourier truncation M must be positive", "order");
  const auto d = combined_sine_coeffs(K, L);
  const int J = 2 * M;
  std::vector<cplx> c(2 * J + 1, 0.0);
  // sin^l θ = (i/2)^l Σ_m (-1)^m C(l,m) e^{i(2m-l)θ}; with θ = π(1-λ)/2 the phase
  // i^l (-1)^m e^{iπ(2m-l)/2} equals 1, so frequency -(2m-l) in λ gets C(l,m)/2^l.
  for (int l = 1; l <= L; ++l) {
    if (d[l] == 0.0) continue;
    const int m_lo = std::max(0, (l + 1) / 2 - M);
    const int m_hi = std::min(l, l / 2 + M);
    for (int m = m_lo; m <= m_hi; ++m) {
      const int j = l - 2 * m;
      c[j + J] += d[l] * std::exp(log_binomial(l, m) - l * std::log(2.0));
    }
  }
  return FourierLogSeries(J, std::move(c));
}

PlanBounds plan_parameters(double epsilon, double lambda_min, double deriv_norm) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("ε must lie in (0, 1)", "domain");
  if (!(lambda_min > 0.0 && lambda_min < 0.5)) throw ValidationError("λ_min must lie in (0, 1/2)", "domain");
  if (!(deriv_norm > 0.0)) throw ValidationError("derivative norm must be positive", "domain");
  PlanBounds b;
  b.epsilon = epsilon;
  b.lambda_min = lambda_min;
  b.deriv_norm = deriv_norm;
  const double lam = lambda_min;
  b.K = std::max(1, static_cast<int>(std::ceil(std::log(12.0 * deriv_norm / (lam * epsilon)) / std::log(1.0 / (1.0 - lam)))));
  b.harmonic = harmonic_number(b.K);

  const double log_inv_q = std::log(1.0 / (1.0 - lam * lam));
  const double c = (1.0 + kE * kE) / kE * deriv_norm * b.harmonic * (1.0 - lam * lam) /
                   (lam * lam * lam * std::pow(2.0 - lam * lam, 1.5));
  b.lambert_argument = -(epsilon / 12.0) * log_inv_q / c;
  if (b.lambert_argument <= -1.0 / kE) {
    b.L_raw = 0.0;  // L q^L <= 1/(e ln(1/q)) already meets the requirement
  } else {
    b.L_raw = -lambert_w_minus1(b.lambert_argument) / log_inv_q;
  }
  if (b.L_raw > kMaxL) {
    std::ostringstream os;
    os << "λ_min = " << lambda_min << " requires L ≈ " << b.L_raw << ", beyond capacity";
    throw NumericError(os.str(), "capacity");
  }
  b.L = std::max(b.K, static_cast<int>(std::ceil(b.L_raw)));
  b.M = std::max(1, static_cast<int>(std::ceil(std::sqrt(
                       b.L / 2.0 * std::log(24.0 * kPi * b.L * deriv_norm * b.harmonic / epsilon)))));
  const double n = 16.0 * kPi * kPi * b.M * b.M * b.harmonic * b.harmonic * deriv_norm * deriv_norm / (epsilon * epsilon);
  b.samples = static_cast<long long>(std::ceil(n));
  return b;
}

double derivative_error_bound(int K, int L, int M, double lambda_min, double deriv_norm) {
  const double lam = lambda_min, h = harmonic_number(K);
  const double t1 = (1.0 + kE * kE) / kE * h * L * std::pow(1.0 - lam * lam, L + 1) /
                    (lam * lam * lam * std::pow(2.0 - lam * lam, 1.5));
  const double t2 = 2.0 * kPi * h * L * std::exp(-2.0 * M * static_cast<double>(M) / L);
  const double t3 = std::pow(1.0 - lam, K) / lam;
  return deriv_norm * (t1 + t2 + t3);
}

double duhamel_stddev_bound(int K, int M, double deriv_norm, long long samples) {
  return kPi * M * harmonic_number(K) * deriv_norm / std::sqrt(static_cast<double>(samples));
}

ApproximationPlan::ApproximationPlan(int K, int L, int M, double lambda_min, double epsilon, double deriv_norm)
    : K_(K), L_(L), M_(M), lambda_min_(lambda_min), epsilon_(epsilon), deriv_norm_(deriv_norm) {
  if (K < 1 || L < K || M < 1) throw ValidationError("plan needs K >= 1, L >= K, M >= 1", "order");
  if (!(lambda_min > 0.0 && lambda_min <= 1.0)) throw ValidationError("λ_min must lie in (0, 1]", "domain");
  taylor_ = taylor_log_coeffs(K);
  sine_ = std::make_shared<const std::vector<double>>(combined_sine_coeffs(K, L));
  series_ = std::make_shared<const FourierLogSeries>(fourier_log_coeffs(K, L, M));
}

ApproximationPlan ApproximationPlan::from_bounds(const PlanBounds& b) {
  return ApproximationPlan(b.K, b.L, b.M, b.lambda_min, b.epsilon, b.deriv_norm);
}

double ApproximationPlan::taylor_one_norm() const {
  double s = 0.0;
  for (double a : taylor_) s += std::abs(a);
  return s;
}

void check_window(const RealVector& eigenvalues, double lambda_min, double support_threshold, const char* name) {
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const double l = eigenvalues(i);
    if (std::abs(l) <= support_threshold) continue;
    if (l < lambda_min * (1.0 - 1e-12) || l > 1.0 + 1e-10) {
      std::ostringstream os;
      os << name << ": eigenvalue " << l << " outside the series window [" << lambda_min << ", 1]";
      throw WindowError(os.str(), l);
    }
  }
}

HermitianOperator approx_log_operator(const DensityMatrix& sigma, const ApproximationPlan& plan) {
  check_window(sigma.spectrum().values, plan.lambda_min(), sigma.support_threshold(), "sigma");
  const auto& series = plan.series();
  return HermitianOperator(apply_matrix_function(
      sigma.spectrum(), [&](double l) { return series.eval(l).real(); }, sigma.support_threshold()));
}

double lambert_w_minus1(double x) {
  const double branch = -1.0 / kE;
  if (!(x >= branch - 1e-15 && x < 0.0)) {
    std::ostringstream os;
    os << "W_{-1} is defined on [-1/e, 0), got " << x;
    throw NumericError(os.str(), "domain");
  }
  if (x <= branch) return -1.0;
  double w;
  if (x < -0.25) {
    const double p = -std::sqrt(2.0 * (kE * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    w = std::log(-x) - std::log(-std::log(-x));
  }
  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (std::abs(wp1) < 1e-300) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-15 * std::abs(w)) break;
  }
  return std::min(w, -1.0);
}

ChebyshevInversePlan::ChebyshevInversePlan(double kappa, double epsilon) : kappa_(kappa), epsilon_(epsilon) {
  if (!(kappa >= 1.0) || !(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("need κ >= 1 and ε in (0, 1)", "domain");
  b_ = static_cast<long long>(std::ceil(kappa * kappa * std::log(kappa / epsilon)));
  if (b_ < 1) b_ = 1;
  const double bd = static_cast<double>(b_);
  j0_ = static_cast<int>(std::ceil(std::sqrt(bd * std::log(4.0 * bd / epsilon))));
  // tail[i] = P(X >= b + i) for X ~ Binomial(2b, 1/2), i = 1..b
  std::vector<double> tail(b_ + 2, 0.0);
  for (long long i = b_; i >= 1; --i)
    tail[i] = tail[i + 1] + std::exp(log_binomial(2.0 * bd, bd + i) - 2.0 * bd * std::log(2.0));
  coeffs_.resize(j0_ + 1);
  for (int j = 0; j <= j0_; ++j) {
    const double t = (j + 1 <= b_) ? tail[j + 1] : 0.0;
    coeffs_[j] = 4.0 * (j % 2 == 0 ? 1.0 : -1.0) * t;
  }
}

double ChebyshevInversePlan::coefficient_one_norm() const {
  double s = 0.0;
  for (double c : coeffs_) s += std::abs(c);
  return s;
}

double ChebyshevInversePlan::one_norm_bound() const { return 2.0 * kappa_ * std::sqrt(std::log(kappa_ / epsilon_)); }

double chebyshev_inverse(double x, const ChebyshevInversePlan& plan) {
  // Clenshaw over T_n with only odd n populated.
  const auto& c = plan.coefficients();
  const int n_max = 2 * static_cast<int>(c.size()) - 1;
  double b1 = 0.0, b2 = 0.0;
  for (int n = n_max; n >= 1; --n) {
    const double a = (n % 2 == 1) ? c[(n - 1) / 2] : 0.0;
    const double b0 = a + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  // a_0 = 0
  return x * b1 - b2;
}

ChebyshevInverseResult chebyshev_inverse(const HermitianOperator& a, const ChebyshevInversePlan& plan,
                                         double support_threshold) {
  const Spectrum s = spectral_decompose(a);
  int outside = 0;
  for (Index i = 0; i < s.values.size(); ++i) {
    const double l = std::abs(s.values(i));
    if (l <= support_threshold) continue;
    if (l < 1.0 / plan.kappa() * (1.0 - 1e-12) || l > 1.0 + 1e-12) ++outside;
  }
  Matrix m = apply_matrix_function(s, [&](double x) { return chebyshev_inverse(x, plan); }, support_threshold);
  return {HermitianOperator(m), outside};
}

}  // namespace qiblab
