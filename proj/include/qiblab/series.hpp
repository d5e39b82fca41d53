#pragma once

#include <memory>
#include <vector>

#include "qiblab/linalg.hpp"

namespace qiblab {

// Coefficients of Σ_{n=1}^K (-1)^{n+1} (x-1)^n / n; index 0 is unused (zero).
std::vector<double> taylor_log_coeffs(int K);
double taylor_log_eval(const std::vector<double>& coeffs, double x);
// Smallest K with ln(3/ε)/ln(α/(α-1)) <= K, valid on [1/α, 1].
int taylor_order_bound(double alpha, double epsilon);

double harmonic_number(int K);

// Taylor coefficients of (arcsin(x)/(π/2))^k up to x^L (size L+1).
std::vector<double> arcsin_power_coeffs(int k, int L);

// Σ_j c_j e^{iπjλ/2}, j in [-J, J], approximating ln λ on [λ_min, 1].
class FourierLogSeries {
 public:
  FourierLogSeries(int max_frequency, std::vector<cplx> coeffs);

  int max_frequency() const { return J_; }
  cplx coefficient(int j) const { return c_[j + J_]; }
  const std::vector<cplx>& coefficients() const { return c_; }
  double one_norm() const;

  cplx eval(double lambda) const;
  // d/dλ of eval
  cplx derivative(double lambda) const;
  // ∫_0^1 f'(sλ_p + (1-s)λ_q) ds, i.e. the divided difference of the series,
  // evaluated frequency by frequency so near-equal arguments stay accurate.
  cplx divided_difference(double lambda_p, double lambda_q) const;

 private:
  int J_;
  std::vector<cplx> c_;
};

// Collects -Σ_k (1/k) Σ_l b_l^{(k)} sin^l(π(1-λ)/2) by frequency, keeping
// binomial terms with |2m - l| <= 2M.
FourierLogSeries fourier_log_coeffs(int K, int L, int M);

// d_l = -Σ_{k<=K} b_l^{(k)}/k, the sin-power coefficients of the truncated series.
std::vector<double> combined_sine_coeffs(int K, int L);
// Same series without the M truncation: Σ_l d_l sin^l(π(1-λ)/2).
double sine_series_eval(const std::vector<double>& d, double lambda);

// Sizes from the sufficient-parameter inequalities of the derivative error analysis.
struct PlanBounds {
  int K = 0;
  int L = 0;
  int M = 0;
  long long samples = 0;
  double epsilon = 0.0;
  double lambda_min = 0.0;
  double deriv_norm = 0.0;
  double harmonic = 0.0;
  double lambert_argument = 0.0;  // argument passed to W_{-1}; below -1/e means any L works
  double L_raw = 0.0;             // unrounded bound on L
};

PlanBounds plan_parameters(double epsilon, double lambda_min, double deriv_norm = 1.0);

// Three-term bound on ‖∂(log σ - log_KLM σ)‖_∞ for given sizes.
double derivative_error_bound(int K, int L, int M, double lambda_min, double deriv_norm);
// πM H_K ‖∂σ‖_∞ / √n
double duhamel_stddev_bound(int K, int M, double deriv_norm, long long samples);

class ApproximationPlan {
 public:
  ApproximationPlan(int K, int L, int M, double lambda_min, double epsilon, double deriv_norm = 1.0);
  static ApproximationPlan from_bounds(const PlanBounds& b);

  int K() const { return K_; }
  int L() const { return L_; }
  int M() const { return M_; }
  double lambda_min() const { return lambda_min_; }
  double epsilon() const { return epsilon_; }
  double deriv_norm() const { return deriv_norm_; }
  double harmonic() const { return harmonic_number(K_); }
  const std::vector<double>& taylor_coeffs() const { return taylor_; }
  double taylor_one_norm() const;
  const FourierLogSeries& series() const { return *series_; }
  const std::vector<double>& sine_coeffs() const { return *sine_; }

 private:
  int K_, L_, M_;
  double lambda_min_, epsilon_, deriv_norm_;
  std::vector<double> taylor_;
  std::shared_ptr<const std::vector<double>> sine_;
  std::shared_ptr<const FourierLogSeries> series_;
};

// Throws WindowError if a support eigenvalue lies outside [λ_min, 1].
void check_window(const RealVector& eigenvalues, double lambda_min, double support_threshold, const char* name = "state");

// log_KLM σ on the support of σ; zero on the kernel.
HermitianOperator approx_log_operator(const DensityMatrix& sigma, const ApproximationPlan& plan);

double lambert_w_minus1(double x);

class ChebyshevInversePlan {
 public:
  ChebyshevInversePlan(double kappa, double epsilon);

  double kappa() const { return kappa_; }
  double epsilon() const { return epsilon_; }
  long long b() const { return b_; }
  int j0() const { return j0_; }
  // Coefficient of T_{2j+1} for j = 0..j0.
  const std::vector<double>& coefficients() const { return coeffs_; }
  double coefficient_one_norm() const;
  // 2κ√(ln(κ/ε))
  double one_norm_bound() const;

 private:
  double kappa_, epsilon_;
  long long b_;
  int j0_;
  std::vector<double> coeffs_;
};

double chebyshev_inverse(double x, const ChebyshevInversePlan& plan);

struct ChebyshevInverseResult {
  HermitianOperator op;
  int out_of_window = 0;  // support eigenvalues with |λ| outside [1/κ, 1]
};

ChebyshevInverseResult chebyshev_inverse(const HermitianOperator& a, const ChebyshevInversePlan& plan,
                                         double support_threshold = kSupportThreshold);

}  // namespace qiblab
