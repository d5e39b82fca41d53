#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qiblab/entropy.hpp"
#include "qiblab/sampling.hpp"
#include "qiblab/series.hpp"

namespace qiblab {

// How the s-integral of the Duhamel term is evaluated.
enum class DuhamelMode {
  Analytic,       // closed form per eigenvalue pair (divided differences)
  GaussLegendre,  // composite Gauss-Legendre in s
  MonteCarlo,     // uniform s samples, the estimator analysed for the stddev bound
};

struct EstimatorConfig {
  long long duhamel_samples = 1000;  // n
  int boost_repeats = 1;             // N_c, odd
  TraceMode mode = TraceMode::ExactTrace;
  DuhamelMode duhamel = DuhamelMode::Analytic;
  int quadrature_nodes = 32;
  int quadrature_panels = 0;  // 0 sizes panels from the largest frequency
  std::uint64_t seed = 0;
  double trace_error = 0.02;          // ε_T
  double failure_probability = 0.05;  // δ
  long long shots = 0;                // per trace in shot-sampled mode; 0 derives from (ε_T, δ)
  bool strict_window = true;

  void validate() const;
  TraceEstimateOptions trace_options() const;
};

struct EstimateReport {
  double value = 0.0;
  std::string estimator;
  TraceMode mode = TraceMode::ExactTrace;
  DuhamelMode duhamel = DuhamelMode::Analytic;
  long long samples = 0;
  int repeats = 1;
  double claimed_stddev = 0.0;
  double empirical_stddev = 0.0;
  std::vector<double> repeat_values;
  std::map<std::string, double> budget;
};

// Bound on sup |log_KLM λ - ln λ| over [λ_min, 1]: Taylor, arcsin and binomial tails.
double value_error_bound(int K, int L, int M, double lambda_min);

// Tr(ρ log_KLM σ).
EstimateReport cross_entropy_series(const DensityMatrix& rho, const DensityMatrix& sigma, const ApproximationPlan& plan,
                                    const EstimatorConfig& config);

// Tr(∂ρ log_KLM σ) + Σ_j (iπj c_j/2) E_s[Tr(ρ e^{isπjσ/2} ∂σ e^{i(1-s)πjσ/2})].
EstimateReport cross_entropy_derivative_series(const DensityMatrix& rho, const Matrix& d_rho, const DensityMatrix& sigma,
                                               const Matrix& d_sigma, const ApproximationPlan& plan,
                                               const EstimatorConfig& config);

// Smallest support eigenvalue over the four states whose logarithms enter the objective.
double qib_spectral_floor(const QibInstance& instance);

// Series estimate of ∂_{α_k} of the objective; k is zero-based.
EstimateReport qib_gradient_series(const QibInstance& instance, const ApproximationPlan& plan,
                                   const EstimatorConfig& config, std::size_t k);
// Series estimate of the objective itself.
EstimateReport qib_objective_series(const QibInstance& instance, const ApproximationPlan& plan,
                                    const EstimatorConfig& config);

// ln Tr(ρ² σ⁻¹), inverse on the support of σ.
double renyi2_divergence(const DensityMatrix& rho, const DensityMatrix& sigma);

struct QibBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// upper = β D₂(ρ_RX̃ ‖ ρ_R⊗ρ_X̃) − (1−β) ½Tr((ρ_X̃Y − ρ_X̃⊗ρ_Y)²)
// lower = β ½Tr((ρ_RX̃ − ρ_R⊗ρ_X̃)²) − (1−β) D₂(ρ_X̃Y ‖ ρ_X̃⊗ρ_Y)
QibBounds qib_bounds(const QibInstance& instance);

struct Renyi2GradientReport {
  double value = 0.0;
  double ratio_numerator = 0.0;    // N
  double ratio_denominator = 0.0;  // D
  double budget = 0.0;             // bound on |value − exact-inverse value| in Chebyshev mode
  int out_of_window = 0;
  bool chebyshev = false;
};

// ∂_{α_k} of the upper bound; exact pseudo-inverse when no Chebyshev plan is given.
Renyi2GradientReport renyi2_bound_gradient(const QibInstance& instance, std::size_t k,
                                           const std::optional<ChebyshevInversePlan>& chebyshev = std::nullopt);

// VariationalConsistent: Q = 2Tr(ρω), the optimum of sup_H 2Tr(ρH) − Tr(σH²), so D(ρ‖ρ) = 0.
// ClosedForm: Q = Tr(ρω) − ¼Tr(ρω²); gives ln(7/16) at ρ = σ and is kept for comparison.
enum class MeasuredForm { VariationalConsistent, ClosedForm };
enum class LyapunovMode { ExactEigen, Integral };

// Quadrature recipe for ω = ∫_0^∞ e^{-sσ} X e^{-sσ} ds.
struct MeasuredRenyiPlan {
  LyapunovMode mode = LyapunovMode::ExactEigen;
  MeasuredForm form = MeasuredForm::VariationalConsistent;
  double cutoff = 0.0;
  int slices = 0;
  std::vector<int> exp_orders;  // truncated Taylor order of e^{-s_iσ} per node
  std::vector<double> weights;  // trapezoid: 1/2 at the ends
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0, eps4 = 0.0;

  static MeasuredRenyiPlan exact(MeasuredForm form = MeasuredForm::VariationalConsistent);
  // Splits ε equally into cutoff, trapezoid, exponential-truncation and t-quadrature parts.
  static MeasuredRenyiPlan integral(double epsilon, double sigma_lambda_min, double sigma_norm, double integrand_norm,
                                    MeasuredForm form = MeasuredForm::VariationalConsistent);
  double step() const { return slices > 0 ? cutoff / slices : 0.0; }
  double node(int i) const { return step() * i; }
  // ε₁+ε₂+ε₃: bound on ‖ω_integral − ω‖_∞
  double lyapunov_budget() const { return eps1 + eps2 + eps3; }
};

// Smallest K with e^{x}x^{K+1}/(K+1)! <= tol, x = s‖σ‖.
int exp_truncation_order(double x, double tol);
// Σ_{k<=K} (−sσ)^k / k!
Matrix truncated_exp(const Spectrum& sigma, double s, int order);

// Solves ωσ + σω = X.
HermitianOperator lyapunov_inverse(const Matrix& x, const DensityMatrix& sigma, const MeasuredRenyiPlan& plan);

double measured_renyi2(const DensityMatrix& rho, const DensityMatrix& sigma, const MeasuredRenyiPlan& plan);
EstimateReport measured_renyi2_derivative(const DensityMatrix& rho, const Matrix& d_rho, const DensityMatrix& sigma,
                                          const Matrix& d_sigma, const MeasuredRenyiPlan& plan,
                                          const EstimatorConfig& config = {});

const char* to_string(TraceMode mode);
const char* to_string(DuhamelMode mode);
TraceMode parse_trace_mode(const std::string& s);
DuhamelMode parse_duhamel_mode(const std::string& s);

}  // namespace qiblab
