#include "qiblab/estimators.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qiblab/channel.hpp"
#include "qiblab/error.hpp"

namespace qiblab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [0, 1] by Newton iteration on P_n.
Rule gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = (1.0 - x) / 2.0;
    r.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

Rule composite_gauss_legendre(int nodes, int panels) {
  const Rule base = gauss_legendre(nodes);
  Rule r;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < nodes; ++i) {
      r.nodes.push_back((p + base.nodes[i]) / panels);
      r.weights.push_back(base.weights[i] / panels);
    }
  return r;
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Runs `once` per repeat with its own stream and reduces by the median.
EstimateReport boosted(const EstimatorConfig& config, bool stochastic,
                       const std::function<double(Rng&)>& once, EstimateReport report) {
  const int repeats = stochastic ? config.boost_repeats : 1;
  report.repeats = repeats;
  report.repeat_values.resize(repeats);
  for (int r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    report.repeat_values[r] = once(rng);
  }
  report.value = median_boost(report.repeat_values);
  report.empirical_stddev = sample_stddev(report.repeat_values);
  return report;
}

Matrix in_basis(const Matrix& m, const Matrix& v) { return v.adjoint() * m * v; }

void check_series_inputs(const DensityMatrix& rho, const DensityMatrix& sigma, const ApproximationPlan& plan,
                         const EstimatorConfig& config, const char* name) {
  if (rho.dim() != sigma.dim()) throw ValidationError("ρ and σ differ in dimension", "dimension_mismatch");
  require_kernel_containment(rho, sigma, name);
  if (config.strict_window) check_window(sigma.spectrum().values, plan.lambda_min(), sigma.support_threshold(), name);
}

double pinned(const FourierLogSeries& f, double lambda, double threshold) {
  return std::abs(lambda) <= threshold ? 0.0 : f.eval(lambda).real();
}

// Noisy readout of a complex trace bounded by 1 in modulus.
cplx noisy_trace(cplx exact, const TraceEstimateOptions& opt, Rng& rng) {
  const double re = estimate_encoded_value(exact.real(), opt, rng);
  const double im = estimate_encoded_value(exact.imag(), opt, rng);
  return {re, im};
}

}  // namespace

void EstimatorConfig::validate() const {
  if (duhamel_samples < 1) throw ValidationError("Duhamel sample count must be >= 1", "estimator_config");
  if (boost_repeats < 1 || boost_repeats % 2 == 0) throw ValidationError("boost repeats N_c must be odd and >= 1", "estimator_config");
  if (quadrature_nodes < 1 || quadrature_panels < 0) throw ValidationError("invalid quadrature configuration", "estimator_config");
  if (!(trace_error > 0.0 && trace_error < 1.0)) throw ValidationError("trace error must lie in (0, 1)", "estimator_config");
  if (!(failure_probability > 0.0 && failure_probability < 1.0)) throw ValidationError("failure probability must lie in (0, 1)", "estimator_config");
  if (mode != TraceMode::ExactTrace && duhamel == DuhamelMode::Analytic)
    throw ValidationError("sampled trace modes need a quadrature or Monte-Carlo Duhamel mode", "estimator_config");
}

TraceEstimateOptions EstimatorConfig::trace_options() const { return {mode, trace_error, failure_probability, shots}; }

double value_error_bound(int K, int L, int M, double lambda_min) {
  const double h = harmonic_number(K);
  const double taylor = std::pow(1.0 - lambda_min, K + 1) / ((K + 1) * lambda_min);
  const double arcsin = h * std::pow(std::cos(kPi * lambda_min / 2.0), L + 1);
  const double binomial = h * 2.0 * std::exp(-2.0 * M * static_cast<double>(M) / L);
  return taylor + arcsin + binomial;
}

EstimateReport cross_entropy_series(const DensityMatrix& rho, const DensityMatrix& sigma, const ApproximationPlan& plan,
                                    const EstimatorConfig& config) {
  config.validate();
  check_series_inputs(rho, sigma, plan, config, "sigma");
  const auto& s = sigma.spectrum();
  const Matrix rt = in_basis(rho.matrix(), s.vectors);
  const auto& f = plan.series();
  EstimateReport report;
  report.estimator = "cross_entropy_series";
  report.mode = config.mode;
  report.budget["series_value"] = value_error_bound(plan.K(), plan.L(), plan.M(), plan.lambda_min());

  if (config.mode == TraceMode::ExactTrace) {
    double v = 0.0;
    for (Index p = 0; p < s.values.size(); ++p) v += rt(p, p).real() * pinned(f, s.values(p), sigma.support_threshold());
    report.value = v;
    report.repeat_values = {v};
    return report;
  }
  const auto opt = config.trace_options();
  report.budget["trace_noise"] = 2.0 * f.one_norm() * config.trace_error;
  return boosted(config, true, [&](Rng& rng) {
    cplx acc = 0.0;
    for (int j = -f.max_frequency(); j <= f.max_frequency(); ++j) {
      const cplx c = f.coefficient(j);
      if (c == 0.0) continue;
      cplx t = 0.0;
      for (Index p = 0; p < s.values.size(); ++p) t += rt(p, p) * std::polar(1.0, kPi * j * s.values(p) / 2.0);
      acc += c * noisy_trace(t, opt, rng);
    }
    return acc.real();
  }, report);
}

EstimateReport cross_entropy_derivative_series(const DensityMatrix& rho, const Matrix& d_rho, const DensityMatrix& sigma,
                                               const Matrix& d_sigma, const ApproximationPlan& plan,
                                               const EstimatorConfig& config) {
  config.validate();
  check_series_inputs(rho, sigma, plan, config, "sigma");
  const Index d = sigma.dim();
  if (d_rho.rows() != d || d_sigma.rows() != d) throw ValidationError("derivative dimension mismatch", "dimension_mismatch");
  const auto& s = sigma.spectrum();
  const auto& f = plan.series();
  const double thr = sigma.support_threshold();
  const Matrix rt = in_basis(rho.matrix(), s.vectors);
  const Matrix drt = in_basis(d_rho, s.vectors);
  const Matrix dst = in_basis(d_sigma, s.vectors);
  const double dsigma_norm = operator_norm_hermitian((d_sigma + d_sigma.adjoint()) / 2.0);

  EstimateReport report;
  report.estimator = "cross_entropy_derivative_series";
  report.mode = config.mode;
  report.duhamel = config.duhamel;
  report.budget["series_value"] = trace_norm_hermitian((d_rho + d_rho.adjoint()) / 2.0) *
                                  value_error_bound(plan.K(), plan.L(), plan.M(), plan.lambda_min());
  report.budget["series_derivative"] =
      derivative_error_bound(plan.K(), plan.L(), plan.M(), plan.lambda_min(), dsigma_norm);

  const bool sampled = config.mode != TraceMode::ExactTrace;
  const bool monte_carlo = config.duhamel == DuhamelMode::MonteCarlo;

  // Exact first term Tr(∂ρ log_KLM σ).
  double first_exact = 0.0;
  for (Index p = 0; p < d; ++p) first_exact += drt(p, p).real() * pinned(f, s.values(p), thr);

  if (config.duhamel == DuhamelMode::Analytic) {
    cplx acc = 0.0;
    for (Index p = 0; p < d; ++p)
      for (Index q = 0; q < d; ++q) {
        const cplx w = rt(q, p) * dst(p, q);
        if (std::abs(w) == 0.0) continue;
        acc += w * f.divided_difference(s.values(p), s.values(q));
      }
    report.value = first_exact + acc.real();
    report.repeat_values = {report.value};
    return report;
  }

  Rule rule;
  if (!monte_carlo) {
    int panels = config.quadrature_panels;
    if (panels == 0) {
      const double spread = s.values.maxCoeff() - s.values.minCoeff();
      panels = std::max(1, static_cast<int>(std::ceil(kPi * f.max_frequency() / 2.0 * spread / 20.0)));
    }
    rule = composite_gauss_legendre(config.quadrature_nodes, panels);
    report.samples = static_cast<long long>(rule.nodes.size());
  } else {
    report.samples = config.duhamel_samples;
    report.claimed_stddev = duhamel_stddev_bound(plan.K(), plan.M(), dsigma_norm, config.duhamel_samples);
  }

  // Sampled trace modes read each trace through Pauli expansions of ∂ρ and ∂σ.
  GeneratorExpansion drho_pauli, dsigma_pauli;
  std::vector<RealVector> drho_diag;
  std::vector<Matrix> dsigma_rot;
  if (sampled) {
    drho_pauli = pauli_expand(HermitianOperator((d_rho + d_rho.adjoint()) / 2.0), 1e-14);
    dsigma_pauli = pauli_expand(HermitianOperator((d_sigma + d_sigma.adjoint()) / 2.0), 1e-14);
    for (const auto& l : drho_pauli.labels)
      drho_diag.push_back(in_basis(pauli_string_matrix(l), s.vectors).diagonal().real());
    for (const auto& l : dsigma_pauli.labels) dsigma_rot.push_back(in_basis(pauli_string_matrix(l), s.vectors));
    report.budget["trace_noise"] = config.trace_error * f.one_norm() *
                                   (static_cast<double>(d) * drho_pauli.one_norm + kPi * f.max_frequency() / 2.0 * dsigma_pauli.one_norm) * 2.0;
  }
  const auto opt = config.trace_options();

  // Integrand Σ_j (i a_j c_j) Tr(ρ e^{is a_j σ} ∂σ e^{i(1-s) a_j σ}) at one s.
  auto integrand_exact = [&](double sv) {
    cplx acc = 0.0;
    for (Index p = 0; p < d; ++p)
      for (Index q = 0; q < d; ++q) {
        const cplx w = rt(q, p) * dst(p, q);
        if (std::abs(w) == 0.0) continue;
        acc += w * f.derivative(sv * s.values(p) + (1.0 - sv) * s.values(q));
      }
    return acc.real();
  };
  auto integrand_noisy = [&](double sv, Rng& rng) {
    cplx acc = 0.0;
    for (int j = -f.max_frequency(); j <= f.max_frequency(); ++j) {
      const cplx c = f.coefficient(j);
      if (j == 0 || c == 0.0) continue;
      const double a = kPi * j / 2.0;
      for (std::size_t u = 0; u < dsigma_rot.size(); ++u) {
        const Matrix& pr = dsigma_rot[u];
        cplx t = 0.0;
        for (Index p = 0; p < d; ++p)
          for (Index q = 0; q < d; ++q)
            t += rt(q, p) * std::polar(1.0, sv * a * s.values(p)) * pr(p, q) * std::polar(1.0, (1.0 - sv) * a * s.values(q));
        acc += cplx(0, a) * c * dsigma_pauli.coefficients[u] * noisy_trace(t, opt, rng);
      }
    }
    return acc.real();
  };
  auto first_noisy = [&](Rng& rng) {
    cplx acc = 0.0;
    const double dd = static_cast<double>(d);
    for (int j = -f.max_frequency(); j <= f.max_frequency(); ++j) {
      const cplx c = f.coefficient(j);
      if (c == 0.0) continue;
      for (std::size_t u = 0; u < drho_diag.size(); ++u) {
        cplx t = 0.0;
        for (Index p = 0; p < d; ++p) t += drho_diag[u](p) * std::polar(1.0, kPi * j * s.values(p) / 2.0);
        // Tr(P e^{iaσ}) = d·Tr((1/d) P e^{iaσ}), read out against the maximally mixed state
        acc += c * drho_pauli.coefficients[u] * dd * noisy_trace(t / dd, opt, rng);
      }
    }
    return acc.real();
  };

  return boosted(config, sampled || monte_carlo, [&](Rng& rng) {
    double first = sampled ? first_noisy(rng) : first_exact;
    double second = 0.0;
    if (monte_carlo) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (long long i = 0; i < config.duhamel_samples; ++i) {
        const double sv = u(rng);
        second += sampled ? integrand_noisy(sv, rng) : integrand_exact(sv);
      }
      second /= static_cast<double>(config.duhamel_samples);
    } else {
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        second += rule.weights[i] * (sampled ? integrand_noisy(rule.nodes[i], rng) : integrand_exact(rule.nodes[i]));
    }
    return first + second;
  }, report);
}

namespace {

struct CrossTerm {
  double weight;
  const char* name;
  const DensityMatrix* rho;
  const Matrix* d_rho;
  const DensityMatrix* sigma;
  const Matrix* d_sigma;
};

void rethrow_named(const WindowError& e, const char* name) {
  throw WindowError(std::string(name) + ": " + e.what(), e.eigenvalue());
}

}  // namespace

double qib_spectral_floor(const QibInstance& instance) {
  const QibStates st = qib_states(instance);
  double floor = 1.0;
  for (const DensityMatrix* m : {&st.ref_out, &st.ref_times_out, &st.out_label, &st.out_times_label})
    floor = std::min(floor, spectral_profile(*m).min_support_eigenvalue);
  return floor;
}

EstimateReport qib_gradient_series(const QibInstance& instance, const ApproximationPlan& plan,
                                   const EstimatorConfig& config, std::size_t k) {
  const QibStates st = qib_states(instance);
  const QibStateDerivatives dst = qib_state_derivatives(instance, st, k);
  const double b = instance.beta();
  const CrossTerm terms[] = {
      {b, "rho_RX~", &st.ref_out, &dst.ref_out, &st.ref_out, &dst.ref_out},
      {-b, "rho_R (x) rho_X~", &st.ref_out, &dst.ref_out, &st.ref_times_out, &dst.ref_times_out},
      {-(1.0 - b), "rho_X~Y", &st.out_label, &dst.out_label, &st.out_label, &dst.out_label},
      {1.0 - b, "rho_X~ (x) rho_Y", &st.out_label, &dst.out_label, &st.out_times_label, &dst.out_times_label},
  };
  EstimateReport total;
  total.estimator = "qib_gradient_series";
  total.mode = config.mode;
  total.duhamel = config.duhamel;
  double var = 0.0, evar = 0.0;
  for (std::size_t t = 0; t < 4; ++t) {
    const auto& term = terms[t];
    if (term.weight == 0.0) continue;
    EstimatorConfig cfg = config;
    cfg.seed = derive_seed(config.seed, 4 * k + t);
    EstimateReport r;
    try {
      r = cross_entropy_derivative_series(*term.rho, *term.d_rho, *term.sigma, *term.d_sigma, plan, cfg);
    } catch (const WindowError& e) {
      rethrow_named(e, term.name);
    }
    total.value += term.weight * r.value;
    total.samples = r.samples;
    total.repeats = r.repeats;
    var += term.weight * term.weight * r.claimed_stddev * r.claimed_stddev;
    evar += term.weight * term.weight * r.empirical_stddev * r.empirical_stddev;
    for (const auto& [key, v] : r.budget) total.budget[key] += std::abs(term.weight) * v;
  }
  total.claimed_stddev = std::sqrt(var);
  total.empirical_stddev = std::sqrt(evar);
  total.repeat_values = {total.value};
  return total;
}

EstimateReport qib_objective_series(const QibInstance& instance, const ApproximationPlan& plan,
                                    const EstimatorConfig& config) {
  const QibStates st = qib_states(instance);
  const double b = instance.beta();
  struct Term {
    double weight;
    const char* name;
    const DensityMatrix* rho;
    const DensityMatrix* sigma;
  };
  const Term terms[] = {{b, "rho_RX~", &st.ref_out, &st.ref_out},
                        {-b, "rho_R (x) rho_X~", &st.ref_out, &st.ref_times_out},
                        {-(1.0 - b), "rho_X~Y", &st.out_label, &st.out_label},
                        {1.0 - b, "rho_X~ (x) rho_Y", &st.out_label, &st.out_times_label}};
  EstimateReport total;
  total.estimator = "qib_objective_series";
  total.mode = config.mode;
  for (std::size_t t = 0; t < 4; ++t) {
    if (terms[t].weight == 0.0) continue;
    EstimatorConfig cfg = config;
    cfg.seed = derive_seed(config.seed, t);
    EstimateReport r;
    try {
      r = cross_entropy_series(*terms[t].rho, *terms[t].sigma, plan, cfg);
    } catch (const WindowError& e) {
      rethrow_named(e, terms[t].name);
    }
    total.value += terms[t].weight * r.value;
    for (const auto& [key, v] : r.budget) total.budget[key] += std::abs(terms[t].weight) * v;
  }
  total.repeat_values = {total.value};
  return total;
}

namespace {

Matrix pseudo_inverse(const DensityMatrix& sigma) {
  return apply_matrix_function(sigma.spectrum(), [](double x) { return 1.0 / x; }, sigma.support_threshold());
}

double half_hs_distance(const Matrix& a, const Matrix& b) { return 0.5 * (a - b).squaredNorm(); }

}  // namespace

double renyi2_divergence(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_kernel_containment(rho, sigma, "renyi2");
  const Matrix r2 = rho.matrix() * rho.matrix();
  const double t = (r2 * pseudo_inverse(sigma)).trace().real();
  if (!(t > 0.0)) throw NumericError("Tr(ρ²σ⁻¹) is not positive", "domain");
  return std::log(t);
}

QibBounds qib_bounds(const QibInstance& instance) {
  const QibStates st = qib_states(instance);
  const double b = instance.beta();
  QibBounds out;
  const double d2_mem = b > 0.0 ? renyi2_divergence(st.ref_out, st.ref_times_out) : 0.0;
  const double d2_rel = b < 1.0 ? renyi2_divergence(st.out_label, st.out_times_label) : 0.0;
  out.upper = b * d2_mem - (1.0 - b) * half_hs_distance(st.out_label.matrix(), st.out_times_label.matrix());
  out.lower = b * half_hs_distance(st.ref_out.matrix(), st.ref_times_out.matrix()) - (1.0 - b) * d2_rel;
  return out;
}

Renyi2GradientReport renyi2_bound_gradient(const QibInstance& instance, std::size_t k,
                                           const std::optional<ChebyshevInversePlan>& chebyshev) {
  const QibStates st = qib_states(instance);
  const QibStateDerivatives dst = qib_state_derivatives(instance, st, k);
  const double b = instance.beta();
  Renyi2GradientReport rep;
  rep.chebyshev = chebyshev.has_value();
  if (b > 0.0) {
    const Matrix& rho = st.ref_out.matrix();
    const Matrix& drho = dst.ref_out;
    const Matrix& dsig = dst.ref_times_out;
    require_kernel_containment(st.ref_out, st.ref_times_out, "renyi2 gradient");
    Matrix inv;
    if (chebyshev) {
      auto res = chebyshev_inverse(st.ref_times_out.as_operator(), *chebyshev, st.ref_times_out.support_threshold());
      inv = res.op.matrix();
      rep.out_of_window = res.out_of_window;
    } else {
      inv = pseudo_inverse(st.ref_times_out);
    }
    const Matrix r2 = rho * rho;
    const Matrix anti = rho * drho + drho * rho;
    rep.ratio_numerator = (anti * inv).trace().real() - (r2 * inv * dsig * inv).trace().real();
    rep.ratio_denominator = (r2 * inv).trace().real();
    if (!(rep.ratio_denominator > 0.0)) throw NumericError("Tr(ρ²σ⁻¹) is not positive", "domain");
    rep.value = b * rep.ratio_numerator / rep.ratio_denominator;
    if (chebyshev) {
      const double delta = 2.0 * chebyshev->epsilon();
      const double lam = spectral_profile(st.ref_times_out).min_support_eigenvalue;
      const double eps_n = 2.0 * delta * operator_norm_hermitian((drho + drho.adjoint()) / 2.0) +
                           delta * operator_norm_hermitian((dsig + dsig.adjoint()) / 2.0) * (2.0 / lam + delta);
      const double eps_d = delta;
      const double dd = rep.ratio_denominator;
      rep.budget = b * (2.0 * eps_n / dd + 2.0 * std::abs(rep.ratio_numerator) * eps_d / (dd * dd));
    }
  }
  const Matrix diff = st.out_label.matrix() - st.out_times_label.matrix();
  const Matrix ddiff = dst.out_label - dst.out_times_label;
  rep.value -= (1.0 - b) * (diff * ddiff).trace().real();
  return rep;
}

int exp_truncation_order(double x, double tol) {
  // term = e^x x^{K+1}/(K+1)!
  double term = std::exp(x) * x;
  int K = 0;
  while (term > tol && K < 100000) {
    ++K;
    term *= x / (K + 1);
  }
  return K;
}

Matrix truncated_exp(const Spectrum& sigma, double s, int order) {
  Vector v(sigma.values.size());
  for (Index i = 0; i < v.size(); ++i) {
    const long double x = -static_cast<long double>(s) * sigma.values(i);
    long double term = 1.0L, acc = 1.0L;
    for (int k = 1; k <= order; ++k) {
      term *= x / k;
      acc += term;
    }
    v(i) = static_cast<double>(acc);
  }
  return sigma.vectors * v.asDiagonal() * sigma.vectors.adjoint();
}

MeasuredRenyiPlan MeasuredRenyiPlan::exact(MeasuredForm form) {
  MeasuredRenyiPlan p;
  p.mode = LyapunovMode::ExactEigen;
  p.form = form;
  return p;
}

MeasuredRenyiPlan MeasuredRenyiPlan::integral(double epsilon, double sigma_lambda_min, double sigma_norm,
                                              double integrand_norm, MeasuredForm form) {
  if (!(epsilon > 0.0) || !(sigma_lambda_min > 0.0) || !(sigma_norm > 0.0) || !(integrand_norm > 0.0))
    throw ValidationError("measured-Rényi plan inputs must be positive", "domain");
  MeasuredRenyiPlan p;
  p.mode = LyapunovMode::Integral;
  p.form = form;
  p.eps1 = p.eps2 = p.eps3 = p.eps4 = epsilon / 4.0;
  const double lam = sigma_lambda_min;
  p.cutoff = std::max(std::log(integrand_norm / (2.0 * lam * p.eps1)) / (2.0 * lam), 1.0 / (2.0 * lam));
  p.slices = std::max(1, static_cast<int>(std::ceil(std::sqrt(sigma_norm * sigma_norm * std::pow(p.cutoff, 3) *
                                                              integrand_norm / (3.0 * p.eps2)))));
  p.weights.assign(p.slices + 1, 1.0);
  p.weights.front() = p.weights.back() = 0.5;
  const double eps0 = std::min(1.0, p.eps3 / (3.0 * p.cutoff * integrand_norm));
  for (int i = 0; i <= p.slices; ++i) p.exp_orders.push_back(exp_truncation_order(p.node(i) * sigma_norm, eps0));
  return p;
}

namespace {

void require_positive_definite(const DensityMatrix& sigma) {
  if (sigma.spectrum().values(0) <= sigma.support_threshold()) {
    std::ostringstream os;
    os << "σ is singular (smallest eigenvalue " << sigma.spectrum().values(0) << ")";
    throw NumericError(os.str(), "singular_sigma");
  }
}

Matrix lyapunov_exact(const Matrix& x, const DensityMatrix& sigma) {
  const auto& s = sigma.spectrum();
  Matrix xt = in_basis(x, s.vectors);
  for (Index i = 0; i < xt.rows(); ++i)
    for (Index j = 0; j < xt.cols(); ++j) {
      const double den = s.values(i) + s.values(j);
      if (den <= sigma.support_threshold()) {
        if (std::abs(xt(i, j)) > 1e-9) throw NumericError("Lyapunov equation is singular on the kernel of σ", "singular_sigma");
        xt(i, j) = 0.0;
      } else {
        xt(i, j) /= den;
      }
    }
  return s.vectors * xt * s.vectors.adjoint();
}

// Precomputed truncated exponentials at the trapezoid nodes.
struct IntegralPipeline {
  const MeasuredRenyiPlan& plan;
  const Spectrum& spec;
  std::vector<Matrix> exps;
  double sigma_norm;
  double eps0;

  IntegralPipeline(const MeasuredRenyiPlan& p, const DensityMatrix& sigma) : plan(p), spec(sigma.spectrum()) {
    require_positive_definite(sigma);
    if (plan.slices < 1 || plan.exp_orders.size() != static_cast<std::size_t>(plan.slices + 1))
      throw ValidationError("measured-Rényi plan has no quadrature nodes", "plan");
    sigma_norm = spec.values.cwiseAbs().maxCoeff();
    eps0 = std::min(1.0, plan.eps3 / (3.0 * plan.cutoff));
    for (int i = 0; i <= plan.slices; ++i) exps.push_back(truncated_exp(spec, plan.node(i), plan.exp_orders[i]));
  }

  Matrix exp_at(double s) const { return truncated_exp(spec, s, exp_truncation_order(s * sigma_norm, eps0)); }

  Matrix inverse(const Matrix& x) const {
    Matrix acc = Matrix::Zero(x.rows(), x.cols());
    for (int i = 0; i <= plan.slices; ++i) acc += plan.weights[i] * plan.step() * (exps[i] * x * exps[i]);
    return acc;
  }
};

}  // namespace

HermitianOperator lyapunov_inverse(const Matrix& x, const DensityMatrix& sigma, const MeasuredRenyiPlan& plan) {
  if (x.rows() != sigma.dim() || x.cols() != sigma.dim()) throw ValidationError("Lyapunov input dimension mismatch", "dimension_mismatch");
  if (plan.mode == LyapunovMode::ExactEigen) return HermitianOperator(lyapunov_exact(x, sigma), 1e-9);
  IntegralPipeline pipe(plan, sigma);
  return HermitianOperator(pipe.inverse(x), 1e-9);
}

namespace {

double measured_quantity(const Matrix& rho, const Matrix& omega, MeasuredForm form) {
  if (form == MeasuredForm::VariationalConsistent) return 2.0 * (rho * omega).trace().real();
  return (rho * omega).trace().real() - 0.25 * (rho * omega * omega).trace().real();
}

}  // namespace

double measured_renyi2(const DensityMatrix& rho, const DensityMatrix& sigma, const MeasuredRenyiPlan& plan) {
  if (rho.dim() != sigma.dim()) throw ValidationError("ρ and σ differ in dimension", "dimension_mismatch");
  require_kernel_containment(rho, sigma, "measured renyi");
  const Matrix omega = lyapunov_inverse(rho.matrix(), sigma, plan).matrix();
  const double q = measured_quantity(rho.matrix(), omega, plan.form);
  if (!(q > 0.0)) throw NumericError("measured-Rényi argument is not positive", "domain");
  return std::log(q);
}

EstimateReport measured_renyi2_derivative(const DensityMatrix& rho, const Matrix& d_rho, const DensityMatrix& sigma,
                                          const Matrix& d_sigma, const MeasuredRenyiPlan& plan,
                                          const EstimatorConfig& config) {
  if (rho.dim() != sigma.dim() || d_rho.rows() != rho.dim() || d_sigma.rows() != rho.dim())
    throw ValidationError("dimension mismatch", "dimension_mismatch");
  require_kernel_containment(rho, sigma, "measured renyi");
  const Matrix& r = rho.matrix();
  EstimateReport rep;
  rep.estimator = "measured_renyi2_derivative";
  double q = 0.0, dtr = 0.0, third = 0.0;
  auto anti = [](const Matrix& a, const Matrix& b) -> Matrix { return a * b + b * a; };

  if (plan.mode == LyapunovMode::ExactEigen) {
    const Matrix omega = lyapunov_exact(r, sigma);
    q = measured_quantity(r, omega, plan.form);
    dtr = 2.0 * (d_rho * omega).trace().real() - 2.0 * (omega * omega * d_sigma).trace().real();
    if (plan.form == MeasuredForm::ClosedForm) {
      const Matrix y = d_rho - anti(d_sigma, omega);
      third = (d_rho * omega * omega).trace().real() + (lyapunov_exact(anti(r, omega), sigma) * y).trace().real();
    }
  } else {
    IntegralPipeline pipe(plan, sigma);
    const Matrix omega = pipe.inverse(r);
    q = measured_quantity(r, omega, plan.form);
    const Rule t_rule = gauss_legendre(config.quadrature_nodes);
    double i1 = 0.0, i2 = 0.0;
    for (int i = 0; i <= plan.slices; ++i) {
      const double w = plan.weights[i] * plan.step();
      const double sv = plan.node(i);
      const Matrix& e = pipe.exps[i];
      i1 += w * (d_rho * e * r * e).trace().real();
      if (sv == 0.0) continue;
      const Matrix tail = r * e * r;
      double inner = 0.0;
      for (std::size_t t = 0; t < t_rule.nodes.size(); ++t) {
        const double tv = t_rule.nodes[t];
        inner += t_rule.weights[t] * (pipe.exp_at(sv * tv) * d_sigma * pipe.exp_at(sv * (1.0 - tv)) * tail).trace().real();
      }
      i2 += w * sv * inner;
    }
    dtr = 2.0 * i1 - 2.0 * i2;
    if (plan.form == MeasuredForm::ClosedForm) {
      const Matrix y = d_rho - anti(d_sigma, omega);
      third = (d_rho * omega * omega).trace().real() + (pipe.inverse(anti(r, omega)) * y).trace().real();
    }
    rep.budget["cutoff"] = plan.eps1;
    rep.budget["trapezoid"] = plan.eps2;
    rep.budget["exp_truncation"] = plan.eps3;
    rep.budget["t_quadrature"] = plan.eps4;
    rep.samples = plan.slices + 1;
  }
  if (!(q > 0.0)) throw NumericError("measured-Rényi argument is not positive", "domain");
  const double dq = plan.form == MeasuredForm::VariationalConsistent ? 2.0 * dtr : dtr - 0.25 * third;
  rep.value = dq / q;
  rep.repeat_values = {rep.value};
  return rep;
}

const char* to_string(TraceMode mode) {
  switch (mode) {
    case TraceMode::ExactTrace: return "exact-trace";
    case TraceMode::ShotSampled: return "shot-sampled";
    case TraceMode::AeModel: return "ae-model";
  }
  return "?";
}

const char* to_string(DuhamelMode mode) {
  switch (mode) {
    case DuhamelMode::Analytic: return "analytic";
    case DuhamelMode::GaussLegendre: return "gauss-legendre";
    case DuhamelMode::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

TraceMode parse_trace_mode(const std::string& s) {
  if (s == "exact-trace") return TraceMode::ExactTrace;
  if (s == "shot-sampled") return TraceMode::ShotSampled;
  if (s == "ae-model") return TraceMode::AeModel;
  throw ValidationError("unknown trace mode '" + s + "'", "mode");
}

DuhamelMode parse_duhamel_mode(const std::string& s) {
  if (s == "analytic") return DuhamelMode::Analytic;
  if (s == "gauss-legendre") return DuhamelMode::GaussLegendre;
  if (s == "monte-carlo") return DuhamelMode::MonteCarlo;
  throw ValidationError("unknown Duhamel mode '" + s + "'", "mode");
}

}  // namespace qiblab
