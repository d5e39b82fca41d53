#include "qiblab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qiblab/error.hpp"

namespace qiblab {

namespace {
constexpr double kPi = std::numbers::pi;
}

void SwapTestSpec::validate() const {
  if (states.empty()) throw ValidationError("swap test needs at least one register", "empty");
  const Index d = states.front().dim();
  for (const auto& s : states)
    if (s.dim() != d) throw ValidationError("swap-test registers differ in dimension", "dimension_mismatch");
  if (!unitaries.empty()) {
    if (unitaries.size() != states.size()) throw ValidationError("swap test needs one unitary per register", "dimension_mismatch");
    for (const auto& u : unitaries) {
      if (u.rows() != d || u.cols() != d) throw ValidationError("swap-test unitary has the wrong dimension", "dimension_mismatch");
      if (!is_unitary(u)) throw ValidationError("swap-test controlled operation is not unitary", "not_unitary");
    }
  }
}

cplx trace_product(const SwapTestSpec& spec) {
  spec.validate();
  auto factor = [&](std::size_t i) -> Matrix {
    return spec.unitaries.empty() ? spec.states[i].matrix() : Matrix(spec.unitaries[i] * spec.states[i].matrix());
  };
  if (!spec.cyclic) {
    cplx t = 1.0;
    for (std::size_t i = 0; i < spec.states.size(); ++i) t *= factor(i).trace();
    return t;
  }
  Matrix acc = factor(0);
  for (std::size_t i = 1; i < spec.states.size(); ++i) acc = acc * factor(i);
  return acc.trace();
}

double swap_test_probability(const SwapTestSpec& spec, bool imaginary) {
  const cplx t = trace_product(spec);
  return std::clamp((1.0 + (imaginary ? t.imag() : t.real())) / 2.0, 0.0, 1.0);
}

double swap_test_circuit_probability(const SwapTestSpec& spec, bool imaginary) {
  spec.validate();
  const std::size_t n = spec.states.size();
  const Index d = spec.states.front().dim();
  std::vector<Matrix> us, rhos;
  for (std::size_t i = 0; i < n; ++i) {
    us.push_back(spec.unitaries.empty() ? Matrix(Matrix::Identity(d, d)) : spec.unitaries[i]);
    rhos.push_back(spec.states[i].matrix());
  }
  const Matrix local = kron(us);
  const Index big = local.rows();
  Matrix w = local;
  if (spec.cyclic) {
    Matrix shift = Matrix::Zero(big, big);
    std::vector<Index> digits(n);
    for (Index k = 0; k < big; ++k) {
      Index rem = k;
      for (std::size_t i = n; i-- > 0;) {
        digits[i] = rem % d;
        rem /= d;
      }
      Index j = 0;
      for (std::size_t i = 0; i < n; ++i) j = j * d + digits[(i + 1) % n];
      shift(j, k) = 1.0;
    }
    w = shift * local;
  }
  const Index total = 2 * big;
  Matrix had(2, 2);
  had << 1.0, 1.0, 1.0, -1.0;
  had /= std::sqrt(2.0);
  const Matrix h_full = kron(had, Matrix::Identity(big, big));
  Matrix cw = Matrix::Identity(total, total);
  cw.bottomRightCorner(big, big) = w;
  Matrix phase = Matrix::Identity(total, total);
  if (imaginary) phase.bottomRightCorner(big, big) *= cplx(0, -1);
  Matrix anc0 = Matrix::Zero(2, 2);
  anc0(0, 0) = 1.0;
  const Matrix circuit = h_full * phase * cw * h_full;
  const Matrix rho = kron(anc0, kron(rhos));
  const Matrix out = circuit * rho * circuit.adjoint();
  return out.topLeftCorner(big, big).trace().real();
}

double sample_swap_test(double p0, long long shots, Rng& rng) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ValidationError("p0 must lie in [0, 1]", "domain");
  if (shots < 1) throw ValidationError("shots must be positive", "shots");
  std::binomial_distribution<long long> b(shots, p0);
  return 2.0 * static_cast<double>(b(rng)) / static_cast<double>(shots) - 1.0;
}

void AEConfig::validate() const {
  if (grid < 1) throw ValidationError("amplitude-estimation grid M must be >= 1", "ae_config");
  if (k < 2) throw ValidationError("amplitude-estimation k must be >= 2", "ae_config");
  if (repeats < 1) throw ValidationError("amplitude-estimation repeats must be >= 1", "ae_config");
}

double AEConfig::error_bound(double p) const {
  const double m = grid;
  return 2.0 * kPi * k * std::sqrt(std::max(0.0, p * (1.0 - p))) / m + k * k * kPi * kPi / (m * m);
}

double AEConfig::success_probability() const { return 1.0 - 1.0 / (2.0 * (k - 1)); }

double amplitude_estimate(double p, const AEConfig& config, Rng& rng) {
  config.validate();
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probability must lie in [0, 1]", "domain");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < config.success_probability()) {
    const double b = config.error_bound(p);
    const double lo = std::max(0.0, p - b), hi = std::min(1.0, p + b);
    return lo + (hi - lo) * u(rng);
  }
  return u(rng);
}

double median_boost(std::vector<double> estimates) {
  if (estimates.empty()) throw ValidationError("median of an empty list", "empty");
  const std::size_t mid = (estimates.size() - 1) / 2;
  std::nth_element(estimates.begin(), estimates.begin() + static_cast<std::ptrdiff_t>(mid), estimates.end());
  return estimates[mid];
}

int ae_grid_for(double trace_error) {
  if (!(trace_error > 0.0 && trace_error < 1.0)) throw ValidationError("ε_T must lie in (0, 1)", "domain");
  return std::max(10, static_cast<int>(std::ceil(12.0 * kPi / trace_error)));
}

int ae_repeats_for(double failure_probability) {
  if (!(failure_probability > 0.0 && failure_probability < 1.0)) throw ValidationError("δ must lie in (0, 1)", "domain");
  int n = std::max(1, static_cast<int>(std::ceil(24.0 * std::log(1.0 / failure_probability))));
  return n % 2 == 0 ? n + 1 : n;
}

long long shots_for(double trace_error, double failure_probability) {
  if (!(trace_error > 0.0 && trace_error < 1.0)) throw ValidationError("ε_T must lie in (0, 1)", "domain");
  if (!(failure_probability > 0.0 && failure_probability < 1.0)) throw ValidationError("δ must lie in (0, 1)", "domain");
  return static_cast<long long>(std::ceil(2.0 * std::log(2.0 / failure_probability) / (trace_error * trace_error)));
}

double estimate_encoded_value(double exact, const TraceEstimateOptions& options, Rng& rng) {
  const double p0 = std::clamp((1.0 + exact) / 2.0, 0.0, 1.0);
  switch (options.mode) {
    case TraceMode::ExactTrace:
      return exact;
    case TraceMode::ShotSampled: {
      const long long shots = options.shots > 0 ? options.shots : shots_for(options.trace_error, options.failure_probability);
      return sample_swap_test(p0, shots, rng);
    }
    case TraceMode::AeModel: {
      AEConfig cfg;
      cfg.grid = ae_grid_for(options.trace_error);
      cfg.repeats = ae_repeats_for(options.failure_probability);
      std::vector<double> draws(cfg.repeats);
      for (auto& d : draws) d = amplitude_estimate(p0, cfg, rng);
      return 2.0 * median_boost(std::move(draws)) - 1.0;
    }
  }
  return exact;
}

double estimate_trace_product(const SwapTestSpec& spec, const TraceEstimateOptions& options, Rng& rng, TracePart part) {
  const cplx t = trace_product(spec);
  return estimate_encoded_value(part == TracePart::Real ? t.real() : t.imag(), options, rng);
}

}  // namespace qiblab
