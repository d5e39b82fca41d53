#include "qiblab/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "qiblab/error.hpp"
#include "qiblab/parallel.hpp"

namespace qiblab {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double beta_at(const TrainConfig& config, const QibInstance& instance, int step) {
  if (config.betas.empty()) return instance.beta();
  return config.betas[std::min<std::size_t>(static_cast<std::size_t>(step), config.betas.size() - 1)];
}

[[noreturn]] void rethrow_at_step(const Error& e, int step) {
  throw Error(e.kind(), e.code(), "step " + std::to_string(step) + ": " + e.what());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive", "train_config");
  if (max_steps < 1) throw ValidationError("max steps must be >= 1", "train_config");
  if (!(grad_tolerance >= 0.0)) throw ValidationError("gradient tolerance must be non-negative", "train_config");
  if (!(armijo_c > 0.0 && armijo_c < 1.0) || !(shrink > 0.0 && shrink < 1.0) || max_backtracks < 0)
    throw ValidationError("invalid line-search constants", "train_config");
  for (double b : betas)
    if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("β schedule entries must lie in [0, 1]", "beta");
  const bool needs_plan = objective == ObjectiveKind::QibSeries || gradient == GradientSource::Series;
  if (needs_plan && !plan) throw ValidationError("series objective or gradient needs an approximation plan", "train_config");
  estimator.validate();
}

InfoPlanePoint info_plane_point(const QibInstance& instance) {
  const QibTerms t = qib_terms(instance);
  return {t.memory, t.relevant};
}

double evaluate_objective(const QibInstance& instance, const TrainConfig& config) {
  switch (config.objective) {
    case ObjectiveKind::QibExact: return qib_objective(instance);
    case ObjectiveKind::QibSeries: {
      EstimatorConfig ec = config.estimator;
      ec.mode = TraceMode::ExactTrace;
      return qib_objective_series(instance, *config.plan, ec).value;
    }
    case ObjectiveKind::Renyi2Upper: return qib_bounds(instance).upper;
  }
  return 0.0;
}

std::vector<double> objective_gradient(const QibInstance& instance, const TrainConfig& config) {
  const std::size_t n = instance.channel().parameter_count();
  std::vector<double> grad(n);
  switch (config.gradient) {
    case GradientSource::FiniteDifference:
      return central_difference_gradient(
          instance.channel().parameters(),
          [&](const std::vector<double>& a) { return evaluate_objective(instance.with_parameters(a), config); },
          config.fd);
    case GradientSource::Series:
      parallel_for(n, [&](std::size_t k) { grad[k] = qib_gradient_series(instance, *config.plan, config.estimator, k).value; });
      return grad;
    case GradientSource::Renyi2:
      parallel_for(n, [&](std::size_t k) { grad[k] = renyi2_bound_gradient(instance, k, config.chebyshev).value; });
      return grad;
  }
  return grad;
}

InfoPlaneTrajectory train(const QibInstance& instance, const TrainConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  InfoPlaneTrajectory traj;
  QibInstance current = instance.with_beta(beta_at(config, instance, 0));
  std::vector<double> alpha = current.channel().parameters();
  double loss = 0.0;

  for (int step = 0;; ++step) {
    TrajectoryRecord rec;
    rec.step = step;
    rec.alpha = alpha;
    rec.beta = current.beta();
    std::vector<double> grad;
    try {
      loss = evaluate_objective(current, config);
      const InfoPlanePoint ip = info_plane_point(current);
      rec.memory = ip.memory;
      rec.relevant = ip.relevant;
      TrainConfig step_config = config;
      step_config.estimator.seed = derive_seed(config.seed, static_cast<std::uint64_t>(step));
      grad = objective_gradient(current, step_config);
    } catch (const Error& e) {
      rethrow_at_step(e, step);
    }
    rec.loss = loss;
    rec.grad_norm = norm2(grad);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    traj.records.push_back(rec);

    if (rec.grad_norm <= config.grad_tolerance) {
      traj.status = "converged";
      break;
    }
    if (step >= config.max_steps) {
      traj.status = "max_steps";
      break;
    }

    // Armijo backtracking on the objective at the next step's β.
    const QibInstance target = current.with_beta(beta_at(config, instance, step + 1));
    const double base = config.betas.empty() ? loss : evaluate_objective(target, config);
    const double g2 = rec.grad_norm * rec.grad_norm;
    double t = config.learning_rate;
    bool accepted = false;
    std::vector<double> trial(alpha.size());
    for (int bt = 0; bt <= config.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < alpha.size(); ++i) trial[i] = alpha[i] - t * grad[i];
      if (!config.line_search) {
        accepted = true;
        break;
      }
      double value;
      try {
        value = evaluate_objective(target.with_parameters(trial), config);
      } catch (const Error& e) {
        rethrow_at_step(e, step);
      }
      if (value <= base - config.armijo_c * t * g2) {
        accepted = true;
        break;
      }
      t *= config.shrink;
    }
    if (!accepted) {
      traj.status = "line_search_failed";
      break;
    }
    traj.records.back().step_size = t;
    alpha = trial;
    current = target.with_parameters(alpha);
  }
  return traj;
}

void write_trajectory_csv(const InfoPlaneTrajectory& trajectory, std::ostream& out) {
  const std::size_t n = trajectory.records.empty() ? 0 : trajectory.records.front().alpha.size();
  out << "# qiblab-trajectory v1 status=" << trajectory.status << "\n";
  out << "step";
  for (std::size_t i = 0; i < n; ++i) out << ",alpha" << i;
  out << ",beta,loss,I_RX,I_XY,gradnorm,step_size\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& r : trajectory.records) {
    out << r.step;
    for (double a : r.alpha) out << ',' << num(a);
    out << ',' << num(r.beta);
    out << ',' << num(r.loss);
    out << ',' << num(r.memory);
    out << ',' << num(r.relevant);
    out << ',' << num(r.grad_norm);
    out << ',' << num(r.step_size) << '\n';
  }
}

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::QibExact: return "qib-exact";
    case ObjectiveKind::QibSeries: return "qib-series";
    case ObjectiveKind::Renyi2Upper: return "renyi2-upper";
  }
  return "?";
}

const char* to_string(GradientSource source) {
  switch (source) {
    case GradientSource::FiniteDifference: return "fd";
    case GradientSource::Series: return "series";
    case GradientSource::Renyi2: return "renyi2";
  }
  return "?";
}

ObjectiveKind parse_objective_kind(const std::string& s) {
  if (s == "qib-exact") return ObjectiveKind::QibExact;
  if (s == "qib-series") return ObjectiveKind::QibSeries;
  if (s == "renyi2-upper") return ObjectiveKind::Renyi2Upper;
  throw ValidationError("unknown objective '" + s + "'", "objective");
}

GradientSource parse_gradient_source(const std::string& s) {
  if (s == "fd") return GradientSource::FiniteDifference;
  if (s == "series") return GradientSource::Series;
  if (s == "renyi2") return GradientSource::Renyi2;
  throw ValidationError("unknown gradient source '" + s + "'", "gradient");
}

}  // namespace qiblab
