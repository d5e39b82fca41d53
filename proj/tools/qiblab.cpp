// qiblab command-line driver. Every command prints a JSON report on stdout and
// exits 0 / 2 (validation) / 3 (numeric precondition) / 4 (I/O).

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "qiblab/entropy.hpp"
#include "qiblab/estimators.hpp"
#include "qiblab/io.hpp"
#include "qiblab/random.hpp"
#include "qiblab/sampling.hpp"
#include "qiblab/series.hpp"
#include "qiblab/trainer.hpp"

using namespace qiblab;

namespace {

struct Options {
  std::string ensemble;
  std::string channel;
  double beta = 0.5;
  double eps = 1e-3;
  double lambda_min = 0.0;  // 0 derives the window from the instance
  double deriv_norm = 1.0;
  std::string mode = "exact-trace";
  std::string duhamel;  // empty: analytic for exact traces, Monte-Carlo otherwise
  long long samples = 1000;
  int repeats = 1;
  double trace_error = 0.02;
  double failure_prob = 0.05;
  long long shots = 0;
  std::uint64_t seed = 0;
  std::string out;
  // approx-check
  int points = 201;
  int trials = 20;
  int swap_trials = 500;
  // swap-bench
  int registers = 2;
  int dim = 2;
  // train
  std::string objective = "qib-exact";
  std::string gradient = "fd";
  int steps = 100;
  double lr = 1.0;
  double tol = 1e-6;
  std::string beta_schedule;
  bool random_init = false;
  std::string json_out;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

QibInstance load_instance(const Options& o) {
  if (o.ensemble.empty() || o.channel.empty()) throw ValidationError("--ensemble and --channel are required", "config");
  if (!(o.beta >= 0.0 && o.beta <= 1.0)) throw ValidationError("--beta must lie in [0, 1]", "beta");
  const LabeledEnsemble ens = ensemble_from_json(read_json_file(o.ensemble));
  ParameterizedChannel ch = channel_from_json(read_json_file(o.channel));
  if (ch.in_dim() != ens.layout().dim_data)
    throw ValidationError("channel input dimension " + std::to_string(ch.in_dim()) + " differs from ensemble data dimension " +
                              std::to_string(ens.layout().dim_data),
                          "dimension_mismatch");
  return QibInstance(ens, std::move(ch), o.beta);
}

EstimatorConfig estimator_config(const Options& o) {
  EstimatorConfig c;
  c.mode = parse_trace_mode(o.mode);
  c.duhamel = !o.duhamel.empty()                ? parse_duhamel_mode(o.duhamel)
               : c.mode == TraceMode::ExactTrace ? DuhamelMode::Analytic
                                                 : DuhamelMode::MonteCarlo;
  c.duhamel_samples = o.samples;
  c.boost_repeats = o.repeats;
  c.trace_error = o.trace_error;
  c.failure_probability = o.failure_prob;
  c.shots = o.shots;
  c.seed = o.seed;
  c.validate();
  return c;
}

// Window floor: the requested value, else the instance's smallest support
// eigenvalue rounded down to two significant digits (capped at 1/2).
double window_floor(const Options& o, const QibInstance& inst) {
  if (o.lambda_min > 0.0) return o.lambda_min;
  const double f = std::min(0.5, qib_spectral_floor(inst));
  if (!(f > 0.0)) throw NumericError("instance has no positive spectral floor", "window_violation");
  const double scale = std::pow(10.0, std::floor(std::log10(f)) - 1);
  return std::floor(f / scale) * scale;
}

int cmd_evaluate(const Options& o) {
  const QibInstance inst = load_instance(o);
  const QibTerms t = qib_terms(inst);
  const QibBounds b = qib_bounds(inst);
  Json j;
  j["command"] = "evaluate";
  j["beta"] = inst.beta();
  j["loss"] = t.loss;
  j["I_RX"] = t.memory;
  j["I_XY"] = t.relevant;
  j["lower_bound"] = b.lower;
  j["upper_bound"] = b.upper;
  j["spectral_floor"] = qib_spectral_floor(inst);
  if (!o.out.empty()) write_text_file(o.out, j.dump(2) + "\n");
  emit(j);
  return 0;
}

int cmd_params(const Options& o) {
  const PlanBounds p = plan_parameters(o.eps, o.lambda_min, o.deriv_norm);
  Json j;
  j["command"] = "params";
  j.update(to_json(p));
  if (!o.out.empty()) write_text_file(o.out, j.dump(2) + "\n");
  emit(j);
  return 0;
}

int cmd_grad(const Options& o) {
  const QibInstance inst = load_instance(o);
  const EstimatorConfig cfg = estimator_config(o);
  const double lam = window_floor(o, inst);
  const PlanBounds pb = plan_parameters(o.eps, lam, o.deriv_norm);
  const ApproximationPlan plan = ApproximationPlan::from_bounds(pb);
  const std::vector<double> fd = qib_gradient_fd(inst, {1e-4, true});
  const std::vector<double> fd_upper = central_difference_gradient(
      inst.channel().parameters(), [&](const std::vector<double>& a) { return qib_bounds(inst.with_parameters(a)).upper; },
      {1e-4, true});

  Json comps = Json::array();
  std::ostringstream csv;
  csv << "# qiblab-grad v1\nk,fd,series,abs_diff,series_claimed_stddev,series_budget,renyi2_upper,renyi2_upper_fd\n";
  for (std::size_t k = 0; k < fd.size(); ++k) {
    const EstimateReport s = qib_gradient_series(inst, plan, cfg, k);
    const double r2 = renyi2_bound_gradient(inst, k).value;
    double budget = 0.0;
    for (const auto& [name, v] : s.budget) budget += v;
    Json c;
    c["k"] = k;
    c["fd"] = fd[k];
    c["series"] = s.value;
    c["abs_diff"] = std::abs(s.value - fd[k]);
    c["series_claimed_stddev"] = s.claimed_stddev;
    c["series_budget"] = budget;
    c["renyi2_upper"] = r2;
    c["renyi2_upper_fd"] = fd_upper[k];
    comps.push_back(c);
    csv << k << ',' << fmt(fd[k]) << ',' << fmt(s.value) << ',' << fmt(std::abs(s.value - fd[k])) << ','
        << fmt(s.claimed_stddev) << ',' << fmt(budget) << ',' << fmt(r2) << ',' << fmt(fd_upper[k]) << '\n';
  }
  Json j;
  j["command"] = "grad";
  j["beta"] = inst.beta();
  j["mode"] = to_string(cfg.mode);
  j["duhamel"] = to_string(cfg.duhamel);
  j["plan"] = to_json(pb);
  j["components"] = comps;
  if (!o.out.empty()) write_text_file(o.out, csv.str());
  emit(j);
  return 0;
}

int cmd_approx_check(const Options& o) {
  if (!(o.lambda_min > 0.0)) throw ValidationError("approx-check needs --lambda-min > 0", "domain");
  if (o.points < 2 || o.trials < 0) throw ValidationError("--points must be >= 2 and --trials >= 0", "config");
  const PlanBounds pb = plan_parameters(o.eps, o.lambda_min, o.deriv_norm);
  const ApproximationPlan plan = ApproximationPlan::from_bounds(pb);
  const auto& f = plan.series();
  std::ostringstream csv;
  csv << "# qiblab-approx v1\nlambda,series,log,abs_error,derivative_abs_error\n";
  double max_err = 0.0, max_derr = 0.0;
  for (int i = 0; i < o.points; ++i) {
    const double x = o.lambda_min + (1.0 - o.lambda_min) * i / (o.points - 1);
    const double v = f.eval(x).real();
    const double e = std::abs(v - std::log(x));
    const double de = std::abs(f.derivative(x).real() - 1.0 / x);
    max_err = std::max(max_err, e);
    max_derr = std::max(max_derr, de);
    csv << fmt(x) << ',' << fmt(v) << ',' << fmt(std::log(x)) << ',' << fmt(e) << ',' << fmt(de) << '\n';
  }
  // Operator check on random 4×4 states with support spectrum inside the window.
  Rng rng(o.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double max_op = 0.0;
  const int trials = 4.0 * o.lambda_min < 1.0 ? o.trials : 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> spec(4);
    double total = 0.0;
    for (double& s : spec) total += (s = u(rng));
    for (double& s : spec) s = o.lambda_min + s / total * (1.0 - 4.0 * o.lambda_min);
    const DensityMatrix sigma = random_density_with_spectrum(spec, rng);
    const Matrix exact = apply_matrix_function(sigma.spectrum(), [](double x) { return std::log(x); });
    max_op = std::max(max_op, operator_norm(approx_log_operator(sigma, plan).matrix() - exact));
  }
  Json j;
  j["command"] = "approx-check";
  j["plan"] = to_json(pb);
  j["max_scalar_error"] = max_err;
  j["max_derivative_error"] = max_derr;
  j["max_operator_error"] = max_op;
  j["operator_trials"] = trials;
  j["within_eps"] = max_err <= o.eps && max_op <= o.eps;
  if (!o.out.empty()) write_text_file(o.out, csv.str());
  emit(j);
  return 0;
}

int cmd_swap_bench(const Options& o) {
  if (o.registers < 1 || o.registers > 3 || o.dim < 2 || o.dim > 4 || o.swap_trials < 1)
    throw ValidationError("swap-bench needs 1-3 registers of dimension 2-4 and trials >= 1", "config");
  TraceEstimateOptions opt{parse_trace_mode(o.mode), o.trace_error, o.failure_prob, o.shots};
  Rng rng(o.seed);
  int failures = 0;
  double max_dev = 0.0;
  for (int t = 0; t < o.swap_trials; ++t) {
    SwapTestSpec spec;
    for (int r = 0; r < o.registers; ++r) {
      spec.states.push_back(DensityMatrix::pure(random_state_vector(o.dim, rng)));
      spec.unitaries.push_back(random_unitary(o.dim, rng));
    }
    const cplx exact = trace_product(spec);
    max_dev = std::max(max_dev, std::abs(swap_test_circuit_probability(spec) - (1.0 + exact.real()) / 2.0));
    Rng stream(derive_seed(o.seed, static_cast<std::uint64_t>(t)));
    const double est = estimate_trace_product(spec, opt, stream);
    if (std::abs(est - exact.real()) > o.trace_error) ++failures;
  }
  Json j;
  j["command"] = "swap-bench";
  j["mode"] = o.mode;
  j["registers"] = o.registers;
  j["dim"] = o.dim;
  j["trials"] = o.swap_trials;
  j["trace_error"] = o.trace_error;
  j["failure_probability"] = o.failure_prob;
  j["failures"] = failures;
  j["failure_rate"] = static_cast<double>(failures) / o.swap_trials;
  j["coverage_met"] = static_cast<double>(failures) / o.swap_trials <= o.failure_prob;
  j["p0_circuit_max_deviation"] = max_dev;
  if (opt.mode == TraceMode::AeModel) {
    j["ae_grid"] = ae_grid_for(o.trace_error);
    j["ae_repeats"] = ae_repeats_for(o.failure_prob);
  } else if (opt.mode == TraceMode::ShotSampled) {
    j["shots"] = o.shots > 0 ? o.shots : shots_for(o.trace_error, o.failure_prob);
  }
  if (!o.out.empty()) write_text_file(o.out, j.dump(2) + "\n");
  emit(j);
  return 0;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse β schedule entry '" + item + "'", "beta");
    }
  }
  return v;
}

int cmd_train(const Options& o) {
  QibInstance inst = load_instance(o);
  if (o.random_init) {
    Rng rng(derive_seed(o.seed, 0x1717));
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    std::vector<double> a(inst.channel().parameter_count());
    for (double& x : a) x = u(rng);
    inst = inst.with_parameters(a);
  }
  TrainConfig tc;
  tc.objective = parse_objective_kind(o.objective);
  tc.gradient = parse_gradient_source(o.gradient);
  tc.learning_rate = o.lr;
  tc.max_steps = o.steps;
  tc.grad_tolerance = o.tol;
  if (!o.beta_schedule.empty()) tc.betas = parse_list(o.beta_schedule);
  tc.estimator = estimator_config(o);
  tc.seed = o.seed;
  if (tc.objective == ObjectiveKind::QibSeries || tc.gradient == GradientSource::Series)
    tc.plan = std::make_shared<const ApproximationPlan>(
        ApproximationPlan::from_bounds(plan_parameters(o.eps, window_floor(o, inst), o.deriv_norm)));
  const InfoPlaneTrajectory traj = train(inst, tc);
  std::ostringstream csv;
  write_trajectory_csv(traj, csv);
  if (!o.out.empty()) write_text_file(o.out, csv.str());
  if (!o.json_out.empty()) write_text_file(o.json_out, to_json(traj).dump(2) + "\n");
  const auto& first = traj.records.front();
  const auto& last = traj.records.back();
  Json j;
  j["command"] = "train";
  j["objective"] = to_string(tc.objective);
  j["gradient"] = to_string(tc.gradient);
  j["status"] = traj.status;
  j["steps"] = traj.records.size() - 1;
  j["initial"] = {{"loss", first.loss}, {"I_RX", first.memory}, {"I_XY", first.relevant}};
  j["final"] = {{"loss", last.loss}, {"I_RX", last.memory}, {"I_XY", last.relevant}, {"alpha", last.alpha}};
  emit(j);
  return 0;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::NumericPrecondition: return 3;
    case ErrorKind::Io: return 4;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qiblab: quantum information bottleneck laboratory"};
  app.require_subcommand(1);
  Options o;

  auto add_instance = [&](CLI::App* c) {
    c->add_option("--ensemble", o.ensemble, "labeled ensemble JSON");
    c->add_option("--channel", o.channel, "parameterized channel JSON");
    c->add_option("--beta", o.beta, "trade-off β in [0, 1]");
  };
  auto add_plan = [&](CLI::App* c) {
    c->add_option("--eps", o.eps, "target accuracy ε");
    c->add_option("--lambda-min", o.lambda_min, "spectral window floor (0 derives it from the instance)");
    c->add_option("--deriv-norm", o.deriv_norm, "bound on ‖∂σ‖ used by the planner");
  };
  auto add_estimator = [&](CLI::App* c) {
    c->add_option("--mode", o.mode, "exact-trace | shot-sampled | ae-model");
    c->add_option("--duhamel", o.duhamel, "analytic | gauss-legendre | monte-carlo (default: analytic for exact traces)");
    c->add_option("--samples", o.samples, "Duhamel Monte-Carlo samples n");
    c->add_option("--repeats", o.repeats, "median repeats N_c (odd)");
    c->add_option("--trace-error", o.trace_error, "per-trace error ε_T");
    c->add_option("--failure-prob", o.failure_prob, "per-trace failure probability δ");
    c->add_option("--shots", o.shots, "shots per trace (0 derives from ε_T, δ)");
  };
  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "master RNG seed");
    c->add_option("--out", o.out, "output file");
  };

  auto* evaluate = app.add_subcommand("evaluate", "exact objective, Rényi-2 bounds and information-plane point");
  add_instance(evaluate);
  add_common(evaluate);

  auto* params = app.add_subcommand("params", "K, L, M, n from the sufficient-parameter bounds");
  add_plan(params);
  add_common(params);
  params->get_option("--lambda-min")->required();

  auto* grad = app.add_subcommand("grad", "series, Rényi-2 and finite-difference gradients side by side");
  add_instance(grad);
  add_plan(grad);
  add_estimator(grad);
  add_common(grad);

  auto* approx = app.add_subcommand("approx-check", "series logarithm against ln on a grid and on random states");
  add_plan(approx);
  add_common(approx);
  approx->add_option("--points", o.points, "grid points on [λ_min, 1]");
  approx->add_option("--trials", o.trials, "random 4×4 states");

  auto* swap = app.add_subcommand("swap-bench", "coverage of swap-test trace estimates");
  add_common(swap);
  swap->add_option("--mode", o.mode, "exact-trace | shot-sampled | ae-model");
  swap->add_option("--trace-error", o.trace_error, "target error ε_T");
  swap->add_option("--failure-prob", o.failure_prob, "target failure probability δ");
  swap->add_option("--shots", o.shots, "shots per trace (0 derives from ε_T, δ)");
  swap->add_option("--trials", o.swap_trials, "number of random instances");
  swap->add_option("--registers", o.registers, "registers per trace product (1-3)");
  swap->add_option("--dim", o.dim, "register dimension (2-4)");

  auto* trainc = app.add_subcommand("train", "gradient descent with backtracking; trajectory CSV");
  add_instance(trainc);
  add_plan(trainc);
  add_estimator(trainc);
  add_common(trainc);
  trainc->add_option("--objective", o.objective, "qib-exact | qib-series | renyi2-upper");
  trainc->add_option("--gradient", o.gradient, "fd | series | renyi2");
  trainc->add_option("--steps", o.steps, "maximum steps");
  trainc->add_option("--lr", o.lr, "initial step size");
  trainc->add_option("--tol", o.tol, "gradient-norm tolerance");
  trainc->add_option("--beta-schedule", o.beta_schedule, "comma-separated β per step (last value repeats)");
  trainc->add_flag("--random-init", o.random_init, "draw initial parameters uniformly in [-π, π] from the seed");
  trainc->add_option("--json", o.json_out, "trajectory JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit(error_to_json(ValidationError(e.what(), "usage")));
    return 2;
  }

  try {
    if (*evaluate) return cmd_evaluate(o);
    if (*params) return cmd_params(o);
    if (*grad) return cmd_grad(o);
    if (*approx) return cmd_approx_check(o);
    if (*swap) return cmd_swap_bench(o);
    if (*trainc) return cmd_train(o);
  } catch (const Error& e) {
    emit(error_to_json(e));
    return exit_code(e);
  } catch (const std::exception& e) {
    emit(error_to_json(NumericError(e.what(), "internal")));
    return 3;
  }
  return 2;
}
