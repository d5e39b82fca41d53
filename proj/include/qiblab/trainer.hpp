#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qiblab/entropy.hpp"
#include "qiblab/estimators.hpp"

namespace qiblab {

enum class ObjectiveKind { QibExact, QibSeries, Renyi2Upper };
enum class GradientSource { FiniteDifference, Series, Renyi2 };

struct TrainConfig {
  ObjectiveKind objective = ObjectiveKind::QibExact;
  GradientSource gradient = GradientSource::FiniteDifference;
  double learning_rate = 1.0;
  int max_steps = 100;
  double grad_tolerance = 1e-6;
  // β for step t is betas[min(t, size-1)]; empty keeps the instance's β.
  std::vector<double> betas;
  bool line_search = true;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
  FdOptions fd{};
  EstimatorConfig estimator{};
  // Needed by the series objective and gradient.
  std::shared_ptr<const ApproximationPlan> plan;
  std::optional<ChebyshevInversePlan> chebyshev;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrajectoryRecord {
  int step = 0;
  std::vector<double> alpha;
  double beta = 0.0;
  double loss = 0.0;      // the configured objective
  double memory = 0.0;    // I(R;X̃)
  double relevant = 0.0;  // I(X̃;Y)
  double grad_norm = 0.0;
  double step_size = 0.0;  // accepted step taken after this record (0 on the last)
  double wall_time = 0.0;  // seconds since start; kept out of the written files
};

struct InfoPlaneTrajectory {
  std::vector<TrajectoryRecord> records;
  std::string status;  // converged | max_steps | line_search_failed
};

struct InfoPlanePoint {
  double memory = 0.0;
  double relevant = 0.0;
};

InfoPlanePoint info_plane_point(const QibInstance& instance);

double evaluate_objective(const QibInstance& instance, const TrainConfig& config);
std::vector<double> objective_gradient(const QibInstance& instance, const TrainConfig& config);

InfoPlaneTrajectory train(const QibInstance& instance, const TrainConfig& config);

void write_trajectory_csv(const InfoPlaneTrajectory& trajectory, std::ostream& out);

const char* to_string(ObjectiveKind kind);
const char* to_string(GradientSource source);
ObjectiveKind parse_objective_kind(const std::string& s);
GradientSource parse_gradient_source(const std::string& s);

}  // namespace qiblab
