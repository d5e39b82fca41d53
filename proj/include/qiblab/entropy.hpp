#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qiblab/channel.hpp"
#include "qiblab/linalg.hpp"
#include "qiblab/registers.hpp"

namespace qiblab {

double von_neumann_entropy(const DensityMatrix& rho);
// Tr(A log B) over the support of B. Throws SupportError if kernel(B) ⊄ kernel(A).
double cross_entropy(const DensityMatrix& a, const DensityMatrix& b);
double relative_entropy(const DensityMatrix& a, const DensityMatrix& b);
// Throws SupportError when some kernel vector of b carries weight of a.
void require_kernel_containment(const DensityMatrix& a, const DensityMatrix& b, const char* name = "state");

// S(A) + S(B) - S(AB) for ρ_AB on A ⊗ B.
double mutual_information(const DensityMatrix& rho_ab, Index dim_a, Index dim_b);
// D(ρ_AB ‖ ρ_A ⊗ ρ_B)
double mutual_information_divergence(const DensityMatrix& rho_ab, Index dim_a, Index dim_b);

double trace_norm(const Matrix& hermitian);

// Data ⊗ label state, channel on the data register, and trade-off β.
class QibInstance {
 public:
  QibInstance(DensityMatrix data_label, Index label_dim, ParameterizedChannel channel, double beta);
  QibInstance(const LabeledEnsemble& ensemble, ParameterizedChannel channel, double beta);

  const DensityMatrix& data_label() const { return data_label_; }
  const DensityMatrix& data() const { return data_; }
  const DensityMatrix& label() const { return label_; }
  const PurifiedState& purification() const { return purified_; }
  const ParameterizedChannel& channel() const { return channel_; }
  Index label_dim() const { return label_dim_; }
  Index data_dim() const { return data_.dim(); }
  double beta() const { return beta_; }

  QibInstance with_parameters(std::vector<double> parameters) const;
  QibInstance with_beta(double beta) const;

 private:
  DensityMatrix data_label_;
  Index label_dim_;
  ParameterizedChannel channel_;
  double beta_;
  DensityMatrix data_;
  DensityMatrix label_;
  PurifiedState purified_;
};

// Every state entering the objective at the current parameters.
struct QibStates {
  DensityMatrix ref_out;          // ρ_{RX̃}
  DensityMatrix ref;              // ρ_R
  DensityMatrix out;              // ρ_X̃
  DensityMatrix ref_times_out;    // ρ_R ⊗ ρ_X̃
  DensityMatrix out_label;        // ρ_{X̃Y}
  DensityMatrix label;            // ρ_Y
  DensityMatrix out_times_label;  // ρ_X̃ ⊗ ρ_Y
};

// ∂_{α_k} of the states above (ρ_R and ρ_Y are constant).
struct QibStateDerivatives {
  Matrix ref_out;
  Matrix out;
  Matrix ref_times_out;
  Matrix out_label;
  Matrix out_times_label;
};

QibStates qib_states(const QibInstance& instance);
QibStateDerivatives qib_state_derivatives(const QibInstance& instance, const QibStates& states, std::size_t k);

struct QibTerms {
  double memory = 0.0;    // I(R;X̃)
  double relevant = 0.0;  // I(X̃;Y)
  double loss = 0.0;      // β I(R;X̃) - (1-β) I(X̃;Y)
};

QibTerms qib_terms(const QibInstance& instance);
double qib_objective(const QibInstance& instance);

struct FdOptions {
  double step = 1e-4;
  bool richardson = false;
};

std::vector<double> qib_gradient_fd(const QibInstance& instance, FdOptions options = {});

// Central differences of an arbitrary parameter function.
std::vector<double> central_difference_gradient(
    const std::vector<double>& parameters, const std::function<double(const std::vector<double>&)>& f,
    FdOptions options = {});

}  // namespace qiblab
