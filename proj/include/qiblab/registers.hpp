#pragma once

#include <vector>

#include "qiblab/channel.hpp"
#include "qiblab/linalg.hpp"

namespace qiblab {

struct RegisterLayout {
  Index dim_tag = 1;
  Index dim_data = 1;
  Index dim_label = 1;
  Index dim_ref = 1;  // mirrors dim_data
  Index dim_env = 1;

  void validate() const;
};

struct EnsembleRecord {
  Index tag = 0;
  Vector state;
  Index label = 0;
  double weight = 0.0;
};

// Classical-quantum training set Σ_j p_j |j⟩⟨j| ⊗ |ψ_j⟩⟨ψ_j| ⊗ |y(j)⟩⟨y(j)|.
class LabeledEnsemble {
 public:
  // Layout is inferred from the records when dims are left at zero.
  explicit LabeledEnsemble(std::vector<EnsembleRecord> records, Index dim_tag = 0, Index dim_label = 0);

  const std::vector<EnsembleRecord>& records() const { return records_; }
  const RegisterLayout& layout() const { return layout_; }

 private:
  std::vector<EnsembleRecord> records_;
  RegisterLayout layout_;
};

// ρ on tag ⊗ data ⊗ label.
DensityMatrix build_labeled_ensemble(const LabeledEnsemble& ensemble);
// ρ_XY = Tr_tag ρ, on data ⊗ label.
DensityMatrix data_label_state(const LabeledEnsemble& ensemble);

struct PurifiedState {
  Vector amplitudes;  // on R ⊗ X
  SpectralProfile source_spectrum;
  Index dim = 0;      // dim R = dim X

  DensityMatrix density() const { return DensityMatrix::pure(amplitudes); }
};

// Σ_i √λ_i |e_i⟩_R ⊗ |e_i⟩_X in the eigenbasis of ρ.
PurifiedState purify(const DensityMatrix& rho);

// ρ_{RX̃} = (1_R ⊗ Φ)(|ψ⟩⟨ψ|_{RX}).
DensityMatrix joint_input_output(const DensityMatrix& rho_x, const ParameterizedChannel& channel);
// ∂_{α_k} ρ_{RX̃}.
HermitianOperator joint_input_output_derivative(const DensityMatrix& rho_x, const ParameterizedChannel& channel,
                                                std::size_t k);

}  // namespace qiblab
