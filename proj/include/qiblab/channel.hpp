#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qiblab/linalg.hpp"

namespace qiblab {

// Tensor product of single-qubit Paulis; character i acts on qubit i, qubit 0 being
// the leftmost Kronecker factor. Accepts I, X, Y, Z.
Matrix pauli_string_matrix(const std::string& label);
HermitianOperator pauli_sum(const std::vector<std::pair<std::string, double>>& terms);

struct GeneratorExpansion {
  std::vector<std::string> labels;
  // b_j = Tr(P_j H)/d against the unitary Pauli strings P_j, so H = Σ_j b_j P_j.
  std::vector<cplx> coefficients;
  double one_norm = 0.0;
  Index dim = 0;

  // Coefficients against the Hilbert-Schmidt-normalized basis P_j/√d.
  std::vector<cplx> normalized_coefficients() const;
  Matrix reconstruct() const;
};

GeneratorExpansion pauli_expand(const HermitianOperator& h, double drop_below = 0.0);

// Φ(ρ) = Tr_{X0}(U (ρ ⊗ |0⟩⟨0|_anc) U†) with U = U_n ⋯ U_1, U_i = e^{-iα_i H_i}.
// The unitary acts on data ⊗ ancilla; the last `discard_dim` dimensions of that
// space form X0, the rest is the output X̃.
class ParameterizedChannel {
 public:
  ParameterizedChannel(std::vector<HermitianOperator> generators, std::vector<double> parameters, Index in_dim,
                       Index ancilla_dim = 1, Index discard_dim = 1);

  static ParameterizedChannel identity(Index dim);

  Index in_dim() const { return in_dim_; }
  Index ancilla_dim() const { return ancilla_dim_; }
  Index discard_dim() const { return discard_dim_; }
  Index total_dim() const { return in_dim_ * ancilla_dim_; }
  Index out_dim() const { return total_dim() / discard_dim_; }
  std::size_t parameter_count() const { return parameters_.size(); }

  const std::vector<HermitianOperator>& generators() const { return generators_; }
  const std::vector<double>& parameters() const { return parameters_; }
  ParameterizedChannel with_parameters(std::vector<double> parameters) const;
  ParameterizedChannel with_parameter(std::size_t k, double value) const;

  // e^{-iα_k H_k}
  const Matrix& factor(std::size_t k) const { return factors_[k]; }
  const Matrix& unitary() const { return unitary_; }
  // Isometry V = U (1 ⊗ |0⟩_anc) from data to data ⊗ ancilla.
  const Matrix& isometry() const { return isometry_; }

 private:
  std::vector<HermitianOperator> generators_;
  std::vector<double> parameters_;
  Index in_dim_, ancilla_dim_, discard_dim_;
  std::vector<Matrix> factors_;
  Matrix unitary_;
  Matrix isometry_;
};

DensityMatrix apply_channel(const ParameterizedChannel& channel, const DensityMatrix& rho);

// Applies 1_L ⊗ Φ ⊗ 1_R to an operator on L ⊗ X ⊗ R.
Matrix apply_on_subsystem(const ParameterizedChannel& channel, const Matrix& op, Index left_dim, Index right_dim);

// H̃_k with ∂_k U = -i H̃_k U, i.e. H̃_k = (U_n ⋯ U_{k+1}) H_k (U_n ⋯ U_{k+1})†.
// k is zero-based.
HermitianOperator effective_generator(const ParameterizedChannel& channel, std::size_t k);

// ∂_{α_k} Φ(ρ) = Tr_{X0}(-i[H̃_k, U ρ U†]); Hermitian and traceless.
HermitianOperator channel_state_derivative(const ParameterizedChannel& channel, const DensityMatrix& rho, std::size_t k);
// Same derivative for 1_L ⊗ Φ ⊗ 1_R acting on L ⊗ X ⊗ R.
Matrix derivative_on_subsystem(const ParameterizedChannel& channel, const Matrix& op, Index left_dim, Index right_dim,
                               std::size_t k);

}  // namespace qiblab
