#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace qiblab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPositivityTolerance = 1e-10;
inline constexpr double kSupportThreshold = 1e-10;

struct Spectrum {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

// Hermitian matrix, symmetrized on construction. Residuals above the tolerance
// (relative to the largest entry, floored at 1) are rejected.
class HermitianOperator {
 public:
  explicit HermitianOperator(const Matrix& m, double tolerance = kHermitianTolerance);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

  static HermitianOperator identity(Index dim);

 private:
  Matrix m_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix& m, double support_threshold = kSupportThreshold);
  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix maximally_mixed(Index dim);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double support_threshold() const { return threshold_; }
  const Spectrum& spectrum() const { return spectrum_; }
  HermitianOperator as_operator() const { return HermitianOperator(m_); }

 private:
  Matrix m_;
  double threshold_;
  Spectrum spectrum_;
};

struct SpectralProfile {
  std::vector<double> eigenvalues;  // descending
  double min_support_eigenvalue = 0.0;
  int rank = 0;
};

SpectralProfile spectral_profile(const DensityMatrix& rho);

Spectrum spectral_decompose(const HermitianOperator& h);
Spectrum spectral_decompose(const Matrix& hermitian);

// V f(Λ) V†, with eigenvalues |λ| <= threshold mapped to 0.
HermitianOperator apply_matrix_function(const HermitianOperator& a, const std::function<double(double)>& f,
                                        double support_threshold = kSupportThreshold);
Matrix apply_matrix_function(const Spectrum& s, const std::function<double(double)>& f,
                             double support_threshold = kSupportThreshold);

// e^{-iθH}
Matrix unitary_exp(const HermitianOperator& h, double theta);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix kron(std::span<const Matrix> factors);

// Trace over subsystems whose mask entry is false. Works on any square matrix.
Matrix partial_trace(const Matrix& m, std::span<const Index> dims, const std::vector<bool>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const Index> dims, const std::vector<bool>& keep);

// Reorder tensor factors: output factor i is input factor perm[i].
Matrix permute_subsystems(const Matrix& m, std::span<const Index> dims, std::span<const int> perm);

double max_entry_norm(const Matrix& m);
// Largest |eigenvalue| of a Hermitian matrix.
double operator_norm_hermitian(const Matrix& m);
double operator_norm(const Matrix& m);
// Sum of |eigenvalues| of a Hermitian matrix.
double trace_norm_hermitian(const Matrix& m);

bool is_unitary(const Matrix& u, double tolerance = 1e-10);

}  // namespace qiblab
