#include "qiblab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qiblab/error.hpp"

namespace qiblab {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + " has non-finite entries", "non_finite");
}

Index product(std::span<const Index> dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

}  // namespace

HermitianOperator::HermitianOperator(const Matrix& m, double tolerance) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("Hermitian operator must be square and nonempty", "dimension_mismatch");
  require_finite(m, "Hermitian operator");
  const double scale = std::max(1.0, max_entry_norm(m));
  const double residual = max_entry_norm(m - m.adjoint());
  if (residual > tolerance * scale) {
    std::ostringstream os;
    os << "matrix is not Hermitian (residual " << residual << ")";
    throw ValidationError(os.str(), "not_hermitian");
  }
  m_ = (m + m.adjoint()) / 2.0;
}

HermitianOperator HermitianOperator::identity(Index dim) { return HermitianOperator(Matrix::Identity(dim, dim)); }

DensityMatrix::DensityMatrix(const Matrix& m, double support_threshold) : threshold_(support_threshold) {
  m_ = HermitianOperator(m).matrix();
  const double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    std::ostringstream os;
    os << "density matrix trace is " << tr;
    throw ValidationError(os.str(), "trace");
  }
  spectrum_ = spectral_decompose(m_);
  if (spectrum_.values(0) < -kPositivityTolerance) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << spectrum_.values(0);
    throw ValidationError(os.str(), "not_positive");
  }
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-12) throw ValidationError("state vector is not normalized", "not_normalized");
  return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

SpectralProfile spectral_profile(const DensityMatrix& rho) {
  SpectralProfile p;
  const auto& v = rho.spectrum().values;
  p.min_support_eigenvalue = 1.0;
  for (Index i = v.size() - 1; i >= 0; --i) {
    p.eigenvalues.push_back(v(i));
    if (v(i) > rho.support_threshold()) {
      ++p.rank;
      p.min_support_eigenvalue = std::min(p.min_support_eigenvalue, v(i));
    }
  }
  return p;
}

Spectrum spectral_decompose(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

Spectrum spectral_decompose(const HermitianOperator& h) { return spectral_decompose(h.matrix()); }

Matrix apply_matrix_function(const Spectrum& s, const std::function<double(double)>& f, double support_threshold) {
  RealVector fv(s.values.size());
  for (Index i = 0; i < s.values.size(); ++i) {
    const double x = s.values(i);
    if (std::abs(x) <= support_threshold) {
      fv(i) = 0.0;
      continue;
    }
    fv(i) = f(x);
    if (!std::isfinite(fv(i))) {
      std::ostringstream os;
      os << "matrix function is not finite at eigenvalue " << x;
      throw NumericError(os.str(), "domain");
    }
  }
  return s.vectors * fv.cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

HermitianOperator apply_matrix_function(const HermitianOperator& a, const std::function<double(double)>& f,
                                        double support_threshold) {
  return HermitianOperator(apply_matrix_function(spectral_decompose(a), f, support_threshold));
}

Matrix unitary_exp(const HermitianOperator& h, double theta) {
  const Spectrum s = spectral_decompose(h);
  Vector phases(s.values.size());
  for (Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -theta * s.values(i));
  return s.vectors * phases.asDiagonal() * s.vectors.adjoint();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron(std::span<const Matrix> factors) {
  if (factors.empty()) return Matrix::Identity(1, 1);
  Matrix out = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

Matrix partial_trace(const Matrix& m, std::span<const Index> dims, const std::vector<bool>& keep) {
  if (dims.size() != keep.size()) throw ValidationError("partial trace: mask length differs from subsystem count", "dimension_mismatch");
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] < 1) {
      std::ostringstream os;
      os << "partial trace: axis " << a << " has dimension " << dims[a];
      throw ValidationError(os.str(), "dimension_mismatch");
    }
  }
  const Index total = product(dims);
  if (m.rows() != total || m.cols() != total) {
    std::ostringstream os;
    os << "partial trace: product of dims " << total << " != matrix dimension " << m.rows();
    throw ValidationError(os.str(), "dimension_mismatch");
  }
  if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; }))
    throw ValidationError("partial trace: at least one subsystem must be kept", "dimension_mismatch");

  // Group into (kept, traced) index pairs via strides of the row-major tensor layout.
  const std::size_t n = dims.size();
  std::vector<Index> stride(n);
  Index s = 1;
  for (std::size_t a = n; a-- > 0;) {
    stride[a] = s;
    s *= dims[a];
  }
  std::vector<Index> kept_dims, traced_dims, kept_stride, traced_stride;
  for (std::size_t a = 0; a < n; ++a) {
    if (keep[a]) {
      kept_dims.push_back(dims[a]);
      kept_stride.push_back(stride[a]);
    } else {
      traced_dims.push_back(dims[a]);
      traced_stride.push_back(stride[a]);
    }
  }
  auto offsets = [](const std::vector<Index>& d, const std::vector<Index>& st) {
    Index count = 1;
    for (Index x : d) count *= x;
    std::vector<Index> off(count, 0);
    for (Index idx = 0; idx < count; ++idx) {
      Index rem = idx, o = 0;
      for (std::size_t a = d.size(); a-- > 0;) {
        o += (rem % d[a]) * st[a];
        rem /= d[a];
      }
      off[idx] = o;
    }
    return off;
  };
  const auto ko = offsets(kept_dims, kept_stride);
  const auto to = offsets(traced_dims, traced_stride);
  const Index kd = static_cast<Index>(ko.size());
  Matrix out = Matrix::Zero(kd, kd);
  for (Index i = 0; i < kd; ++i)
    for (Index j = 0; j < kd; ++j) {
      cplx acc = 0.0;
      for (Index t : to) acc += m(ko[i] + t, ko[j] + t);
      out(i, j) = acc;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const Index> dims, const std::vector<bool>& keep) {
  return DensityMatrix(partial_trace(rho.matrix(), dims, keep), rho.support_threshold());
}

Matrix permute_subsystems(const Matrix& m, std::span<const Index> dims, std::span<const int> perm) {
  const std::size_t n = dims.size();
  if (perm.size() != n) throw ValidationError("permutation length differs from subsystem count", "dimension_mismatch");
  const Index total = product(dims);
  std::vector<Index> in_stride(n), out_dims(n), out_stride(n);
  Index s = 1;
  for (std::size_t a = n; a-- > 0;) {
    in_stride[a] = s;
    s *= dims[a];
  }
  for (std::size_t a = 0; a < n; ++a) out_dims[a] = dims[perm[a]];
  s = 1;
  for (std::size_t a = n; a-- > 0;) {
    out_stride[a] = s;
    s *= out_dims[a];
  }
  // map[out index] = in index
  std::vector<Index> map(total);
  for (Index o = 0; o < total; ++o) {
    Index rem = o, in = 0;
    for (std::size_t a = n; a-- > 0;) {
      in += (rem % out_dims[a]) * in_stride[perm[a]];
      rem /= out_dims[a];
    }
    map[o] = in;
  }
  Matrix out(total, total);
  for (Index i = 0; i < total; ++i)
    for (Index j = 0; j < total; ++j) out(i, j) = m(map[i], map[j]);
  return out;
}

double max_entry_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double operator_norm_hermitian(const Matrix& m) {
  const auto v = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
  return v.cwiseAbs().maxCoeff();
}

double operator_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double trace_norm_hermitian(const Matrix& m) {
  const auto v = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
  return v.cwiseAbs().sum();
}

bool is_unitary(const Matrix& u, double tolerance) {
  if (u.rows() != u.cols()) return false;
  return max_entry_norm(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) < tolerance;
}

}  // namespace qiblab
