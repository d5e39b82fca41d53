#include "qiblab/random.hpp"

#include <cmath>

namespace qiblab {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 of a mixed key
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Matrix ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = cplx(n(rng), n(rng));
  return g;
}

}  // namespace

Vector random_state_vector(Index dim, Rng& rng) {
  Vector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_unitary(Index dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < dim; ++i) {
    const cplx d = r(i, i);
    q.col(i) *= std::abs(d) > 0 ? d / std::abs(d) : cplx(1.0);
  }
  return q;
}

HermitianOperator random_hermitian(Index dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  return HermitianOperator((g + g.adjoint()) / 2.0);
}

DensityMatrix random_density_matrix(Index dim, Rng& rng, Index rank) {
  if (rank < 0) rank = dim;
  const Matrix g = ginibre(dim, rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(rho);
}

DensityMatrix random_density_with_spectrum(const std::vector<double>& spectrum, Rng& rng) {
  const Index d = static_cast<Index>(spectrum.size());
  const Matrix u = random_unitary(d, rng);
  RealVector v(d);
  double total = 0.0;
  for (Index i = 0; i < d; ++i) total += spectrum[i];
  for (Index i = 0; i < d; ++i) v(i) = spectrum[i] / total;
  return DensityMatrix(u * v.cast<cplx>().asDiagonal() * u.adjoint());
}

}  // namespace qiblab
