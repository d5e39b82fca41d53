#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "qiblab/channel.hpp"
#include "qiblab/entropy.hpp"
#include "qiblab/error.hpp"
#include "qiblab/estimators.hpp"
#include "qiblab/linalg.hpp"
#include "qiblab/random.hpp"

namespace qiblab::testing {

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline Matrix diag(std::initializer_list<double> v) {
  Matrix m = Matrix::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

inline std::vector<HermitianOperator> random_generators(Index dim, std::size_t count, Rng& rng) {
  std::vector<HermitianOperator> g;
  for (std::size_t i = 0; i < count; ++i) g.push_back(random_hermitian(dim, rng));
  return g;
}

inline std::vector<double> random_parameters(std::size_t count, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> p(count);
  for (double& x : p) x = u(rng);
  return p;
}

// Data register of `data_dim`, label register of dimension 2, channel on data ⊗ ancilla
// discarding `discard_dim`, with random generators.
inline QibInstance random_instance(Rng& rng, Index data_dim, Index anc_dim, Index discard_dim, std::size_t params,
                                   double beta) {
  ParameterizedChannel ch(random_generators(data_dim * anc_dim, params, rng), random_parameters(params, rng), data_dim,
                          anc_dim, discard_dim);
  return QibInstance(random_density_matrix(data_dim * 2, rng), 2, ch, beta);
}

// Random 1-qubit instance whose four logarithm arguments keep support spectra above `floor`.
inline QibInstance random_windowed_instance(Rng& rng, double beta, double floor, int max_attempts = 100000) {
  for (int a = 0; a < max_attempts; ++a) {
    QibInstance inst = random_instance(rng, 2, 2, 2, 3, beta);
    if (qib_spectral_floor(inst) >= floor) return inst;
  }
  throw NumericError("no windowed instance found", "test_setup");
}

}  // namespace qiblab::testing
