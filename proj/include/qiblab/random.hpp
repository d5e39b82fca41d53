#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qiblab/linalg.hpp"

namespace qiblab {

using Rng = std::mt19937_64;

// Independent stream seed for repeat `index` of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

Vector random_state_vector(Index dim, Rng& rng);
Matrix random_unitary(Index dim, Rng& rng);
HermitianOperator random_hermitian(Index dim, Rng& rng);
// Ginibre-induced density matrix of the given rank.
DensityMatrix random_density_matrix(Index dim, Rng& rng, Index rank = -1);
// Density matrix with a prescribed spectrum in a Haar-random basis.
DensityMatrix random_density_with_spectrum(const std::vector<double>& spectrum, Rng& rng);

}  // namespace qiblab
