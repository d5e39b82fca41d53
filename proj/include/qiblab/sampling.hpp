#pragma once

#include <vector>

#include "qiblab/linalg.hpp"
#include "qiblab/random.hpp"

namespace qiblab {

// Registers ρ_1..ρ_n with controlled unitaries U_1..U_n; with the cyclic flag the
// circuit also applies a controlled cyclic shift so the ancilla reads out
// Tr(U_1ρ_1 U_2ρ_2 ⋯ U_nρ_n). Without it the readout is Π_i Tr(U_iρ_i).
struct SwapTestSpec {
  std::vector<DensityMatrix> states;
  std::vector<Matrix> unitaries;  // empty means identities
  bool cyclic = true;

  void validate() const;
};

cplx trace_product(const SwapTestSpec& spec);
// Probability of reading 0 on the ancilla: (1 + Re T)/2, or (1 + Im T)/2 for the
// variant with an S† phase on the ancilla.
double swap_test_probability(const SwapTestSpec& spec, bool imaginary = false);

// Same probability from the dense controlled circuit on ancilla ⊗ registers:
// H, controlled-W with W = P·(U_1 ⊗ ⋯ ⊗ U_n) and P|k_1…k_n⟩ = |k_2…k_n k_1⟩
// (P omitted without the cyclic flag), optional S†, H, then read the ancilla.
double swap_test_circuit_probability(const SwapTestSpec& spec, bool imaginary = false);

// 2·(fraction of zeros) − 1 from Binomial(shots, p0).
double sample_swap_test(double p0, long long shots, Rng& rng);

struct AEConfig {
  int grid = 1200;  // M
  int k = 3;
  int repeats = 1;  // n_AE

  void validate() const;
  // 2πk√(p(1-p))/M + k²π²/M²
  double error_bound(double p) const;
  // 1 - 1/(2(k-1))
  double success_probability() const;
};

// Statistical amplitude-estimation model: with the success probability the result
// is uniform on the guaranteed interval around p (clipped to [0,1]); otherwise it is
// uniform on [0,1].
double amplitude_estimate(double p, const AEConfig& config, Rng& rng);

// Median; lower median for even length.
double median_boost(std::vector<double> estimates);

enum class TraceMode { ExactTrace, ShotSampled, AeModel };
enum class TracePart { Real, Imag };

struct TraceEstimateOptions {
  TraceMode mode = TraceMode::ExactTrace;
  double trace_error = 0.02;          // ε_T
  double failure_probability = 0.05;  // δ
  long long shots = 0;                // 0 picks the Hoeffding count for (ε_T, δ)
};

// Smallest grid with 12π/M <= ε_T (at least 10, where 12π/M dominates the bound).
int ae_grid_for(double trace_error);
// ⌈24 ln(1/δ)⌉, rounded up to odd.
int ae_repeats_for(double failure_probability);
// Shots so that 2·|freq - p0| <= ε_T with probability >= 1-δ.
long long shots_for(double trace_error, double failure_probability);

// Noisy readout of a real number t in [-1, 1] that a swap test encodes as p0 = (1+t)/2.
double estimate_encoded_value(double exact, const TraceEstimateOptions& options, Rng& rng);
double estimate_trace_product(const SwapTestSpec& spec, const TraceEstimateOptions& options, Rng& rng,
                              TracePart part = TracePart::Real);

}  // namespace qiblab
