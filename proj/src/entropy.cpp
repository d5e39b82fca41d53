#include "qiblab/entropy.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "qiblab/error.hpp"
#include "qiblab/parallel.hpp"

namespace qiblab {

namespace {

// Tolerance on the weight a state may put on another state's kernel.
constexpr double kKernelLeak = 1e-9;

}  // namespace

double von_neumann_entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (Index i = 0; i < rho.spectrum().values.size(); ++i) {
    const double l = rho.spectrum().values(i);
    if (l > rho.support_threshold()) s -= l * std::log(l);
  }
  return s;
}

void require_kernel_containment(const DensityMatrix& a, const DensityMatrix& b, const char* name) {
  if (a.dim() != b.dim()) throw ValidationError("states have different dimensions", "dimension_mismatch");
  const auto& s = b.spectrum();
  for (Index i = 0; i < s.values.size(); ++i) {
    if (s.values(i) > b.support_threshold()) continue;
    const double leak = (s.vectors.col(i).adjoint() * a.matrix() * s.vectors.col(i))(0, 0).real();
    if (leak > kKernelLeak) {
      std::ostringstream os;
      os << name << ": kernel of the second argument carries weight " << leak << " of the first (infinite divergence)";
      throw SupportError(os.str());
    }
  }
}

double cross_entropy(const DensityMatrix& a, const DensityMatrix& b) {
  require_kernel_containment(a, b);
  const auto& s = b.spectrum();
  double acc = 0.0;
  for (Index i = 0; i < s.values.size(); ++i) {
    if (s.values(i) <= b.support_threshold()) continue;
    const double w = (s.vectors.col(i).adjoint() * a.matrix() * s.vectors.col(i))(0, 0).real();
    acc += w * std::log(s.values(i));
  }
  return acc;
}

double relative_entropy(const DensityMatrix& a, const DensityMatrix& b) {
  return -von_neumann_entropy(a) - cross_entropy(a, b);
}

namespace {

std::pair<DensityMatrix, DensityMatrix> marginals(const DensityMatrix& rho_ab, Index dim_a, Index dim_b) {
  const std::array<Index, 2> dims = {dim_a, dim_b};
  return {partial_trace(rho_ab, dims, {true, false}), partial_trace(rho_ab, dims, {false, true})};
}

}  // namespace

double mutual_information(const DensityMatrix& rho_ab, Index dim_a, Index dim_b) {
  const auto [a, b] = marginals(rho_ab, dim_a, dim_b);
  return von_neumann_entropy(a) + von_neumann_entropy(b) - von_neumann_entropy(rho_ab);
}

double mutual_information_divergence(const DensityMatrix& rho_ab, Index dim_a, Index dim_b) {
  const auto [a, b] = marginals(rho_ab, dim_a, dim_b);
  return relative_entropy(rho_ab, DensityMatrix(kron(a.matrix(), b.matrix())));
}

double trace_norm(const Matrix& hermitian) { return trace_norm_hermitian(hermitian); }

QibInstance::QibInstance(DensityMatrix data_label, Index label_dim, ParameterizedChannel channel, double beta)
    : data_label_(std::move(data_label)),
      label_dim_(label_dim),
      channel_(std::move(channel)),
      beta_(beta),
      data_(DensityMatrix::maximally_mixed(1)),
      label_(DensityMatrix::maximally_mixed(1)) {
  if (!(beta_ >= 0.0 && beta_ <= 1.0)) throw ValidationError("beta must lie in [0, 1]", "beta");
  if (label_dim_ < 1 || data_label_.dim() % label_dim_ != 0)
    throw ValidationError("label dimension does not divide the data-label state", "dimension_mismatch");
  const std::array<Index, 2> dims = {data_label_.dim() / label_dim_, label_dim_};
  data_ = partial_trace(data_label_, dims, {true, false});
  label_ = partial_trace(data_label_, dims, {false, true});
  if (data_.dim() != channel_.in_dim()) {
    std::ostringstream os;
    os << "data register has dimension " << data_.dim() << " but the channel expects " << channel_.in_dim();
    throw ValidationError(os.str(), "dimension_mismatch");
  }
  purified_ = purify(data_);
}

QibInstance::QibInstance(const LabeledEnsemble& ensemble, ParameterizedChannel channel, double beta)
    : QibInstance(data_label_state(ensemble), ensemble.layout().dim_label, std::move(channel), beta) {}

QibInstance QibInstance::with_parameters(std::vector<double> parameters) const {
  QibInstance copy = *this;
  copy.channel_ = channel_.with_parameters(std::move(parameters));
  return copy;
}

QibInstance QibInstance::with_beta(double beta) const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]", "beta");
  QibInstance copy = *this;
  copy.beta_ = beta;
  return copy;
}

QibStates qib_states(const QibInstance& inst) {
  const auto& p = inst.purification();
  const Matrix psi = p.amplitudes * p.amplitudes.adjoint();
  const auto& ch = inst.channel();
  DensityMatrix ref_out(apply_on_subsystem(ch, psi, p.dim, 1));
  const std::array<Index, 2> rx = {p.dim, ch.out_dim()};
  DensityMatrix ref = partial_trace(ref_out, rx, {true, false});
  DensityMatrix out = partial_trace(ref_out, rx, {false, true});
  DensityMatrix out_label(apply_on_subsystem(ch, inst.data_label().matrix(), 1, inst.label_dim()));
  DensityMatrix ref_times_out(kron(ref.matrix(), out.matrix()));
  DensityMatrix out_times_label(kron(out.matrix(), inst.label().matrix()));
  return QibStates{std::move(ref_out), std::move(ref), std::move(out), std::move(ref_times_out),
                   std::move(out_label), inst.label(), std::move(out_times_label)};
}

QibStateDerivatives qib_state_derivatives(const QibInstance& inst, const QibStates& st, std::size_t k) {
  const auto& p = inst.purification();
  const Matrix psi = p.amplitudes * p.amplitudes.adjoint();
  const auto& ch = inst.channel();
  QibStateDerivatives d;
  d.ref_out = derivative_on_subsystem(ch, psi, p.dim, 1, k);
  d.out = derivative_on_subsystem(ch, inst.data().matrix(), 1, 1, k);
  d.ref_times_out = kron(st.ref.matrix(), d.out);
  d.out_label = derivative_on_subsystem(ch, inst.data_label().matrix(), 1, inst.label_dim(), k);
  d.out_times_label = kron(d.out, st.label.matrix());
  return d;
}

QibTerms qib_terms(const QibInstance& inst) {
  const QibStates st = qib_states(inst);
  require_kernel_containment(st.ref_out, st.ref_times_out, "rho_RX~ vs rho_R (x) rho_X~");
  require_kernel_containment(st.out_label, st.out_times_label, "rho_X~Y vs rho_X~ (x) rho_Y");
  QibTerms t;
  t.memory = von_neumann_entropy(st.ref) + von_neumann_entropy(st.out) - von_neumann_entropy(st.ref_out);
  t.relevant = von_neumann_entropy(st.out) + von_neumann_entropy(st.label) - von_neumann_entropy(st.out_label);
  t.loss = inst.beta() * t.memory - (1.0 - inst.beta()) * t.relevant;
  return t;
}

double qib_objective(const QibInstance& instance) { return qib_terms(instance).loss; }

std::vector<double> central_difference_gradient(const std::vector<double>& parameters,
                                                const std::function<double(const std::vector<double>&)>& f,
                                                FdOptions options) {
  if (!(options.step > 0.0)) throw ValidationError("finite-difference step must be positive", "step");
  std::vector<double> grad(parameters.size());
  auto diff = [&](std::size_t k, double h) {
    auto plus = parameters, minus = parameters;
    plus[k] += h;
    minus[k] -= h;
    return (f(plus) - f(minus)) / (2.0 * h);
  };
  parallel_for(parameters.size(), [&](std::size_t k) {
    const double d1 = diff(k, options.step);
    grad[k] = options.richardson ? (4.0 * diff(k, options.step / 2.0) - d1) / 3.0 : d1;
  });
  return grad;
}

std::vector<double> qib_gradient_fd(const QibInstance& instance, FdOptions options) {
  return central_difference_gradient(
      instance.channel().parameters(),
      [&](const std::vector<double>& a) { return qib_objective(instance.with_parameters(a)); }, options);
}

}  // namespace qiblab
