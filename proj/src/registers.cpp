#include "qiblab/registers.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "qiblab/error.hpp"

namespace qiblab {

void RegisterLayout::validate() const {
  if (dim_tag < 1 || dim_data < 1 || dim_label < 1 || dim_ref < 1 || dim_env < 1)
    throw ValidationError("register dimensions must be at least 1", "dimension_mismatch");
  if (dim_ref != dim_data) throw ValidationError("reference register must mirror the data register", "dimension_mismatch");
}

LabeledEnsemble::LabeledEnsemble(std::vector<EnsembleRecord> records, Index dim_tag, Index dim_label)
    : records_(std::move(records)) {
  if (records_.empty()) throw ValidationError("ensemble has no records", "empty_ensemble");
  const Index dim_data = records_.front().state.size();
  Index max_tag = 0, max_label = 0;
  double total = 0.0;
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const auto& rec = records_[r];
    std::ostringstream where;
    where << "record " << r << ": ";
    if (rec.state.size() != dim_data || dim_data == 0)
      throw ValidationError(where.str() + "state dimension differs from record 0", "dimension_mismatch");
    if (!rec.state.allFinite()) throw ValidationError(where.str() + "state has non-finite amplitudes", "non_finite");
    if (std::abs(rec.state.norm() - 1.0) > 1e-12) throw ValidationError(where.str() + "state is not normalized", "not_normalized");
    if (rec.tag < 0 || rec.label < 0) throw ValidationError(where.str() + "negative tag or label", "index_out_of_range");
    if (!(rec.weight >= 0.0) || !std::isfinite(rec.weight)) throw ValidationError(where.str() + "weight must be nonnegative", "weight");
    max_tag = std::max(max_tag, rec.tag);
    max_label = std::max(max_label, rec.label);
    total += rec.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "ensemble weights sum to " << total;
    throw ValidationError(os.str(), "weight");
  }
  layout_.dim_tag = dim_tag > 0 ? dim_tag : max_tag + 1;
  layout_.dim_label = dim_label > 0 ? dim_label : max_label + 1;
  if (max_tag >= layout_.dim_tag || max_label >= layout_.dim_label)
    throw ValidationError("tag or label exceeds the declared register dimension", "index_out_of_range");
  layout_.dim_data = dim_data;
  layout_.dim_ref = dim_data;
  layout_.validate();
}

DensityMatrix build_labeled_ensemble(const LabeledEnsemble& ensemble) {
  const auto& l = ensemble.layout();
  const Index d = l.dim_tag * l.dim_data * l.dim_label;
  Matrix rho = Matrix::Zero(d, d);
  for (const auto& rec : ensemble.records()) {
    Vector tag = Vector::Zero(l.dim_tag), label = Vector::Zero(l.dim_label);
    tag(rec.tag) = 1.0;
    label(rec.label) = 1.0;
    const Vector v = kron(kron(Matrix(tag), Matrix(rec.state)), Matrix(label)).col(0);
    rho += rec.weight * v * v.adjoint();
  }
  return DensityMatrix(rho);
}

DensityMatrix data_label_state(const LabeledEnsemble& ensemble) {
  const auto& l = ensemble.layout();
  const std::array<Index, 3> dims = {l.dim_tag, l.dim_data, l.dim_label};
  return partial_trace(build_labeled_ensemble(ensemble), dims, {false, true, true});
}

PurifiedState purify(const DensityMatrix& rho) {
  PurifiedState p;
  p.dim = rho.dim();
  p.source_spectrum = spectral_profile(rho);
  const auto& s = rho.spectrum();
  p.amplitudes = Vector::Zero(p.dim * p.dim);
  for (Index i = 0; i < p.dim; ++i) {
    const double lam = std::max(0.0, s.values(i));
    if (lam == 0.0) continue;
    const Vector e = s.vectors.col(i);
    p.amplitudes += std::sqrt(lam) * kron(Matrix(e), Matrix(e)).col(0);
  }
  p.amplitudes /= p.amplitudes.norm();
  return p;
}

DensityMatrix joint_input_output(const DensityMatrix& rho_x, const ParameterizedChannel& channel) {
  if (rho_x.dim() != channel.in_dim()) throw ValidationError("input state dimension differs from channel input", "dimension_mismatch");
  const PurifiedState p = purify(rho_x);
  const Matrix psi = p.amplitudes * p.amplitudes.adjoint();
  return DensityMatrix(apply_on_subsystem(channel, psi, p.dim, 1), rho_x.support_threshold());
}

HermitianOperator joint_input_output_derivative(const DensityMatrix& rho_x, const ParameterizedChannel& channel,
                                                std::size_t k) {
  if (rho_x.dim() != channel.in_dim()) throw ValidationError("input state dimension differs from channel input", "dimension_mismatch");
  const PurifiedState p = purify(rho_x);
  const Matrix psi = p.amplitudes * p.amplitudes.adjoint();
  return HermitianOperator(derivative_on_subsystem(channel, psi, p.dim, 1, k));
}

}  // namespace qiblab
