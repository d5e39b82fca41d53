#include "qiblab/channel.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "qiblab/error.hpp"

namespace qiblab {

namespace {

const Matrix& single_pauli(char c) {
  static const std::array<Matrix, 4> paulis = [] {
    std::array<Matrix, 4> p;
    for (auto& m : p) m = Matrix::Zero(2, 2);
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, cplx(0, -1), cplx(0, 1), 0;
    p[3] << 1, 0, 0, -1;
    return p;
  }();
  switch (c) {
    case 'I': return paulis[0];
    case 'X': return paulis[1];
    case 'Y': return paulis[2];
    case 'Z': return paulis[3];
    default: throw ValidationError(std::string("unknown Pauli character '") + c + "'", "pauli");
  }
}

int qubit_count(Index dim) {
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  if ((Index{1} << n) != dim) {
    std::ostringstream os;
    os << "dimension " << dim << " is not a power of 2";
    throw ValidationError(os.str(), "unsupported_basis");
  }
  return n;
}

std::string index_to_label(Index idx, int n) {
  static const char kChars[] = {'I', 'X', 'Y', 'Z'};
  std::string s(n, 'I');
  for (int q = n - 1; q >= 0; --q) {
    s[q] = kChars[idx % 4];
    idx /= 4;
  }
  return s;
}

// Tr(P H) for a Pauli string P in O(d): P has one nonzero per row.
cplx pauli_trace(const std::string& label, const Matrix& h) {
  const int n = static_cast<int>(label.size());
  const Index d = Index{1} << n;
  cplx acc = 0.0;
  for (Index row = 0; row < d; ++row) {
    Index col = 0;
    cplx amp = 1.0;
    for (int q = 0; q < n; ++q) {
      const int bit = static_cast<int>((row >> (n - 1 - q)) & 1);
      int out_bit = bit;
      switch (label[q]) {
        case 'I': break;
        case 'X': out_bit = 1 - bit; break;
        case 'Y':
          out_bit = 1 - bit;
          amp *= bit == 0 ? cplx(0, -1) : cplx(0, 1);
          break;
        case 'Z': amp *= bit == 0 ? 1.0 : -1.0; break;
      }
      col |= static_cast<Index>(out_bit) << (n - 1 - q);
    }
    // P(row, col) = amp, contributes P(row,col) H(col,row)
    acc += amp * h(col, row);
  }
  return acc;
}

}  // namespace

Matrix pauli_string_matrix(const std::string& label) {
  if (label.empty()) throw ValidationError("empty Pauli string", "pauli");
  Matrix out = single_pauli(label[0]);
  for (std::size_t i = 1; i < label.size(); ++i) out = kron(out, single_pauli(label[i]));
  return out;
}

HermitianOperator pauli_sum(const std::vector<std::pair<std::string, double>>& terms) {
  if (terms.empty()) throw ValidationError("generator has no Pauli terms", "pauli");
  const std::size_t n = terms.front().first.size();
  Matrix acc = Matrix::Zero(Index{1} << n, Index{1} << n);
  for (const auto& [label, coeff] : terms) {
    if (label.size() != n) throw ValidationError("Pauli strings in one generator differ in length", "pauli");
    acc += coeff * pauli_string_matrix(label);
  }
  return HermitianOperator(acc);
}

std::vector<cplx> GeneratorExpansion::normalized_coefficients() const {
  std::vector<cplx> out(coefficients);
  const double s = std::sqrt(static_cast<double>(dim));
  for (auto& c : out) c *= s;
  return out;
}

Matrix GeneratorExpansion::reconstruct() const {
  Matrix acc = Matrix::Zero(dim, dim);
  for (std::size_t j = 0; j < labels.size(); ++j) acc += coefficients[j] * pauli_string_matrix(labels[j]);
  return acc;
}

GeneratorExpansion pauli_expand(const HermitianOperator& h, double drop_below) {
  const int n = qubit_count(h.dim());
  GeneratorExpansion e;
  e.dim = h.dim();
  const Index count = Index{1} << (2 * n);
  for (Index idx = 0; idx < count; ++idx) {
    std::string label = index_to_label(idx, n);
    const cplx b = pauli_trace(label, h.matrix()) / static_cast<double>(h.dim());
    if (std::abs(b) <= drop_below) continue;
    e.one_norm += std::abs(b);
    e.labels.push_back(std::move(label));
    e.coefficients.push_back(b);
  }
  return e;
}

ParameterizedChannel::ParameterizedChannel(std::vector<HermitianOperator> generators, std::vector<double> parameters,
                                           Index in_dim, Index ancilla_dim, Index discard_dim)
    : generators_(std::move(generators)),
      parameters_(std::move(parameters)),
      in_dim_(in_dim),
      ancilla_dim_(ancilla_dim),
      discard_dim_(discard_dim) {
  if (generators_.size() != parameters_.size()) {
    std::ostringstream os;
    os << "channel has " << generators_.size() << " generators but " << parameters_.size() << " parameters";
    throw ValidationError(os.str(), "dimension_mismatch");
  }
  if (in_dim_ < 1 || ancilla_dim_ < 1 || discard_dim_ < 1) throw ValidationError("channel dimensions must be positive", "dimension_mismatch");
  if (total_dim() % discard_dim_ != 0 || discard_dim_ > total_dim())
    throw ValidationError("discarded dimension does not divide the channel's total dimension", "dimension_mismatch");
  for (std::size_t k = 0; k < generators_.size(); ++k) {
    if (generators_[k].dim() != total_dim()) {
      std::ostringstream os;
      os << "generator " << k << " has dimension " << generators_[k].dim() << ", expected " << total_dim();
      throw ValidationError(os.str(), "dimension_mismatch");
    }
    if (!std::isfinite(parameters_[k])) throw ValidationError("channel parameter is not finite", "non_finite");
  }
  unitary_ = Matrix::Identity(total_dim(), total_dim());
  factors_.reserve(generators_.size());
  for (std::size_t k = 0; k < generators_.size(); ++k) {
    factors_.push_back(unitary_exp(generators_[k], parameters_[k]));
    unitary_ = factors_.back() * unitary_;
  }
  Matrix embed = Matrix::Zero(total_dim(), in_dim_);
  for (Index i = 0; i < in_dim_; ++i) embed(i * ancilla_dim_, i) = 1.0;
  isometry_ = unitary_ * embed;
}

ParameterizedChannel ParameterizedChannel::identity(Index dim) { return ParameterizedChannel({}, {}, dim, 1, 1); }

ParameterizedChannel ParameterizedChannel::with_parameters(std::vector<double> parameters) const {
  return ParameterizedChannel(generators_, std::move(parameters), in_dim_, ancilla_dim_, discard_dim_);
}

ParameterizedChannel ParameterizedChannel::with_parameter(std::size_t k, double value) const {
  auto p = parameters_;
  p.at(k) = value;
  return with_parameters(std::move(p));
}

namespace {

Matrix lifted_isometry(const ParameterizedChannel& c, Index left, Index right) {
  const Matrix il = Matrix::Identity(left, left), ir = Matrix::Identity(right, right);
  return kron(il, kron(c.isometry(), ir));
}

Matrix trace_discard(const ParameterizedChannel& c, const Matrix& m, Index left, Index right) {
  const std::array<Index, 4> dims = {left, c.out_dim(), c.discard_dim(), right};
  return partial_trace(m, dims, {true, true, false, true});
}

void check_input(const ParameterizedChannel& c, const Matrix& op, Index left, Index right) {
  if (op.rows() != left * c.in_dim() * right || op.cols() != op.rows()) {
    std::ostringstream os;
    os << "operator dimension " << op.rows() << " does not match channel input " << left << "x" << c.in_dim() << "x" << right;
    throw ValidationError(os.str(), "dimension_mismatch");
  }
}

}  // namespace

Matrix apply_on_subsystem(const ParameterizedChannel& channel, const Matrix& op, Index left_dim, Index right_dim) {
  check_input(channel, op, left_dim, right_dim);
  const Matrix w = lifted_isometry(channel, left_dim, right_dim);
  return trace_discard(channel, w * op * w.adjoint(), left_dim, right_dim);
}

DensityMatrix apply_channel(const ParameterizedChannel& channel, const DensityMatrix& rho) {
  return DensityMatrix(apply_on_subsystem(channel, rho.matrix(), 1, 1), rho.support_threshold());
}

HermitianOperator effective_generator(const ParameterizedChannel& channel, std::size_t k) {
  if (k >= channel.parameter_count()) {
    std::ostringstream os;
    os << "generator index " << k << " out of range (" << channel.parameter_count() << " parameters)";
    throw ValidationError(os.str(), "index_out_of_range");
  }
  Matrix later = Matrix::Identity(channel.total_dim(), channel.total_dim());
  for (std::size_t i = k + 1; i < channel.parameter_count(); ++i) later = channel.factor(i) * later;
  return HermitianOperator(later * channel.generators()[k].matrix() * later.adjoint());
}

Matrix derivative_on_subsystem(const ParameterizedChannel& channel, const Matrix& op, Index left_dim, Index right_dim,
                               std::size_t k) {
  check_input(channel, op, left_dim, right_dim);
  const Matrix w = lifted_isometry(channel, left_dim, right_dim);
  const Matrix evolved = w * op * w.adjoint();
  const Matrix il = Matrix::Identity(left_dim, left_dim), ir = Matrix::Identity(right_dim, right_dim);
  const Matrix h = kron(il, kron(effective_generator(channel, k).matrix(), ir));
  const Matrix comm = cplx(0, -1) * (h * evolved - evolved * h);
  return trace_discard(channel, comm, left_dim, right_dim);
}

HermitianOperator channel_state_derivative(const ParameterizedChannel& channel, const DensityMatrix& rho, std::size_t k) {
  return HermitianOperator(derivative_on_subsystem(channel, rho.matrix(), 1, 1, k));
}

}  // namespace qiblab
