#pragma once

// Quantum channels on n-qubit spaces, stored as transfer matrices in the
// normalised Pauli basis {I, X, Y, Z}/sqrt(2) per qubit (first qubit most
// significant), and the fidelity measures built on them.

#include "nanobus/operator_algebra.hpp"

#include <bit>

namespace nanobus {

namespace detail {

inline int qubit_count(int dim) {
  if (dim < 2 || !std::has_single_bit(static_cast<unsigned>(dim))) {
    throw std::invalid_argument("channel: dimension must be a power of two");
  }
  return std::countr_zero(static_cast<unsigned>(dim));
}

}  // namespace detail

/// Element `index` of the normalised Pauli basis on `n_qubits` qubits.
inline Matrix pauli_basis_element(int n_qubits, int index) {
  static const Axis axes[] = {Axis::x, Axis::y, Axis::z};
  Matrix m = Matrix::Identity(1, 1);
  for (int q = n_qubits - 1; q >= 0; --q) {
    int digit = (index >> (2 * q)) & 3;
    Matrix p = digit == 0 ? Matrix(Matrix::Identity(2, 2)) : pauli(axes[digit - 1]).matrix();
    m = kron(m, p / std::sqrt(2.0));
  }
  return m;
}

class Channel {
 public:
  Channel(Matrix transfer, int dim) : transfer_(std::move(transfer)), dim_(dim) {
    detail::qubit_count(dim_);
    if (transfer_.rows() != dim_ * dim_ || transfer_.cols() != dim_ * dim_) {
      throw std::invalid_argument("Channel: transfer matrix must be d^2 x d^2");
    }
  }

  const Matrix& transfer_matrix() const { return transfer_; }
  int dim() const { return dim_; }

 private:
  Matrix transfer_;
  int dim_;
};

/// Transfer matrix R_ij = Tr(P_i^dagger E(P_j)) of a linear map E.
inline Channel channel_from_map(int dim, const std::function<Matrix(const Matrix&)>& map) {
  const int n = detail::qubit_count(dim);
  const int d2 = dim * dim;
  std::vector<Matrix> basis;
  basis.reserve(d2);
  for (int i = 0; i < d2; ++i) basis.push_back(pauli_basis_element(n, i));
  Matrix r(d2, d2);
  for (int j = 0; j < d2; ++j) {
    Matrix image = map(basis[j]);
    for (int i = 0; i < d2; ++i) r(i, j) = basis[i].conjugate().cwiseProduct(image).sum();
  }
  return {std::move(r), dim};
}

inline Channel unitary_channel(const Matrix& u) {
  return channel_from_map(static_cast<int>(u.rows()),
                          [&u](const Matrix& x) -> Matrix { return u * x * u.adjoint(); });
}

/// Fully depolarising channel rho -> Tr(rho) I/d.
inline Channel depolarizing_channel(int dim) {
  return channel_from_map(dim, [dim](const Matrix& x) -> Matrix {
    return x.trace() * Matrix::Identity(dim, dim) / static_cast<double>(dim);
  });
}

inline Channel compose(const Channel& second, const Channel& first) {
  if (second.dim() != first.dim()) throw std::invalid_argument("compose: dimension mismatch");
  return {second.transfer_matrix() * first.transfer_matrix(), first.dim()};
}

/// F_pro = Re Tr(R_U^dagger R_E) / d^2.
inline double process_fidelity(const Channel& actual, const QOperator& target) {
  if (actual.dim() != target.dim()) throw std::invalid_argument("process_fidelity: dimension mismatch");
  const Channel ideal = unitary_channel(target.matrix());
  const double d = actual.dim();
  return (ideal.transfer_matrix().adjoint() * actual.transfer_matrix()).trace().real() / (d * d);
}

inline double average_gate_fidelity(double process_fid, int dim) {
  return (dim * process_fid + 1.0) / (dim + 1.0);
}

}  // namespace nanobus
