#pragma once

// Dense complex operators on a truncated qubit(s) x Fock space.
//
// Subsystem ordering follows the Kronecker convention: the first entry of
// `dims` is the most significant index. The resonator, when present, is
// always the last subsystem.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nanobus {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Dims = std::vector<int>;

inline constexpr Complex kI{0.0, 1.0};

/// Non-fatal messages collected while building operators (truncation
/// warnings and the like). Passed by pointer; null means "don't record".
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
  void merge(const Diagnostics& other) {
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
  }
};

inline int product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.adjoint()) <= tol * scale;
}

inline bool is_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())) <= tol;
}

/// Square complex matrix tagged with its subsystem dimensions.
class QOperator {
 public:
  QOperator() = default;

  QOperator(Matrix m, Dims dims) : m_(std::move(m)), dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("QOperator: empty dims");
    for (int d : dims_) {
      if (d < 1) throw std::invalid_argument("QOperator: subsystem dimension < 1");
    }
    if (m_.rows() != m_.cols()) throw std::invalid_argument("QOperator: matrix is not square");
    if (m_.rows() != product(dims_)) {
      throw std::invalid_argument("QOperator: matrix side does not match product of dims");
    }
  }

  explicit QOperator(Matrix m) : QOperator(m, Dims{static_cast<int>(m.rows())}) {}

  const Matrix& matrix() const { return m_; }
  const Dims& dims() const { return dims_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  Complex operator()(int r, int c) const { return m_(r, c); }

  bool is_unitary(double tol) const { return nanobus::is_unitary(m_, tol); }
  bool is_hermitian(double tol) const { return nanobus::is_hermitian(m_, tol); }

  QOperator adjoint() const { return {m_.adjoint(), dims_}; }

  QOperator& operator+=(const QOperator& o) {
    require_same_dims(o, "+");
    m_ += o.m_;
    return *this;
  }
  QOperator& operator-=(const QOperator& o) {
    require_same_dims(o, "-");
    m_ -= o.m_;
    return *this;
  }
  QOperator& operator*=(Complex s) {
    m_ *= s;
    return *this;
  }

  friend QOperator operator+(QOperator a, const QOperator& b) { return a += b; }
  friend QOperator operator-(QOperator a, const QOperator& b) { return a -= b; }
  friend QOperator operator*(QOperator a, Complex s) { return a *= s; }
  friend QOperator operator*(Complex s, QOperator a) { return a *= s; }
  friend QOperator operator*(double s, QOperator a) { return a *= Complex(s, 0.0); }
  friend QOperator operator*(const QOperator& a, const QOperator& b) {
    a.require_same_dims(b, "*");
    return {a.m_ * b.m_, a.dims_};
  }

 private:
  void require_same_dims(const QOperator& o, const char* op) const {
    if (dims_ != o.dims_) {
      throw std::invalid_argument(std::string("QOperator ") + op + ": dims mismatch");
    }
  }

  Matrix m_;
  Dims dims_;
};

inline QOperator identity(int d) { return QOperator(Matrix::Identity(d, d)); }

inline QOperator identity(const Dims& dims) {
  int d = product(dims);
  return {Matrix::Identity(d, d), dims};
}

/// Truncated annihilation operator b with b|n> = sqrt(n)|n-1>.
inline QOperator fock_lowering(int n_cut) {
  if (n_cut < 2) throw std::invalid_argument("fock_lowering: n_cut must be >= 2");
  Matrix b = Matrix::Zero(n_cut, n_cut);
  for (int n = 1; n < n_cut; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return QOperator(std::move(b));
}

inline QOperator number_operator(int n_cut) {
  QOperator b = fock_lowering(n_cut);
  return b.adjoint() * b;
}

enum class Axis { x, y, z };

/// Pauli matrices in the charge basis {|0>, |1>}, sigma_z = diag(+1, -1).
inline QOperator pauli(Axis axis) {
  Matrix m(2, 2);
  switch (axis) {
    case Axis::x: m << 0.0, 1.0, 1.0, 0.0; break;
    case Axis::y: m << 0.0, -kI, kI, 0.0; break;
    case Axis::z: m << 1.0, 0.0, 0.0, -1.0; break;
  }
  return QOperator(std::move(m));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Kronecker product in list order; dims are concatenated.
inline QOperator tensor(std::span<const QOperator> factors) {
  if (factors.empty()) throw std::invalid_argument("tensor: empty factor list");
  Matrix m = factors.front().matrix();
  Dims dims = factors.front().dims();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    m = kron(m, factors[k].matrix());
    dims.insert(dims.end(), factors[k].dims().begin(), factors[k].dims().end());
  }
  return {std::move(m), std::move(dims)};
}

inline QOperator tensor(std::initializer_list<QOperator> factors) {
  return tensor(std::span<const QOperator>(factors.begin(), factors.size()));
}

/// Places a single-subsystem operator at position `site` of a product space.
inline QOperator embed(const QOperator& local, std::size_t site, const Dims& dims) {
  if (site >= dims.size()) throw std::invalid_argument("embed: site out of range");
  if (local.dim() != dims[site]) throw std::invalid_argument("embed: local dimension mismatch");
  std::vector<QOperator> factors;
  factors.reserve(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    factors.push_back(k == site ? QOperator(local.matrix()) : identity(dims[k]));
  }
  return tensor(factors);
}

namespace detail {

// Recompose V f(lambda) V^dagger for a Hermitian matrix.
template <class F>
Matrix spectral_apply(const Matrix& hermitian, F&& f) {
  Matrix h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Matrix& v = es.eigenvectors();
  const Eigen::VectorXd& w = es.eigenvalues();
  Vector fw(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) fw(k) = f(w(k));
  return v * fw.asDiagonal() * v.adjoint();
}

// Higham (2005) scaling and squaring with a degree-13 Pade approximant.
inline Matrix pade13_exp(const Matrix& a) {
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  constexpr int max_squarings = 64;

  const Eigen::Index n = a.rows();
  double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw std::runtime_error("matrix_exp: non-finite input");
  int s = norm1 > theta13 ? static_cast<int>(std::ceil(std::log2(norm1 / theta13))) : 0;
  if (s > max_squarings) throw std::runtime_error("matrix_exp: norm exceeds scaling cap");

  Matrix as = a / std::ldexp(1.0, s);
  Matrix id = Matrix::Identity(n, n);
  Matrix a2 = as * as;
  Matrix a4 = a2 * a2;
  Matrix a6 = a4 * a2;
  Matrix u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                   b[3] * a2 + b[1] * id);
  Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
             b[0] * id;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  if (!r.allFinite()) throw std::runtime_error("matrix_exp: did not converge");
  return r;
}

}  // namespace detail

/// exp(A). Hermitian and skew-Hermitian inputs go through an eigendecomposition;
/// anything else uses scaling and squaring.
inline Matrix matrix_exp(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exp: matrix is not square");
  if (a.rows() == 0) return a;
  constexpr double normal_tol = 1e-13;
  if (is_hermitian(a, normal_tol)) {
    return detail::spectral_apply(a, [](double w) { return Complex(std::exp(w), 0.0); });
  }
  Matrix h = kI * a;  // A skew-Hermitian <=> iA Hermitian, A = -i(iA)
  if (is_hermitian(h, normal_tol)) {
    return detail::spectral_apply(h, [](double w) { return std::exp(Complex(0.0, -w)); });
  }
  return detail::pade13_exp(a);
}

inline QOperator matrix_exp(const QOperator& a) { return {matrix_exp(a.matrix()), a.dims()}; }

/// exp(-i H t) for Hermitian H.
inline QOperator unitary_evolution(const QOperator& h, double t) {
  if (!h.is_hermitian(1e-10)) throw std::invalid_argument("unitary_evolution: H is not Hermitian");
  return {detail::spectral_apply(h.matrix(), [t](double w) { return std::exp(Complex(0.0, -w * t)); }),
          h.dims()};
}

/// f(H) through the spectrum of a Hermitian operator.
inline QOperator function_of_hermitian(const QOperator& h, const std::function<double(double)>& f) {
  if (!h.is_hermitian(1e-10)) {
    throw std::invalid_argument("function_of_hermitian: operator is not Hermitian");
  }
  return {detail::spectral_apply(h.matrix(), [&f](double w) { return Complex(f(w), 0.0); }),
          h.dims()};
}

/// Coherent-state tail heuristic: |alpha|^2 + 3|alpha| + 4 <= n_cut.
inline bool truncation_adequate(double abs_alpha, int n_cut) {
  return abs_alpha * abs_alpha + 3.0 * abs_alpha + 4.0 <= static_cast<double>(n_cut);
}

inline void check_truncation(Complex alpha, int n_cut, Diagnostics* diag, const char* where) {
  if (diag != nullptr && !truncation_adequate(std::abs(alpha), n_cut)) {
    diag->warn(std::string(where) + ": n_cut=" + std::to_string(n_cut) +
               " is below the adequacy bound for |alpha|=" + std::to_string(std::abs(alpha)));
  }
}

/// Displacement D(alpha) = exp(alpha b^dagger - conj(alpha) b) on n_cut Fock levels.
inline QOperator displacement(Complex alpha, int n_cut, Diagnostics* diag = nullptr) {
  check_truncation(alpha, n_cut, diag, "displacement");
  const Matrix b = fock_lowering(n_cut).matrix();
  return QOperator(matrix_exp(Matrix(alpha * b.adjoint() - std::conj(alpha) * b)));
}

// ---------------------------------------------------------------------------
// States and partial traces

/// Pure state vector or density matrix with subsystem dims.
class QState {
 public:
  static QState pure(Vector psi, Dims dims) {
    if (psi.size() != product(dims)) throw std::invalid_argument("QState: size/dims mismatch");
    if (std::abs(psi.norm() - 1.0) > 1e-12) throw std::invalid_argument("QState: vector not normalised");
    return QState(std::move(psi), std::move(dims));
  }

  static QState mixed(Matrix rho, Dims dims) {
    if (rho.rows() != rho.cols() || rho.rows() != product(dims)) {
      throw std::invalid_argument("QState: density matrix shape/dims mismatch");
    }
    if (!is_hermitian(rho, 1e-12)) throw std::invalid_argument("QState: density matrix not Hermitian");
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-12) {
      throw std::invalid_argument("QState: density matrix trace != 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
      throw std::invalid_argument("QState: density matrix has a negative eigenvalue");
    }
    return QState(std::move(rho), std::move(dims));
  }

  bool is_pure_vector() const { return std::holds_alternative<Vector>(data_); }
  const Dims& dims() const { return dims_; }
  int dim() const { return product(dims_); }

  const Vector& vector() const { return std::get<Vector>(data_); }

  Matrix density() const {
    if (const auto* v = std::get_if<Vector>(&data_)) return (*v) * v->adjoint();
    return std::get<Matrix>(data_);
  }

  double purity() const {
    if (is_pure_vector()) return 1.0;
    const Matrix& rho = std::get<Matrix>(data_);
    return (rho * rho).trace().real();
  }

 private:
  QState(Vector v, Dims dims) : data_(std::move(v)), dims_(std::move(dims)) {}
  QState(Matrix m, Dims dims) : data_(std::move(m)), dims_(std::move(dims)) {}

  std::variant<Vector, Matrix> data_;
  Dims dims_;
};

inline Vector basis_vector(int dim, int index) {
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

inline QState fock_vacuum(int n_cut) { return QState::pure(basis_vector(n_cut, 0), {n_cut}); }

/// Thermal resonator state with mean occupation n_bar, renormalised on n_cut levels.
inline QState thermal_state(double n_bar, int n_cut) {
  if (n_bar < 0.0) throw std::invalid_argument("thermal_state: n_bar must be >= 0");
  if (n_bar == 0.0) return QState::mixed(basis_vector(n_cut, 0) * basis_vector(n_cut, 0).adjoint(), {n_cut});
  Matrix rho = Matrix::Zero(n_cut, n_cut);
  double ratio = n_bar / (1.0 + n_bar);
  double total = 0.0;
  for (int n = 0; n < n_cut; ++n) {
    rho(n, n) = std::pow(ratio, n);
    total += std::pow(ratio, n);
  }
  rho /= total;
  return QState::mixed(std::move(rho), {n_cut});
}

namespace detail {

inline std::vector<std::size_t> validated_keep(std::vector<std::size_t> keep, std::size_t n_sub) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
    throw std::invalid_argument("partial_trace: duplicate subsystem in keep set");
  }
  if (keep.back() >= n_sub) throw std::invalid_argument("partial_trace: subsystem index out of range");
  return keep;
}

}  // namespace detail

/// Partial trace of an arbitrary operator on a product space. Kept subsystems
/// appear in ascending original order.
inline Matrix partial_trace(const Matrix& op, const Dims& dims, std::vector<std::size_t> keep_in) {
  const auto keep = detail::validated_keep(std::move(keep_in), dims.size());
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) kept[k] = true;

  int dim_keep = 1, dim_trace = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) (kept[k] ? dim_keep : dim_trace) *= dims[k];

  // full_index[ik * dim_trace + it]
  std::vector<int> full_index(static_cast<std::size_t>(dim_keep) * dim_trace);
  const int n = product(dims);
  for (int idx = 0; idx < n; ++idx) {
    int rem = idx, ik = 0, it = 0, wk = 1, wt = 1;
    for (std::size_t k = dims.size(); k-- > 0;) {
      int digit = rem % dims[k];
      rem /= dims[k];
      if (kept[k]) {
        ik += digit * wk;
        wk *= dims[k];
      } else {
        it += digit * wt;
        wt *= dims[k];
      }
    }
    full_index[static_cast<std::size_t>(ik) * dim_trace + it] = idx;
  }

  Matrix out = Matrix::Zero(dim_keep, dim_keep);
  for (int i = 0; i < dim_keep; ++i) {
    for (int j = 0; j < dim_keep; ++j) {
      Complex acc = 0.0;
      for (int t = 0; t < dim_trace; ++t) {
        acc += op(full_index[static_cast<std::size_t>(i) * dim_trace + t],
                  full_index[static_cast<std::size_t>(j) * dim_trace + t]);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

inline QState partial_trace(const QState& state, std::vector<std::size_t> keep) {
  const auto sorted = detail::validated_keep(std::move(keep), state.dims().size());
  Dims kept_dims;
  for (auto k : sorted) kept_dims.push_back(state.dims()[k]);
  Matrix reduced = partial_trace(state.density(), state.dims(), sorted);
  return QState::mixed(0.5 * (reduced + reduced.adjoint()), std::move(kept_dims));
}

inline double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

// ---------------------------------------------------------------------------
// Comparison metrics

/// Frobenius-optimal global phase e^{i phi} minimising ||u - e^{i phi} v||.
inline Complex optimal_phase(const Matrix& u, const Matrix& v) {
  Complex overlap = v.conjugate().cwiseProduct(u).sum();
  double mag = std::abs(overlap);
  return mag > 0.0 ? overlap / mag : Complex(1.0, 0.0);
}

/// max_abs(u - e^{i phi} v) at the Frobenius-optimal phase. This bounds the
/// exact min-over-phase max-norm distance from above.
inline double phase_minimized_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw std::invalid_argument("phase_minimized_distance: shape mismatch");
  }
  return max_abs(u - optimal_phase(u, v) * v);
}

/// Columns of `op` whose resonator (last subsystem) input index is below
/// `levels`. Rows are kept in full, so leakage out of the block still counts.
inline Matrix low_fock_columns(const QOperator& op, int levels = 1) {
  const int n_res = op.dims().back();
  if (levels < 1 || levels > n_res) throw std::invalid_argument("low_fock_columns: bad level count");
  const int n_q = op.dim() / n_res;
  Matrix out(op.dim(), static_cast<Eigen::Index>(n_q) * levels);
  for (int q = 0; q < n_q; ++q) {
    for (int n = 0; n < levels; ++n) out.col(q * levels + n) = op.matrix().col(q * n_res + n);
  }
  return out;
}

/// Phase-minimised distance on the resonator-vacuum input block.
inline double vacuum_block_distance(const QOperator& u, const QOperator& v) {
  if (u.dims() != v.dims()) throw std::invalid_argument("vacuum_block_distance: dims mismatch");
  return phase_minimized_distance(low_fock_columns(u), low_fock_columns(v));
}

/// Largest population in the top two Fock levels over resonator-vacuum inputs.
inline double top_fock_population(const QOperator& u) {
  const int n_res = u.dims().back();
  const int n_q = u.dim() / n_res;
  const Matrix cols = low_fock_columns(u);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    double pop = 0.0;
    for (int q = 0; q < n_q; ++q) {
      for (int n = std::max(0, n_res - 2); n < n_res; ++n) pop += std::norm(cols(q * n_res + n, c));
    }
    worst = std::max(worst, pop);
  }
  return worst;
}

}  // namespace nanobus
