#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

#include "qwot/errors.hpp"

namespace qwot {

using cplx = std::complex<double>;

namespace detail {
inline double conj_scalar(double x) { return x; }
inline cplx conj_scalar(const cplx& x) { return std::conj(x); }
inline double real_of(double x) { return x; }
inline double real_of(const cplx& x) { return x.real(); }
inline double imag_of(double) { return 0.0; }
inline double imag_of(const cplx& x) { return x.imag(); }
}  // namespace detail

/// Dense square matrix in row-major order. The single carrier type for
/// states, observables, couplings and unitaries.
template <class Scalar>
class DenseMatrix {
public:
  DenseMatrix() : dim_(0) {}

  explicit DenseMatrix(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim, Scalar{}) {
    if (dim < 1) throw DimensionError("matrix dimension must be >= 1");
  }

  DenseMatrix(int dim, std::vector<Scalar> entries) : dim_(dim), a_(std::move(entries)) {
    if (dim < 1) throw DimensionError("matrix dimension must be >= 1");
    if (a_.size() != static_cast<size_t>(dim) * dim)
      throw DimensionError("entry count does not match dim*dim");
  }

  DenseMatrix(int dim, std::initializer_list<Scalar> entries)
      : DenseMatrix(dim, std::vector<Scalar>(entries)) {}

  static DenseMatrix identity(int dim) {
    DenseMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = Scalar{1};
    return m;
  }

  static DenseMatrix zero(int dim) { return DenseMatrix(dim); }

  int dim() const { return dim_; }

  Scalar& operator()(int i, int j) { return a_[static_cast<size_t>(i) * dim_ + j]; }
  const Scalar& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * dim_ + j]; }

  const std::vector<Scalar>& data() const { return a_; }
  std::vector<Scalar>& data() { return a_; }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    check_same_dim(o);
    for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& o) {
    check_same_dim(o);
    for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  DenseMatrix& operator*=(Scalar s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
  friend DenseMatrix operator*(Scalar s, DenseMatrix a) { return a *= s; }
  friend DenseMatrix operator*(DenseMatrix a, Scalar s) { return a *= s; }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    a.check_same_dim(b);
    const int n = a.dim_;
    DenseMatrix c(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const Scalar aik = a(i, k);
        if (aik == Scalar{}) continue;
        for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  bool all_finite() const {
    for (const auto& x : a_) {
      if (!std::isfinite(detail::real_of(x)) || !std::isfinite(detail::imag_of(x))) return false;
    }
    return true;
  }

private:
  void check_same_dim(const DenseMatrix& o) const {
    if (dim_ != o.dim_) throw DimensionError("matrix dimensions differ: " + std::to_string(dim_) +
                                             " vs " + std::to_string(o.dim_));
  }

  int dim_;
  std::vector<Scalar> a_;
};

using ComplexMatrix = DenseMatrix<cplx>;
using RealMatrix = DenseMatrix<double>;

template <class S>
DenseMatrix<S> transpose(const DenseMatrix<S>& m) {
  DenseMatrix<S> t(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) t(j, i) = m(i, j);
  return t;
}

inline ComplexMatrix conj(const ComplexMatrix& m) {
  ComplexMatrix c(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) c(i, j) = std::conj(m(i, j));
  return c;
}

template <class S>
DenseMatrix<S> dagger(const DenseMatrix<S>& m) {
  DenseMatrix<S> d(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) d(j, i) = detail::conj_scalar(m(i, j));
  return d;
}

template <class S>
S trace(const DenseMatrix<S>& m) {
  S t{};
  for (int i = 0; i < m.dim(); ++i) t += m(i, i);
  return t;
}

/// Tr(A*B) without forming the product: sum over A[i,j]*B[j,i].
template <class S>
S trace_prod(const DenseMatrix<S>& a, const DenseMatrix<S>& b) {
  if (a.dim() != b.dim()) throw DimensionError("trace_prod: dimensions differ");
  S t{};
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) t += a(i, j) * b(j, i);
  return t;
}

template <class S>
double frobenius_norm(const DenseMatrix<S>& m) {
  double s = 0.0;
  for (const auto& x : m.data()) s += std::norm(std::complex<double>(x));
  return std::sqrt(s);
}

template <class S>
double max_abs(const DenseMatrix<S>& m) {
  double s = 0.0;
  for (const auto& x : m.data()) s = std::max(s, std::abs(std::complex<double>(x)));
  return s;
}

inline double max_abs_imag(const ComplexMatrix& m) {
  double s = 0.0;
  for (const auto& x : m.data()) s = std::max(s, std::abs(x.imag()));
  return s;
}

/// ||M - M^dagger||_F, the absolute hermiticity defect.
template <class S>
double hermiticity_error(const DenseMatrix<S>& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j)
      s += std::norm(std::complex<double>(m(i, j)) -
                     std::complex<double>(detail::conj_scalar(m(j, i))));
  return std::sqrt(s);
}

template <class S>
bool is_hermitian(const DenseMatrix<S>& m, double rel_tol) {
  return hermiticity_error(m) <= rel_tol * std::max(1.0, frobenius_norm(m));
}

/// (M + M^dagger)/2.
template <class S>
DenseMatrix<S> hermitize(const DenseMatrix<S>& m) {
  DenseMatrix<S> h(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j)
      h(i, j) = (m(i, j) + detail::conj_scalar(m(j, i))) * 0.5;
  return h;
}

/// Tensor product with subsystem 1 on the slow (left) index:
/// (A kron B)[(i*dB+k),(j*dB+l)] = A[i,j]*B[k,l].
template <class S>
DenseMatrix<S> kron(const DenseMatrix<S>& a, const DenseMatrix<S>& b) {
  const int da = a.dim(), db = b.dim();
  DenseMatrix<S> k(da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) {
      const S aij = a(i, j);
      if (aij == S{}) continue;
      for (int p = 0; p < db; ++p)
        for (int q = 0; q < db; ++q) k(i * db + p, j * db + q) = aij * b(p, q);
    }
  return k;
}

/// Partial trace of a bipartite operator on C^d (x) C^d.
/// side = 2 traces out the second subsystem (returns the marginal of subsystem 1),
/// side = 1 traces out the first.
template <class S>
DenseMatrix<S> partial_trace(const DenseMatrix<S>& x, int side, int d) {
  if (d < 1 || x.dim() != d * d)
    throw DimensionError("partial_trace: operator dimension must be d*d");
  if (side != 1 && side != 2) throw DimensionError("partial_trace: side must be 1 or 2");
  DenseMatrix<S> r(d);
  if (side == 2) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        S s{};
        for (int k = 0; k < d; ++k) s += x(i * d + k, j * d + k);
        r(i, j) = s;
      }
  } else {
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        S s{};
        for (int i = 0; i < d; ++i) s += x(i * d + k, i * d + l);
        r(k, l) = s;
      }
  }
  return r;
}

}  // namespace qwot
