#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mmsim/errors.hpp"
#include "mmsim/tolerance.hpp"

namespace mmsim {

using Complex = std::complex<double>;

// Dense row-major complex matrix. Square matrices may carry a tensor
// factorisation of their dimension (outermost factor first); operations that
// act on subsystems read it, everything else ignores it.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  explicit CMat(std::size_t dim) : CMat(dim, dim) {}

  static CMat zeros(std::size_t dim) { return CMat(dim); }

  static CMat identity(std::size_t dim) {
    CMat out(dim);
    for (std::size_t i = 0; i < dim; ++i) out(i, i) = 1.0;
    return out;
  }

  static CMat from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    CMat out(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("from_rows: ragged rows");
      std::size_t j = 0;
      for (const auto& v : row) out(i, j++) = v;
      ++i;
    }
    return out;
  }

  static CMat diagonal(const std::vector<double>& diag) {
    CMat out(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) out(i, i) = diag[i];
    return out;
  }

  // |i><j| in dimension dim.
  static CMat unit(std::size_t dim, std::size_t i, std::size_t j) {
    CMat out(dim);
    out(i, j) = 1.0;
    return out;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  std::size_t dim() const {
    if (!is_square()) throw DimensionError("dim() on a non-square matrix");
    return rows_;
  }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

  const std::vector<std::size_t>& factor_dims() const { return factors_; }
  CMat& set_factor_dims(std::vector<std::size_t> dims) {
    const std::size_t prod =
        std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    if (!is_square() || prod != rows_)
      throw DimensionError("factor dims do not multiply to the matrix dimension");
    factors_ = std::move(dims);
    return *this;
  }
  CMat with_factor_dims(std::vector<std::size_t> dims) const {
    CMat out = *this;
    out.set_factor_dims(std::move(dims));
    return out;
  }

  CMat adjoint() const {
    CMat out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    out.factors_ = factors_;
    return out;
  }

  CMat transpose() const {
    CMat out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    out.factors_ = factors_;
    return out;
  }

  CMat conj() const {
    CMat out = *this;
    for (auto& v : out.data_) v = std::conj(v);
    return out;
  }

  Complex trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  CMat& operator+=(const CMat& other) {
    check_same_shape(other, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  CMat& operator-=(const CMat& other) {
    check_same_shape(other, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  CMat& operator*=(Complex s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  // Adds s * other without a temporary; hot in the realisation code.
  CMat& add_scaled(const CMat& other, Complex s) {
    check_same_shape(other, "add_scaled");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
    return *this;
  }

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
  friend CMat operator*(CMat a, Complex s) { return a *= s; }
  friend CMat operator*(Complex s, CMat a) { return a *= s; }
  friend CMat operator*(CMat a, double s) { return a *= Complex(s); }
  friend CMat operator*(double s, CMat a) { return a *= Complex(s); }

  friend CMat operator*(const CMat& a, const CMat& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product: inner dimensions differ");
    CMat out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      Complex* orow = &out.data_[i * out.cols_];
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex(0.0)) continue;
        const Complex* brow = &b.data_[k * b.cols_];
        for (std::size_t j = 0; j < b.cols_; ++j) orow[j] += aik * brow[j];
      }
    }
    return out;
  }

 private:
  void check_same_shape(const CMat& other, const char* what) const {
    if (rows_ != other.rows_ || cols_ != other.cols_)
      throw DimensionError(std::string(what) + ": shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
  std::vector<std::size_t> factors_;
};

inline double distance(const CMat& a, const CMat& b) { return (a - b).frobenius_norm(); }

// ||a - b||_F <= tol * max(1, ||b||_F)
inline bool approx_equal(const CMat& a, const CMat& b, double tol) {
  return within(distance(a, b), b.frobenius_norm(), tol);
}

inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

inline bool is_hermitian(const CMat& a, double tol) {
  if (!a.is_square()) return false;
  return within(distance(a, a.adjoint()), a.frobenius_norm(), tol);
}

// <a, b> = Tr(a^dagger b)
inline Complex hs_inner(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("hs_inner: shape mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += std::conj(a.data()[i]) * b.data()[i];
  return s;
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex(0.0)) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  if (a.is_square() && b.is_square()) {
    std::vector<std::size_t> f = a.factor_dims().empty() ? std::vector<std::size_t>{a.rows()}
                                                          : a.factor_dims();
    if (b.factor_dims().empty())
      f.push_back(b.rows());
    else
      f.insert(f.end(), b.factor_dims().begin(), b.factor_dims().end());
    out.set_factor_dims(std::move(f));
  }
  return out;
}

inline CMat kron(std::initializer_list<CMat> factors) {
  if (factors.size() == 0) throw DimensionError("kron of nothing");
  auto it = factors.begin();
  CMat out = *it++;
  for (; it != factors.end(); ++it) out = kron(out, *it);
  return out;
}

// Traces out every factor not listed in `keep`. `keep` must be strictly
// increasing; the result carries the kept factor dims.
inline CMat partial_trace(const CMat& a, const std::vector<std::size_t>& factor_dims,
                          const std::vector<std::size_t>& keep) {
  const std::size_t total = std::accumulate(factor_dims.begin(), factor_dims.end(), std::size_t{1},
                                            std::multiplies<>());
  if (!a.is_square() || total != a.rows())
    throw DimensionError("partial_trace: factor dims do not match the matrix");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= factor_dims.size()) throw DimensionError("partial_trace: keep index out of range");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw DimensionError("partial_trace: keep indices must be strictly increasing");
  }

  const std::size_t nf = factor_dims.size();
  std::vector<std::size_t> stride(nf, 1);
  for (std::size_t f = nf; f-- > 1;) stride[f - 1] = stride[f] * factor_dims[f];

  std::vector<bool> kept(nf, false);
  for (auto k : keep) kept[k] = true;

  // Offsets into the full index contributed by each kept / traced multi-index.
  auto offsets = [&](bool want_kept) {
    std::vector<std::size_t> offs{0};
    for (std::size_t f = 0; f < nf; ++f) {
      if (kept[f] != want_kept) continue;
      std::vector<std::size_t> next;
      next.reserve(offs.size() * factor_dims[f]);
      for (auto o : offs)
        for (std::size_t v = 0; v < factor_dims[f]; ++v) next.push_back(o + v * stride[f]);
      offs = std::move(next);
    }
    return offs;
  };
  const auto kept_off = offsets(true);
  const auto traced_off = offsets(false);

  CMat out(kept_off.size());
  for (std::size_t i = 0; i < kept_off.size(); ++i)
    for (std::size_t j = 0; j < kept_off.size(); ++j) {
      Complex s = 0.0;
      for (auto t : traced_off) s += a(kept_off[i] + t, kept_off[j] + t);
      out(i, j) = s;
    }
  std::vector<std::size_t> kept_dims;
  for (auto k : keep) kept_dims.push_back(factor_dims[k]);
  if (kept_dims.empty()) kept_dims.push_back(1);
  out.set_factor_dims(kept_dims);
  return out;
}

struct HermEig {
  std::vector<double> values;  // ascending
  CMat vectors;                // column j belongs to values[j]
};

namespace detail {

// One two-sided complex Jacobi rotation zeroing a(p, q).
inline void jacobi_rotate(CMat& a, CMat& v, std::size_t p, std::size_t q) {
  const std::size_t n = a.rows();
  const Complex apq = a(p, q);
  const double mag = std::abs(apq);
  if (mag == 0.0) return;
  const Complex phase = apq / mag;
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();

  const double theta = (aqq - app) / (2.0 * mag);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (!std::isfinite(theta * theta)) t = 0.5 / std::abs(theta);
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const Complex g_pp = c;
  const Complex g_pq = s;
  const Complex g_qp = -s * std::conj(phase);
  const Complex g_qq = c * std::conj(phase);

  for (std::size_t k = 0; k < n; ++k) {
    const Complex akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * g_pp + akq * g_qp;
    a(k, q) = akp * g_pq + akq * g_qq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Complex apk = a(p, k), aqk = a(q, k);
    a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
    a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = app - t * mag;
  a(q, q) = aqq + t * mag;

  for (std::size_t k = 0; k < n; ++k) {
    const Complex vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * g_pp + vkq * g_qp;
    v(k, q) = vkp * g_pq + vkq * g_qq;
  }
}

}  // namespace detail

// Cyclic Jacobi eigensolver for Hermitian input. Eigenvalues come back
// ascending; each eigenvector is rephased so its first non-negligible entry is
// real and positive.
inline HermEig eigh(const CMat& input, double herm_tol = Tolerances{}.herm) {
  if (!input.is_square()) throw DimensionError("eigh: matrix is not square");
  if (!is_hermitian(input, herm_tol)) throw HermiticityError("eigh: matrix is not Hermitian");
  const std::size_t n = input.rows();
  CMat a = hermitian_part(input);
  CMat v = CMat::identity(n);

  const double scale = std::max(a.frobenius_norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-15 * scale) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (std::abs(a(p, q)) > 1e-300) detail::jacobi_rotate(a, v, p, q);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  HermEig out;
  out.values.resize(n);
  out.vectors = CMat(n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.values[col] = a(src, src).real();
    Complex fix = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double m = std::abs(v(r, src));
      if (m > 1e-10) {
        fix = std::conj(v(r, src)) / m;
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, col) = v(r, src) * fix;
  }
  return out;
}

// U diag(f(lambda)) U^dagger
inline CMat spectral_apply(const HermEig& eig, const std::function<double(double)>& f) {
  const std::size_t n = eig.values.size();
  CMat out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = f(eig.values[k]);
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const Complex ui = eig.vectors(i, k) * w;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += ui * std::conj(eig.vectors(j, k));
    }
  }
  return out;
}

inline double min_eigenvalue(const CMat& a, double herm_tol = Tolerances{}.herm) {
  const auto e = eigh(a, herm_tol);
  return e.values.empty() ? 0.0 : e.values.front();
}

inline bool is_psd(const CMat& a, const Tolerances& tol = {}) {
  if (!is_hermitian(a, tol.herm)) return false;
  return min_eigenvalue(a, tol.herm) >= -tol.psd * std::max(1.0, a.frobenius_norm());
}

inline CMat psd_sqrt(const CMat& p, const Tolerances& tol = {}) {
  const auto e = eigh(p, tol.herm);
  if (!e.values.empty() && e.values.front() < -tol.psd * std::max(1.0, p.frobenius_norm()))
    throw NotPSDError("psd_sqrt: matrix has a negative eigenvalue");
  return spectral_apply(e, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
inline CMat project_psd(const CMat& h, double herm_tol = Tolerances{}.herm) {
  const auto e = eigh(h, herm_tol);
  return spectral_apply(e, [](double x) { return x > 0.0 ? x : 0.0; });
}

// Moore-Penrose inverse of a Hermitian PSD matrix, cutting eigenvalues below
// rel_cut * lambda_max.
inline CMat psd_pinv(const CMat& p, double rel_cut) {
  const auto e = eigh(p);
  const double top = e.values.empty() ? 0.0 : std::max(0.0, e.values.back());
  const double cut = rel_cut * top;
  return spectral_apply(e, [cut](double x) { return (x > cut && x > 0.0) ? 1.0 / x : 0.0; });
}

}  // namespace mmsim
