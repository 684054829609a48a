#pragma once

/// @file gf.hpp
/// @brief Dense exact linear algebra over prime fields GF(p), p < 2^16.
///
/// Everything in the library that touches a linear map goes through this
/// header: window maps, kernels of induced systems, inverse-rule searches and
/// shadowing solves. Elimination always picks the first nonzero entry in a
/// column as pivot, so every routine is deterministic for identical input.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nucalab {

using Scalar = std::uint32_t;
using Vec = std::vector<Scalar>;

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr std::uint32_t kMaxModulus = 1u << 16;

inline bool is_prime(std::uint32_t n) {
  if (n < 2) return false;
  for (std::uint32_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Arithmetic in GF(p). Values are kept in [0, p).
class PrimeField {
 public:
  explicit PrimeField(std::uint32_t p) : p_(p) {
    if (p >= kMaxModulus || !is_prime(p))
      throw ContractViolation("modulus must be a prime below 2^16, got " + std::to_string(p));
  }

  std::uint32_t modulus() const { return p_; }

  Scalar reduce(std::int64_t v) const {
    auto r = v % static_cast<std::int64_t>(p_);
    return static_cast<Scalar>(r < 0 ? r + p_ : r);
  }
  Scalar add(Scalar a, Scalar b) const { return (a + b) % p_; }
  Scalar sub(Scalar a, Scalar b) const { return (a + p_ - b) % p_; }
  Scalar neg(Scalar a) const { return a == 0 ? 0 : p_ - a; }
  Scalar mul(Scalar a, Scalar b) const {
    return static_cast<Scalar>((static_cast<std::uint64_t>(a) * b) % p_);
  }
  Scalar pow(Scalar a, std::uint64_t e) const {
    Scalar r = 1 % p_;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  Scalar inv(Scalar a) const {
    if (a % p_ == 0) throw ContractViolation("inverse of zero in GF(p)");
    return pow(a, p_ - 2);
  }

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  std::uint32_t p_;
};

inline bool is_zero(std::span<const Scalar> v) {
  for (auto x : v)
    if (x != 0) return false;
  return true;
}

inline Vec add(const PrimeField& f, std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.size() != b.size()) throw ContractViolation("vector length mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = f.add(a[i], b[i]);
  return r;
}

inline Scalar dot(const PrimeField& f, std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.size() != b.size()) throw ContractViolation("vector length mismatch");
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc = (acc + static_cast<std::uint64_t>(a[i]) * b[i]) % f.modulus();
  return static_cast<Scalar>(acc);
}

/// Row-major dense matrix over GF(p).
class Matrix {
 public:
  Matrix() : Matrix(0, 0, 2) {}
  Matrix(std::size_t rows, std::size_t cols, std::uint32_t p)
      : rows_(rows), cols_(cols), field_(p), data_(rows * cols, 0) {}

  static Matrix identity(std::size_t n, std::uint32_t p) {
    Matrix m(n, n, p);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }

  /// Builds from nested rows; entries are reduced mod p. All rows must have equal length.
  static Matrix from_rows(const std::vector<std::vector<std::int64_t>>& rows, std::uint32_t p) {
    std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix m(rows.size(), cols, p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw ContractViolation("ragged matrix rows");
      for (std::size_t j = 0; j < cols; ++j) m.set(i, j, m.field_.reduce(rows[i][j]));
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint32_t modulus() const { return field_.modulus(); }
  const PrimeField& field() const { return field_; }

  Scalar operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, Scalar v) { data_[r * cols_ + c] = v % field_.modulus(); }
  void add_to(std::size_t r, std::size_t c, Scalar v) {
    auto& e = data_[r * cols_ + c];
    e = field_.add(e, v % field_.modulus());
  }

  std::span<const Scalar> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<Scalar> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  bool is_zero() const { return nucalab::is_zero(data_); }

  Vec apply(std::span<const Scalar> x) const {
    if (x.size() != cols_) throw ContractViolation("matrix-vector dimension mismatch");
    Vec y(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(field_, row(i), x);
    return y;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_ || a.modulus() != b.modulus())
      throw ContractViolation("matrix product dimension/modulus mismatch");
    Matrix c(a.rows_, b.cols_, a.modulus());
    const std::uint64_t p = a.modulus();
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t l = 0; l < a.cols_; ++l) {
        std::uint64_t ail = a(i, l);
        if (ail == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          c.data_[i * c.cols_ + j] = static_cast<Scalar>((c.data_[i * c.cols_ + j] + ail * b(l, j)) % p);
      }
    return c;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || a.modulus() != b.modulus())
      throw ContractViolation("matrix sum dimension/modulus mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] = c.field_.add(c.data_[i], b.data_[i]);
    return c;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.modulus() == b.modulus() && a.data_ == b.data_;
  }

  std::string str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < rows_; ++i) {
      os << (i ? ";" : "");
      for (std::size_t j = 0; j < cols_; ++j) os << (j ? " " : "") << (*this)(i, j);
    }
    os << ']';
    return os.str();
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  PrimeField field_;
  std::vector<Scalar> data_;
};

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows(), m.modulus());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t.set(j, i, m(i, j));
  return t;
}

/// Reduced row echelon form together with its pivot columns.
struct Echelon {
  Matrix reduced;
  std::vector<std::size_t> pivots;  // pivots[i] = pivot column of row i
};

/// Gauss-Jordan elimination. Only the first `pivot_cols` columns are eligible
/// as pivots; the remaining columns (an augmented right-hand side) ride along.
inline Echelon row_reduce(Matrix m, std::size_t pivot_cols) {
  const auto& f = m.field();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < pivot_cols && r < m.rows(); ++c) {
    std::size_t piv = r;
    while (piv < m.rows() && m(piv, c) == 0) ++piv;
    if (piv == m.rows()) continue;
    if (piv != r) {
      auto a = m.row(piv);
      auto b = m.row(r);
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(a[j], b[j]);
    }
    Scalar inv = f.inv(m(r, c));
    auto pr = m.row(r);
    for (std::size_t j = c; j < m.cols(); ++j) pr[j] = f.mul(pr[j], inv);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r) continue;
      Scalar factor = m(i, c);
      if (factor == 0) continue;
      auto ri = m.row(i);
      const std::uint64_t p = f.modulus();
      const std::uint64_t nf = p - factor;
      for (std::size_t j = c; j < m.cols(); ++j)
        if (pr[j]) ri[j] = static_cast<Scalar>((ri[j] + nf * pr[j]) % p);
    }
    pivots.push_back(c);
    ++r;
  }
  return {std::move(m), std::move(pivots)};
}

inline Echelon row_reduce(const Matrix& m) { return row_reduce(m, m.cols()); }

inline std::size_t rank(const Matrix& m) { return row_reduce(m).pivots.size(); }

/// Columns of `m` that carry pivots; those columns of `m` form a basis of its image.
inline std::vector<std::size_t> pivot_columns(const Matrix& m) { return row_reduce(m).pivots; }

namespace detail {

inline std::vector<Vec> kernel_from_echelon(const Echelon& e, std::size_t cols) {
  const auto& f = e.reduced.field();
  std::vector<char> is_pivot(cols, 0);
  for (auto c : e.pivots) is_pivot[c] = 1;
  std::vector<Vec> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    Vec v(cols, 0);
    v[free] = 1;
    for (std::size_t i = 0; i < e.pivots.size(); ++i) v[e.pivots[i]] = f.neg(e.reduced(i, free));
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace detail

/// Basis of the right null space. Each vector has a single 1 on its own free
/// column and zeros on every other free column.
inline std::vector<Vec> kernel_basis(const Matrix& m) {
  return detail::kernel_from_echelon(row_reduce(m), m.cols());
}

struct AffineSolution {
  std::optional<Vec> particular;
  std::vector<Vec> kernel_basis;
};

/// Solves a·x = b. The particular solution sets every free variable to zero.
inline AffineSolution solve_affine(const Matrix& a, std::span<const Scalar> b) {
  if (a.rows() != b.size()) throw ContractViolation("solve_affine: a.rows() != b.size()");
  Matrix aug(a.rows(), a.cols() + 1, a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug.set(i, j, a(i, j));
    aug.set(i, a.cols(), b[i]);
  }
  Echelon e = row_reduce(std::move(aug), a.cols());
  AffineSolution sol;
  sol.kernel_basis = detail::kernel_from_echelon(e, a.cols());
  const std::size_t r = e.pivots.size();
  for (std::size_t i = r; i < a.rows(); ++i)
    if (e.reduced(i, a.cols()) != 0) return sol;
  Vec x(a.cols(), 0);
  for (std::size_t i = 0; i < r; ++i) x[e.pivots[i]] = e.reduced(i, a.cols());
  sol.particular = std::move(x);
  return sol;
}

/// Inverse of a square matrix, or nullopt when singular.
inline std::optional<Matrix> inverse(const Matrix& a) {
  if (a.rows() != a.cols()) throw ContractViolation("inverse: matrix is not square");
  const std::size_t n = a.rows();
  Matrix aug(n, 2 * n, a.modulus());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug.set(i, j, a(i, j));
    aug.set(i, n + i, 1);
  }
  Echelon e = row_reduce(std::move(aug), n);
  if (e.pivots.size() != n) return std::nullopt;
  Matrix inv(n, n, a.modulus());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv.set(i, j, e.reduced(i, n + j));
  return inv;
}

}  // namespace nucalab
