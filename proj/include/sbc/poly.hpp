#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbc {

/// Exponent vector of a single monomial. The number of variables is the
/// length of `e`. Comparison is graded lexicographic: total degree first,
/// then lexicographic on the exponents with x1 ranked highest.
struct Monomial {
  std::vector<int> e;

  Monomial() = default;
  explicit Monomial(std::vector<int> exps) : e(std::move(exps)) {}
  static Monomial unit(int nvars) { return Monomial(std::vector<int>(nvars, 0)); }
  static Monomial var(int nvars, int i, int power = 1) {
    Monomial m = unit(nvars);
    m.e.at(static_cast<size_t>(i)) = power;
    return m;
  }

  int nvars() const { return static_cast<int>(e.size()); }
  int degree() const { return std::accumulate(e.begin(), e.end(), 0); }
  bool is_unit() const { return degree() == 0; }

  Monomial operator*(const Monomial& o) const {
    Monomial r(*this);
    if (o.e.size() != e.size()) throw std::invalid_argument("monomial nvars mismatch");
    for (size_t i = 0; i < e.size(); ++i) r.e[i] += o.e[i];
    return r;
  }

  bool operator==(const Monomial& o) const { return e == o.e; }
  bool operator!=(const Monomial& o) const { return !(*this == o); }

  // graded lex, x1 > x2 > ... : higher exponent on an earlier variable wins
  bool operator<(const Monomial& o) const {
    const int da = degree(), db = o.degree();
    if (da != db) return da < db;
    for (size_t i = 0; i < e.size(); ++i)
      if (e[i] != o.e[i]) return e[i] > o.e[i];
    return false;
  }

  double eval(const std::vector<double>& pt) const {
    double v = 1.0;
    for (size_t i = 0; i < e.size(); ++i)
      for (int k = 0; k < e[i]; ++k) v *= pt[i];
    return v;
  }
};

/// Sparse multivariate polynomial with double coefficients. Zero
/// coefficients are never stored; the zero polynomial has an empty term map
/// and degree() reports the -1 sentinel.
class Polynomial {
 public:
  Polynomial() : nvars_(0) {}
  explicit Polynomial(int nvars) : nvars_(nvars) {
    if (nvars < 0) throw std::invalid_argument("nvars must be >= 0");
  }

  static Polynomial zero(int nvars) { return Polynomial(nvars); }
  static Polynomial constant(int nvars, double c) {
    Polynomial p(nvars);
    p.add_term(Monomial::unit(nvars), c);
    return p;
  }
  static Polynomial variable(int nvars, int i) {
    Polynomial p(nvars);
    p.add_term(Monomial::var(nvars, i), 1.0);
    return p;
  }
  static Polynomial from_monomial(const Monomial& m, double c = 1.0) {
    Polynomial p(m.nvars());
    p.add_term(m, c);
    return p;
  }

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }
  const std::map<Monomial, double>& terms() const { return terms_; }

  /// Degree of the zero polynomial is -1 by convention.
  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  double coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }
  double constant_term() const { return coeff(Monomial::unit(nvars_)); }

  void add_term(const Monomial& m, double c) {
    if (m.nvars() != nvars_) throw std::invalid_argument("monomial nvars mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  Polynomial operator+(const Polynomial& q) const {
    require_same_nvars(q);
    Polynomial r(*this);
    for (const auto& [m, c] : q.terms_) r.add_term(m, c);
    return r;
  }
  Polynomial operator-(const Polynomial& q) const {
    require_same_nvars(q);
    Polynomial r(*this);
    for (const auto& [m, c] : q.terms_) r.add_term(m, -c);
    return r;
  }
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial operator*(double s) const {
    Polynomial r(nvars_);
    if (s == 0.0) return r;
    for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
    return r;
  }
  Polynomial operator*(const Polynomial& q) const {
    require_same_nvars(q);
    Polynomial r(nvars_);
    for (const auto& [ma, ca] : terms_)
      for (const auto& [mb, cb] : q.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }
  Polynomial& operator+=(const Polynomial& q) { return *this = *this + q; }
  Polynomial& operator-=(const Polynomial& q) { return *this = *this - q; }

  Polynomial pow(int k) const {
    if (k < 0) throw std::invalid_argument("negative power");
    Polynomial r = constant(nvars_, 1.0);
    for (int i = 0; i < k; ++i) r = r * (*this);
    return r;
  }

  double eval(const std::vector<double>& pt) const {
    if (static_cast<int>(pt.size()) != nvars_)
      throw std::invalid_argument("eval: point dimension mismatch");
    // per-variable power tables keep batch evaluation cheap
    int maxd = 0;
    for (const auto& [m, c] : terms_)
      for (int ei : m.e) maxd = std::max(maxd, ei);
    std::vector<double> pw(static_cast<size_t>(nvars_) * (maxd + 1), 1.0);
    for (int i = 0; i < nvars_; ++i)
      for (int d = 1; d <= maxd; ++d)
        pw[i * (maxd + 1) + d] = pw[i * (maxd + 1) + d - 1] * pt[i];
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c;
      for (int i = 0; i < nvars_; ++i) t *= pw[i * (maxd + 1) + m.e[i]];
      acc += t;
    }
    return acc;
  }

  /// Substitute variable i by exprs[i] (all exprs over a common nvars) and
  /// expand fully.
  Polynomial substitute(const std::vector<Polynomial>& exprs) const {
    if (static_cast<int>(exprs.size()) != nvars_)
      throw std::invalid_argument("substitute: need one expression per variable");
    int target = exprs.empty() ? 0 : exprs[0].nvars();
    for (const auto& ex : exprs)
      if (ex.nvars() != target) throw std::invalid_argument("substitute: expression nvars mismatch");
    // cache powers of each expression up to its needed degree
    std::vector<int> need(nvars_, 0);
    for (const auto& [m, c] : terms_)
      for (int i = 0; i < nvars_; ++i) need[i] = std::max(need[i], m.e[i]);
    std::vector<std::vector<Polynomial>> pw(nvars_);
    for (int i = 0; i < nvars_; ++i) {
      pw[i].push_back(Polynomial::constant(target, 1.0));
      for (int d = 1; d <= need[i]; ++d) pw[i].push_back(pw[i].back() * exprs[i]);
    }
    Polynomial r(target);
    for (const auto& [m, c] : terms_) {
      Polynomial t = Polynomial::constant(target, c);
      for (int i = 0; i < nvars_; ++i)
        if (m.e[i] > 0) t = t * pw[i][m.e[i]];
      r += t;
    }
    return r;
  }

  /// Re-embed into a larger variable space, mapping variable i to
  /// variable offset+i.
  Polynomial embed(int total_nvars, int offset) const {
    if (offset < 0 || offset + nvars_ > total_nvars)
      throw std::invalid_argument("embed: window out of range");
    Polynomial r(total_nvars);
    for (const auto& [m, c] : terms_) {
      Monomial mm = Monomial::unit(total_nvars);
      for (int i = 0; i < nvars_; ++i) mm.e[offset + i] = m.e[i];
      r.terms_[mm] = c;
    }
    return r;
  }

  /// Drop terms with |coeff| <= tol (tol = 0 keeps exact semantics).
  Polynomial pruned(double tol) const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_)
      if (std::abs(c) > tol) r.terms_[m] = c;
    return r;
  }

  double max_abs_coeff() const {
    double v = 0.0;
    for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
    return v;
  }

  /// Human-readable form; threshold mirrors the usual printing convention
  /// of dropping negligible coefficients for display only.
  std::string str(double display_threshold = 0.0) const;

 private:
  void require_same_nvars(const Polynomial& q) const {
    if (q.nvars_ != nvars_) throw std::invalid_argument("polynomial nvars mismatch");
  }
  int nvars_;
  std::map<Monomial, double> terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

/// Dense grid of polynomials sharing one variable space.
class MatrixPolynomial {
 public:
  MatrixPolynomial() : rows_(0), cols_(0), nvars_(0) {}
  MatrixPolynomial(int rows, int cols, int nvars)
      : rows_(rows), cols_(cols), nvars_(nvars),
        entries_(static_cast<size_t>(rows) * cols, Polynomial(nvars)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("bad matrix shape");
  }

  static MatrixPolynomial identity(int n, int nvars) {
    MatrixPolynomial m(n, n, nvars);
    for (int i = 0; i < n; ++i) m.at(i, i) = Polynomial::constant(nvars, 1.0);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nvars() const { return nvars_; }

  Polynomial& at(int r, int c) { return entries_[static_cast<size_t>(r) * cols_ + c]; }
  const Polynomial& at(int r, int c) const { return entries_[static_cast<size_t>(r) * cols_ + c]; }

  int degree() const {
    int d = -1;
    for (const auto& p : entries_) d = std::max(d, p.degree());
    return d;
  }

  MatrixPolynomial operator*(const MatrixPolynomial& o) const {
    if (o.rows_ != cols_ || o.nvars_ != nvars_) throw std::invalid_argument("matmul shape/nvars mismatch");
    MatrixPolynomial r(rows_, o.cols_, nvars_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < o.cols_; ++j) {
        Polynomial acc(nvars_);
        for (int k = 0; k < cols_; ++k) acc += at(i, k) * o.at(k, j);
        r.at(i, j) = acc;
      }
    return r;
  }
  MatrixPolynomial operator+(const MatrixPolynomial& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_ || o.nvars_ != nvars_)
      throw std::invalid_argument("matadd shape/nvars mismatch");
    MatrixPolynomial r(rows_, cols_, nvars_);
    for (size_t i = 0; i < entries_.size(); ++i) r.entries_[i] = entries_[i] + o.entries_[i];
    return r;
  }
  MatrixPolynomial transpose() const {
    MatrixPolynomial r(cols_, rows_, nvars_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

 private:
  int rows_, cols_, nvars_;
  std::vector<Polynomial> entries_;
};

/// All monomials with degree <= max_degree in graded-lex order.
/// Count is C(nvars + max_degree, max_degree).
inline std::vector<Monomial> monomial_basis(int nvars, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("max_degree must be >= 0");
  std::vector<Monomial> out;
  std::vector<int> cur(nvars, 0);
  // enumerate recursively, then sort into graded-lex order
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == nvars) {
      out.emplace_back(cur);
      return;
    }
    for (int d = 0; d <= left; ++d) {
      cur[i] = d;
      rec(i + 1, left - d);
    }
    cur[i] = 0;
  };
  if (nvars == 0) {
    out.emplace_back(std::vector<int>{});
  } else {
    rec(0, max_degree);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Monomials filtered by per-variable-group degree caps and a total cap.
/// `groups` partitions [0, nvars) as consecutive ranges given by sizes.
inline std::vector<Monomial> monomial_basis_grouped(int nvars, const std::vector<int>& group_sizes,
                                                    const std::vector<int>& group_caps, int total_cap) {
  if (std::accumulate(group_sizes.begin(), group_sizes.end(), 0) != nvars)
    throw std::invalid_argument("group sizes must sum to nvars");
  if (group_sizes.size() != group_caps.size())
    throw std::invalid_argument("one cap per group required");
  std::vector<Monomial> all = monomial_basis(nvars, total_cap);
  std::vector<Monomial> out;
  for (const auto& m : all) {
    bool ok = true;
    int at = 0;
    for (size_t g = 0; g < group_sizes.size() && ok; ++g) {
      int d = 0;
      for (int i = 0; i < group_sizes[g]; ++i) d += m.e[at + i];
      if (d > group_caps[g]) ok = false;
      at += group_sizes[g];
    }
    if (ok) out.push_back(m);
  }
  return out;
}

inline std::string Polynomial::str(double display_threshold) const {
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    if (std::abs(c) <= display_threshold) continue;
    if (!first) os << (c >= 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    first = false;
    os << std::abs(c);
    for (int i = 0; i < nvars_; ++i) {
      if (m.e[i] == 0) continue;
      os << "*x" << (i + 1);
      if (m.e[i] > 1) os << "^" << m.e[i];
    }
  }
  if (first) os << "0";
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const Polynomial& p) { return os << p.str(); }

}  // namespace sbc
