#pragma once

#include <map>
#include <vector>

#include "sbc/poly.hpp"

namespace sbc {

/// Affine expression c0 + sum_i coeffs[i] * var(ids[i]) over decision
/// variables of an SdpProblem. Kept sorted by variable id.
struct AffExpr {
  double c0 = 0.0;
  std::vector<std::pair<int, double>> lin;

  static AffExpr constant(double c) {
    AffExpr a;
    a.c0 = c;
    return a;
  }
  static AffExpr var(int id, double scale = 1.0) {
    AffExpr a;
    a.lin.emplace_back(id, scale);
    return a;
  }

  bool is_zero() const { return c0 == 0.0 && lin.empty(); }

  void add(const AffExpr& o, double s = 1.0) {
    c0 += s * o.c0;
    if (o.lin.empty()) return;
    std::vector<std::pair<int, double>> merged;
    merged.reserve(lin.size() + o.lin.size());
    size_t i = 0, j = 0;
    while (i < lin.size() || j < o.lin.size()) {
      if (j == o.lin.size() || (i < lin.size() && lin[i].first < o.lin[j].first)) {
        merged.push_back(lin[i++]);
      } else if (i == lin.size() || o.lin[j].first < lin[i].first) {
        merged.emplace_back(o.lin[j].first, s * o.lin[j].second);
        ++j;
      } else {
        double v = lin[i].second + s * o.lin[j].second;
        if (v != 0.0) merged.emplace_back(lin[i].first, v);
        ++i;
        ++j;
      }
    }
    lin = std::move(merged);
  }

  void scale(double s) {
    c0 *= s;
    if (s == 0.0) {
      lin.clear();
      return;
    }
    for (auto& [id, v] : lin) v *= s;
  }

  double eval(const std::vector<double>& values) const {
    double v = c0;
    for (const auto& [id, w] : lin) v += w * values[static_cast<size_t>(id)];
    return v;
  }
};

/// Polynomial whose coefficients are affine in SDP decision variables.
/// This is the object SOS constraints are assembled from: products of a
/// numeric polynomial with an unknown one stay affine.
class LinPoly {
 public:
  LinPoly() : nvars_(0) {}
  explicit LinPoly(int nvars) : nvars_(nvars) {}

  static LinPoly from_poly(const Polynomial& p) {
    LinPoly r(p.nvars());
    for (const auto& [m, c] : p.terms()) r.terms_[m] = AffExpr::constant(c);
    return r;
  }

  /// Unknown polynomial: one decision variable per basis monomial.
  static LinPoly unknown(int nvars, const std::vector<Monomial>& basis, const std::vector<int>& var_ids) {
    if (basis.size() != var_ids.size()) throw std::invalid_argument("unknown poly: basis/id size mismatch");
    LinPoly r(nvars);
    for (size_t i = 0; i < basis.size(); ++i) r.terms_[basis[i]] = AffExpr::var(var_ids[i]);
    return r;
  }

  int nvars() const { return nvars_; }
  const std::map<Monomial, AffExpr>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const Monomial& m, const AffExpr& a, double s = 1.0) {
    if (m.nvars() != nvars_) throw std::invalid_argument("linpoly: monomial nvars mismatch");
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      AffExpr e;
      e.add(a, s);
      if (!e.is_zero()) terms_.emplace(m, std::move(e));
    } else {
      it->second.add(a, s);
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  void add(const LinPoly& o, double s = 1.0) {
    if (o.nvars_ != nvars_) throw std::invalid_argument("linpoly add: nvars mismatch");
    for (const auto& [m, a] : o.terms_) add_term(m, a, s);
  }
  void add(const Polynomial& p, double s = 1.0) { add(from_poly(p), s); }

  /// Multiply by a numeric polynomial (keeps affinity in the unknowns).
  LinPoly times(const Polynomial& p) const {
    if (p.nvars() != nvars_) throw std::invalid_argument("linpoly times: nvars mismatch");
    LinPoly r(nvars_);
    for (const auto& [m, a] : terms_)
      for (const auto& [pm, pc] : p.terms()) r.add_term(m * pm, a, pc);
    return r;
  }

  /// Numeric snapshot given decision-variable values.
  Polynomial eval_vars(const std::vector<double>& values) const {
    Polynomial r(nvars_);
    for (const auto& [m, a] : terms_) r.add_term(m, a.eval(values));
    return r;
  }

  int degree() const {
    int d = -1;
    for (const auto& [m, a] : terms_) d = std::max(d, m.degree());
    return d;
  }

 private:
  int nvars_;
  std::map<Monomial, AffExpr> terms_;
};

/// Compose an unknown-coefficient polynomial sum_mu coef_mu * x^mu with
/// numeric argument polynomials: result = sum_mu coef_mu * prod_i args[i]^mu_i.
/// `coeffs` maps each basis monomial of the outer polynomial to its AffExpr.
inline LinPoly compose_unknown(const std::vector<Monomial>& outer_basis,
                               const std::vector<AffExpr>& outer_coeffs,
                               const std::vector<Polynomial>& args) {
  if (outer_basis.size() != outer_coeffs.size())
    throw std::invalid_argument("compose_unknown: basis/coeff size mismatch");
  if (args.empty()) throw std::invalid_argument("compose_unknown: no arguments");
  const int target = args[0].nvars();
  const int outer_nvars = outer_basis.empty() ? 0 : outer_basis[0].nvars();
  if (static_cast<int>(args.size()) != outer_nvars)
    throw std::invalid_argument("compose_unknown: need one argument per outer variable");
  std::vector<int> need(args.size(), 0);
  for (const auto& m : outer_basis)
    for (size_t i = 0; i < args.size(); ++i) need[i] = std::max(need[i], m.e[i]);
  std::vector<std::vector<Polynomial>> pw(args.size());
  for (size_t i = 0; i < args.size(); ++i) {
    pw[i].push_back(Polynomial::constant(target, 1.0));
    for (int d = 1; d <= need[i]; ++d) pw[i].push_back(pw[i].back() * args[i]);
  }
  LinPoly out(target);
  for (size_t t = 0; t < outer_basis.size(); ++t) {
    Polynomial mono = Polynomial::constant(target, 1.0);
    for (size_t i = 0; i < args.size(); ++i)
      if (outer_basis[t].e[i] > 0) mono = mono * pw[i][outer_basis[t].e[i]];
    for (const auto& [m, c] : mono.terms()) out.add_term(m, outer_coeffs[t], c);
  }
  return out;
}

}  // namespace sbc
