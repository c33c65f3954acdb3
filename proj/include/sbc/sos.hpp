#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbc/affine.hpp"
#include "sbc/ipm.hpp"
#include "sbc/sdp.hpp"

namespace sbc {

/// Gram representation of an SOS constraint: polynomial = Z' G Z over the
/// monomial vector Z, with G a PSD block of the problem.
struct GramForm {
  std::vector<Monomial> basis;
  int block = -1;
  std::string name;
};

struct SosTolerances {
  double tol_eq = 1e-7;    // equality residual accepted on solutions
  double tol_psd = 1e-8;   // eigenvalue slack accepted on PSD blocks
  double infeas_margin = 1e-7;  // phase-1 shift above which we call Infeasible
};

/// Constrain `expr` (affine coefficients in problem variables) to be SOS
/// with Gram basis `basis`. One equality is added per monomial in
/// span(basis x basis); expr must be supported inside the span.
inline GramForm sos_constrain(SdpProblem& prob, const LinPoly& expr, const std::vector<Monomial>& basis,
                              const std::string& name) {
  if (basis.empty()) throw std::invalid_argument("sos_constrain: empty basis");
  const int nv = expr.nvars();
  for (const auto& z : basis)
    if (z.nvars() != nv) throw std::invalid_argument("sos_constrain: basis nvars mismatch");

  GramForm gf;
  gf.basis = basis;
  gf.name = name;
  gf.block = prob.add_psd_block(name, static_cast<int>(basis.size()));

  // span: monomial -> sum of Gram entries mapping to it
  std::map<Monomial, AffExpr> span;
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = i; j < basis.size(); ++j) {
      Monomial mu = basis[i] * basis[j];
      double mult = (i == j) ? 1.0 : 2.0;
      span[mu].add(AffExpr::var(prob.entry_var(gf.block, static_cast<int>(i), static_cast<int>(j))),
                   mult);
    }
  for (const auto& [mu, a] : expr.terms())
    if (span.find(mu) == span.end())
      throw std::invalid_argument("sos_constrain(" + name + "): basis too small for monomial " +
                                  Polynomial::from_monomial(mu).str());
  for (const auto& [mu, gram] : span) {
    AffExpr lhs;
    auto it = expr.terms().find(mu);
    if (it != expr.terms().end()) lhs.add(it->second);
    lhs.add(gram, -1.0);
    prob.add_equality(lhs, 0.0);
  }
  return gf;
}

inline GramForm sos_constrain(SdpProblem& prob, const LinPoly& expr, int basis_degree,
                              const std::string& name) {
  if (basis_degree < (expr.degree() + 1) / 2)
    throw std::invalid_argument("sos_constrain: basis degree below ceil(deg/2)");
  return sos_constrain(prob, expr, monomial_basis(expr.nvars(), basis_degree), name);
}

/// Matrix-SOS membership of a symmetric matrix of LinPoly entries, through
/// the scalarization y' P(x) y with y-degree exactly two. For constant
/// matrices this reduces to a plain PSD constraint on the entries.
inline GramForm matrix_sos_constrain(SdpProblem& prob, const std::vector<std::vector<LinPoly>>& P,
                                     int basis_degree_x, const std::string& name) {
  const int r = static_cast<int>(P.size());
  if (r == 0) throw std::invalid_argument("matrix_sos_constrain: empty matrix");
  const int nx = P[0][0].nvars();
  for (const auto& row : P)
    if (static_cast<int>(row.size()) != r) throw std::invalid_argument("matrix_sos_constrain: not square");
  auto same = [](const LinPoly& a, const LinPoly& b) {
    if (a.terms().size() != b.terms().size()) return false;
    auto ita = a.terms().begin();
    auto itb = b.terms().begin();
    for (; ita != a.terms().end(); ++ita, ++itb) {
      if (!(ita->first == itb->first)) return false;
      if (std::abs(ita->second.c0 - itb->second.c0) > 1e-12) return false;
      if (ita->second.lin != itb->second.lin) return false;
    }
    return true;
  };
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      if (!same(P[a][b], P[b][a]))
        throw std::invalid_argument("matrix_sos_constrain(" + name + "): non-symmetric input");

  const int nv = nx + r;
  // scalarized expr = sum_{a,b} y_a y_b P_ab(x)
  LinPoly expr(nv);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      const LinPoly& e = P[a][b];
      Monomial ym = Monomial::unit(nv);
      ym.e[nx + a] += 1;
      ym.e[nx + b] += 1;
      for (const auto& [m, aff] : e.terms()) {
        Monomial mm = ym;
        for (int i = 0; i < nx; ++i) mm.e[i] += m.e[i];
        expr.add_term(mm, aff);
      }
    }
  // basis: x-monomials of degree <= dx, each multiplied by one y variable
  std::vector<Monomial> xmons = monomial_basis(nx, basis_degree_x);
  std::vector<Monomial> basis;
  basis.reserve(xmons.size() * r);
  for (int a = 0; a < r; ++a)
    for (const auto& xm : xmons) {
      Monomial z = Monomial::unit(nv);
      for (int i = 0; i < nx; ++i) z.e[i] = xm.e[i];
      z.e[nx + a] = 1;
      basis.push_back(z);
    }
  std::sort(basis.begin(), basis.end());
  return sos_constrain(prob, expr, basis, name);
}

/// Rewrite a feasibility problem as the shifted phase-1 program
///   min t   s.t. original equalities with every block B replaced by B - t I,
/// blocks PSD and t >= -1. Strict feasibility of the original problem makes
/// the optimum hit -1; infeasibility pushes t above zero.
struct Phase1 {
  SdpProblem prob;
  int t_var = -1;
  int orig_num_vars = 0;
};

inline Phase1 make_phase1(const SdpProblem& orig) {
  Phase1 ph;
  ph.orig_num_vars = orig.num_vars();
  SdpProblem p;
  // replicate variables in identical id order
  int scalar_idx = 0;
  std::vector<int> block_of_id(orig.num_vars(), -1);
  {
    size_t next_block = 0;
    int id = 0;
    while (id < orig.num_vars()) {
      if (orig.var_owner(id) < 0) {
        p.add_scalar(orig.scalar_names()[scalar_idx++]);
        ++id;
      } else {
        const auto& b = orig.blocks()[next_block++];
        p.add_psd_block(b.name, b.dim);
        id += b.dim * (b.dim + 1) / 2;
      }
    }
  }
  ph.t_var = p.add_scalar("_phase1_t");
  // diagonal-entry lookup
  std::vector<char> is_diag(orig.num_vars(), 0);
  for (size_t bi = 0; bi < orig.blocks().size(); ++bi) {
    const auto& b = orig.blocks()[bi];
    for (int i = 0; i < b.dim; ++i) {
      int off = i * b.dim - i * (i - 1) / 2;
      is_diag[b.first_var + off] = 1;
    }
  }
  for (const auto& eq : orig.equalities()) {
    AffExpr lhs;
    double tcoef = 0.0;
    for (const auto& [id, c] : eq.terms) {
      lhs.add(AffExpr::var(id), c);
      if (is_diag[id]) tcoef -= c;
    }
    if (tcoef != 0.0) lhs.add(AffExpr::var(ph.t_var), tcoef);
    p.add_equality(lhs, eq.rhs);
  }
  // t >= -1 through a slack
  int slack_block = p.add_psd_block("_phase1_slack", 1);
  AffExpr g;
  g.add(AffExpr::var(ph.t_var));
  g.add(AffExpr::var(p.entry_var(slack_block, 0, 0)), -1.0);
  p.add_equality(g, -1.0);
  p.set_objective(AffExpr::var(ph.t_var));
  ph.prob = std::move(p);
  return ph;
}

/// Map a phase-1 solution back onto the original variable ids, folding the
/// t shift into the block diagonals.
inline std::vector<double> phase1_values(const Phase1& ph, const SdpSolution& sol) {
  std::vector<double> vals(sol.values.begin(), sol.values.begin() + ph.orig_num_vars);
  double t = sol.values[static_cast<size_t>(ph.t_var)];
  for (size_t bi = 0; bi + 1 < ph.prob.blocks().size(); ++bi) {  // last block is the slack
    const auto& b = ph.prob.blocks()[bi];
    for (int i = 0; i < b.dim; ++i) {
      int off = i * b.dim - i * (i - 1) / 2;
      vals[static_cast<size_t>(b.first_var + off)] -= t;
    }
  }
  return vals;
}

/// Residual verification: every equality within tol_eq (scaled), every PSD
/// block eigenvalue above -tol_psd (scaled by block norm).
inline bool check_solution(const SdpProblem& prob, const std::vector<double>& vals, double tol_eq,
                           double tol_psd, double* worst_eq = nullptr, double* worst_eig = nullptr) {
  double weq = 0.0;
  for (const auto& eq : prob.equalities()) {
    double acc = -eq.rhs, scale = std::abs(eq.rhs);
    for (const auto& [id, c] : eq.terms) {
      acc += c * vals[static_cast<size_t>(id)];
      scale = std::max(scale, std::abs(c * vals[static_cast<size_t>(id)]));
    }
    weq = std::max(weq, std::abs(acc) / std::max(1.0, scale));
  }
  double weig = 0.0;
  for (size_t bi = 0; bi < prob.blocks().size(); ++bi) {
    const auto& b = prob.blocks()[bi];
    Eigen::MatrixXd M(b.dim, b.dim);
    int id = b.first_var;
    for (int i = 0; i < b.dim; ++i)
      for (int j = i; j < b.dim; ++j) {
        M(i, j) = M(j, i) = vals[static_cast<size_t>(id++)];
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    double scale = std::max(1.0, M.lpNorm<Eigen::Infinity>());
    weig = std::max(weig, -lmin / scale);
  }
  if (worst_eq) *worst_eq = weq;
  if (worst_eig) *worst_eig = weig;
  return weq <= tol_eq && weig <= tol_psd;
}

struct SosResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> values;  // aligned with the input problem's vars
  double objective = 0.0;
  double shift = 0.0;          // phase-1 optimum (feasibility problems)
  std::string message;
};

/// Solve driver. Problems without an objective run through the phase-1
/// shift and report Infeasible when the optimal shift stays positive;
/// problems with an objective are solved directly. Solutions are residual
/// checked; failures are surfaced, never coerced into Infeasible.
inline SosResult solve_sdp(const SdpProblem& prob, const SolverBackend& backend, SolverOptions opts = {},
                           SosTolerances tols = {}) {
  SosResult res;
  const bool feasibility = prob.objective().lin.empty();
  if (!feasibility) {
    SdpSolution sol = backend.solve(prob, opts);
    res.status = sol.status;
    res.message = sol.message;
    if (sol.status == SolveStatus::Optimal) {
      res.values = sol.values;
      res.objective = sol.objective;
      double weq, weig;
      if (!check_solution(prob, res.values, tols.tol_eq, tols.tol_psd, &weq, &weig)) {
        res.status = SolveStatus::NumericalFailure;
        res.message = "solution failed residual check (eq " + std::to_string(weq) + ", eig " +
                      std::to_string(weig) + ")";
      }
    }
    return res;
  }
  Phase1 ph = make_phase1(prob);
  SdpSolution sol = backend.solve(ph.prob, opts);
  if (sol.status != SolveStatus::Optimal) {
    // one retry with tighter tolerance before giving up
    SolverOptions o2 = opts;
    o2.tol = opts.tol * 0.1;
    o2.max_iters = opts.max_iters + 40;
    sol = backend.solve(ph.prob, o2);
    if (sol.status != SolveStatus::Optimal) {
      res.status = SolveStatus::NumericalFailure;
      res.message = sol.message;
      return res;
    }
  }
  double t = sol.values[static_cast<size_t>(ph.t_var)];
  res.shift = t;
  if (t > tols.infeas_margin) {
    res.status = SolveStatus::Infeasible;
    res.message = "phase-1 shift " + std::to_string(t);
    return res;
  }
  res.values = phase1_values(ph, sol);
  double weq, weig;
  if (!check_solution(prob, res.values, tols.tol_eq, std::max(tols.tol_psd, t > 0 ? 2 * t : 0.0), &weq,
                      &weig)) {
    res.status = SolveStatus::NumericalFailure;
    res.message = "phase-1 solution failed residual check (eq " + std::to_string(weq) + ", eig " +
                  std::to_string(weig) + ")";
    return res;
  }
  res.status = SolveStatus::Optimal;
  return res;
}

/// Expand Z' G Z for a solved Gram block back into a numeric polynomial.
inline Polynomial extract_poly(const std::vector<double>& values, const SdpProblem& prob,
                               const GramForm& gf) {
  if (gf.block < 0 || gf.block >= static_cast<int>(prob.blocks().size()))
    throw std::invalid_argument("extract_poly: missing block");
  const int n = static_cast<int>(gf.basis.size());
  const int nv = gf.basis.empty() ? 0 : gf.basis[0].nvars();
  Polynomial p(nv);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double g = values[static_cast<size_t>(prob.entry_var(gf.block, i, j))];
      p.add_term(gf.basis[i] * gf.basis[j], (i == j ? 1.0 : 2.0) * g);
    }
  return p;
}

}  // namespace sbc
