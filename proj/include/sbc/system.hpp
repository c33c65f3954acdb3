#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbc/sets.hpp"

namespace sbc {

enum class OpacityNotion { InitialState, InfiniteStep, Both };

inline std::string to_string(OpacityNotion n) {
  switch (n) {
    case OpacityNotion::InitialState: return "initial-state";
    case OpacityNotion::InfiniteStep: return "infinite-step";
    default: return "both";
  }
}

/// Discrete-time polynomial control system in control-affine form
///   x(k+1) = A H(x) x + B U(x) u,  y = h(x),
/// together with its semialgebraic state sets, input constraints and the
/// opacity parameters delta (intruder precision) and epsilon.
struct SystemModel {
  std::string name;
  int n = 0, m = 0, q = 0;
  Eigen::MatrixXd A;         // n x Nx
  Eigen::MatrixXd B;         // n x Nu
  MatrixPolynomial H;        // Nx x n over x
  MatrixPolynomial Umat;     // Nu x m over x
  std::vector<Polynomial> h; // q output polynomials over x

  SemiAlgebraicSet X, X0, Xs_init, Xs_inf, Xd;
  // explicit complement descriptions (Assumption-1 style data)
  SemiAlgebraicSet X0_minus_Xs_init, X0_minus_Xs_inf, X_minus_Xs_inf;

  std::vector<Polynomial> input_constraints;  // rho_j(u) <= 0, over u
  Box u_box;                                  // box window of U for grids
  double delta = 0.0, epsilon = 0.0;

  int Nx() const { return static_cast<int>(A.cols()); }
  int Nu() const { return static_cast<int>(B.cols()); }

  /// Numeric next state f(x, u) = A H(x) x + B U(x) u.
  std::vector<double> step(const std::vector<double>& x, const std::vector<double>& u) const {
    if (static_cast<int>(x.size()) != n || static_cast<int>(u.size()) != m)
      throw std::invalid_argument("step: dimension mismatch");
    Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    Eigen::VectorXd uv = Eigen::Map<const Eigen::VectorXd>(u.data(), m);
    Eigen::MatrixXd Hx(Nx(), n), Ux(Nu(), m);
    for (int i = 0; i < Nx(); ++i)
      for (int j = 0; j < n; ++j) Hx(i, j) = H.at(i, j).eval(x);
    for (int i = 0; i < Nu(); ++i)
      for (int j = 0; j < m; ++j) Ux(i, j) = Umat.at(i, j).eval(x);
    Eigen::VectorXd next = A * (Hx * xv) + B * (Ux * uv);
    return std::vector<double>(next.data(), next.data() + n);
  }

  /// Symbolic dynamics as n polynomials in (x1..xn, u1..um).
  std::vector<Polynomial> dynamics_poly() const {
    const int nv = n + m;
    std::vector<Polynomial> f(n, Polynomial(nv));
    // A H(x) x
    for (int i = 0; i < n; ++i) {
      Polynomial acc(nv);
      for (int k = 0; k < Nx(); ++k) {
        Polynomial row(nv);
        for (int j = 0; j < n; ++j)
          row += H.at(k, j).embed(nv, 0) * Polynomial::variable(nv, j);
        acc += A(i, k) * row;
      }
      f[i] = acc;
    }
    // + B U(x) u
    for (int i = 0; i < n; ++i) {
      Polynomial acc(nv);
      for (int k = 0; k < Nu(); ++k) {
        Polynomial row(nv);
        for (int j = 0; j < m; ++j)
          row += Umat.at(k, j).embed(nv, 0) * Polynomial::variable(nv, n + j);
        acc += B(i, k) * row;
      }
      f[i] += acc;
    }
    return f;
  }

  std::vector<double> output(const std::vector<double>& x) const {
    std::vector<double> y(q);
    for (int i = 0; i < q; ++i) y[i] = h[i].eval(x);
    return y;
  }
  double output_dist(const std::vector<double>& x, const std::vector<double>& xh) const {
    double acc = 0;
    for (int i = 0; i < q; ++i) {
      double d = h[i].eval(x) - h[i].eval(xh);
      acc += d * d;
    }
    return std::sqrt(acc);
  }

  /// || h(x) - h(xhat) ||^2 as a polynomial over (x, xhat).
  Polynomial output_dist2_poly() const {
    const int nv = 2 * n;
    Polynomial acc(nv);
    for (int i = 0; i < q; ++i) {
      Polynomial d = h[i].embed(nv, 0) - h[i].embed(nv, n);
      acc += d * d;
    }
    return acc;
  }

  bool membership_ok(const std::vector<double>& x) const { return X.contains(x, 1e-9); }
};

/// The sets R0 (template) and Rd of the chosen opacity notion, with the
/// norm conditions squared so every description stays polynomial.
struct R0Rd {
  PairSet R0, Rd;
};

inline PairComponent make_pair_component(const BasicSet& xp, const BasicSet& hp,
                                         std::vector<Polynomial> joint) {
  PairComponent c;
  c.x_part = xp;
  c.xhat_part = hp;
  c.joint = std::move(joint);
  return c;
}

/// Intersection of two unions of basic sets (pairwise conjunction, empty
/// box pairs dropped).
inline SemiAlgebraicSet intersect(const SemiAlgebraicSet& a, const SemiAlgebraicSet& b) {
  SemiAlgebraicSet r;
  r.nvars = a.nvars;
  for (const auto& ca : a.components)
    for (const auto& cb : b.components) {
      Box ib = Box::intersect(ca.box, cb.box);
      if (ib.empty()) continue;
      BasicSet c;
      c.box = ib;
      c.gs = ca.gs;
      c.gs.insert(c.gs.end(), cb.gs.begin(), cb.gs.end());
      r.components.push_back(std::move(c));
    }
  return r;
}

inline R0Rd build_R0_Rd(const SystemModel& model, OpacityNotion notion) {
  const int n = model.n;
  const int nv = 2 * n;
  Polynomial d2 = model.output_dist2_poly();
  const double dd = model.delta * model.delta;
  const double de = (model.delta - model.epsilon) * (model.delta - model.epsilon);
  Polynomial close_cond = Polynomial::constant(nv, de) - d2;  // ||h-h||^2 <= (delta-eps)^2
  Polynomial far_cond = d2 - Polynomial::constant(nv, dd);    // ||h-h||^2 >= delta^2

  R0Rd out;
  out.R0.n = n;
  out.Rd.n = n;

  auto add_R0 = [&](const SemiAlgebraicSet& xs, const SemiAlgebraicSet& hs) {
    for (const auto& cx : xs.components)
      for (const auto& ch : hs.components)
        out.R0.comps.push_back(make_pair_component(cx, ch, {close_cond}));
  };
  auto add_Rd_far_pairs = [&]() {
    for (const auto& cx : model.X.components)
      for (const auto& ch : model.X.components)
        out.Rd.comps.push_back(make_pair_component(cx, ch, {far_cond}));
  };

  const bool want_init = notion != OpacityNotion::InfiniteStep;
  const bool want_inf = notion != OpacityNotion::InitialState;

  if (want_init) {
    SemiAlgebraicSet secret0 = intersect(model.X0, model.Xs_init);
    if (secret0.components.empty())
      throw std::invalid_argument("initial-state notion requires a nonempty X0 cap Xs_init");
    add_R0(secret0, model.X0_minus_Xs_init);
  }
  if (want_inf) {
    if (model.Xs_inf.components.empty())
      throw std::invalid_argument("infinite-step notion requires a nonempty Xs_inf");
    SemiAlgebraicSet x0_nonsecret = model.X0_minus_Xs_inf;
    add_R0(x0_nonsecret, model.X0);
    SemiAlgebraicSet secret0 = intersect(model.X0, model.Xs_inf);
    if (!secret0.components.empty()) add_R0(secret0, x0_nonsecret);
  }

  // Rd: pairs at output distance >= delta (the initial-state description;
  // the infinite-step set adds the secret-times-secret block and is
  // otherwise identical as a set).
  add_Rd_far_pairs();
  if (want_inf) {
    for (const auto& cs : model.Xs_inf.components)
      for (const auto& ct : model.Xs_inf.components)
        out.Rd.comps.push_back(make_pair_component(cs, ct, {}));
  }
  return out;
}

/// Sampled check of the standing assumption that secrets are not revealed
/// initially: every sampled x0 in X0 cap X's admits a delta-close witness
/// outside X's.
inline bool check_initial_plausibility(const SystemModel& model, OpacityNotion notion, int samples,
                                       double grid_res = 0.02, uint64_t seed = 20240901) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const SemiAlgebraicSet& secret =
      notion == OpacityNotion::InfiniteStep ? model.Xs_inf : model.Xs_init;
  SemiAlgebraicSet starts = intersect(model.X0, secret);
  if (starts.components.empty()) return true;  // vacuous

  std::mt19937_64 rng(seed);
  auto x0s = starts.grid(grid_res, 4000);
  auto extra = starts.sample(rng, static_cast<size_t>(samples));
  x0s.insert(x0s.end(), extra.begin(), extra.end());

  // witness candidates: X0 grid plus random X samples
  auto cands = model.X0.grid(grid_res, 4000);
  auto more = model.X.sample(rng, static_cast<size_t>(samples));
  cands.insert(cands.end(), more.begin(), more.end());

  for (const auto& x0 : x0s) {
    bool found = false;
    for (const auto& w : cands) {
      if (model.output_dist(w, x0) <= model.delta && !secret.contains(w, 0.0) &&
          model.X.contains(w, 1e-9)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace sbc
