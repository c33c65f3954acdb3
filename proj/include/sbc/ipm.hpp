#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "sbc/sdp.hpp"

namespace sbc {

/// Reference primal-dual interior-point backend (Nesterov-Todd scaling,
/// Mehrotra predictor-corrector). Solves
///   min <c_s, S> + c_y'y   s.t.  A_s(S) + A_y y = b,  S in PSD blocks,
/// with free scalar variables y. Equality rows are grouped by the PSD
/// blocks they touch; the Schur complement is factored per group and the
/// free variables are eliminated through a small dense system.
class ReferenceIpm : public SolverBackend {
 public:
  SdpSolution solve(const SdpProblem& prob, const SolverOptions& opts) const override {
    Work w;
    if (!build(prob, w)) {
      SdpSolution sol;
      sol.status = SolveStatus::NumericalFailure;
      sol.message = "assembly failed";
      return sol;
    }
    if (w.m == 0 && w.p == 0 && w.blocks.empty()) {
      SdpSolution sol;
      sol.status = SolveStatus::Optimal;
      sol.values.assign(prob.num_vars(), 0.0);
      sol.message = "vacuous";
      return sol;
    }
    if (w.blocks.empty()) return solve_linear(prob, w);
    return run_ipm(prob, w, opts);
  }

 private:
  using Mat = Eigen::MatrixXd;
  using Vec = Eigen::VectorXd;

  struct BlockInfo {
    int dim = 0;
    int first_var = 0;
  };
  // one symmetric-matrix coefficient within an equality row
  struct MatEntry {
    int i, j;
    double v;  // full symmetric value: stored once for i==j, half for i<j
  };
  struct RowBlock {
    int block;
    std::vector<MatEntry> ent;
  };
  struct Row {
    std::vector<RowBlock> mats;
    std::vector<std::pair<int, double>> frees;  // (free index, coef)
    double rhs = 0.0;
  };

  struct Work {
    int m = 0;                        // number of equality rows
    int p = 0;                        // number of free variables
    std::vector<BlockInfo> blocks;
    std::vector<Row> rows;
    std::vector<int> free_ids;        // free index -> var id
    std::vector<int> var_to_free;     // var id -> free index or -1
    std::vector<Mat> c_blocks;        // objective on blocks (symmetric full)
    Vec c_free;
    Vec b;
    double obj_scale = 1.0;
    // grouping
    int ngroups = 0;
    std::vector<int> block_group;
    std::vector<int> row_group;           // -1 for rows with no block entries
    std::vector<std::vector<int>> group_rows;
    std::vector<int> loose_rows;          // rows without block entries
  };

  static void sym_scatter(Mat& M, const std::vector<MatEntry>& es, double scale) {
    for (const auto& e : es) {
      M(e.i, e.j) += scale * e.v;
      if (e.i != e.j) M(e.j, e.i) += scale * e.v;
    }
  }
  static double sym_dot(const std::vector<MatEntry>& es, const Mat& M) {
    double acc = 0.0;
    for (const auto& e : es) acc += e.v * (e.i == e.j ? M(e.i, e.i) : 2.0 * M(e.i, e.j));
    return acc;
  }

  bool build(const SdpProblem& prob, Work& w) const {
    const auto& blocks = prob.blocks();
    w.blocks.reserve(blocks.size());
    for (const auto& b : blocks) w.blocks.push_back({b.dim, b.first_var});
    w.var_to_free.assign(prob.num_vars(), -1);
    for (int id = 0; id < prob.num_vars(); ++id) {
      if (prob.var_owner(id) < 0) {
        w.var_to_free[id] = static_cast<int>(w.free_ids.size());
        w.free_ids.push_back(id);
      }
    }
    w.p = static_cast<int>(w.free_ids.size());
    w.m = static_cast<int>(prob.equalities().size());
    w.rows.resize(w.m);
    w.b.resize(w.m);

    // var id -> (block, i, j)
    auto locate = [&](int id, int owner, int& i, int& j) {
      const auto& b = blocks[static_cast<size_t>(owner)];
      int off = id - b.first_var;
      i = 0;
      while (off >= b.dim - i) {
        off -= b.dim - i;
        ++i;
      }
      j = i + off;
    };

    for (int r = 0; r < w.m; ++r) {
      const auto& eq = prob.equalities()[r];
      Row& row = w.rows[r];
      double sc = 1.0;
      for (const auto& [id, c] : eq.terms) sc = std::max(sc, std::abs(c));
      sc = std::max(sc, std::abs(eq.rhs));
      if (sc <= 0.0) sc = 1.0;
      for (const auto& [id, c] : eq.terms) {
        int owner = prob.var_owner(id);
        double cv = c / sc;
        if (owner < 0) {
          row.frees.emplace_back(w.var_to_free[id], cv);
        } else {
          int i, j;
          locate(id, owner, i, j);
          RowBlock* rb = nullptr;
          for (auto& x : row.mats)
            if (x.block == owner) rb = &x;
          if (!rb) {
            row.mats.push_back({owner, {}});
            rb = &row.mats.back();
          }
          rb->ent.push_back({i, j, i == j ? cv : cv / 2.0});
        }
      }
      row.rhs = eq.rhs / sc;
      w.b(r) = row.rhs;
    }

    // objective split + scaling
    w.c_blocks.resize(blocks.size());
    for (size_t bi = 0; bi < blocks.size(); ++bi) w.c_blocks[bi] = Mat::Zero(blocks[bi].dim, blocks[bi].dim);
    w.c_free = Vec::Zero(w.p);
    double cmax = 0.0;
    for (const auto& [id, c] : prob.objective().lin) cmax = std::max(cmax, std::abs(c));
    w.obj_scale = cmax > 0 ? cmax : 1.0;
    for (const auto& [id, c] : prob.objective().lin) {
      int owner = prob.var_owner(id);
      double cv = c / w.obj_scale;
      if (owner < 0) {
        w.c_free(w.var_to_free[id]) += cv;
      } else {
        int i, j;
        locate(id, owner, i, j);
        w.c_blocks[owner](i, j) += i == j ? cv : cv / 2.0;
        if (i != j) w.c_blocks[owner](j, i) += cv / 2.0;
      }
    }

    // group blocks via union-find over shared rows
    std::vector<int> parent(blocks.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& row : w.rows)
      for (size_t k = 1; k < row.mats.size(); ++k) {
        int a = find(row.mats[0].block), b2 = find(row.mats[k].block);
        if (a != b2) parent[a] = b2;
      }
    std::map<int, int> root_to_group;
    w.block_group.resize(blocks.size());
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      int r = find(static_cast<int>(bi));
      auto [it, ins] = root_to_group.emplace(r, static_cast<int>(root_to_group.size()));
      w.block_group[bi] = it->second;
    }
    w.ngroups = static_cast<int>(root_to_group.size());
    w.group_rows.resize(w.ngroups);
    w.row_group.assign(w.m, -1);
    for (int r = 0; r < w.m; ++r) {
      if (w.rows[r].mats.empty()) {
        w.loose_rows.push_back(r);
      } else {
        int g = w.block_group[w.rows[r].mats[0].block];
        w.row_group[r] = g;
        w.group_rows[g].push_back(r);
      }
    }
    return true;
  }

  // Pure linear case (no PSD blocks): least-squares solve of A_y y = b.
  SdpSolution solve_linear(const SdpProblem& prob, const Work& w) const {
    Mat A = Mat::Zero(w.m, w.p);
    for (int r = 0; r < w.m; ++r)
      for (const auto& [fi, c] : w.rows[r].frees) A(r, fi) += c;
    Vec y = A.colPivHouseholderQr().solve(w.b);
    double res = (A * y - w.b).lpNorm<Eigen::Infinity>();
    SdpSolution sol;
    sol.values.assign(prob.num_vars(), 0.0);
    for (int f = 0; f < w.p; ++f) sol.values[w.free_ids[f]] = y(f);
    sol.primal_residual = res;
    sol.status = res < 1e-7 * (1.0 + w.b.lpNorm<Eigen::Infinity>()) ? SolveStatus::Optimal
                                                                    : SolveStatus::Infeasible;
    return sol;
  }

  struct Scaling {
    Mat R, Rt, Rinv;   // W = R R^T, lambda = Rinv S Rinv^T = R^T Z R (diagonal)
    Vec lam;
    Mat W;
  };

  // NT scaling from Cholesky factors and an SVD, giving a diagonal lambda.
  static bool nt_scaling(const Mat& S, const Mat& Z, Scaling& sc) {
    Eigen::LLT<Mat> ls(S), lz(Z);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    Mat Ls = ls.matrixL(), Lz = lz.matrixL();
    Eigen::BDCSVD<Mat> svd(Lz.transpose() * Ls, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vec sig = svd.singularValues();
    for (int i = 0; i < sig.size(); ++i)
      if (!(sig(i) > 0)) return false;
    Vec si = sig.array().sqrt().inverse().matrix();
    sc.R = Ls * svd.matrixV() * si.asDiagonal();
    sc.Rt = sc.R.transpose();
    // Rinv = diag(sqrt(sig)) V^T Ls^{-1}
    Mat Vt = svd.matrixV().transpose();
    Mat LsInvT = Ls.triangularView<Eigen::Lower>().solve(Mat::Identity(S.rows(), S.cols()));
    sc.Rinv = sig.array().sqrt().matrix().asDiagonal() * Vt * LsInvT;
    sc.lam = sig;
    sc.W = sc.R * sc.Rt;
    return true;
  }

  // largest alpha in (0, 1] with S + alpha*dS > 0 (through a scaled eigmin)
  static double max_step(const Mat& S, const Mat& dS) {
    Eigen::LLT<Mat> ls(S);
    if (ls.info() != Eigen::Success) return 0.0;
    Mat L = ls.matrixL();
    Mat T = L.triangularView<Eigen::Lower>().solve(dS);
    Mat A = L.triangularView<Eigen::Lower>().solve(T.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es((A + A.transpose()) / 2.0, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0) return 1.0;
    return std::min(1.0, -1.0 / lmin);
  }

  SdpSolution run_ipm(const SdpProblem& prob, const Work& w, const SolverOptions& opts) const {
    const int nb = static_cast<int>(w.blocks.size());
    const int m = w.m, p = w.p;
    double sumdim = 0;
    for (const auto& b : w.blocks) sumdim += b.dim;

    std::vector<Mat> S(nb), Z(nb);
    Vec y = Vec::Zero(p), lam = Vec::Zero(m);

    // --- initial point from two least-squares solves with W = I
    {
      std::vector<Scaling> eye(nb);
      for (int bi = 0; bi < nb; ++bi) {
        int d = w.blocks[bi].dim;
        eye[bi].R = eye[bi].Rt = eye[bi].Rinv = eye[bi].W = Mat::Identity(d, d);
        eye[bi].lam = Vec::Ones(d);
      }
      Factorization fac;
      if (!factor(w, eye, opts, fac)) return fail("initial factorization failed");
      // primal: min ||S|| s.t. A_s S + A_y y = b  ->  S = A_s^T(lam)
      Vec l1(m), y1(p);
      solve_kkt(w, fac, w.b, Vec::Zero(p), l1, y1);
      y = y1;
      for (int bi = 0; bi < nb; ++bi) S[bi] = Mat::Zero(w.blocks[bi].dim, w.blocks[bi].dim);
      scatter_At(w, l1, S);
      // dual: min ||Z|| s.t. A_s^T lam + Z = C, A_y^T lam = c_y
      Vec l2(m), y2(p);
      Vec rhs1 = Vec::Zero(m);
      for (int r = 0; r < m; ++r)
        for (const auto& rb : w.rows[r].mats) rhs1(r) += sym_dot(rb.ent, w.c_blocks[rb.block]);
      solve_kkt(w, fac, rhs1, w.c_free, l2, y2);
      lam = l2;
      for (int bi = 0; bi < nb; ++bi) Z[bi] = w.c_blocks[bi];
      scatter_At(w, -l2, Z);
      for (int bi = 0; bi < nb; ++bi) {
        shift_pd(S[bi]);
        shift_pd(Z[bi]);
      }
    }

    double bnorm = 1.0 + w.b.lpNorm<Eigen::Infinity>();
    double cnorm = 1.0 + w.c_free.lpNorm<Eigen::Infinity>();
    for (int bi = 0; bi < nb; ++bi) cnorm = std::max(cnorm, 1.0 + w.c_blocks[bi].lpNorm<Eigen::Infinity>());

    SdpSolution sol;
    double best_gap = 1e300;
    int stall = 0;

    for (int it = 0; it < opts.max_iters; ++it) {
      // residuals
      Vec rp = w.b;
      for (int r = 0; r < m; ++r) {
        double acc = 0;
        for (const auto& rb : w.rows[r].mats) acc += sym_dot(rb.ent, S[rb.block]);
        for (const auto& [fi, c] : w.rows[r].frees) acc += c * y(fi);
        rp(r) -= acc;
      }
      std::vector<Mat> rd(nb);
      for (int bi = 0; bi < nb; ++bi) rd[bi] = w.c_blocks[bi] - Z[bi];
      scatter_At(w, -lam, rd);  // rd = C - A^T lam - Z
      Vec rf = w.c_free;
      for (int r = 0; r < m; ++r)
        for (const auto& [fi, c] : w.rows[r].frees) rf(fi) -= c * lam(r);

      double mu = 0;
      for (int bi = 0; bi < nb; ++bi) mu += (S[bi].array() * Z[bi].array()).sum();
      mu /= sumdim;

      double pobj = w.c_free.dot(y), dobj = w.b.dot(lam);
      for (int bi = 0; bi < nb; ++bi) pobj += (w.c_blocks[bi].array() * S[bi].array()).sum();
      double rp_n = rp.lpNorm<Eigen::Infinity>() / bnorm;
      double rd_n = rf.lpNorm<Eigen::Infinity>();
      for (int bi = 0; bi < nb; ++bi) rd_n = std::max(rd_n, rd[bi].lpNorm<Eigen::Infinity>());
      rd_n /= cnorm;
      double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      double mun = mu / (1.0 + std::abs(pobj));

      if (opts.verbose)
        std::fprintf(stderr, "ipm %3d  mu %9.2e  rp %9.2e  rd %9.2e  gap %9.2e  pobj % .6e\n", it, mu,
                     rp_n, rd_n, gap, pobj);

      if (rp_n < opts.tol * 10 && rd_n < opts.tol * 10 && (gap < opts.tol * 10 || mun < opts.tol)) {
        sol.status = SolveStatus::Optimal;
        sol.iterations = it;
        sol.primal_residual = rp_n;
        sol.dual_residual = rd_n;
        sol.gap = gap;
        extract(prob, w, S, y, sol);
        return sol;
      }
      double prog = std::min(gap + rp_n + rd_n, best_gap);
      if (prog > 0.9999 * best_gap) {
        if (++stall > 12) {
          sol.iterations = it;
          // accept a near-solution if residuals are decent
          if (rp_n < 1e-6 && rd_n < 1e-6 && mun < 1e-6) {
            sol.status = SolveStatus::Optimal;
            extract(prob, w, S, y, sol);
            sol.primal_residual = rp_n;
            sol.dual_residual = rd_n;
            sol.gap = gap;
            sol.message = "loose convergence";
            return sol;
          }
          return fail("stalled");
        }
      } else {
        stall = 0;
        best_gap = prog;
      }

      // scaling + factorization
      std::vector<Scaling> sc(nb);
      for (int bi = 0; bi < nb; ++bi)
        if (!nt_scaling(S[bi], Z[bi], sc[bi])) return fail("scaling failed (iterate left the cone)");
      Factorization fac;
      if (!factor(w, sc, opts, fac)) return fail("Schur factorization failed");

      // predictor (affine direction): v = -S
      std::vector<Mat> v(nb);
      for (int bi = 0; bi < nb; ++bi) v[bi] = -S[bi];
      Vec dlam(m), dy(p);
      std::vector<Mat> dS(nb), dZ(nb);
      solve_direction(w, sc, fac, rp, rd, rf, v, dlam, dy, dS, dZ);

      double ap = 1.0, ad = 1.0;
      for (int bi = 0; bi < nb; ++bi) {
        ap = std::min(ap, max_step(S[bi], dS[bi]));
        ad = std::min(ad, max_step(Z[bi], dZ[bi]));
      }
      double mu_aff = 0;
      for (int bi = 0; bi < nb; ++bi)
        mu_aff += ((S[bi] + ap * dS[bi]).array() * (Z[bi] + ad * dZ[bi]).array()).sum();
      mu_aff /= sumdim;
      double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

      // corrector
      for (int bi = 0; bi < nb; ++bi) {
        const auto& s = sc[bi];
        Mat ds_t = s.Rinv * dS[bi] * s.Rinv.transpose();
        Mat dz_t = s.Rt * dZ[bi] * s.R;
        Mat cross = (ds_t * dz_t + dz_t.transpose() * ds_t.transpose()) / 2.0;
        Mat T = -cross;
        T.diagonal().array() += sigma * mu;
        T -= s.lam.asDiagonal() * s.lam.asDiagonal() * Mat::Identity(T.rows(), T.cols());
        // entrywise solve of H(ds~ lam + lam dz~) = T
        Mat Tt(T.rows(), T.cols());
        for (int i = 0; i < T.rows(); ++i)
          for (int j = 0; j < T.cols(); ++j) Tt(i, j) = 2.0 * T(i, j) / (s.lam(i) + s.lam(j));
        v[bi] = s.R * ((Tt + Tt.transpose()) / 2.0) * s.Rt;
      }
      solve_direction(w, sc, fac, rp, rd, rf, v, dlam, dy, dS, dZ);

      ap = ad = 1.0;
      for (int bi = 0; bi < nb; ++bi) {
        ap = std::min(ap, max_step(S[bi], dS[bi]));
        ad = std::min(ad, max_step(Z[bi], dZ[bi]));
      }
      double damp = mu > 1e-6 ? 0.98 : 0.99;
      ap = std::min(1.0, damp * ap);
      ad = std::min(1.0, damp * ad);
      if (ap < 1e-8 && ad < 1e-8) return fail("vanishing step");

      for (int bi = 0; bi < nb; ++bi) {
        S[bi] += ap * dS[bi];
        Z[bi] += ad * dZ[bi];
        S[bi] = (S[bi] + S[bi].transpose()) / 2.0;
        Z[bi] = (Z[bi] + Z[bi].transpose()) / 2.0;
      }
      y += ap * dy;
      lam += ad * dlam;
    }
    return fail("iteration limit");
  }

  static SdpSolution fail(const std::string& msg) {
    SdpSolution s;
    s.status = SolveStatus::NumericalFailure;
    s.message = msg;
    return s;
  }

  static void shift_pd(Mat& M) {
    M = (M + M.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    double scale = std::max(1.0, M.lpNorm<Eigen::Infinity>());
    double target = 1e-1 * scale;
    if (lmin < target) M.diagonal().array() += target - lmin;
  }

  // A_s^T(lam): add sum_r lam_r A_r into block matrices
  static void scatter_At(const Work& w, const Vec& lam, std::vector<Mat>& out) {
    for (int r = 0; r < w.m; ++r) {
      if (lam(r) == 0.0) continue;
      for (const auto& rb : w.rows[r].mats) sym_scatter(out[rb.block], rb.ent, lam(r));
    }
  }

  struct Factorization {
    std::vector<Eigen::LLT<Mat>> group_llt;
    Eigen::LDLT<Mat> freeN;
    std::vector<std::vector<int>> group_free_cols;  // free vars used per group
    std::vector<Mat> group_Yf;                      // M_g^{-1} F_g
    bool has_loose = false;
    Eigen::LDLT<Mat> looseN;  // for rows without block entries (rare)
  };

  // Assemble and factor M_g = A_s W A_s^T per group, then the free-variable
  // Schur complement N = F^T M^{-1} F.
  bool factor(const Work& w, const std::vector<Scaling>& sc, const SolverOptions& opts,
              Factorization& fac) const {
    const int p = w.p;
    fac.group_llt.resize(w.ngroups);
    fac.group_free_cols.resize(w.ngroups);
    fac.group_Yf.resize(w.ngroups);
    Mat N = Mat::Zero(p, p);

    for (int g = 0; g < w.ngroups; ++g) {
      const auto& rows = w.group_rows[g];
      const int mg = static_cast<int>(rows.size());
      if (mg == 0) continue;
      Mat M = Mat::Zero(mg, mg);
      for (int a = 0; a < mg; ++a) {
        const Row& ra = w.rows[rows[a]];
        for (int b2 = a; b2 < mg; ++b2) {
          const Row& rb = w.rows[rows[b2]];
          double acc = 0;
          for (const auto& xa : ra.mats)
            for (const auto& xb : rb.mats) {
              if (xa.block != xb.block) continue;
              const Mat& W = sc[xa.block].W;
              for (const auto& ea : xa.ent) {
                double term = 0;
                for (const auto& eb : xb.ent) {
                  double wipt = W(ea.i, eb.i) * W(eb.j, ea.j) + W(ea.i, eb.j) * W(eb.i, ea.j);
                  if (eb.i != eb.j)
                    term += eb.v * wipt;
                  else
                    term += eb.v * W(ea.i, eb.i) * W(eb.i, ea.j);
                }
                acc += (ea.i != ea.j) ? 2.0 * ea.v * term : ea.v * term;
              }
            }
          M(a, b2) = acc;
          M(b2, a) = acc;
        }
      }
      double mnorm = M.diagonal().maxCoeff();
      M.diagonal().array() += std::max(opts.psd_reg, 1e-13 * std::max(1.0, mnorm));
      fac.group_llt[g].compute(M);
      if (fac.group_llt[g].info() != Eigen::Success) {
        M.diagonal().array() += 1e-8 * std::max(1.0, mnorm);
        fac.group_llt[g].compute(M);
        if (fac.group_llt[g].info() != Eigen::Success) return false;
      }
      // free columns used by this group
      std::vector<int>& cols = fac.group_free_cols[g];
      {
        std::vector<char> seen(p, 0);
        for (int r : rows)
          for (const auto& [fi, c] : w.rows[r].frees)
            if (!seen[fi]) {
              seen[fi] = 1;
              cols.push_back(fi);
            }
        std::sort(cols.begin(), cols.end());
      }
      if (!cols.empty()) {
        Mat Fg = Mat::Zero(mg, static_cast<int>(cols.size()));
        std::vector<int> colpos(p, -1);
        for (size_t k = 0; k < cols.size(); ++k) colpos[cols[k]] = static_cast<int>(k);
        for (int a = 0; a < mg; ++a)
          for (const auto& [fi, c] : w.rows[rows[a]].frees) Fg(a, colpos[fi]) += c;
        Mat Yg = fac.group_llt[g].solve(Fg);
        fac.group_Yf[g] = Yg;
        Mat Ng = Fg.transpose() * Yg;
        for (size_t a = 0; a < cols.size(); ++a)
          for (size_t b2 = 0; b2 < cols.size(); ++b2) N(cols[a], cols[b2]) += Ng(a, b2);
      } else {
        fac.group_Yf[g] = Mat::Zero(mg, 0);
      }
    }
    // loose rows (free vars only): contribute F^T D^{-1} F with D = reg
    fac.has_loose = !w.loose_rows.empty();
    if (fac.has_loose) {
      // treat as hard equalities through a stiff penalty block
      const double stiff = 1e10;
      for (int r : w.loose_rows) {
        const Row& row = w.rows[r];
        for (const auto& [fa, ca] : row.frees)
          for (const auto& [fb, cb] : row.frees) N(fa, fb) += stiff * ca * cb;
      }
    }
    N.diagonal().array() += std::max(1e-12, 1e-12 * std::max(1.0, N.diagonal().maxCoeff()));
    fac.freeN.compute(N);
    return fac.freeN.info() == Eigen::Success;
  }

  // Solve the KKT system for a given complementarity target v:
  //   M dlam + F dy = g,  F^T dlam = rf'
  // with g = rp - A_s(v) + A_s(W rd W).
  void solve_direction(const Work& w, const std::vector<Scaling>& sc, const Factorization& fac,
                       const Vec& rp, const std::vector<Mat>& rd, const Vec& rf,
                       const std::vector<Mat>& v, Vec& dlam, Vec& dy, std::vector<Mat>& dS,
                       std::vector<Mat>& dZ) const {
    const int nb = static_cast<int>(w.blocks.size());
    std::vector<Mat> WrdW(nb);
    for (int bi = 0; bi < nb; ++bi) WrdW[bi] = sc[bi].W * rd[bi] * sc[bi].W;
    Vec g = rp;
    for (int r = 0; r < w.m; ++r)
      for (const auto& rb : w.rows[r].mats)
        g(r) += sym_dot(rb.ent, WrdW[rb.block]) - sym_dot(rb.ent, v[rb.block]);
    solve_kkt(w, fac, g, rf, dlam, dy);
    // dZ = rd - A^T dlam ; dS = v - W dZ W
    dZ.assign(nb, Mat());
    dS.assign(nb, Mat());
    for (int bi = 0; bi < nb; ++bi) dZ[bi] = rd[bi];
    scatter_At(w, -dlam, dZ);
    for (int bi = 0; bi < nb; ++bi) {
      dZ[bi] = (dZ[bi] + dZ[bi].transpose()) / 2.0;
      dS[bi] = v[bi] - sc[bi].W * dZ[bi] * sc[bi].W;
      dS[bi] = (dS[bi] + dS[bi].transpose()) / 2.0;
    }
  }

  // inner solve of [M F; F^T 0][dlam; dy] = [g; rf]
  void solve_kkt(const Work& w, const Factorization& fac, const Vec& g, const Vec& rf, Vec& dlam,
                 Vec& dy) const {
    const int p = w.p;
    (void)p;
    // t = M^{-1} g per group; loose rows via stiff penalty
    Vec t = Vec::Zero(w.m);
    Vec rhs_y = -rf;
    for (int g2 = 0; g2 < w.ngroups; ++g2) {
      const auto& rows = w.group_rows[g2];
      if (rows.empty()) continue;
      Vec gg(static_cast<int>(rows.size()));
      for (size_t a = 0; a < rows.size(); ++a) gg(static_cast<int>(a)) = g(rows[a]);
      Vec tg = fac.group_llt[g2].solve(gg);
      for (size_t a = 0; a < rows.size(); ++a) t(rows[a]) = tg(static_cast<int>(a));
      const auto& cols = fac.group_free_cols[g2];
      for (size_t k = 0; k < cols.size(); ++k) {
        double acc = 0;
        for (size_t a = 0; a < rows.size(); ++a)
          acc += fac.group_Yf[g2](static_cast<int>(a), static_cast<int>(k)) * gg(static_cast<int>(a));
        rhs_y(cols[k]) += acc;
      }
    }
    if (fac.has_loose) {
      const double stiff = 1e10;
      for (int r : w.loose_rows) {
        for (const auto& [fi, c] : w.rows[r].frees) rhs_y(fi) += stiff * c * g(r);
      }
    }
    dy = fac.freeN.solve(rhs_y);
    // dlam = M^{-1}(g - F dy)
    dlam = Vec::Zero(w.m);
    for (int g2 = 0; g2 < w.ngroups; ++g2) {
      const auto& rows = w.group_rows[g2];
      if (rows.empty()) continue;
      Vec gg(static_cast<int>(rows.size()));
      for (size_t a = 0; a < rows.size(); ++a) {
        double acc = g(rows[a]);
        for (const auto& [fi, c] : w.rows[rows[a]].frees) acc -= c * dy(fi);
        gg(static_cast<int>(a)) = acc;
      }
      Vec tg = fac.group_llt[g2].solve(gg);
      for (size_t a = 0; a < rows.size(); ++a) dlam(rows[a]) = tg(static_cast<int>(a));
    }
    if (fac.has_loose) {
      const double stiff = 1e10;
      for (int r : w.loose_rows) {
        double acc = g(r);
        for (const auto& [fi, c] : w.rows[r].frees) acc -= c * dy(fi);
        dlam(r) = stiff * acc;
      }
    }
  }

  void extract(const SdpProblem& prob, const Work& w, const std::vector<Mat>& S, const Vec& y,
               SdpSolution& sol) const {
    sol.values.assign(prob.num_vars(), 0.0);
    for (int f = 0; f < w.p; ++f) sol.values[w.free_ids[f]] = y(f);
    const auto& blocks = prob.blocks();
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      int d = blocks[bi].dim, id = blocks[bi].first_var;
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) sol.values[id++] = S[bi](i, j);
    }
    double obj = 0;
    for (const auto& [vid, c] : prob.objective().lin) obj += c * sol.values[vid];
    sol.objective = obj;
  }
};

}  // namespace sbc
