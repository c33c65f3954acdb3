#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "sbc/poly.hpp"

namespace sbc {

/// Axis-aligned box used as the sampling window of a basic set.
struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  bool empty() const {
    for (size_t i = 0; i < lo.size(); ++i)
      if (lo[i] > hi[i]) return true;
    return false;
  }
  static Box concat(const Box& a, const Box& b) {
    Box r = a;
    r.lo.insert(r.lo.end(), b.lo.begin(), b.lo.end());
    r.hi.insert(r.hi.end(), b.hi.begin(), b.hi.end());
    return r;
  }
  static Box intersect(const Box& a, const Box& b) {
    Box r = a;
    for (size_t i = 0; i < r.lo.size(); ++i) {
      r.lo[i] = std::max(r.lo[i], b.lo[i]);
      r.hi[i] = std::min(r.hi[i], b.hi[i]);
    }
    return r;
  }
};

/// Basic semialgebraic piece {v : g_k(v) >= 0 for all k} with a bounding
/// box that drives grid and random sampling.
struct BasicSet {
  std::vector<Polynomial> gs;
  Box box;

  int nvars() const { return box.dim(); }
  bool contains(const std::vector<double>& v, double tol = 0.0) const {
    for (const auto& g : gs)
      if (g.eval(v) < -tol) return false;
    return true;
  }

  /// Interval [lo, hi] on every axis, encoded as the pair of affine
  /// inequalities v_i - lo >= 0 and hi - v_i >= 0. Degenerate axes
  /// (lo == hi) produce the singleton pair, matching the convention for
  /// sets like {x2 = 0}.
  static BasicSet from_box(const Box& b) {
    BasicSet s;
    s.box = b;
    const int n = b.dim();
    for (int i = 0; i < n; ++i) {
      Polynomial lo(n), hi(n);
      lo.add_term(Monomial::var(n, i), 1.0);
      lo.add_term(Monomial::unit(n), -b.lo[i]);
      hi.add_term(Monomial::var(n, i), -1.0);
      hi.add_term(Monomial::unit(n), b.hi[i]);
      s.gs.push_back(lo);
      s.gs.push_back(hi);
    }
    return s;
  }

  BasicSet embedded(int total, int offset) const {
    BasicSet r;
    r.box.lo.assign(total, 0.0);
    r.box.hi.assign(total, 0.0);
    for (int i = 0; i < box.dim(); ++i) {
      r.box.lo[offset + i] = box.lo[i];
      r.box.hi[offset + i] = box.hi[i];
    }
    for (const auto& g : gs) r.gs.push_back(g.embed(total, offset));
    return r;
  }
};

/// Finite union of basic sets; membership is membership in any component.
struct SemiAlgebraicSet {
  int nvars = 0;
  std::vector<BasicSet> components;

  bool contains(const std::vector<double>& v, double tol = 0.0) const {
    for (const auto& c : components)
      if (c.contains(v, tol)) return true;
    return false;
  }
  bool empty_boxes() const {
    for (const auto& c : components)
      if (!c.box.empty()) return false;
    return true;
  }

  static SemiAlgebraicSet from_box(const Box& b) {
    SemiAlgebraicSet s;
    s.nvars = b.dim();
    s.components.push_back(BasicSet::from_box(b));
    return s;
  }
  static SemiAlgebraicSet from_boxes(const std::vector<Box>& boxes) {
    SemiAlgebraicSet s;
    if (boxes.empty()) return s;
    s.nvars = boxes[0].dim();
    for (const auto& b : boxes) s.components.push_back(BasicSet::from_box(b));
    return s;
  }

  /// Deterministic grid: per-axis counts derived from `resolution`, scaled
  /// down uniformly so no component exceeds `cap` points. Points failing
  /// the component's inequalities are filtered out.
  std::vector<std::vector<double>> grid(double resolution, size_t cap = 200000) const {
    std::vector<std::vector<double>> pts;
    for (const auto& c : components) {
      if (c.box.empty()) continue;
      const int n = c.box.dim();
      std::vector<int> counts(n, 1);
      double total = 1;
      for (int i = 0; i < n; ++i) {
        double span = c.box.hi[i] - c.box.lo[i];
        counts[i] = span <= 0 ? 1 : std::max(2, static_cast<int>(std::floor(span / resolution)) + 1);
        total *= counts[i];
      }
      while (total > static_cast<double>(cap)) {
        // shrink the largest axis until the budget holds
        int imax = 0;
        for (int i = 1; i < n; ++i)
          if (counts[i] > counts[imax]) imax = i;
        if (counts[imax] <= 2) break;
        total /= counts[imax];
        counts[imax] = std::max(2, counts[imax] / 2 + counts[imax] % 2);
        total *= counts[imax];
      }
      std::vector<int> idx(n, 0);
      std::vector<double> v(n);
      while (true) {
        for (int i = 0; i < n; ++i) {
          v[i] = counts[i] == 1 ? c.box.lo[i]
                                : c.box.lo[i] + (c.box.hi[i] - c.box.lo[i]) * idx[i] / (counts[i] - 1);
        }
        if (c.contains(v, 1e-12)) pts.push_back(v);
        int k = n - 1;
        while (k >= 0 && ++idx[k] == counts[k]) idx[k--] = 0;
        if (k < 0) break;
      }
    }
    return pts;
  }

  /// Uniform rejection samples from the component boxes.
  std::vector<std::vector<double>> sample(std::mt19937_64& rng, size_t count) const {
    std::vector<std::vector<double>> pts;
    if (components.empty()) return pts;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    size_t attempts = 0, max_attempts = count * 50 + 1000;
    while (pts.size() < count && attempts++ < max_attempts) {
      const BasicSet& c = components[rng() % components.size()];
      if (c.box.empty()) continue;
      std::vector<double> v(c.box.dim());
      for (int i = 0; i < c.box.dim(); ++i) v[i] = c.box.lo[i] + (c.box.hi[i] - c.box.lo[i]) * u01(rng);
      if (c.contains(v, 1e-12)) pts.push_back(std::move(v));
    }
    return pts;
  }
};

/// One product-structured component of an augmented-space set: x-part and
/// xhat-part over n variables each, plus joint polynomials over 2n
/// variables (the squared output-distance conditions).
struct PairComponent {
  BasicSet x_part, xhat_part;
  std::vector<Polynomial> joint;
};

/// Union of product components over (x, xhat); converts to a plain
/// SemiAlgebraicSet over 2n variables for membership and SOS use.
struct PairSet {
  int n = 0;
  std::vector<PairComponent> comps;

  SemiAlgebraicSet to_set() const {
    SemiAlgebraicSet s;
    s.nvars = 2 * n;
    for (const auto& c : comps) {
      BasicSet b;
      b.box = Box::concat(c.x_part.box, c.xhat_part.box);
      for (const auto& g : c.x_part.gs) b.gs.push_back(g.embed(2 * n, 0));
      for (const auto& g : c.xhat_part.gs) b.gs.push_back(g.embed(2 * n, n));
      for (const auto& g : c.joint) b.gs.push_back(g);
      s.components.push_back(std::move(b));
    }
    return s;
  }
  SemiAlgebraicSet proj_first() const {
    SemiAlgebraicSet s;
    s.nvars = n;
    for (const auto& c : comps) s.components.push_back(c.x_part);
    return s;
  }
  SemiAlgebraicSet proj_second() const {
    SemiAlgebraicSet s;
    s.nvars = n;
    for (const auto& c : comps) s.components.push_back(c.xhat_part);
    return s;
  }
  bool contains(const std::vector<double>& xy, double tol = 0.0) const {
    return to_set().contains(xy, tol);
  }
};

}  // namespace sbc
