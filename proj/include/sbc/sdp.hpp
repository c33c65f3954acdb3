#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sbc/affine.hpp"

namespace sbc {

/// Abstract conic program: symmetric PSD matrix blocks plus free scalar
/// variables, linear equalities over their entries, linear objective
/// (minimize). Variable ids are global: scalars are allocated first-come,
/// block entries (i <= j) follow per block.
class SdpProblem {
 public:
  struct Block {
    std::string name;
    int dim = 0;
    int first_var = 0;  // id of entry (0,0); entries stored row-major upper
  };
  struct Equality {
    std::vector<std::pair<int, double>> terms;  // sorted by var id
    double rhs = 0.0;
  };

  int add_scalar(const std::string& name) {
    scalar_names_.push_back(name);
    var_owner_.push_back(-1);
    return next_id_++;
  }

  int add_psd_block(const std::string& name, int dim) {
    if (dim < 1) throw std::invalid_argument("PSD block dimension must be >= 1");
    Block b;
    b.name = name;
    b.dim = dim;
    b.first_var = next_id_;
    const int nb = static_cast<int>(blocks_.size());
    for (int k = 0; k < dim * (dim + 1) / 2; ++k) var_owner_.push_back(nb);
    next_id_ += dim * (dim + 1) / 2;
    blocks_.push_back(b);
    return nb;
  }

  /// Variable id of entry (i, j) (i <= j) of a block.
  int entry_var(int block, int i, int j) const {
    const Block& b = blocks_.at(static_cast<size_t>(block));
    if (i > j) std::swap(i, j);
    if (j >= b.dim || i < 0) throw std::out_of_range("block entry out of range");
    // row-major upper triangle offset
    int off = i * b.dim - i * (i - 1) / 2 + (j - i);
    return b.first_var + off;
  }

  void add_equality(const AffExpr& lhs, double rhs) {
    Equality eq;
    eq.terms = lhs.lin;
    eq.rhs = rhs - lhs.c0;
    equalities_.push_back(std::move(eq));
  }

  /// expr == 0 for every coefficient of a LinPoly (used by SOS matching).
  void set_objective(const AffExpr& obj) { objective_ = obj; }

  int num_vars() const { return next_id_; }
  int num_scalars() const { return static_cast<int>(scalar_names_.size()); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Equality>& equalities() const { return equalities_; }
  const AffExpr& objective() const { return objective_; }
  /// -1 for scalars, block index otherwise.
  int var_owner(int id) const { return var_owner_.at(static_cast<size_t>(id)); }
  const std::vector<std::string>& scalar_names() const { return scalar_names_; }

  /// Human-readable dump for diffing against hand computation.
  void dump(std::ostream& os) const {
    os << "SdpProblem: " << num_scalars() << " scalars, " << blocks_.size() << " PSD blocks, "
       << equalities_.size() << " equalities\n";
    for (const auto& b : blocks_) os << "  block " << b.name << " dim " << b.dim << "\n";
    os << "  scalars:";
    for (const auto& s : scalar_names_) os << " " << s;
    os << "\n";
    auto var_name = [&](int id) {
      if (var_owner_[id] < 0) return scalar_names_[id_to_scalar(id)];
      const Block& b = blocks_[var_owner_[id]];
      int off = id - b.first_var;
      // invert the triangular offset
      int i = 0;
      while (off >= b.dim - i) {
        off -= b.dim - i;
        ++i;
      }
      return b.name + "[" + std::to_string(i) + "," + std::to_string(i + off) + "]";
    };
    for (size_t k = 0; k < equalities_.size(); ++k) {
      os << "  eq" << k << ":";
      for (const auto& [id, c] : equalities_[k].terms) os << " " << c << "*" << var_name(id);
      os << " == " << equalities_[k].rhs << "\n";
    }
    os << "  minimize:";
    for (const auto& [id, c] : objective_.lin) os << " " << c << "*" << var_name(id);
    os << "\n";
  }

 private:
  size_t id_to_scalar(int id) const {
    // scalars are interleaved with blocks in id space; recover index by scan
    int idx = 0;
    for (int v = 0; v < id; ++v)
      if (var_owner_[v] < 0) ++idx;
    return static_cast<size_t>(idx);
  }

  int next_id_ = 0;
  std::vector<std::string> scalar_names_;
  std::vector<Block> blocks_;
  std::vector<int> var_owner_;
  std::vector<Equality> equalities_;
  AffExpr objective_;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> values;  // indexed by variable id
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string message;
};

struct SolverOptions {
  double tol = 1e-9;          // relative residual / gap target
  int max_iters = 120;
  double psd_reg = 1e-12;     // Schur regularization
  bool verbose = false;
};

/// Narrow backend interface so the SDP engine is swappable.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual SdpSolution solve(const SdpProblem& prob, const SolverOptions& opts) const = 0;
};

}  // namespace sbc
