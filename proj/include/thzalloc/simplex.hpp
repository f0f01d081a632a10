#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "common.hpp"

namespace thzalloc {

// Dense two-phase primal simplex, built for repeated solves over a fixed
// constraint set with changing objectives: the reduced tableau and basis
// survive between calls, so a re-solve after set_objective only has to
// reprice and pivot from the previous vertex. Pricing is Dantzig with
// lowest-index tie-breaks; after a long run of non-improving pivots it
// switches to Bland's rule, which terminates on degenerate instances.
class Simplex {
 public:
  enum class Rel { le, ge, eq };

  explicit Simplex(int num_structural) : n_struct_(num_structural) {}

  void add_row(std::vector<std::pair<int, double>> coeffs, Rel rel,
               double rhs) {
    if (finalized_) throw Error("rows cannot be added after finalize");
    for (auto& [j, v] : coeffs) {
      (void)v;
      if (j < 0 || j >= n_struct_) throw RangeError("row column out of range");
    }
    if (rhs < 0) {
      // keep rhs nonnegative so slack columns can serve as a basis
      for (auto& [j, v] : coeffs) v = -v;
      rhs = -rhs;
      rel = rel == Rel::le ? Rel::ge : rel == Rel::ge ? Rel::le : Rel::eq;
    }
    rows_.push_back(SparseRow{std::move(coeffs), rel, rhs});
  }

  void finalize() {
    if (finalized_) return;
    n_cols_ = n_struct_;
    slack_col_.assign(rows_.size(), -1);
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (rows_[i].rel != Rel::eq) slack_col_[i] = n_cols_++;
    finalized_ = true;
  }

  int num_rows() const { return static_cast<int>(rows_.size()); }
  int slack_column(int row) const { return slack_col_[row]; }

  // Objective is maximized over the structural variables.
  void set_objective(const std::vector<double>& c) {
    if (!finalized_) finalize();
    if (static_cast<int>(c.size()) != n_struct_)
      throw RangeError("objective size mismatch");
    cost_.assign(n_cols_, 0.0);
    for (int j = 0; j < n_struct_; ++j) cost_[j] = -c[j];  // minimize -c
    if (has_basis_) reprice();
  }

  // Solves from scratch (phase 1 if needed) or, when a basis is already
  // loaded, reoptimizes from it.
  void solve() {
    if (!finalized_) finalize();
    if (cost_.empty()) throw Error("objective not set");
    if (!has_basis_) cold_start();
    optimize(cost_row_);
    extract();
  }

  // Starts from a caller-supplied feasible basis (column indices, one per
  // row; slack columns allowed). Throws LpInfeasible if the basis is
  // singular or produces a negative basic value.
  void solve_from_basis(const std::vector<int>& basis) {
    if (!finalized_) finalize();
    if (cost_.empty()) throw Error("objective not set");
    load_basis(basis);
    reprice();
    optimize(cost_row_);
    extract();
  }

  double objective_value() const { return obj_value_; }
  const std::vector<double>& solution() const { return solution_; }
  long long pivots() const { return pivots_; }
  bool has_basis() const { return has_basis_; }

 private:
  struct SparseRow {
    std::vector<std::pair<int, double>> coeffs;
    Rel rel;
    double rhs;
  };

  static constexpr double kEps = 1e-9;
  static constexpr double kPivotTol = 1e-8;

  int n_struct_ = 0;
  int n_cols_ = 0;  // structural + slack
  bool finalized_ = false;
  std::vector<SparseRow> rows_;
  std::vector<int> slack_col_;

  // tableau over n_cols_(+artificials) columns plus a trailing rhs column
  int width_ = 0;  // columns currently in the tableau (without rhs)
  std::vector<double> tab_;
  std::vector<double> cost_row_;  // reduced costs, trailing entry = -value
  std::vector<int> basis_;
  std::vector<double> cost_;  // phase-2 costs per column (minimization)
  bool has_basis_ = false;

  double obj_value_ = 0;
  std::vector<double> solution_;
  long long pivots_ = 0;

  double& at(int r, int c) { return tab_[static_cast<std::size_t>(r) * (width_ + 1) + c]; }
  double at(int r, int c) const { return tab_[static_cast<std::size_t>(r) * (width_ + 1) + c]; }

  void build_plain_tableau(int extra_cols) {
    const int m = num_rows();
    width_ = n_cols_ + extra_cols;
    tab_.assign(static_cast<std::size_t>(m) * (width_ + 1), 0.0);
    for (int i = 0; i < m; ++i) {
      for (auto& [j, v] : rows_[i].coeffs) at(i, j) += v;
      if (slack_col_[i] >= 0)
        at(i, slack_col_[i]) = rows_[i].rel == Rel::le ? 1.0 : -1.0;
      at(i, width_) = rows_[i].rhs;
    }
  }

  // Gauss-Jordan on the requested basis columns; leaves the tableau in
  // reduced form with basis_[i] identifying row i's basic column.
  void load_basis(const std::vector<int>& basis) {
    const int m = num_rows();
    if (static_cast<int>(basis.size()) != m)
      throw LpInfeasible("basis size mismatch");
    build_plain_tableau(0);
    basis_.assign(m, -1);
    std::vector<bool> row_done(m, false);
    for (int col : basis) {
      if (col < 0 || col >= n_cols_) throw LpInfeasible("basis column range");
      int pr = -1;
      double best = kPivotTol;
      for (int r = 0; r < m; ++r)
        if (!row_done[r] && std::abs(at(r, col)) > best) {
          best = std::abs(at(r, col));
          pr = r;
        }
      if (pr < 0) throw LpInfeasible("singular basis");
      pivot(pr, col);
      basis_[pr] = col;
      row_done[pr] = true;
    }
    for (int r = 0; r < m; ++r)
      if (at(r, width_) < -kEps) throw LpInfeasible("basis not primal feasible");
    has_basis_ = true;
  }

  // Phase 1: artificials for rows without a usable slack start.
  void cold_start() {
    const int m = num_rows();
    std::vector<int> art_of_row(m, -1);
    int n_art = 0;
    for (int i = 0; i < m; ++i)
      if (rows_[i].rel != Rel::le) art_of_row[i] = n_cols_ + n_art++;
    build_plain_tableau(n_art);
    basis_.assign(m, -1);
    for (int i = 0; i < m; ++i) {
      if (art_of_row[i] >= 0) {
        at(i, art_of_row[i]) = 1.0;
        basis_[i] = art_of_row[i];
      } else {
        basis_[i] = slack_col_[i];
      }
    }
    has_basis_ = true;
    if (n_art > 0) {
      std::vector<double> phase1(width_ + 1, 0.0);
      // reduced costs of min sum(artificials) given the artificial basis
      for (int i = 0; i < m; ++i) {
        if (art_of_row[i] < 0) continue;
        for (int j = 0; j < width_; ++j) phase1[j] -= at(i, j);
        phase1[width_] -= at(i, width_);
      }
      for (int i = 0; i < m; ++i)
        if (art_of_row[i] >= 0) phase1[art_of_row[i]] = 0.0;
      cost_row_ = std::move(phase1);
      optimize(cost_row_, n_cols_);  // artificials may not re-enter
      if (-cost_row_[width_] > 1e-7) throw LpInfeasible("phase 1 positive");
      drive_out_artificials(n_cols_);
      shrink_to(n_cols_);
    }
    reprice();
  }

  void drive_out_artificials(int first_art) {
    const int m = num_rows();
    for (int r = 0; r < m; ++r) {
      if (basis_[r] < first_art) continue;
      int col = -1;
      for (int j = 0; j < first_art; ++j)
        if (std::abs(at(r, j)) > kPivotTol) {
          col = j;
          break;
        }
      if (col < 0) throw LpInfeasible("redundant row with artificial basis");
      pivot(r, col);
      basis_[r] = col;
    }
  }

  void shrink_to(int new_width) {
    const int m = num_rows();
    std::vector<double> next(static_cast<std::size_t>(m) * (new_width + 1));
    for (int r = 0; r < m; ++r) {
      for (int j = 0; j < new_width; ++j)
        next[static_cast<std::size_t>(r) * (new_width + 1) + j] = at(r, j);
      next[static_cast<std::size_t>(r) * (new_width + 1) + new_width] =
          at(r, width_);
    }
    tab_ = std::move(next);
    width_ = new_width;
  }

  // Rebuilds reduced costs for the phase-2 objective at the current basis.
  void reprice() {
    const int m = num_rows();
    cost_row_.assign(width_ + 1, 0.0);
    for (int j = 0; j < std::min<int>(width_, n_cols_); ++j)
      cost_row_[j] = cost_[j];
    for (int i = 0; i < m; ++i) {
      const double cb = basis_[i] < n_cols_ ? cost_[basis_[i]] : 0.0;
      if (cb == 0.0) continue;
      for (int j = 0; j <= width_; ++j) cost_row_[j] -= cb * at(i, j);
    }
    for (int i = 0; i < m; ++i) cost_row_[basis_[i]] = 0.0;
  }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    double* prow = &tab_[static_cast<std::size_t>(pr) * (width_ + 1)];
    for (int j = 0; j <= width_; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    const int m = num_rows();
    for (int r = 0; r < m; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      double* row = &tab_[static_cast<std::size_t>(r) * (width_ + 1)];
      for (int j = 0; j <= width_; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    ++pivots_;
  }

  void pivot_with_cost(int pr, int pc, std::vector<double>& cost_row) {
    pivot(pr, pc);
    const double f = cost_row[pc];
    if (f != 0.0) {
      const double* prow = &tab_[static_cast<std::size_t>(pr) * (width_ + 1)];
      for (int j = 0; j <= width_; ++j) cost_row[j] -= f * prow[j];
      cost_row[pc] = 0.0;
    }
  }

  // Minimizes cost_row over the current tableau. col_limit restricts the
  // entering columns (used in phase 1 to fence off artificials).
  void optimize(std::vector<double>& cost_row, int col_limit = -1) {
    const int m = num_rows();
    const int jmax = col_limit < 0 ? width_ : col_limit;
    bool bland = false;
    long long since_improve = 0;
    double best_val = -cost_row[width_];
    for (long long it = 0; it < 2000000; ++it) {
      int pc = -1;
      if (!bland) {
        double most = -kEps;
        for (int j = 0; j < jmax; ++j)
          if (cost_row[j] < most) {
            most = cost_row[j];
            pc = j;
          }
      } else {
        for (int j = 0; j < jmax; ++j)
          if (cost_row[j] < -kEps) {
            pc = j;
            break;
          }
      }
      if (pc < 0) return;  // optimal
      int pr = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        const double a = at(r, pc);
        if (a <= kPivotTol) continue;
        const double ratio = at(r, width_) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && pr >= 0 &&
             basis_[r] < basis_[pr])) {
          best_ratio = ratio;
          pr = r;
        }
      }
      if (pr < 0) throw Error("lp is unbounded");
      pivot_with_cost(pr, pc, cost_row);
      basis_[pr] = pc;
      const double val = -cost_row[width_];
      if (val < best_val - 1e-12) {
        best_val = val;
        since_improve = 0;
        bland = false;
      } else if (++since_improve > 100) {
        bland = true;
      }
    }
    throw Error("simplex iteration limit reached");
  }

  void extract() {
    solution_.assign(n_struct_, 0.0);
    const int m = num_rows();
    for (int i = 0; i < m; ++i)
      if (basis_[i] < n_struct_) solution_[basis_[i]] = at(i, width_);
    double v = 0;
    for (int j = 0; j < n_struct_; ++j) v += cost_[j] * solution_[j];
    obj_value_ = -v;  // back to the maximization sense
  }
};

}  // namespace thzalloc
