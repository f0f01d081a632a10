#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "common.hpp"
#include "simplex.hpp"

namespace thzalloc {

// Binary association a_{b,s,n}: BS b serves user n on sub-band s.
struct AssignmentMatrix {
  Index3 idx;
  std::vector<std::uint8_t> a;

  AssignmentMatrix() = default;
  AssignmentMatrix(int b, int s, int n)
      : idx{b, s, n}, a(static_cast<std::size_t>(idx.size()), 0) {}

  std::uint8_t& at(int b, int s, int n) {
    return a[static_cast<std::size_t>(idx(b, s, n))];
  }
  std::uint8_t at(int b, int s, int n) const {
    return a[static_cast<std::size_t>(idx(b, s, n))];
  }
  // slots granted to user n across all BSs and sub-bands
  int degree(int n) const {
    int d = 0;
    for (int b = 0; b < idx.B; ++b)
      for (int s = 0; s < idx.S; ++s) d += at(b, s, n);
    return d;
  }
  // number of distinct BSs serving user n (the per-user connectivity order)
  int connected_bs(int n) const {
    int c = 0;
    for (int b = 0; b < idx.B; ++b) {
      for (int s = 0; s < idx.S; ++s)
        if (at(b, s, n)) {
          ++c;
          break;
        }
    }
    return c;
  }
  int user_of(int b, int s) const {
    for (int n = 0; n < idx.N; ++n)
      if (at(b, s, n)) return n;
    return -1;
  }

  // Exact feasibility: one user per (b,s), at most one BS per (s,n), and
  // per-user totals within [gamma_floor, S].
  void validate(const std::vector<int>& gamma_floor) const {
    for (int b = 0; b < idx.B; ++b)
      for (int s = 0; s < idx.S; ++s) {
        int sum = 0;
        for (int n = 0; n < idx.N; ++n) sum += at(b, s, n);
        if (sum != 1) throw Error("assignment violates one-user-per-slot");
      }
    for (int s = 0; s < idx.S; ++s)
      for (int n = 0; n < idx.N; ++n) {
        int sum = 0;
        for (int b = 0; b < idx.B; ++b) sum += at(b, s, n);
        if (sum > 1) throw Error("assignment violates one-BS-per-sub-band");
      }
    for (int n = 0; n < idx.N; ++n) {
      const int d = degree(n);
      if (d > idx.S) throw Error("assignment exceeds the per-user cap");
      if (d < gamma_floor[static_cast<std::size_t>(n)])
        throw Error("assignment misses a fairness floor");
    }
  }
};

struct DenseIntMatrix {
  int rows = 0, cols = 0;
  std::vector<std::int8_t> v;
  std::int8_t at(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  std::int8_t& at(int r, int c) {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
};

enum class RowTag { c2, c3, c4_upper, c4_lower };

// Stacked LP data: rows ordered as the C2 block (one per (s,n)), the C3
// block (one per (b,s)), then the two C4 blocks (one per user each); the
// lower-bound block is the negated upper block. Columns follow the
// (b,s,n) row-major flattening.
struct ConstraintSystem {
  int num_bs = 0, num_sub = 0, num_users = 0;
  DenseIntMatrix t;
  std::vector<int> k;
  std::vector<RowTag> tags;
};

inline ConstraintSystem build_constraints(int num_bs, int num_sub,
                                          int num_users,
                                          const std::vector<int>& gamma_floor) {
  if (num_bs < 1 || num_sub < 1 || num_users < 1)
    throw RangeError("dimensions must be >= 1");
  if (static_cast<int>(gamma_floor.size()) != num_users)
    throw RangeError("gamma_floor must have one entry per user");
  long long total_floor = 0;
  for (int g : gamma_floor) {
    if (g < 0) throw RangeError("gamma_floor entries must be >= 0");
    if (g > num_sub)
      throw InfeasibleFairness("a fairness floor exceeds the sub-band count");
    total_floor += g;
  }
  if (total_floor > static_cast<long long>(num_bs) * num_sub)
    throw InfeasibleFairness("fairness floors exceed the available slots");

  ConstraintSystem cs;
  cs.num_bs = num_bs;
  cs.num_sub = num_sub;
  cs.num_users = num_users;
  const int rows = num_users * num_sub + num_bs * num_sub + 2 * num_users;
  const int cols = num_bs * num_sub * num_users;
  cs.t.rows = rows;
  cs.t.cols = cols;
  cs.t.v.assign(static_cast<std::size_t>(rows) * cols, 0);
  cs.k.resize(static_cast<std::size_t>(rows));
  cs.tags.resize(static_cast<std::size_t>(rows));
  const Index3 idx{num_bs, num_sub, num_users};

  int r = 0;
  for (int s = 0; s < num_sub; ++s)
    for (int n = 0; n < num_users; ++n, ++r) {
      for (int b = 0; b < num_bs; ++b) cs.t.at(r, idx(b, s, n)) = 1;
      cs.k[r] = 1;
      cs.tags[r] = RowTag::c2;
    }
  for (int b = 0; b < num_bs; ++b)
    for (int s = 0; s < num_sub; ++s, ++r) {
      for (int n = 0; n < num_users; ++n) cs.t.at(r, idx(b, s, n)) = 1;
      cs.k[r] = 1;
      cs.tags[r] = RowTag::c3;
    }
  for (int n = 0; n < num_users; ++n, ++r) {
    for (int b = 0; b < num_bs; ++b)
      for (int s = 0; s < num_sub; ++s) cs.t.at(r, idx(b, s, n)) = 1;
    cs.k[r] = num_sub;
    cs.tags[r] = RowTag::c4_upper;
  }
  for (int n = 0; n < num_users; ++n, ++r) {
    for (int b = 0; b < num_bs; ++b)
      for (int s = 0; s < num_sub; ++s) cs.t.at(r, idx(b, s, n)) = -1;
    cs.k[r] = -gamma_floor[static_cast<std::size_t>(n)];
    cs.tags[r] = RowTag::c4_lower;
  }
  return cs;
}

// LP objective: the rate each link would carry under the current powers.
// Blocked links contribute zero but stay assignable.
inline std::vector<double> rate_coefficients(
    const PowerMatrix& power, const ChannelTensor& t, const SpectrumPlan& plan,
    const NetworkScenario& sc, SinrVariant variant = SinrVariant::ideal,
    bool use_estimates = false) {
  std::vector<double> q(static_cast<std::size_t>(t.idx.size()), 0.0);
  for (int b = 0; b < t.idx.B; ++b)
    for (int n = 0; n < t.idx.N; ++n) {
      if (t.blocked(b, n)) continue;
      for (int s = 0; s < t.idx.S; ++s) {
        const double g =
            sinr(b, s, n, power, t, plan, sc, variant, use_estimates);
        q[static_cast<std::size_t>(t.idx(b, s, n))] =
            plan.w * std::log2(1.0 + g);
      }
    }
  return q;
}

// Repeated-solve wrapper around the simplex: the constraint rows are fixed
// for a given network shape, so alternating-optimization re-solves reuse the
// previous optimal basis and only reprice the new objective. The first solve
// can start from a feasible assignment (crash basis: its columns plus every
// inequality slack), which skips phase 1 entirely.
class AssignmentSolver {
 public:
  AssignmentSolver(int num_bs, int num_sub, int num_users,
                   std::vector<int> gamma_floor)
      : num_bs_(num_bs), num_sub_(num_sub), num_users_(num_users),
        gamma_floor_(std::move(gamma_floor)),
        lp_(num_bs * num_sub * num_users), idx_{num_bs, num_sub, num_users} {
    build_constraints(num_bs_, num_sub_, num_users_, gamma_floor_);  // checks
    for (int s = 0; s < num_sub_; ++s)
      for (int n = 0; n < num_users_; ++n) {
        std::vector<std::pair<int, double>> row;
        for (int b = 0; b < num_bs_; ++b) row.emplace_back(idx_(b, s, n), 1.0);
        lp_.add_row(std::move(row), Simplex::Rel::le, 1.0);
      }
    for (int b = 0; b < num_bs_; ++b)
      for (int s = 0; s < num_sub_; ++s) {
        std::vector<std::pair<int, double>> row;
        for (int n = 0; n < num_users_; ++n)
          row.emplace_back(idx_(b, s, n), 1.0);
        lp_.add_row(std::move(row), Simplex::Rel::eq, 1.0);
      }
    for (int n = 0; n < num_users_; ++n) {
      std::vector<std::pair<int, double>> row;
      for (int b = 0; b < num_bs_; ++b)
        for (int s = 0; s < num_sub_; ++s) row.emplace_back(idx_(b, s, n), 1.0);
      lp_.add_row(std::move(row), Simplex::Rel::le,
                  static_cast<double>(num_sub_));
    }
    for (int n = 0; n < num_users_; ++n) {
      std::vector<std::pair<int, double>> row;
      for (int b = 0; b < num_bs_; ++b)
        for (int s = 0; s < num_sub_; ++s) row.emplace_back(idx_(b, s, n), 1.0);
      lp_.add_row(std::move(row), Simplex::Rel::ge,
                  static_cast<double>(gamma_floor_[static_cast<std::size_t>(n)]));
    }
    lp_.finalize();
  }

  AssignmentMatrix solve(const std::vector<double>& q,
                         const AssignmentMatrix* hint = nullptr) {
    if (static_cast<int>(q.size()) != idx_.size())
      throw RangeError("coefficient size mismatch");
    double scale = 0;
    for (double v : q) scale = std::max(scale, std::abs(v));
    std::vector<double> c(q);
    if (scale > 0)
      for (double& v : c) v /= scale;
    lp_.set_objective(c);
    if (!lp_.has_basis() && hint) {
      try {
        lp_.solve_from_basis(crash_basis(*hint));
      } catch (const LpInfeasible&) {
        lp_.solve();
      }
    } else {
      lp_.solve();
    }
    return extract(q);
  }

  double objective() const { return objective_; }
  long long pivots() const { return lp_.pivots(); }

 private:
  int num_bs_, num_sub_, num_users_;
  std::vector<int> gamma_floor_;
  Simplex lp_;
  Index3 idx_;
  double objective_ = 0;

  std::vector<int> crash_basis(const AssignmentMatrix& hint) const {
    std::vector<int> basis;
    for (int i = 0; i < idx_.size(); ++i)
      if (hint.a[static_cast<std::size_t>(i)]) basis.push_back(i);
    const int m = lp_.num_rows();
    for (int r = 0; r < m; ++r) {
      const int sc = lp_.slack_column(r);
      if (sc >= 0) basis.push_back(sc);
    }
    return basis;
  }

  AssignmentMatrix extract(const std::vector<double>& q) {
    const std::vector<double>& x = lp_.solution();
    AssignmentMatrix out(num_bs_, num_sub_, num_users_);
    objective_ = 0;
    for (int i = 0; i < idx_.size(); ++i) {
      const double v = x[static_cast<std::size_t>(i)];
      if (std::abs(v) <= 1e-6) continue;
      if (std::abs(v - 1.0) > 1e-6)
        throw NonIntegralSolution("lp vertex is not binary");
      out.a[static_cast<std::size_t>(i)] = 1;
      objective_ += q[static_cast<std::size_t>(i)];
    }
    out.validate(gamma_floor_);
    return out;
  }
};

inline AssignmentMatrix solve_assignment(const std::vector<double>& q,
                                         int num_bs, int num_sub,
                                         int num_users,
                                         const std::vector<int>& gamma_floor,
                                         double* objective = nullptr) {
  AssignmentSolver solver(num_bs, num_sub, num_users, gamma_floor);
  AssignmentMatrix a = solver.solve(q);
  if (objective) *objective = solver.objective();
  return a;
}

// Exhaustive integer optimum by enumerating every binary vector; the test
// oracle for the LP integrality claim.
inline std::pair<AssignmentMatrix, double> ilp_brute_force(
    const std::vector<double>& q, int num_bs, int num_sub, int num_users,
    const std::vector<int>& gamma_floor) {
  const Index3 idx{num_bs, num_sub, num_users};
  const int total = idx.size();
  if (total > 20) throw TooLarge("brute force limited to 20 variables");
  build_constraints(num_bs, num_sub, num_users, gamma_floor);  // feasibility
  double best = -1;
  std::uint32_t best_mask = 0;
  bool found = false;
  for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
    bool ok = true;
    for (int b = 0; ok && b < num_bs; ++b)
      for (int s = 0; ok && s < num_sub; ++s) {
        int sum = 0;
        for (int n = 0; n < num_users; ++n)
          sum += (mask >> idx(b, s, n)) & 1u;
        ok = sum == 1;
      }
    for (int s = 0; ok && s < num_sub; ++s)
      for (int n = 0; ok && n < num_users; ++n) {
        int sum = 0;
        for (int b = 0; b < num_bs; ++b) sum += (mask >> idx(b, s, n)) & 1u;
        ok = sum <= 1;
      }
    for (int n = 0; ok && n < num_users; ++n) {
      int deg = 0;
      for (int b = 0; b < num_bs; ++b)
        for (int s = 0; s < num_sub; ++s) deg += (mask >> idx(b, s, n)) & 1u;
      ok = deg >= gamma_floor[static_cast<std::size_t>(n)] && deg <= num_sub;
    }
    if (!ok) continue;
    double obj = 0;
    for (int i = 0; i < total; ++i)
      if ((mask >> i) & 1u) obj += q[static_cast<std::size_t>(i)];
    if (!found || obj > best) {
      best = obj;
      best_mask = mask;
      found = true;
    }
  }
  if (!found) throw LpInfeasible("no feasible assignment exists");
  AssignmentMatrix a(num_bs, num_sub, num_users);
  for (int i = 0; i < total; ++i)
    a.a[static_cast<std::size_t>(i)] = (best_mask >> i) & 1u;
  return {a, best};
}

// Fraction-free integer determinant; entries stay exact in 64-bit for the
// matrix sizes the oracle enumerates.
inline long long bareiss_det(std::vector<long long>& m, int k) {
  long long sign = 1, prev = 1;
  for (int i = 0; i + 1 < k; ++i) {
    int piv = -1;
    for (int r = i; r < k; ++r)
      if (m[static_cast<std::size_t>(r) * k + i] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return 0;
    if (piv != i) {
      for (int c = 0; c < k; ++c)
        std::swap(m[static_cast<std::size_t>(piv) * k + c],
                  m[static_cast<std::size_t>(i) * k + c]);
      sign = -sign;
    }
    for (int r = i + 1; r < k; ++r)
      for (int c = i + 1; c < k; ++c)
        m[static_cast<std::size_t>(r) * k + c] =
            (m[static_cast<std::size_t>(r) * k + c] *
                 m[static_cast<std::size_t>(i) * k + i] -
             m[static_cast<std::size_t>(r) * k + i] *
                 m[static_cast<std::size_t>(i) * k + c]) /
            prev;
    prev = m[static_cast<std::size_t>(i) * k + i];
  }
  return sign * m[static_cast<std::size_t>(k - 1) * k + (k - 1)];
}

inline long long submatrix_det(const DenseIntMatrix& m,
                               const std::vector<int>& rows,
                               const std::vector<int>& cols) {
  const int k = static_cast<int>(rows.size());
  std::vector<long long> sub(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      sub[static_cast<std::size_t>(i) * k + j] =
          m.at(rows[static_cast<std::size_t>(i)],
               cols[static_cast<std::size_t>(j)]);
  return bareiss_det(sub, k);
}

inline void check_unimodular_entries(const DenseIntMatrix& m) {
  for (std::int8_t e : m.v)
    if (e < -1 || e > 1)
      throw EntriesOutOfRange("matrix entries must be in {-1,0,1}");
}

namespace detail {
inline bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] < n - k + i) {
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}
}  // namespace detail

// True iff every square submatrix of size <= k_max has determinant in
// {-1,0,1}.
inline bool tum_exhaustive(const DenseIntMatrix& m, int k_max) {
  check_unimodular_entries(m);
  const int limit = std::min({k_max, m.rows, m.cols});
  for (int k = 1; k <= limit; ++k) {
    std::vector<int> rows(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) rows[static_cast<std::size_t>(i)] = i;
    do {
      std::vector<int> cols(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) cols[static_cast<std::size_t>(i)] = i;
      do {
        const long long d = submatrix_det(m, rows, cols);
        if (d < -1 || d > 1) return false;
      } while (detail::next_combination(cols, m.cols));
    } while (detail::next_combination(rows, m.rows));
  }
  return true;
}

// Probabilistic check for matrices too large to enumerate: random square
// submatrices of random size in [2, k_max].
inline bool tum_sampled(const DenseIntMatrix& m, int k_max, int draws,
                        std::uint64_t seed) {
  check_unimodular_entries(m);
  std::mt19937_64 rng(seed);
  const int top = std::min({k_max, m.rows, m.cols});
  std::uniform_int_distribution<int> size_dist(2, top);
  std::vector<int> all_rows(static_cast<std::size_t>(m.rows)),
      all_cols(static_cast<std::size_t>(m.cols));
  for (int i = 0; i < m.rows; ++i) all_rows[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < m.cols; ++i) all_cols[static_cast<std::size_t>(i)] = i;
  for (int d = 0; d < draws; ++d) {
    const int k = size_dist(rng);
    std::shuffle(all_rows.begin(), all_rows.end(), rng);
    std::shuffle(all_cols.begin(), all_cols.end(), rng);
    std::vector<int> rows(all_rows.begin(), all_rows.begin() + k);
    std::vector<int> cols(all_cols.begin(), all_cols.begin() + k);
    const long long det = submatrix_det(m, rows, cols);
    if (det < -1 || det > 1) return false;
  }
  return true;
}

// Exhaustive for small matrices, sampled (probabilistic) otherwise.
inline bool tum_oracle(const DenseIntMatrix& m) {
  if (m.rows <= 6 && m.cols <= 6)
    return tum_exhaustive(m, std::min(m.rows, m.cols));
  return tum_sampled(m, std::min({m.rows, m.cols, 8}), 10000,
                     fnv1a("tum-oracle"));
}

}  // namespace thzalloc
