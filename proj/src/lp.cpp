#include "polylim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace polylim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr int kStallLimit = 100;

enum class VarState : unsigned char { Basic, Lower, Upper, Free };

// Bounded-variable simplex over the system A x - s = 0, where s are the
// per-row logical variables carrying the rhs in their bounds. The basis is
// tracked as the set of basic structural columns plus the rows whose logical
// is nonbasic; the working matrix W = A[restricted rows, basic structural]
// is at most num_vars square and is refactored every iteration, so basic
// values are always solved fresh and never drift.
class Simplex {
 public:
  Simplex(const LpProblem& p, const LpOptions& opts) : p_(p), opts_(opts) {
    n_ = p.num_vars;
    me_ = static_cast<int>(p.eq.size());
    m_ = me_ + static_cast<int>(p.ge.size());

    a_.resize(static_cast<std::size_t>(m_) * n_);
    row_norm_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const LpRow& row = i < me_ ? p.eq[i] : p.ge[i - me_];
      for (int j = 0; j < n_; ++j) {
        a_[static_cast<std::size_t>(i) * n_ + j] = row.coeffs[j];
        row_norm_[i] = std::max(row_norm_[i], std::abs(row.coeffs[j]));
      }
    }

    total_ = n_ + m_;
    lb_.assign(total_, -kInf);
    ub_.assign(total_, kInf);
    ftol_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = p.lower[j];
      ub_[j] = p.upper[j];
      double scale = 0.0;
      if (std::isfinite(lb_[j])) scale = std::max(scale, std::abs(lb_[j]));
      if (std::isfinite(ub_[j])) scale = std::max(scale, std::abs(ub_[j]));
      ftol_[j] = 1e-9 * (1.0 + scale);
    }
    for (int i = 0; i < m_; ++i) {
      const double rhs = i < me_ ? p.eq[i].rhs : p.ge[i - me_].rhs;
      lb_[n_ + i] = rhs;
      ub_[n_ + i] = i < me_ ? rhs : kInf;
      ftol_[n_ + i] = 1e-7 * std::max(1.0, row_norm_[i]);
    }

    state_.assign(total_, VarState::Free);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lb_[j])) {
        state_[j] = VarState::Lower;
      } else if (std::isfinite(ub_[j])) {
        state_[j] = VarState::Upper;
      }
    }
    logical_basic_.assign(m_, 1);
    for (int i = 0; i < m_; ++i) state_[n_ + i] = VarState::Basic;

    x_.assign(total_, 0.0);
    cost1_.assign(total_, 0.0);
    dw_.assign(total_, 0.0);
    y_row_.assign(m_, 0.0);
  }

  LpSolution run() {
    const long long cap = opts_.max_iterations > 0
                              ? opts_.max_iterations
                              : 10000LL + 200LL * (static_cast<long long>(m_) + n_);
    long long it = 0;
    bool bland = false;
    int stall = 0;
    double last_merit = kInf;

    while (true) {
      if (++it > cap) {
        throw std::runtime_error("simplex iteration limit exceeded (" + std::to_string(cap) +
                                 ")");
      }
      recompute_values();
      const double infeas = scan_infeasibility();
      const bool phase1 = infeas > 0.0;
      const double merit = phase1 ? infeas : objective_value();

      if (merit < last_merit - 1e-10 * (1.0 + std::abs(last_merit))) {
        stall = 0;
        bland = false;
      } else if (++stall > kStallLimit) {
        bland = true;
      }
      last_merit = merit;

      compute_duals(phase1);
      const auto [enter, dir] = price(phase1, bland);
      if (enter < 0) {
        return phase1 ? finish_infeasible(it) : finish_optimal(it);
      }

      compute_direction(enter);
      Pivot piv = ratio_test(enter, dir, phase1, bland, kPivotTol);
      if (piv.kind == Pivot::None) {
        // Retry accepting tiny pivots before concluding there is no blocker.
        piv = ratio_test(enter, dir, phase1, bland, 1e-12);
      }
      if (piv.kind == Pivot::None) {
        if (phase1) throw std::runtime_error("phase-1 ray without a breakpoint");
        return finish_unbounded(it);
      }
      apply(enter, piv);
    }
  }

 private:
  struct Pivot {
    enum Kind { None, Flip, Swap } kind = None;
    int leave = -1;            // variable leaving the basis (Swap only)
    bool leave_upper = false;  // bound the leaving variable lands on
  };

  double a(int row, int col) const { return a_[static_cast<std::size_t>(row) * n_ + col]; }

  double nonbasic_value(int v) const {
    switch (state_[v]) {
      case VarState::Lower: return lb_[v];
      case VarState::Upper: return ub_[v];
      default: return 0.0;
    }
  }

  void factorize() {
    const int k = static_cast<int>(basic_struct_.size());
    w_.resize(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) w_(i, j) = a(restricted_rows_[i], basic_struct_[j]);
    }
    lu_.compute(w_);
    if (k > 0) {
      const auto diag = lu_.matrixLU().diagonal().cwiseAbs();
      if (diag.minCoeff() <= 1e-13 * std::max(1.0, diag.maxCoeff())) {
        throw std::runtime_error("simplex basis became numerically singular");
      }
    }
  }

  // Nonbasic values from their states, basic structural values through W,
  // then every basic logical as its row activity.
  void recompute_values() {
    const int k = static_cast<int>(basic_struct_.size());
    for (int v = 0; v < total_; ++v) {
      if (state_[v] != VarState::Basic) x_[v] = nonbasic_value(v);
    }
    factorize();
    if (k > 0) {
      Eigen::VectorXd rhs(k);
      for (int i = 0; i < k; ++i) {
        const int r = restricted_rows_[i];
        double acc = x_[n_ + r];
        const double* row = a_.data() + static_cast<std::size_t>(r) * n_;
        for (int j = 0; j < n_; ++j) {
          if (state_[j] != VarState::Basic) acc -= row[j] * x_[j];
        }
        rhs[i] = acc;
      }
      const Eigen::VectorXd sol = lu_.solve(rhs);
      for (int i = 0; i < k; ++i) x_[basic_struct_[i]] = sol[i];
    }
    const int m = m_;
#pragma omp parallel for schedule(static) if (opts_.parallel)
    for (int f = 0; f < m; ++f) {
      if (!logical_basic_[f]) continue;
      double acc = 0.0;
      const double* row = a_.data() + static_cast<std::size_t>(f) * n_;
      for (int j = 0; j < n_; ++j) acc += row[j] * x_[j];
      x_[n_ + f] = acc;
    }
  }

  double violation(int v) const {
    if (x_[v] < lb_[v] - ftol_[v]) return lb_[v] - x_[v];
    if (x_[v] > ub_[v] + ftol_[v]) return x_[v] - ub_[v];
    return 0.0;
  }

  // Total bound violation of basic variables; fills the phase-1 costs.
  double scan_infeasibility() {
    double total = 0.0;
    std::fill(cost1_.begin(), cost1_.end(), 0.0);
    for (int v = 0; v < total_; ++v) {
      if (state_[v] != VarState::Basic) continue;
      if (x_[v] < lb_[v] - ftol_[v]) {
        cost1_[v] = -1.0;
        total += lb_[v] - x_[v];
      } else if (x_[v] > ub_[v] + ftol_[v]) {
        cost1_[v] = 1.0;
        total += x_[v] - ub_[v];
      }
    }
    return total;
  }

  double cost_of(int v, bool phase1) const {
    if (phase1) return state_[v] == VarState::Basic ? cost1_[v] : 0.0;
    return v < n_ ? p_.objective[v] : 0.0;
  }

  double objective_value() const {
    double obj = p_.objective_constant;
    for (int j = 0; j < n_; ++j) obj += p_.objective[j] * x_[j];
    return obj;
  }

  // Duals per row: y_f = -cost(basic logical f) on rows still carrying a
  // basic logical, then W^T y_R = c_B adjusted for those rows. support_
  // lists the rows with nonzero y.
  void compute_duals(bool phase1) {
    const int k = static_cast<int>(basic_struct_.size());
    std::fill(y_row_.begin(), y_row_.end(), 0.0);
    support_.clear();
    for (int f = 0; f < m_; ++f) {
      if (!logical_basic_[f]) continue;
      const double c = cost_of(n_ + f, phase1);
      if (c != 0.0) {
        y_row_[f] = -c;
        support_.push_back(f);
      }
    }
    if (k > 0) {
      Eigen::VectorXd rhs(k);
      for (int jb = 0; jb < k; ++jb) {
        const int j = basic_struct_[jb];
        double acc = cost_of(j, phase1);
        for (int f : support_) acc -= a(f, j) * y_row_[f];
        rhs[jb] = acc;
      }
      const Eigen::VectorXd sol = lu_.transpose().solve(rhs);
      for (int i = 0; i < k; ++i) {
        const int r = restricted_rows_[i];
        y_row_[r] = sol[i];
        if (sol[i] != 0.0) support_.push_back(r);
      }
    }
  }

  double reduced_cost(int v, bool phase1) const {
    if (v >= n_) return y_row_[v - n_];  // column of a logical is -e_row
    double d = cost_of(v, phase1);
    for (int f : support_) d -= y_row_[f] * a(f, v);
    return d;
  }

  // Entering variable and its direction; Dantzig by default, least-index
  // under Bland. Returns {-1, 0} when no nonbasic variable can improve.
  std::pair<int, int> price(bool phase1, bool bland) {
    int best = -1;
    int best_dir = 0;
    double best_score = 0.0;
    for (int v = 0; v < total_; ++v) {
      if (state_[v] == VarState::Basic) continue;
      if (lb_[v] == ub_[v]) continue;  // fixed
      const double d = reduced_cost(v, phase1);
      const double dtol = kDualTol * (1.0 + std::abs(cost_of(v, phase1)));
      int dir = 0;
      if (state_[v] == VarState::Lower && d < -dtol) {
        dir = 1;
      } else if (state_[v] == VarState::Upper && d > dtol) {
        dir = -1;
      } else if (state_[v] == VarState::Free && std::abs(d) > dtol) {
        dir = d < 0.0 ? 1 : -1;
      }
      if (dir == 0) continue;
      if (bland) return {v, dir};
      const double score = std::abs(d);
      if (best < 0 || score > best_score * (1.0 + 1e-12)) {
        best = v;
        best_dir = dir;
        best_score = score;
      }
    }
    return {best, best_dir};
  }

  // w = B^-1 a_enter stored per basic variable in dw_.
  void compute_direction(int enter) {
    const int k = static_cast<int>(basic_struct_.size());
    wsol_.assign(k, 0.0);
    if (k > 0) {
      Eigen::VectorXd rhs(k);
      for (int i = 0; i < k; ++i) {
        const int r = restricted_rows_[i];
        rhs[i] = enter < n_ ? a(r, enter) : (enter - n_ == r ? -1.0 : 0.0);
      }
      const Eigen::VectorXd sol = lu_.solve(rhs);
      for (int i = 0; i < k; ++i) wsol_[i] = sol[i];
    }
    for (int i = 0; i < k; ++i) dw_[basic_struct_[i]] = wsol_[i];
    const int m = m_;
#pragma omp parallel for schedule(static) if (opts_.parallel)
    for (int f = 0; f < m; ++f) {
      if (!logical_basic_[f]) continue;
      double acc = enter < n_ ? -a(f, enter) : (enter - n_ == f ? 1.0 : 0.0);
      const double* row = a_.data() + static_cast<std::size_t>(f) * n_;
      for (int i = 0; i < k; ++i) acc += row[basic_struct_[i]] * wsol_[i];
      dw_[n_ + f] = acc;
    }
  }

  // Bounded ratio test. In phase 1 a basic variable outside its bounds
  // blocks when it reaches the violated bound; feasible basics block at
  // whichever bound they approach; the entering variable may bound-flip.
  Pivot ratio_test(int enter, int dir, bool phase1, bool bland, double pivot_tol) {
    const double sigma = static_cast<double>(dir);
    double best_delta = kInf;
    double best_weight = 0.0;
    Pivot best;

    auto consider = [&](int v, double delta, double weight, bool upper, bool flip) {
      delta = std::max(delta, 0.0);
      if (best.kind == Pivot::None) {
        best_delta = delta;
        best = Pivot{flip ? Pivot::Flip : Pivot::Swap, flip ? -1 : v, upper};
        best_weight = weight;
        return;
      }
      const double slack = 1e-9 * (1.0 + best_delta);
      if (delta < best_delta - slack) {
        best_delta = delta;
        best = Pivot{flip ? Pivot::Flip : Pivot::Swap, flip ? -1 : v, upper};
        best_weight = weight;
        return;
      }
      if (delta > best_delta + slack) return;
      // Near-tie: favour the stablest pivot, or the lowest index under Bland.
      const bool better = bland ? (!flip && (best.kind == Pivot::Flip || v < best.leave))
                                : weight > best_weight;
      if (better) {
        best_delta = std::min(best_delta, delta);
        best = Pivot{flip ? Pivot::Flip : Pivot::Swap, flip ? -1 : v, upper};
        best_weight = weight;
      }
    };

    if (std::isfinite(lb_[enter]) && std::isfinite(ub_[enter])) {
      consider(enter, ub_[enter] - lb_[enter], 0.0, dir > 0, true);
    }

    const int k = static_cast<int>(basic_struct_.size());
    for (int bi = 0; bi < k + m_; ++bi) {
      int v;
      if (bi < k) {
        v = basic_struct_[bi];
      } else {
        const int f = bi - k;
        if (!logical_basic_[f]) continue;
        v = n_ + f;
      }
      const double w = dw_[v];
      if (std::abs(w) < pivot_tol) continue;
      const double rate = -sigma * w;  // change of x_v per unit step of the entering var
      const double xv = x_[v];
      if (phase1 && xv < lb_[v] - ftol_[v]) {
        if (rate > 0.0) consider(v, (lb_[v] - xv) / rate, std::abs(w), false, false);
        continue;
      }
      if (phase1 && xv > ub_[v] + ftol_[v]) {
        if (rate < 0.0) consider(v, (xv - ub_[v]) / (-rate), std::abs(w), true, false);
        continue;
      }
      if (rate > 0.0 && std::isfinite(ub_[v])) {
        consider(v, (ub_[v] - xv) / rate, std::abs(w), true, false);
      } else if (rate < 0.0 && std::isfinite(lb_[v])) {
        consider(v, (xv - lb_[v]) / (-rate), std::abs(w), false, false);
      }
    }
    return best;
  }

  void apply(int enter, const Pivot& piv) {
    if (piv.kind == Pivot::Flip) {
      state_[enter] = state_[enter] == VarState::Lower ? VarState::Upper : VarState::Lower;
      return;
    }
    const int leave = piv.leave;
    if (!std::isfinite(piv.leave_upper ? ub_[leave] : lb_[leave])) {
      throw std::runtime_error("simplex tried to park a variable at an infinite bound");
    }
    state_[enter] = VarState::Basic;
    state_[leave] = piv.leave_upper ? VarState::Upper : VarState::Lower;

    const bool enter_logical = enter >= n_;
    const bool leave_logical = leave >= n_;
    if (!enter_logical && leave_logical) {
      basic_struct_.push_back(enter);
      restricted_rows_.push_back(leave - n_);
      logical_basic_[leave - n_] = 0;
    } else if (!enter_logical && !leave_logical) {
      *std::find(basic_struct_.begin(), basic_struct_.end(), leave) = enter;
    } else if (enter_logical && leave_logical) {
      *std::find(restricted_rows_.begin(), restricted_rows_.end(), enter - n_) = leave - n_;
      logical_basic_[enter - n_] = 1;
      logical_basic_[leave - n_] = 0;
    } else {  // logical enters, structural leaves: the working set shrinks
      restricted_rows_.erase(
          std::find(restricted_rows_.begin(), restricted_rows_.end(), enter - n_));
      logical_basic_[enter - n_] = 1;
      basic_struct_.erase(std::find(basic_struct_.begin(), basic_struct_.end(), leave));
    }
  }

  LpSolution finish_common(long long it) {
    recompute_values();
    LpSolution sol;
    sol.iterations = it;
    sol.objective = objective_value();
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.eq_activity.resize(me_);
    sol.ge_activity.resize(m_ - me_);
    for (int i = 0; i < m_; ++i) {
      (i < me_ ? sol.eq_activity[i] : sol.ge_activity[i - me_]) = x_[n_ + i];
    }
    return sol;
  }

  LpSolution finish_optimal(long long it) {
    LpSolution sol = finish_common(it);
    sol.status = LpStatus::Optimal;
    return sol;
  }

  LpSolution finish_infeasible(long long it) {
    LpSolution sol = finish_common(it);
    sol.status = LpStatus::Infeasible;
    for (int i = 0; i < m_; ++i) {
      if (violation(n_ + i) > 0.0) {
        if (i < me_) {
          sol.infeasible_eq_rows.push_back(i);
        } else {
          sol.infeasible_ge_rows.push_back(i - me_);
        }
      }
    }
    return sol;
  }

  LpSolution finish_unbounded(long long it) {
    LpSolution sol = finish_common(it);
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  const LpProblem& p_;
  LpOptions opts_;
  int n_ = 0, me_ = 0, m_ = 0, total_ = 0;
  std::vector<double> a_;        // row-major m x n
  std::vector<double> row_norm_;
  std::vector<double> lb_, ub_, ftol_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<char> logical_basic_;     // per row: logical still basic?
  std::vector<int> basic_struct_;       // basic structural columns
  std::vector<int> restricted_rows_;    // rows whose logical is nonbasic
  std::vector<double> cost1_;           // phase-1 costs of basic variables
  std::vector<double> y_row_;           // dual value per row
  std::vector<int> support_;            // rows with nonzero dual
  std::vector<double> wsol_;
  std::vector<double> dw_;              // direction per basic variable
  Eigen::MatrixXd w_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

void validate(const LpProblem& p) {
  if (p.num_vars < 0) throw std::invalid_argument("negative variable count");
  const std::size_t n = static_cast<std::size_t>(p.num_vars);
  if (p.objective.size() != n || p.lower.size() != n || p.upper.size() != n) {
    throw std::invalid_argument("objective/bounds size does not match variable count");
  }
  for (double c : p.objective) {
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite objective coefficient");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(p.lower[j]) || std::isnan(p.upper[j])) {
      throw std::invalid_argument("NaN variable bound");
    }
    if (p.lower[j] > p.upper[j]) {
      throw std::invalid_argument("variable " + std::to_string(j) + " has lower > upper");
    }
  }
  auto check_rows = [n](const std::vector<LpRow>& rows, const char* what) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].coeffs.size() != n) {
        throw std::invalid_argument(std::string(what) + " row " + std::to_string(i) +
                                    " has wrong coefficient count");
      }
      if (!std::isfinite(rows[i].rhs)) {
        throw std::invalid_argument(std::string(what) + " row " + std::to_string(i) +
                                    " has non-finite rhs");
      }
      for (double c : rows[i].coeffs) {
        if (!std::isfinite(c)) {
          throw std::invalid_argument(std::string(what) + " row " + std::to_string(i) +
                                      " has non-finite coefficient");
        }
      }
    }
  };
  check_rows(p.eq, "equality");
  check_rows(p.ge, "inequality");
}

}  // namespace

LpSolution solve(const LpProblem& p, const LpOptions& opts) {
  validate(p);
  Simplex simplex(p, opts);
  return simplex.run();
}

std::string dump_problem(const LpProblem& p) {
  std::ostringstream out;
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  out << "vars " << p.num_vars << " eq " << p.eq.size() << " ge " << p.ge.size() << "\n";
  out << "min";
  for (double c : p.objective) out << " " << num(c);
  if (p.objective_constant != 0.0) out << " + " << num(p.objective_constant);
  out << "\n";
  auto dump_rows = [&](const std::vector<LpRow>& rows, const char* rel) {
    for (const LpRow& row : rows) {
      for (double c : row.coeffs) out << num(c) << " ";
      out << rel << " " << num(row.rhs) << "\n";
    }
  };
  dump_rows(p.eq, "==");
  dump_rows(p.ge, ">=");
  for (int j = 0; j < p.num_vars; ++j) {
    out << "x" << j << " in [" << num(p.lower[j]) << ", " << num(p.upper[j]) << "]\n";
  }
  return out.str();
}

}  // namespace polylim
