#pragma once

#include "rismec/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rismec {

/// min c'x  s.t.  A x = b,  h - G x in K.
/// K is the nonnegative orthant over the first `n_orthant` rows of G followed by
/// second-order cones of the listed sizes (first entry of each block is the
/// "head": s0 >= ||s1||).
/// Complex unknowns are lifted by callers as adjacent (re, im) slots.
struct ConicProgram {
  rvec c;
  rmat A;
  rvec b;
  rmat G;
  rvec h;
  int n_orthant = 0;
  std::vector<int> soc_dims;

  int n_vars() const { return static_cast<int>(c.size()); }
  int n_cone_rows() const { return static_cast<int>(G.rows()); }
  /// Throws std::invalid_argument on inconsistent shapes or non-finite data.
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iters };
std::string to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::max_iters;
  rvec x;
  rvec y;  // equality multipliers
  rvec z;  // cone multipliers
  double objective = std::numeric_limits<double>::quiet_NaN();
  double max_violation = std::numeric_limits<double>::infinity();
  double rel_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

struct SolverOptions {
  double tol_feas = 1e-7;
  double tol_gap = 1e-7;
  int max_iters = 200;
  bool equilibrate = true;
};

SolveReport solve_conic(const ConicProgram& prog, const SolverOptions& opts = {});

/// Largest scaled violation of x: each row's violation is divided by
/// max(1, |h_i|, |b_i|). Cone blocks are measured as ||s1|| - s0.
double max_violation(const ConicProgram& prog, const rvec& x);

// ---------------------------------------------------------------------------
// Builder

/// constant + sum coef * x[index]
struct Affine {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  Affine() = default;
  Affine(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static Affine var(int i, double coef = 1.0) {
    Affine a;
    a.terms.emplace_back(i, coef);
    return a;
  }
  Affine& operator+=(const Affine& o);
  Affine& operator-=(const Affine& o);
  Affine& operator*=(double s);
  double eval(const rvec& x) const;
};

Affine operator+(Affine a, const Affine& b);
Affine operator-(Affine a, const Affine& b);
Affine operator*(double s, Affine a);
Affine operator*(Affine a, double s);
Affine operator-(Affine a);

class ConicBuilder {
 public:
  int add_var();
  /// Returns the index of the first of n consecutive variables.
  int add_vars(int n);
  int n_vars() const { return n_vars_; }

  /// expr == 0
  void add_equality(const Affine& expr);
  /// expr >= 0
  void add_nonneg(const Affine& expr);
  /// rows[0] >= ||rows[1:]||
  void add_soc(const std::vector<Affine>& rows);
  /// Minimized.
  void set_objective(const Affine& obj) { objective_ = obj; }

  ConicProgram build() const;
  /// Objective value including its constant.
  double objective_value(const rvec& x) const { return objective_.eval(x); }

 private:
  int n_vars_ = 0;
  Affine objective_;
  std::vector<Affine> eqs_;
  std::vector<Affine> nonneg_;
  std::vector<std::vector<Affine>> socs_;
};

}  // namespace rismec
