#pragma once

#include "rismec/conic.hpp"
#include "rismec/model.hpp"

namespace rismec {

struct PenaltyParams {
  double mu0 = 1e-3;
  double growth = 1.003;
  double eps1 = 0.1;   // fit residual that ends the outer loop
  double eps2 = 0.01;  // fractional increase that ends the inner loop
  int max_outer = 2000;
  int max_inner = 50;
  double y_cap = 1e6;

  void validate() const;
};

/// Minimum over offloading users of the raw SOC slack at theta_dl.
/// Throws std::invalid_argument if no user offloads.
double min_soc_slack(const rvec& theta_dl, const SolutionState& s, const SystemConfig& cfg,
                     const ChannelSet& ch);

/// Same, with each user's slack divided by its noise amplitude sigma_k. This is
/// the quantity Algorithm 1 works with internally.
double min_scaled_soc_slack(const rvec& theta_dl, const SolutionState& s, const SystemConfig& cfg,
                            const ChannelSet& ch);

/// Element-wise fit of rho(theta) e^{j theta} to `target` (one Armijo descent
/// per element, started from theta and from arg(target); the better one wins).
rvec fit_theta_step(const rvec& theta, const cvec& target, const PhaseParams& pp);

struct ThetaMatrixResult {
  cvec diag;  // free diagonal of Theta
  double y = 0.0;
  SolveStatus status = SolveStatus::max_iters;
};

/// max y - mu ||Theta - diag(rho e^{j theta})||_F^2 subject to the scaled SOC
/// slack of every offloading user being at least y, with y <= y_cap.
ThetaMatrixResult theta_matrix_step(const rvec& theta, const SolutionState& s,
                                    const SystemConfig& cfg, const ChannelSet& ch, double mu,
                                    double y_cap = 1e6);

enum class PhaseStatus { improved, unchanged, skipped, capped };
std::string to_string(PhaseStatus s);

struct PhaseResult {
  rvec theta;
  PhaseStatus status = PhaseStatus::skipped;
  double slack_before = 0.0;  // scaled
  double slack_after = 0.0;   // scaled
  double fit_residual = 0.0;
  int outer_iters = 0;
  int conic_solves = 0;
  std::vector<double> mu_trace;
};

/// Algorithm 1. The returned theta never has a smaller minimum slack than the
/// input. With feasibility_only the search stops at the first theta whose
/// minimum slack is nonnegative (returned immediately if the input is).
PhaseResult solve_downlink_phase(const SolutionState& s, const SystemConfig& cfg,
                                 const ChannelSet& ch, const PenaltyParams& pp = {},
                                 bool feasibility_only = false);

}  // namespace rismec
