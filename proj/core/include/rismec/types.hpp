#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rismec {

using cd = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;
using BoolMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a quantity is evaluated outside its domain (zero beamformer,
/// barrier argument <= 0, nonpositive rate in a latency term, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Direction { uplink, downlink };

/// Parameters of the practical reflection model
/// rho(theta) = (1 - beta_min) * ((sin(theta - phi) + 1) / 2)^alpha + beta_min.
struct PhaseParams {
  double beta_min = 0.2;
  double phi = 0.43 * std::numbers::pi;
  double alpha = 1.6;
};

struct SystemConfig {
  int n_aps = 3;
  int n_users = 4;
  int n_antennas = 2;
  int n_elements = 8;

  double bandwidth_hz = 10e6;
  std::vector<double> user_power_w;     // P_k^c, one per user
  double ap_max_power_w = 1.0;          // P_{n,max}^D
  double cycles_per_bit = 200.0;        // C_k
  double kappa_user = 1e-25;
  double kappa_ap = 1e-25;
  double ap_total_freq_hz = 1.2e9;      // f_n
  double slot_s = 0.5;                  // T
  double latency_cap_s = 0.4;           // chi
  double task_bits = 350e3;             // U_k
  std::vector<double> sinr_target_lin;  // gamma_k^D, one per user
  double noise_ap_w = 1e-9;             // sigma_n^2 (-60 dBm)
  double noise_user_w = 1e-8;           // sigma_k^2 (-50 dBm)
  PhaseParams phase;
  std::optional<double> group_budget;   // beta; unset means "derive from the initial point"

  /// Values printed in the paper's simulation section, sized for (N, K, L, M).
  static SystemConfig paper_defaults(int n_aps, int n_users, int n_antennas, int n_elements);
  /// Desk-scale defaults used by the harness and the acceptance suite.
  static SystemConfig desk_defaults();

  int N() const { return n_aps; }
  int K() const { return n_users; }
  int L() const { return n_antennas; }
  int M() const { return n_elements; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  void set_uniform_sinr_target(double lin);
  void set_uniform_user_power(double w);
};

/// All direct and reflected channel blocks for both link directions.
/// g_*[n] is M x L (RIS -> AP in the uplink, AP -> RIS in the downlink).
struct ChannelSet {
  std::vector<std::vector<cvec>> h_d_ul;  // [n][k], length L
  std::vector<cvec> h_r_ul;               // [k], length M
  std::vector<cmat> g_ul;                 // [n], M x L
  std::vector<std::vector<cvec>> h_d_dl;
  std::vector<cvec> h_r_dl;
  std::vector<cmat> g_dl;

  void validate(const SystemConfig& cfg) const;
  /// Copy with every reflected path removed (h_r = 0 in both directions).
  ChannelSet without_ris() const;
};

struct SolutionState {
  std::vector<std::vector<cvec>> v_ul;  // [n][k]
  std::vector<std::vector<cvec>> v_dl;  // [n][k]
  rvec theta_ul;
  rvec theta_dl;
  rvec a;
  rvec t;
  rvec r;
  rmat f_nk;  // N x K
  rvec f_min;

  static SolutionState zeros(const SystemConfig& cfg);
};

/// serving(n, k) is true iff AP n serves user k.
struct Association {
  BoolMat serving;

  int n_aps() const { return static_cast<int>(serving.rows()); }
  int n_users() const { return static_cast<int>(serving.cols()); }
  bool any_for_user(int k) const { return serving.col(k).any(); }
  int count() const { return static_cast<int>(serving.count()); }
};

/// One residual per constraint family; >= 0 means satisfied with that slack.
/// Entries that do not apply (e.g. latency of a non-serving pair) hold +inf.
struct ConstraintReport {
  rvec partition;      // [k] min(a_k, 1 - a_k)
  rmat latency;        // [n,k] chi - tau_nk (s)
  rvec downlink_sinr;  // [k] SINR_k - gamma_k (linear) for offloading users
  rvec ap_power;       // [n] P_max - sum_k ||v_dl||^2 (W)
  rvec phase_model;    // [2M] minus the distance of each theta from [0, 2pi)
  rvec time_budget;    // [k] T - t_k - C t_k r_k / f_min_k (s)
  rmat rate_floor;     // [n,k] R_nk - r_k (bits/s)
  rmat freq_floor;     // [n,k] f_nk - f_min_k (cycles/s)
  rvec freq_capacity;  // [n] min(f_n - sum_k f_nk, min_k f_nk) (cycles/s)
  double group_budget = std::numeric_limits<double>::infinity();  // beta - group norm

  double min_residual() const;
  /// Name of the family holding the smallest residual.
  std::string worst_family() const;
};

}  // namespace rismec
