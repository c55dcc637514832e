#pragma once

// Bound periods (pointwise e^{-beta j} and parameter e^{-4 sqrt j} forms),
// outside-expansion estimates, distortion quotients and recovery reports.

#include <optional>
#include <vector>

#include "dsm/interval.hpp"
#include "dsm/map.hpp"
#include "dsm/mt_finder.hpp"
#include "dsm/partition.hpp"

namespace dsm {

inline constexpr int kBoundPeriodCap = 100000;

struct BoundPeriodResult {
  int p = 0;
  double exit_gap = 0.0;        // |f^{p+1}(x) - f^{p+1}(c)|
  double recovery_deriv = 0.0;  // (f^{p+1})'(x), may overflow to inf
  double log_recovery_deriv = 0.0;
  bool capped = false;
};

// Largest j0 with |f^j(x) - f^j(c)| <= e^{-beta j} for all j <= j0.
// Throws InfiniteBound for x = c.
BoundPeriodResult beta_bound_period(const MapParams& p, double x, double beta, int j_max = kBoundPeriodCap);
// Same at the current HighReal precision; a, b, x should carry enough bits
// for the orbit separation |x - c|^3 to remain resolved.
BoundPeriodResult beta_bound_period_high(const HighReal& a, const HighReal& b, const HighReal& x, double beta,
                                         int j_max = kBoundPeriodCap);

struct ParamBoundOptions {
  int a_samples = 9;  // equispaced, endpoints included
  int x_samples = 9;
  int j_max = kBoundPeriodCap;
};

struct ParamBoundResult {
  int p = 0;
  bool capped = false;
};

// Largest p with |f_a^j(x) - f_{a_mid}^j(c)| <= e^{-4 sqrt j} for j <= p,
// over sampled a in omega and sampled x in xi_n(omega, b). Throws
// EmptyInterval for hi < lo and NonReturn when xi_n(omega) leaves I**.
ParamBoundResult param_bound_period(Interval omega, double b, int n, double a_mid, const ReturnWindow& w,
                                    const ParamBoundOptions& opts = {});

struct OutsideExpansionEstimate {
  Interval window;
  double kappa1_hat = 0.0;
  double c2_hat = 0.0;
  int m1_hat = 0;
  double censored_fraction = 0.0;
  std::size_t samples = 0;
  // min of (f^n)'(x) at the first hitting time n, over samples that hit.
  std::optional<double> min_hit_deriv;
};

struct OutsideExpansionOptions {
  double margin = 0.0;
};

// x_grid points inside the window are skipped. An empty window (hi <= lo)
// means every orbit is free for n_max steps.
OutsideExpansionEstimate outside_expansion_stats(const MapParams& p, Interval window, const std::vector<double>& x_grid,
                                                 int n_max, const OutsideExpansionOptions& opts = {});

// Equispaced grid of `count` points of [0,1), offset by half a step.
std::vector<double> uniform_grid(int count);

// max_{k<=p} max(R_k, 1/R_k), R_k = (f^k)'(f(x)) / (f^k)'(f(c)) at b = 1.
// Checks that x is beta-bound up to p first (InvalidArgument otherwise).
double bound_distortion_ratio(const HighReal& a0, const HighReal& x, int p, double beta);
double bound_distortion_ratio(const MtParameter& mt, double x, int p, double beta);

// max(R, 1/R), R = (f_a^k)'(f_a(c)) / (f_{a'}^k)'(f_{a'}(c)).
double global_distortion_ratio(double a, double a_prime, double b, int k);

struct RecoveryReport {
  int r = 0;  // floor(-log |x - c|)
  double deriv = 0.0;
  double log_deriv = 0.0;
  double log_ratio_sqrt = 0.0;   // log[(f^{p+1})' / (e^r e^{-4 sqrt p})]
  double log_ratio_kappa = 0.0;  // log[(f^{p+1})' / e^{kappa p / 4}]
  bool exit_consistent = false;  // exit_gap > e^{-beta (p+1)} unless capped
};

RecoveryReport recovery_check(const MapParams& p, double x, const BoundPeriodResult& bound, double beta,
                              double kappa_tilde);

// Default pointwise bound-period exponent min(kappa_tilde, kappa5)/100, with
// kappa5 fitted as the outside-expansion exponent of I**.
double default_beta(const MtParameter& mt, const ReturnWindow& w, int grid = 2000, int n_max = 60);

struct BoundLawSample {
  double r = 0.0;  // x = c + side * e^{-r}
  int side = 1;
  int p = 0;
  double bound = 0.0;  // 4 r / kappa_tilde
  bool capped = false;
  bool violated = false;
};

// p < -(4/kappa_tilde) log|x - c| on x = c +- e^{-r}, r in r_values, with a0
// refined to `bits` and the orbit run at that precision.
std::vector<BoundLawSample> audit_bound_period_law(const MtParameter& mt, double beta, const std::vector<double>& r_values,
                                                   unsigned bits);

}  // namespace dsm
