#pragma once

// Desk-scale parameter-exclusion engine: dyadic startup around an MT
// parameter, free returns, (BA) deletions, stopping time and measure
// accounting, plus the Induction Statement audit.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsm/interval.hpp"
#include "dsm/partition.hpp"

namespace dsm {

enum class NhatRule { Sqrt, DoubleSqrt };
std::string to_string(NhatRule rule);
NhatRule parse_nhat_rule(const std::string& s);

struct StoppingTime {
  int n_hat = 0;
  int r0 = 0;
};

// double-sqrt: least N with 2-2b >= e^{-2 sqrt N}; sqrt: least N with
// 2-2b >= e^{-sqrt N}. R0: least integer with e^{-2 R0} <= e^{-sqrt N}.
// Comparisons carry a relative slack of 1e-12. Throws for b outside [0,1).
StoppingTime stopping_time(double b, NhatRule rule);

enum class ReturnKind { Essential, Inessential };
enum class ElementStatus { Active, Survived, Excluded, Adjoined, Quarantined, Censored };
std::string to_string(ReturnKind k);
std::string to_string(ElementStatus s);

struct ReturnRecord {
  int n = 0;
  PartitionIndex idx;
  ReturnKind kind = ReturnKind::Essential;
  int p = 0;        // parameter bound period (e^{-4 sqrt j})
  int p_beta = 0;   // pointwise e^{-beta j} bound period at the midpoint
  bool p_capped = false;
  int s0 = -1;      // free-orbit length to the next return; -1 until known
};

struct ParamElement {
  std::uint64_t id = 0;
  std::uint64_t parent = 0;
  double lo = 0.0;
  double hi = 0.0;
  int n0 = -1;  // first free return; -1 while still in the startup phase
  std::vector<ReturnRecord> history;
  ElementStatus status = ElementStatus::Active;
  int status_time = 0;
  std::string lo_exact;  // full-precision endpoints in MPFR runs; empty otherwise
  std::string hi_exact;

  double measure() const noexcept { return hi - lo; }
};

struct InductionConfig {
  double a0 = 0.0;
  int N0 = 8;  // epsilon = 2^{-N0}
  double b = 0.999;
  int r_delta = 3;
  std::optional<int> r_delta1;  // defaults to r_delta - 1
  double beta = 0.0;            // 0: no pointwise bound periods recorded
  int sample_density = 9;
  NhatRule nhat_rule = NhatRule::DoubleSqrt;
  double b_min = 0.0;           // closeness schedule b_0(epsilon)
  int startup_cap = 14;         // only for the standalone startup()
  double stub_scale = 1.0;      // short stub: within stub_scale*|I_{r_delta-1,0}| of the window
  unsigned precision_bits = 0;  // 0: double; otherwise MPFR with this many bits
  int workers = 1;

  double epsilon() const;
  double omega0_measure() const;  // 2(epsilon - epsilon^2)
  ReturnWindow window() const;
  // Throws InvalidArgument on inconsistent fields.
  void validate() const;
};

struct ExclusionEvent {
  int time = 0;
  std::uint64_t element = 0;
  double lo = 0.0;  // lower endpoint of the split element
  double measure = 0.0;
  std::string cause;  // ba-startup, ba-essential, ba-inessential, censored, quarantined
};

struct SplitEvent {
  int time = 0;
  std::uint64_t element = 0;
  bool startup = false;
  ReturnKind kind = ReturnKind::Essential;
  double parent_measure = 0.0;
  double inside_measure = 0.0;  // part of the element mapped into I*
  double deleted_measure = 0.0;
  double children_measure = 0.0;
  int children = 0;
  double conservation_error = 0.0;  // relative
};

struct LogEvent {
  int time = 0;
  std::uint64_t element = 0;
  std::string kind;
  double lo = 0.0;
  double hi = 0.0;
  double measure = 0.0;
};

struct InductionChecklist {
  int n = 0;
  bool applicable = false;  // element has a return at or before n
  bool pass[6] = {false, false, false, false, false, false};
  double worst_margin[6] = {0, 0, 0, 0, 0, 0};  // log-scale slack; negative means failure
};

struct FittedConstants {
  double C1 = 0.0;       // (iii)
  double C7 = 0.0;       // (vi)
  double C_delta = 0.0;  // (iv): min observed return-to-return derivative
  double K_startup = 0.0;  // max startup deletion proportion / (e^{-sqrt n0}/delta)
};

struct SurvivorReport {
  InductionConfig config;
  int n_hat = 0;
  int r0 = 0;
  std::vector<ParamElement> survivors;  // sorted by lo
  double total_measure = 0.0;
  double omega0_measure = 0.0;
  double excluded_measure = 0.0;
  double censored_measure = 0.0;
  double quarantined_measure = 0.0;
  double adjoined_measure = 0.0;  // moved into neighbours; never lost
  double conservation_error = 0.0;
  double max_split_error = 0.0;
  std::vector<ExclusionEvent> exclusion_log;  // ordered by (time, lo)
  std::vector<SplitEvent> splits;
  std::vector<LogEvent> log;
  std::vector<ReturnRecord> return_log;  // every processed return
  std::vector<int> return_times;  // distinct, increasing
  int essential_returns = 0;
  int inessential_returns = 0;
  FittedConstants fitted;
  std::vector<InductionChecklist> audit;  // one per survivor, same order
  double analytic_product_returns = 1.0;  // prod over return_times of (1 - e^{-sqrt n / 2})
  double analytic_product_range = 1.0;    // prod over N0..n_hat
  double max_global_distortion = 1.0;

  double survivor_ratio() const { return omega0_measure > 0 ? total_measure / omega0_measure : 0.0; }
};

struct StartupResult {
  std::vector<ParamElement> elements;  // elements at their first free return
  double exceptional_measure = 0.0;    // deleted + censored
  double deleted_measure = 0.0;
  double censored_measure = 0.0;
  std::vector<SplitEvent> splits;
  FittedConstants fitted;
};

// Dyadic startup only, iterating each piece up to cfg.startup_cap.
StartupResult startup(const InductionConfig& cfg);
// Startup over caller-supplied pieces (zero-width pieces contribute nothing).
StartupResult startup(const InductionConfig& cfg, const std::vector<Interval>& pieces);

// One induction step for an element that has a last return record: through
// its bound period and free orbit to the next free return (or horizon).
// Returned elements carry their status; excluded measure is reported in
// `events`.
std::vector<ParamElement> step(const ParamElement& element, const InductionConfig& cfg,
                               std::vector<ExclusionEvent>* events = nullptr);

SurvivorReport run(const InductionConfig& cfg);

InductionChecklist verify_induction(const ParamElement& element, int n, const InductionConfig& cfg,
                                    const FittedConstants& fitted);

// Global distortion quotient restricted to one element: throws NotSameElement if
// a, a' are not both in the element or k exceeds its last return time - 1.
double element_distortion_ratio(const ParamElement& element, double a, double a_prime, double b, int k);

// Text log, one event per line, endpoints in hexadecimal floating point.
std::string format_run_log(const SurvivorReport& report);
// Structured JSON of the whole report.
std::string to_json(const SurvivorReport& report, const std::string& provenance_json = "{}");

}  // namespace dsm
