#pragma once

// Internal interface between the public induction API and the templated
// splitting engine.

#include <vector>

#include "dsm/induction.hpp"

namespace dsm::detail {

enum class EngineMode {
  Run,      // evolve to the stopping time
  Startup,  // stop each branch at its first free return
  Step,     // advance a seeded element through exactly one return
};

struct EngineResult {
  std::vector<ParamElement> finished;  // survived / censored / quarantined / active (Startup, Step)
  std::vector<ExclusionEvent> exclusions;
  std::vector<SplitEvent> splits;
  std::vector<LogEvent> log;
  std::vector<ReturnRecord> returns;
  double C1 = 0.0;  // startup fits; meaningful when fit_samples > 0
  double C7 = 0.0;
  double K_startup = 0.0;
  std::size_t fit_samples = 0;
  double max_split_error = 0.0;
  double adjoined = 0.0;
};

struct EngineInput {
  EngineMode mode = EngineMode::Run;
  int horizon = 0;
  std::vector<Interval> pieces;  // Run / Startup
  const ParamElement* seed = nullptr;  // Step
};

EngineResult run_engine(const InductionConfig& cfg, const EngineInput& input);

struct SurvivorAudit {
  InductionChecklist checklist;
  double min_return_derivative = 0.0;  // for C(delta); +inf when no pairs
  bool endpoints_ba = true;
  double global_distortion = 1.0;
};

// Audit at sampled parameters; (iv) is judged against fitted.C_delta when
// it is positive, otherwise only collected.
SurvivorAudit audit_element(const InductionConfig& cfg, const ParamElement& element, int n,
                            const FittedConstants& fitted);

}  // namespace dsm::detail
