#include "dsm/induction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dsm/bound_free.hpp"
#include "dsm/errors.hpp"
#include "dsm/format.hpp"
#include "dsm/parallel.hpp"
#include "induction_engine.hpp"

namespace dsm {

namespace {

constexpr double kSlack = 1e-12;

std::vector<Interval> dyadic_pieces(const InductionConfig& cfg) {
  std::vector<Interval> pieces;
  for (int j = cfg.N0; j < 2 * cfg.N0; ++j) {
    const double far = std::ldexp(1.0, -j);
    const double near = std::ldexp(1.0, -j - 1);
    pieces.push_back({cfg.a0 - far, cfg.a0 - near});
  }
  for (int j = 2 * cfg.N0 - 1; j >= cfg.N0; --j) {
    const double far = std::ldexp(1.0, -j);
    const double near = std::ldexp(1.0, -j - 1);
    pieces.push_back({cfg.a0 + near, cfg.a0 + far});
  }
  return pieces;
}

double measure_of(const std::vector<ParamElement>& v, ElementStatus s) {
  double m = 0.0;
  for (const ParamElement& e : v) {
    if (e.status == s) m += e.measure();
  }
  return m;
}

void sort_events(detail::EngineResult& r) {
  std::stable_sort(r.exclusions.begin(), r.exclusions.end(), [](const ExclusionEvent& x, const ExclusionEvent& y) {
    return x.time != y.time ? x.time < y.time : x.lo < y.lo;
  });
  std::stable_sort(r.splits.begin(), r.splits.end(), [](const SplitEvent& x, const SplitEvent& y) {
    return x.time != y.time ? x.time < y.time : x.element < y.element;
  });
  std::stable_sort(r.log.begin(), r.log.end(), [](const LogEvent& x, const LogEvent& y) {
    return x.time != y.time ? x.time < y.time : x.lo < y.lo;
  });
  std::stable_sort(r.returns.begin(), r.returns.end(),
                   [](const ReturnRecord& x, const ReturnRecord& y) { return x.n < y.n; });
}

FittedConstants fitted_from(const detail::EngineResult& r) {
  FittedConstants f;
  if (r.fit_samples > 0) {
    f.C1 = std::min(1.0, std::exp(r.C1));
    f.C7 = std::min(1.0, std::exp(r.C7));
  } else {
    f.C1 = 1.0;
    f.C7 = 1.0;
  }
  f.K_startup = r.K_startup;
  return f;
}

}  // namespace

std::string to_string(NhatRule rule) { return rule == NhatRule::Sqrt ? "sqrt" : "double-sqrt"; }

NhatRule parse_nhat_rule(const std::string& s) {
  if (s == "sqrt") return NhatRule::Sqrt;
  if (s == "double-sqrt") return NhatRule::DoubleSqrt;
  throw Error(ErrorKind::InvalidArgument, "unknown N-hat rule '" + s + "' (sqrt, double-sqrt)");
}

std::string to_string(ReturnKind k) { return k == ReturnKind::Essential ? "essential" : "inessential"; }

std::string to_string(ElementStatus s) {
  switch (s) {
    case ElementStatus::Active: return "active";
    case ElementStatus::Survived: return "survived";
    case ElementStatus::Excluded: return "excluded";
    case ElementStatus::Adjoined: return "adjoined";
    case ElementStatus::Quarantined: return "quarantined";
    case ElementStatus::Censored: return "censored";
  }
  return "unknown";
}

StoppingTime stopping_time(double b, NhatRule rule) {
  if (!(b >= 0.0 && b < 1.0)) throw Error(ErrorKind::InvalidArgument, "stopping time needs 0 <= b < 1");
  const double x = -std::log(2.0 - 2.0 * b);  // 2-2b = e^{-x}
  StoppingTime st;
  if (x <= 0.0) {
    st.n_hat = 1;
  } else {
    const double root = rule == NhatRule::DoubleSqrt ? x / 2.0 : x;
    st.n_hat = std::max(1, static_cast<int>(std::ceil(root * root * (1.0 - kSlack))));
  }
  st.r0 = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(st.n_hat)) / 2.0 * (1.0 - kSlack))));
  return st;
}

double InductionConfig::epsilon() const { return std::ldexp(1.0, -N0); }

double InductionConfig::omega0_measure() const {
  const double e = epsilon();
  return 2.0 * (e - e * e);
}

ReturnWindow InductionConfig::window() const { return ReturnWindow(r_delta, r_delta1); }

void InductionConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (!std::isfinite(a0)) bad("a0 must be finite");
  if (N0 < 1 || N0 > 50) bad("N0 must be in [1, 50]");
  if (!(b >= 0.0 && b < 1.0)) bad("b must satisfy 0 <= b < 1");
  if (b_min > 0.0 && !(b > b_min)) bad("b must exceed the closeness threshold b_min");
  if (r_delta < 1) bad("r_delta must be positive");
  if (r_delta1 && (*r_delta1 < 1 || *r_delta1 >= r_delta)) bad("r_delta1 must be in [1, r_delta)");
  if (!(beta >= 0.0)) bad("beta must be non-negative");
  if (sample_density < 2) bad("sample_density must be at least 2");
  if (startup_cap < 1) bad("startup_cap must be positive");
  if (!(stub_scale >= 0.0)) bad("stub_scale must be non-negative");
  if (precision_bits != 0 && precision_bits < 53) bad("precision_bits must be 0 or at least 53");
  if (workers < 1) bad("workers must be positive");
}

StartupResult startup(const InductionConfig& cfg) { return startup(cfg, dyadic_pieces(cfg)); }

StartupResult startup(const InductionConfig& cfg, const std::vector<Interval>& pieces) {
  cfg.validate();
  detail::EngineInput in;
  in.mode = detail::EngineMode::Startup;
  in.horizon = cfg.startup_cap;
  in.pieces = pieces;
  detail::EngineResult r = detail::run_engine(cfg, in);
  sort_events(r);
  StartupResult out;
  for (ParamElement& e : r.finished) {
    if (e.status == ElementStatus::Active) {
      out.elements.push_back(e);
    } else {
      out.censored_measure += e.measure();
    }
  }
  std::sort(out.elements.begin(), out.elements.end(),
            [](const ParamElement& x, const ParamElement& y) { return x.lo < y.lo; });
  for (const ExclusionEvent& ev : r.exclusions) {
    if (ev.cause.rfind("ba-", 0) == 0) out.deleted_measure += ev.measure;
  }
  out.exceptional_measure = out.deleted_measure + out.censored_measure;
  out.splits = std::move(r.splits);
  out.fitted = fitted_from(r);
  return out;
}

std::vector<ParamElement> step(const ParamElement& element, const InductionConfig& cfg,
                               std::vector<ExclusionEvent>* events) {
  cfg.validate();
  if (element.status != ElementStatus::Active) {
    throw Error(ErrorKind::InvalidArgument, "step needs an active element");
  }
  detail::EngineInput in;
  in.mode = detail::EngineMode::Step;
  in.horizon = stopping_time(cfg.b, cfg.nhat_rule).n_hat;
  in.seed = &element;
  detail::EngineResult r = detail::run_engine(cfg, in);
  sort_events(r);
  if (events) events->insert(events->end(), r.exclusions.begin(), r.exclusions.end());
  std::sort(r.finished.begin(), r.finished.end(),
            [](const ParamElement& x, const ParamElement& y) { return x.lo < y.lo; });
  return r.finished;
}

SurvivorReport run(const InductionConfig& cfg) {
  cfg.validate();
  SurvivorReport rep;
  rep.config = cfg;
  const StoppingTime st = stopping_time(cfg.b, cfg.nhat_rule);
  rep.n_hat = st.n_hat;
  rep.r0 = st.r0;
  rep.omega0_measure = cfg.omega0_measure();

  detail::EngineInput in;
  in.mode = detail::EngineMode::Run;
  in.horizon = st.n_hat;
  in.pieces = dyadic_pieces(cfg);
  detail::EngineResult r = detail::run_engine(cfg, in);
  sort_events(r);

  for (const ParamElement& e : r.finished) {
    if (e.status == ElementStatus::Survived) rep.survivors.push_back(e);
  }
  std::sort(rep.survivors.begin(), rep.survivors.end(),
            [](const ParamElement& x, const ParamElement& y) { return x.lo < y.lo; });
  rep.total_measure = measure_of(rep.survivors, ElementStatus::Survived);
  rep.censored_measure = measure_of(r.finished, ElementStatus::Censored);
  rep.quarantined_measure = measure_of(r.finished, ElementStatus::Quarantined);
  for (const ExclusionEvent& ev : r.exclusions) {
    if (ev.cause.rfind("ba-", 0) == 0) rep.excluded_measure += ev.measure;
  }
  rep.adjoined_measure = r.adjoined;
  const double accounted = rep.total_measure + rep.excluded_measure + rep.censored_measure + rep.quarantined_measure;
  rep.conservation_error = std::abs(accounted - rep.omega0_measure) / rep.omega0_measure;
  if (rep.conservation_error > 1e-12) {
    throw Error(ErrorKind::AccountingMismatch,
                "measure accounting off by " + shortest(rep.conservation_error) + " (relative)");
  }
  rep.max_split_error = r.max_split_error;
  rep.exclusion_log = std::move(r.exclusions);
  rep.splits = std::move(r.splits);
  rep.log = std::move(r.log);
  rep.return_log = r.returns;
  std::set<int> times;
  for (const ReturnRecord& rec : r.returns) {
    times.insert(rec.n);
    (rec.kind == ReturnKind::Essential ? rep.essential_returns : rep.inessential_returns) += 1;
  }
  rep.return_times.assign(times.begin(), times.end());
  rep.fitted = fitted_from(r);

  const FittedConstants probe = rep.fitted;  // C_delta = 0: (iv) judged against 1
  std::vector<detail::SurvivorAudit> audits = parallel_map(rep.survivors.size(), cfg.workers, [&](std::size_t i) {
    const ParamElement& e = rep.survivors[i];
    const int n = e.history.empty() ? rep.n_hat : e.history.back().n;
    return detail::audit_element(cfg, e, n, probe);
  });
  double c_delta = std::numeric_limits<double>::infinity();
  for (const detail::SurvivorAudit& a : audits) {
    rep.audit.push_back(a.checklist);
    c_delta = std::min(c_delta, a.min_return_derivative);
    rep.max_global_distortion = std::max(rep.max_global_distortion, a.global_distortion);
  }
  rep.fitted.C_delta = std::isfinite(c_delta) ? c_delta : 0.0;

  for (int n : rep.return_times) rep.analytic_product_returns *= 1.0 - std::exp(-std::sqrt(n) / 2.0);
  for (int n = cfg.N0; n <= rep.n_hat; ++n) rep.analytic_product_range *= 1.0 - std::exp(-std::sqrt(n) / 2.0);
  return rep;
}

InductionChecklist verify_induction(const ParamElement& element, int n, const InductionConfig& cfg,
                                    const FittedConstants& fitted) {
  return detail::audit_element(cfg, element, n, fitted).checklist;
}

double element_distortion_ratio(const ParamElement& element, double a, double a_prime, double b, int k) {
  auto inside = [&](double x) { return x >= element.lo && x <= element.hi; };
  if (!inside(a) || !inside(a_prime)) {
    throw Error(ErrorKind::NotSameElement, "parameters are not both in the element");
  }
  const int last = element.history.empty() ? element.status_time : element.history.back().n;
  if (k < 0 || k > last - 1) {
    throw Error(ErrorKind::NotSameElement, "k exceeds the element's last return time - 1");
  }
  return global_distortion_ratio(a, a_prime, b, k);
}

std::string format_run_log(const SurvivorReport& report) {
  std::ostringstream os;
  os << "# time element kind lo hi measure\n";
  for (const LogEvent& e : report.log) {
    os << e.time << ' ' << e.element << ' ' << e.kind << ' ' << hexfloat(e.lo) << ' ' << hexfloat(e.hi) << ' '
       << shortest(e.measure) << '\n';
  }
  return os.str();
}

std::string to_json(const SurvivorReport& report, const std::string& provenance_json) {
  using nlohmann::json;
  const InductionConfig& c = report.config;
  json j;
  j["provenance"] = json::parse(provenance_json.empty() ? "{}" : provenance_json);
  j["config"] = {{"a0", c.a0},
                 {"N0", c.N0},
                 {"epsilon", c.epsilon()},
                 {"b", c.b},
                 {"r_delta", c.r_delta},
                 {"r_delta1", c.r_delta1 ? json(*c.r_delta1) : json(nullptr)},
                 {"beta", c.beta},
                 {"sample_density", c.sample_density},
                 {"nhat_rule", to_string(c.nhat_rule)},
                 {"b_min", c.b_min},
                 {"stub_scale", c.stub_scale},
                 {"precision_bits", c.precision_bits}};
  j["n_hat"] = report.n_hat;
  j["r0"] = report.r0;
  j["omega0_measure"] = report.omega0_measure;
  j["total_measure"] = report.total_measure;
  j["survivor_ratio"] = report.survivor_ratio();
  j["excluded_measure"] = report.excluded_measure;
  j["censored_measure"] = report.censored_measure;
  j["quarantined_measure"] = report.quarantined_measure;
  j["adjoined_measure"] = report.adjoined_measure;
  j["conservation_error"] = report.conservation_error;
  j["max_split_error"] = report.max_split_error;
  j["analytic_product_returns"] = report.analytic_product_returns;
  j["analytic_product_range"] = report.analytic_product_range;
  j["max_global_distortion"] = report.max_global_distortion;
  j["essential_returns"] = report.essential_returns;
  j["inessential_returns"] = report.inessential_returns;
  j["return_times"] = report.return_times;
  j["fitted"] = {{"C1", report.fitted.C1},
                 {"C7", report.fitted.C7},
                 {"C_delta", report.fitted.C_delta},
                 {"K_startup", report.fitted.K_startup}};

  json survivors = json::array();
  for (std::size_t i = 0; i < report.survivors.size(); ++i) {
    const ParamElement& e = report.survivors[i];
    json hist = json::array();
    for (const ReturnRecord& r : e.history) {
      hist.push_back({{"n", r.n},
                      {"r", r.idx.r},
                      {"ell", r.idx.ell},
                      {"kind", to_string(r.kind)},
                      {"p", r.p},
                      {"p_beta", r.p_beta},
                      {"p_capped", r.p_capped},
                      {"s0", r.s0}});
    }
    json s = {{"id", e.id},       {"parent", e.parent}, {"lo", hexfloat(e.lo)}, {"hi", hexfloat(e.hi)},
              {"lo_dec", e.lo},   {"hi_dec", e.hi},     {"n0", e.n0},           {"status", to_string(e.status)},
              {"history", hist}};
    if (!e.lo_exact.empty()) {
      s["lo_exact"] = e.lo_exact;
      s["hi_exact"] = e.hi_exact;
    }
    if (i < report.audit.size()) {
      const InductionChecklist& ck = report.audit[i];
      s["audit"] = {{"n", ck.n},
                    {"applicable", ck.applicable},
                    {"pass", std::vector<bool>(ck.pass, ck.pass + 6)},
                    {"worst_margin", std::vector<double>(ck.worst_margin, ck.worst_margin + 6)}};
    }
    survivors.push_back(std::move(s));
  }
  j["survivors"] = std::move(survivors);

  json excl = json::array();
  for (const ExclusionEvent& e : report.exclusion_log) {
    excl.push_back({{"time", e.time}, {"element", e.element}, {"lo", hexfloat(e.lo)}, {"measure", e.measure},
                    {"cause", e.cause}});
  }
  j["exclusion_log"] = std::move(excl);

  json splits = json::array();
  for (const SplitEvent& s : report.splits) {
    splits.push_back({{"time", s.time},
                      {"element", s.element},
                      {"startup", s.startup},
                      {"kind", to_string(s.kind)},
                      {"parent_measure", s.parent_measure},
                      {"inside_measure", s.inside_measure},
                      {"deleted_measure", s.deleted_measure},
                      {"children_measure", s.children_measure},
                      {"children", s.children},
                      {"conservation_error", s.conservation_error}});
  }
  j["splits"] = std::move(splits);
  return j.dump(2);
}

}  // namespace dsm
