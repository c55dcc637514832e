// dsmlab: command-line front end over dsm::core.
//
// Exit codes: 0 success, 1 usage error, 2 domain error or refutation,
// 3 inconclusive.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "dsm/bound_free.hpp"
#include "dsm/certifier.hpp"
#include "dsm/errors.hpp"
#include "dsm/format.hpp"
#include "dsm/induction.hpp"
#include "dsm/map.hpp"
#include "dsm/mt_finder.hpp"
#include "dsm/parallel.hpp"

#ifndef DSM_VERSION
#define DSM_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitInconclusive = 3;

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx.get(), data.data(), data.size());
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dsm::Error(dsm::ErrorKind::InvalidArgument, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Resolved configuration of one subcommand, echoed into every output.
struct Provenance {
  std::string command;
  std::string resolved;  // key=value lines
  std::string config_file;
  std::string config_sha;

  json to_json() const {
    json j;
    j["tool"] = "dsmlab";
    j["version"] = DSM_VERSION;
    j["command"] = command;
    json cfg = json::object();
    std::istringstream in(resolved);
    for (std::string line; std::getline(in, line);) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      cfg[line.substr(0, eq)] = line.substr(eq + 1);
    }
    j["config"] = cfg;
    j["input_sha256"] = {{"resolved_config", sha256_hex(resolved)}};
    if (!config_file.empty()) {
      j["input_sha256"]["config_file"] = config_sha;
      j["config_file"] = config_file;
    }
    return j;
  }

  std::string csv_header() const {
    std::ostringstream os;
    os << "# dsmlab " << DSM_VERSION << '\n' << "# command: " << command << '\n';
    std::istringstream in(resolved);
    for (std::string line; std::getline(in, line);) os << "# config: " << line << '\n';
    os << "# input-sha256 resolved_config: " << sha256_hex(resolved) << '\n';
    if (!config_file.empty()) os << "# input-sha256 config_file: " << config_sha << '\n';
    return os.str();
  }
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw dsm::Error(dsm::ErrorKind::InvalidArgument, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string kv(const std::string& k, const std::string& v) { return k + "=" + v + "\n"; }
std::string kv(const std::string& k, double v) { return kv(k, dsm::shortest(v)); }
std::string kv(const std::string& k, int v) { return kv(k, std::to_string(v)); }

json certificate_json(const dsm::CertifyResult& r) {
  json j;
  if (const auto* c = std::get_if<dsm::ExpansionCertificate>(&r)) {
    j = {{"result", "certificate"}, {"a", c->params.a},         {"b", c->params.b},
         {"N", c->N},               {"lambda", c->lambda},      {"cells", c->cells},
         {"max_cell_width", c->max_cell_width}, {"method", c->method}};
  } else if (const auto* f = std::get_if<dsm::Refutation>(&r)) {
    j = {{"result", "refutation"}, {"a", f->params.a}, {"b", f->params.b},
         {"N", f->N},              {"witness", f->witness}, {"upper_bound", f->upper_bound},
         {"recomputed", f->recomputed}};
  } else {
    const auto& i = std::get<dsm::Inconclusive>(r);
    j = {{"result", "inconclusive"}, {"a", i.params.a}, {"b", i.params.b},    {"N", i.N},
         {"depth", i.depth},         {"cells", i.cells}, {"best_lower", i.best_lower}};
  }
  return j;
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw dsm::Error(dsm::ErrorKind::InvalidArgument, "range must be 'lo,hi': " + s);
  return {dsm::parse_double(s.substr(0, comma)), dsm::parse_double(s.substr(comma + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsmlab: numerical laboratory for the double standard map"};
  app.set_version_flag("--version", std::string("dsmlab ") + DSM_VERSION);
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "INI file; [section] names match subcommands");
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_path = "-";
  int workers = dsm::default_workers();
  app.add_option("--out,-o", out_path, "Output file ('-' for stdout)");
  app.add_option("--workers", workers, "Worker threads (default: DSM_WORKERS or hardware)")->check(CLI::PositiveNumber);

  // orbit
  auto* orbit = app.add_subcommand("orbit", "Critical (or x0) orbit with derivative columns as CSV");
  double o_a = 0.0, o_b = 0.0, o_x0 = dsm::kCritical;
  int o_n = 10;
  orbit->add_option("--a", o_a)->required();
  orbit->add_option("--b", o_b)->required();
  orbit->add_option("--n", o_n, "Iterates")->check(CLI::NonNegativeNumber);
  orbit->add_option("--x0", o_x0, "Start point (default c = 1/2)");

  // find-mt
  auto* fmt = app.add_subcommand("find-mt", "Search MT parameters with preperiod m and period ell");
  int f_m = 2, f_ell = 1;
  std::string f_range = "0,1";
  bool f_endpoints = false;
  double f_tol_rep = 1e-3, f_tol_crit = 1e-6;
  fmt->add_option("--m", f_m)->check(CLI::PositiveNumber);
  fmt->add_option("--ell", f_ell)->check(CLI::PositiveNumber);
  fmt->add_option("--range", f_range, "a-range 'lo,hi'");
  fmt->add_flag("--include-endpoints", f_endpoints);
  fmt->add_option("--tol-rep", f_tol_rep);
  fmt->add_option("--tol-crit", f_tol_crit);

  // bound-period
  auto* bp = app.add_subcommand("bound-period", "Pointwise (beta) bound period of x against the critical orbit");
  double bp_a = 0.0, bp_b = 1.0, bp_x = 0.0, bp_beta = 0.01;
  int bp_jmax = dsm::kBoundPeriodCap;
  bp->add_option("--a", bp_a)->required();
  bp->add_option("--b", bp_b);
  bp->add_option("--x", bp_x)->required();
  bp->add_option("--beta", bp_beta)->check(CLI::PositiveNumber);
  bp->add_option("--j-max", bp_jmax)->check(CLI::PositiveNumber);

  // certify
  auto* cert = app.add_subcommand("certify", "Uniform-expansion certificate for f^N");
  double c_a = 0.0, c_b = 0.0, c_lambda = 1.0 + 1e-9;
  int c_N = 1, c_depth = 20;
  cert->add_option("--a", c_a);
  cert->add_option("--b", c_b)->required();
  cert->add_option("--N", c_N)->check(CLI::PositiveNumber);
  cert->add_option("--lambda", c_lambda, "Target lower bound (> 1)");
  cert->add_option("--max-depth", c_depth)->check(CLI::NonNegativeNumber);

  // scan-plane
  auto* scan = app.add_subcommand("scan-plane", "Classify a grid of (a, b) as CSV");
  std::string s_ar = "0,0.99", s_br = "0,0.99";
  int s_ra = 32, s_rb = 32, s_iter = 2000, s_cap = 16, s_depth = 14;
  double s_tol = 1e-6;
  std::vector<int> s_schedule = {1, 2, 4, 8, 16, 32, 64};
  scan->add_option("--a-range", s_ar, "'lo,hi'");
  scan->add_option("--b-range", s_br, "'lo,hi'");
  scan->add_option("--res-a", s_ra)->check(CLI::Range(2, 1 << 16));
  scan->add_option("--res-b", s_rb)->check(CLI::Range(2, 1 << 16));
  scan->add_option("--max-iter", s_iter)->check(CLI::PositiveNumber);
  scan->add_option("--period-cap", s_cap)->check(CLI::PositiveNumber);
  scan->add_option("--tol", s_tol)->check(CLI::PositiveNumber);
  scan->add_option("--schedule", s_schedule, "Escalation of N")->delimiter(',');
  scan->add_option("--max-depth", s_depth)->check(CLI::NonNegativeNumber);

  // induction
  auto* ind = app.add_subcommand("induction", "Parameter-exclusion run; SurvivorReport as JSON");
  dsm::InductionConfig icfg;
  std::string i_rule = "double-sqrt", i_log;
  int i_rdelta1 = 0;
  ind->add_option("--a0", icfg.a0, "MT parameter")->required();
  ind->add_option("--N0", icfg.N0, "epsilon = 2^-N0");
  ind->add_option("--b", icfg.b);
  ind->add_option("--r-delta", icfg.r_delta);
  ind->add_option("--r-delta1", i_rdelta1, "0: unset");
  ind->add_option("--beta", icfg.beta);
  ind->add_option("--sample-density", icfg.sample_density);
  ind->add_option("--nhat-rule", i_rule)->check(CLI::IsMember({"sqrt", "double-sqrt"}));
  ind->add_option("--b-min", icfg.b_min);
  ind->add_option("--stub-scale", icfg.stub_scale);
  ind->add_option("--precision-bits", icfg.precision_bits, "0: double");
  ind->add_option("--log", i_log, "Write the event log (hex endpoints) here");

  // tongue-tip
  auto* tip = app.add_subcommand("tongue-tip", "Lowest b of an attracting cycle of given period in an a-window");
  int t_period = 1, t_grid = 201;
  std::string t_window = "0,1";
  double t_tol = 1e-7;
  tip->add_option("--period", t_period)->check(CLI::PositiveNumber);
  tip->add_option("--a-window", t_window, "'lo,hi'");
  tip->add_option("--b-tol", t_tol)->check(CLI::PositiveNumber);
  tip->add_option("--a-grid", t_grid)->check(CLI::Range(2, 1 << 20));

  app.allow_config_extras(CLI::config_extras_mode::error);
  for (CLI::App* sub : app.get_subcommands({})) sub->allow_config_extras(CLI::config_extras_mode::error);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Provenance prov;
  if (auto* opt = app.get_option("--config"); opt->count() > 0) {
    prov.config_file = opt->as<std::string>();
    prov.config_sha = sha256_hex(read_file(prov.config_file));
  }

  try {
    if (*orbit) {
      prov.command = "orbit";
      prov.resolved = kv("a", o_a) + kv("b", o_b) + kv("n", o_n) + kv("x0", o_x0);
      const dsm::MapParams p(o_a, o_b);
      const dsm::OrbitTrace t = dsm::iterate_from(p, o_x0, o_n);
      Output out(out_path);
      std::ostream& os = out.stream();
      os << prov.csv_header() << "j,xi,fprime,deriv,da_xi\n";
      double d = 1.0;
      for (int j = 0; j <= o_n; ++j) {
        const double x = t.points[static_cast<std::size_t>(j)];
        if (j > 0) d *= dsm::deriv(p, t.points[static_cast<std::size_t>(j - 1)]);
        os << j << ',' << dsm::shortest(x) << ',' << dsm::shortest(dsm::deriv(p, x)) << ',' << dsm::shortest(d)
           << ',' << dsm::shortest(t.param_derivs[static_cast<std::size_t>(j)]) << '\n';
      }
      return kExitOk;
    }

    if (*fmt) {
      prov.command = "find-mt";
      const auto [lo, hi] = parse_range(f_range);
      prov.resolved = kv("m", f_m) + kv("ell", f_ell) + kv("range", dsm::shortest(lo) + "," + dsm::shortest(hi)) +
                      kv("include_endpoints", f_endpoints ? "true" : "false") + kv("tol_rep", f_tol_rep) +
                      kv("tol_crit", f_tol_crit);
      dsm::MtOptions o;
      o.include_endpoints = f_endpoints;
      o.tol_rep = f_tol_rep;
      o.tol_crit = f_tol_crit;
      const dsm::MtSearch s = dsm::find_mt(f_m, f_ell, {lo, hi}, o);
      json j;
      j["provenance"] = prov.to_json();
      j["accepted"] = json::array();
      for (const dsm::MtParameter& mt : s.accepted) {
        j["accepted"].push_back({{"a0", mt.a0},
                                 {"m", mt.m},
                                 {"ell", mt.ell},
                                 {"periodic_point", mt.periodic_point},
                                 {"multiplier", mt.multiplier},
                                 {"kappa_tilde", mt.kappa_tilde},
                                 {"d_bar", mt.d_bar},
                                 {"winding", mt.winding},
                                 {"residual", mt.residual},
                                 {"verified_high", mt.verified_high}});
      }
      j["rejected"] = json::array();
      for (const dsm::MtCandidate& c : s.rejected) {
        j["rejected"].push_back({{"a", c.a},
                                 {"multiplier", c.multiplier},
                                 {"min_crit_dist", c.min_crit_dist},
                                 {"reason", dsm::to_string(c.reason)}});
      }
      Output out(out_path);
      out.stream() << j.dump(2) << '\n';
      if (s.accepted.empty()) {
        std::cerr << "dsmlab: no MT parameter found\n";
        return kExitDomain;
      }
      return kExitOk;
    }

    if (*bp) {
      prov.command = "bound-period";
      prov.resolved = kv("a", bp_a) + kv("b", bp_b) + kv("x", bp_x) + kv("beta", bp_beta) + kv("j_max", bp_jmax);
      const dsm::BoundPeriodResult r = dsm::beta_bound_period(dsm::MapParams(bp_a, bp_b), bp_x, bp_beta, bp_jmax);
      json j = {{"provenance", prov.to_json()},
                {"p", r.p},
                {"exit_gap", r.exit_gap},
                {"log_recovery_deriv", r.log_recovery_deriv},
                {"capped", r.capped}};
      j["recovery_deriv"] = std::isfinite(r.recovery_deriv) ? json(r.recovery_deriv) : json(nullptr);
      Output out(out_path);
      out.stream() << j.dump(2) << '\n';
      return kExitOk;
    }

    if (*cert) {
      prov.command = "certify";
      prov.resolved = kv("a", c_a) + kv("b", c_b) + kv("N", c_N) + kv("lambda", c_lambda) + kv("max_depth", c_depth);
      dsm::CertifyOptions o;
      o.max_depth = c_depth;
      const dsm::CertifyResult r = dsm::certify_uniform(dsm::MapParams(c_a, c_b), c_N, c_lambda, o);
      json j = certificate_json(r);
      j["provenance"] = prov.to_json();
      Output out(out_path);
      out.stream() << j.dump(2) << '\n';
      if (std::holds_alternative<dsm::Refutation>(r)) return kExitDomain;
      if (std::holds_alternative<dsm::Inconclusive>(r)) return kExitInconclusive;
      return kExitOk;
    }

    if (*scan) {
      prov.command = "scan-plane";
      const auto [alo, ahi] = parse_range(s_ar);
      const auto [blo, bhi] = parse_range(s_br);
      std::string sched;
      for (std::size_t i = 0; i < s_schedule.size(); ++i) sched += (i ? "," : "") + std::to_string(s_schedule[i]);
      prov.resolved = kv("a_range", dsm::shortest(alo) + "," + dsm::shortest(ahi)) +
                      kv("b_range", dsm::shortest(blo) + "," + dsm::shortest(bhi)) + kv("res_a", s_ra) +
                      kv("res_b", s_rb) + kv("max_iter", s_iter) + kv("period_cap", s_cap) + kv("tol", s_tol) +
                      kv("schedule", sched) + kv("max_depth", s_depth);
      dsm::ClassifyOptions o;
      o.max_iter = s_iter;
      o.period_cap = s_cap;
      o.tol = s_tol;
      o.schedule = s_schedule;
      o.certify.max_depth = s_depth;
      const dsm::Raster r = dsm::scan_plane({alo, ahi}, {blo, bhi}, s_ra, s_rb, o, workers);
      Output out(out_path);
      out.stream() << prov.csv_header() << dsm::raster_csv(r);
      return kExitOk;
    }

    if (*ind) {
      prov.command = "induction";
      icfg.nhat_rule = dsm::parse_nhat_rule(i_rule);
      if (i_rdelta1 > 0) icfg.r_delta1 = i_rdelta1;
      icfg.workers = workers;
      prov.resolved = kv("a0", icfg.a0) + kv("N0", icfg.N0) + kv("b", icfg.b) + kv("r_delta", icfg.r_delta) +
                      kv("r_delta1", i_rdelta1) + kv("beta", icfg.beta) + kv("sample_density", icfg.sample_density) +
                      kv("nhat_rule", i_rule) + kv("b_min", icfg.b_min) + kv("stub_scale", icfg.stub_scale) +
                      kv("precision_bits", static_cast<int>(icfg.precision_bits));
      const dsm::SurvivorReport rep = dsm::run(icfg);
      Output out(out_path);
      out.stream() << dsm::to_json(rep, prov.to_json().dump()) << '\n';
      if (!i_log.empty()) {
        Output log(i_log);
        log.stream() << prov.csv_header() << dsm::format_run_log(rep);
      }
      return kExitOk;
    }

    if (*tip) {
      prov.command = "tongue-tip";
      const auto [lo, hi] = parse_range(t_window);
      prov.resolved = kv("period", t_period) + kv("a_window", dsm::shortest(lo) + "," + dsm::shortest(hi)) +
                      kv("b_tol", t_tol) + kv("a_grid", t_grid);
      dsm::TipOptions o;
      o.a_grid = t_grid;
      const dsm::TongueTip t = dsm::tongue_tip(t_period, {lo, hi}, t_tol, o);
      json j = {{"provenance", prov.to_json()}, {"a", t.a},   {"b", t.b},
                {"steps", t.steps},             {"multiplier", t.multiplier}};
      Output out(out_path);
      out.stream() << j.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const dsm::Error& e) {
    std::cerr << "dsmlab: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "dsmlab: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}
