#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <regex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hardylab/cp.hpp"
#include "hardylab/identities.hpp"

namespace hardylab {

using Json = nlohmann::ordered_json;

inline constexpr const char *kReportSchema = "1";

/// Malformed config file or schema violation.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int {
  exit_pass = 0,
  exit_fail = 1,
  exit_config = 2,
  exit_unknown_case = 3,
  exit_quadrature_abort = 4,
  exit_usage = 5,
};

struct SuiteCase {
  IdentityCase ident;
  std::optional<QuadratureSpec> resolution;
};

struct SuiteConfig {
  std::string suite_name;
  std::vector<SuiteCase> cases;
  QuadratureSpec quadrature = reference_quadrature();
};

struct CaseOutcome {
  IdentityReport report;
  QuadratureSpec quadrature;
  std::string error; // set when verification threw
  bool aborted = false;
};

struct SuiteResult {
  std::string suite_name;
  std::vector<CaseOutcome> outcomes;
  int exit_code = exit_pass;
};

namespace detail {

inline void check_keys(const Json &obj, std::initializer_list<const char *> allowed,
                       const std::string &where) {
  if (!obj.is_object())
    throw ConfigError(where + ": expected an object");
  for (const auto &[key, _] : obj.items()) {
    bool ok = false;
    for (const char *a : allowed)
      ok = ok || key == a;
    if (!ok)
      throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

inline double get_number(const Json &obj, const char *key, const std::string &where) {
  if (!obj.contains(key))
    throw ConfigError(where + ": missing field '" + key + "'");
  if (!obj.at(key).is_number())
    throw ConfigError(where + ": field '" + key + "' must be a number");
  return obj.at(key).get<double>();
}

inline double get_number(const Json &obj, const char *key, const std::string &where,
                         double fallback) {
  return obj.contains(key) ? get_number(obj, key, where) : fallback;
}

inline int get_int(const Json &obj, const char *key, const std::string &where, int fallback) {
  if (!obj.contains(key))
    return fallback;
  if (!obj.at(key).is_number_integer())
    throw ConfigError(where + ": field '" + key + "' must be an integer");
  return obj.at(key).get<int>();
}

inline std::string get_string(const Json &obj, const char *key, const std::string &where) {
  if (!obj.contains(key) || !obj.at(key).is_string())
    throw ConfigError(where + ": field '" + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

inline QuadratureSpec parse_quadrature(const Json &j, QuadratureSpec base,
                                       const std::string &where) {
  check_keys(j, {"base_rule", "points_per_axis", "max_refine_depth", "rel_tol", "abs_tol",
                 "initial_splits"},
             where);
  if (j.contains("base_rule") && get_string(j, "base_rule", where) != "gauss_legendre")
    throw ConfigError(where + ": base_rule must be \"gauss_legendre\"");
  base.points_per_axis = get_int(j, "points_per_axis", where, base.points_per_axis);
  base.max_refine_depth = get_int(j, "max_refine_depth", where, base.max_refine_depth);
  base.initial_splits = get_int(j, "initial_splits", where, base.initial_splits);
  base.rel_tol = get_number(j, "rel_tol", where, base.rel_tol);
  base.abs_tol = get_number(j, "abs_tol", where, base.abs_tol);
  if (base.points_per_axis < 3 || base.points_per_axis > 64)
    throw ConfigError(where + ": points_per_axis must lie in [3, 64]");
  if (base.max_refine_depth < 0 || base.max_refine_depth > 200)
    throw ConfigError(where + ": max_refine_depth must lie in [0, 200]");
  if (base.initial_splits < 1 || base.initial_splits > 16)
    throw ConfigError(where + ": initial_splits must lie in [1, 16]");
  if (!(base.rel_tol > 0) || !(base.abs_tol > 0))
    throw ConfigError(where + ": tolerances must be positive");
  return base;
}

inline BumpParams parse_bump(const Json &j, BumpParams bp, const std::string &where) {
  check_keys(j, {"r_in", "r_out", "q", "k", "amplitude"}, where);
  bp.r_in = get_number(j, "r_in", where, bp.r_in);
  bp.r_out = get_number(j, "r_out", where, bp.r_out);
  bp.amplitude = get_number(j, "amplitude", where, bp.amplitude);
  auto read_array = [&](const char *key, auto &arr) {
    if (!j.contains(key))
      return;
    const Json &a = j.at(key);
    if (!a.is_array() || a.size() != arr.size())
      throw ConfigError(where + ": field '" + key + "' must be an array of " +
                        std::to_string(arr.size()) + " numbers");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!a[i].is_number())
        throw ConfigError(where + ": field '" + key + "' must contain numbers");
      arr[i] = a[i].get<double>();
    }
  };
  read_array("q", bp.q);
  read_array("k", bp.k);
  if (!(bp.r_in > 0 && bp.r_in < bp.r_out))
    throw ConfigError(where + ": requires 0 < r_in < r_out");
  if (std::abs(bp.q[0]) + std::abs(bp.q[1]) + std::abs(bp.q[2]) >= 1)
    throw ConfigError(where + ": requires |q_0| + |q_1| + |q_2| < 1 (Q bounded away from 0)");
  if (!(bp.amplitude > 0))
    throw ConfigError(where + ": amplitude must be positive");
  return bp;
}

/// c |x|^e, given as {"coef": c, "power": e}.
inline std::pair<double, double> parse_power_weight(const Json &j, const std::string &where) {
  check_keys(j, {"coef", "power"}, where);
  return {get_number(j, "coef", where, 1.0), get_number(j, "power", where, 0.0)};
}

inline void apply_tolerances(const Json &j, IdentityCase &c, const std::string &where) {
  check_keys(j, {"rel_tol", "abs_tol"}, where);
  c.rel_tol = get_number(j, "rel_tol", where, c.rel_tol);
  c.abs_tol = get_number(j, "abs_tol", where, c.abs_tol);
  if (!(c.rel_tol > 0) || !(c.abs_tol > 0))
    throw ConfigError(where + ": tolerances must be positive");
}

inline IdentityCase parse_inline_custom(const Json &j, const std::string &where) {
  check_keys(j, {"id", "theorem", "system", "p", "N", "weights", "lambda", "test_function",
                 "resolution", "tolerance"},
             where);
  const std::string id = get_string(j, "id", where);
  Theorem th;
  try {
    th = theorem_from_string(get_string(j, "theorem", where));
  } catch (const InvalidArgument &e) {
    throw ConfigError(where + ": " + e.what());
  }
  IdentityCase c;
  if (th == Theorem::poincare_1d) {
    ScalarField u = sine_mode(2);
    if (j.contains("test_function")) {
      const Json &tf = j.at("test_function");
      check_keys(tf, {"sine_mode", "bubble"}, where + ".test_function");
      if (tf.contains("sine_mode")) {
        const int k = get_int(tf, "sine_mode", where, 1);
        if (k < 1)
          throw ConfigError(where + ": sine_mode must be a positive integer");
        u = sine_mode(k);
      } else if (tf.contains("bubble")) {
        u = interval_bubble();
      }
    }
    if (j.contains("p") && get_number(j, "p", where) != 2.0)
      throw OutOfRange("the interval Poincare identity is available for p = 2 only");
    c = make_poincare_case(u, id);
    c.validation = validate_case(c, 20);
    return c;
  }

  const double p = get_number(j, "p", where);
  const int n = static_cast<int>(get_number(j, "N", where));
  if (!(p > 1))
    throw ConfigError(where + ": p must exceed 1");
  if (n < 2 || n > kMaxDim)
    throw ConfigError(where + ": N must lie in [2, " + std::to_string(kMaxDim) + "]");
  if (j.contains("system")) {
    const Json &s = j.at("system");
    check_keys(s, {"kind", "N"}, where + ".system");
    if (get_string(s, "kind", where + ".system") != "euclidean")
      throw ConfigError(where + ": inline cases support the euclidean system only");
    if (s.contains("N") && static_cast<int>(get_number(s, "N", where)) != n)
      throw ConfigError(where + ": system.N disagrees with N");
  }
  if (!j.contains("weights"))
    throw ConfigError(where + ": missing field 'weights'");
  const Json &w = j.at("weights");
  check_keys(w, {"phi", "V", "W"}, where + ".weights");
  if (!w.contains("phi") || !w.contains("W"))
    throw ConfigError(where + ".weights: phi and W are required");

  c.id = id;
  c.theorem = th;
  c.system = make_euclidean(n);
  c.p = p;
  c.N = n;
  const auto [pc, pe] = parse_power_weight(w.at("phi"), where + ".weights.phi");
  if (pc == 0.0)
    throw ConfigError(where + ": phi must not vanish");
  c.phi = radial_power(-pe, pc);
  c.V = ScalarField::constant(1.0);
  if (w.contains("V")) {
    const auto [vc, ve] = parse_power_weight(w.at("V"), where + ".weights.V");
    c.V = detail::radial_weight(vc, ve);
  }
  const auto [wc, we] = parse_power_weight(w.at("W"), where + ".weights.W");
  c.W = detail::radial_weight(wc, we);
  c.lambda = get_number(j, "lambda", where);
  if (th == Theorem::hardy_directional)
    c.Z = [](const Vec &x) -> Vec { return x / x.norm(); };
  c.bump = default_bump(th);
  if (j.contains("test_function"))
    c.bump = parse_bump(j.at("test_function"), c.bump, where + ".test_function");
  c.u = make_bump(n, c.bump);
  c.pieces = detail::annulus_pieces(n, c.bump);
  c.sample_point = detail::annulus_sampler(n, c.bump);
  c.rel_tol = 1e-5;
  std::ostringstream os;
  os << "inline " << to_string(th) << " case on R^" << n << ", p = " << detail::fmt(p)
     << "; phi = " << c.phi.note() << ", V = " << c.V.note() << ", W = " << c.W.note()
     << ", lambda = " << detail::fmt(c.lambda);
  c.summary = os.str();
  c.validation = validate_case(c);
  return c;
}

inline SuiteCase parse_case_entry(const Json &entry, const QuadratureSpec &suite_quad,
                                  const Json *tolerance, std::size_t index) {
  const std::string where = "cases[" + std::to_string(index) + "]";
  SuiteCase sc;
  if (entry.is_string()) {
    sc.ident = case_library(entry.get<std::string>());
  } else if (entry.is_object() && entry.contains("base")) {
    check_keys(entry, {"base", "id", "lambda", "lambda_scale", "test_function", "resolution",
                       "tolerance"},
               where);
    sc.ident = case_library(get_string(entry, "base", where));
    if (entry.contains("id"))
      sc.ident.id = get_string(entry, "id", where);
    bool revalidate = false;
    if (entry.contains("lambda")) {
      sc.ident.lambda = get_number(entry, "lambda", where);
      revalidate = true;
    }
    if (entry.contains("lambda_scale")) {
      sc.ident.lambda *= get_number(entry, "lambda_scale", where);
      revalidate = true;
    }
    if (entry.contains("test_function")) {
      if (sc.ident.theorem == Theorem::poincare_1d)
        throw ConfigError(where + ": use an inline poincare_1d case to change its test function");
      sc.ident = with_test_function(
          sc.ident, parse_bump(entry.at("test_function"), sc.ident.bump, where + ".test_function"));
    }
    if (revalidate)
      sc.ident.validation =
          validate_case(sc.ident, sc.ident.theorem == Theorem::poincare_1d ? 20 : 100);
  } else if (entry.is_object() && entry.contains("theorem")) {
    sc.ident = parse_inline_custom(entry, where);
  } else {
    throw ConfigError(where + ": expected a case id, {\"base\": ...} or an inline case");
  }
  if (tolerance)
    apply_tolerances(*tolerance, sc.ident, "tolerance");
  if (entry.is_object() && entry.contains("tolerance"))
    apply_tolerances(entry.at("tolerance"), sc.ident, where + ".tolerance");
  if (entry.is_object() && entry.contains("resolution"))
    sc.resolution = parse_quadrature(entry.at("resolution"), suite_quad, where + ".resolution");
  static const std::regex id_re("[A-Za-z0-9._-]+");
  if (!std::regex_match(sc.ident.id, id_re))
    throw ConfigError(where + ": case id '" + sc.ident.id + "' must match [A-Za-z0-9._-]+");
  return sc;
}

} // namespace detail

/// Parses a suite config. Throws ConfigError on schema violations and
/// UnknownCase for unregistered ids.
inline SuiteConfig parse_suite_config(const Json &j) {
  detail::check_keys(j, {"suite_name", "cases", "quadrature", "tolerance"}, "config");
  SuiteConfig cfg;
  cfg.suite_name = detail::get_string(j, "suite_name", "config");
  if (!j.contains("cases") || !j.at("cases").is_array())
    throw ConfigError("config: field 'cases' must be an array");
  if (j.contains("quadrature"))
    cfg.quadrature = detail::parse_quadrature(j.at("quadrature"), cfg.quadrature, "quadrature");
  const Json *tol = j.contains("tolerance") ? &j.at("tolerance") : nullptr;
  std::set<std::string> seen;
  std::size_t i = 0;
  for (const auto &entry : j.at("cases")) {
    SuiteCase sc = detail::parse_case_entry(entry, cfg.quadrature, tol, i++);
    if (!seen.insert(sc.ident.id).second)
      throw ConfigError("config: duplicate case id '" + sc.ident.id + "'");
    cfg.cases.push_back(std::move(sc));
  }
  return cfg;
}

inline SuiteConfig load_suite_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_suite_config(j);
}

/// Worker count: HARDYLAB_THREADS when set, else the hardware concurrency.
inline int suite_threads() {
  if (const char *env = std::getenv("HARDYLAB_THREADS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw InvalidArgument("HARDYLAB_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Verifies every case; distinct cases run on separate workers, results are
/// kept in config order.
inline SuiteResult run_suite(const SuiteConfig &cfg, int threads = 1) {
  SuiteResult res;
  res.suite_name = cfg.suite_name;
  res.outcomes.resize(cfg.cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.cases.size(); i = next++) {
      const SuiteCase &sc = cfg.cases[i];
      CaseOutcome &out = res.outcomes[i];
      out.quadrature = sc.resolution.value_or(cfg.quadrature);
      out.report.case_id = sc.ident.id;
      out.report.theorem = sc.ident.theorem;
      out.report.p = sc.ident.p;
      out.report.N = sc.ident.N;
      out.report.lambda = sc.ident.lambda;
      out.report.validation = sc.ident.validation;
      try {
        out.report = verify(sc.ident, out.quadrature);
      } catch (const QuadratureAbort &e) {
        out.error = e.what();
        out.aborted = true;
      } catch (const std::exception &e) {
        out.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(cfg.cases.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  bool all_pass = true, any_abort = false;
  for (const auto &o : res.outcomes) {
    all_pass = all_pass && o.error.empty() && o.report.pass;
    any_abort = any_abort || o.aborted;
  }
  res.exit_code = any_abort ? exit_quadrature_abort : all_pass ? exit_pass : exit_fail;
  return res;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const TermValue &t) {
  return Json{{"name", t.name}, {"value", t.value}, {"err", t.err}};
}

inline Json to_json(const QuadratureSpec &s) {
  return Json{{"base_rule", "gauss_legendre"},    {"points_per_axis", s.points_per_axis},
              {"max_refine_depth", s.max_refine_depth}, {"rel_tol", s.rel_tol},
              {"abs_tol", s.abs_tol},              {"initial_splits", s.initial_splits}};
}

inline Json to_json(const CaseValidation &v) {
  Json j{{"points", v.points},
         {"max_relative_residual", v.max_relative_residual},
         {"tolerance", v.tolerance},
         {"passed", v.passed}};
  if (std::isfinite(v.min_v))
    j["min_V"] = v.min_v;
  if (std::isfinite(v.min_sign))
    j["min_minus_Lphi_over_phi"] = v.min_sign;
  if (!v.message.empty())
    j["message"] = v.message;
  return j;
}

inline Json to_json(const CaseOutcome &o) {
  const IdentityReport &r = o.report;
  Json j;
  j["schema"] = kReportSchema;
  j["case_id"] = r.case_id;
  j["theorem"] = to_string(r.theorem);
  j["p"] = r.p;
  j["N"] = r.N;
  j["lambda"] = r.lambda;
  j["lhs"] = Json{{"value", r.lhs.value}, {"err", r.lhs.err}};
  Json terms = Json::array();
  for (const auto &t : r.rhs_terms)
    terms.push_back(to_json(t));
  j["rhs_terms"] = terms;
  Json diag = Json::array();
  for (const auto &t : r.diagnostics)
    diag.push_back(to_json(t));
  j["diagnostics"] = diag;
  j["residual"] = r.residual;
  j["rel_residual"] = r.rel_residual;
  j["quad_err_total"] = r.quad_err_total;
  j["tolerance"] = r.tolerance;
  j["identity_holds"] = r.identity_holds;
  j["converged"] = r.converged;
  j["validation"] = to_json(r.validation);
  j["negative_remainder_nodes"] = r.negative_remainder_nodes;
  j["cells"] = r.cells;
  j["evaluations"] = r.evaluations;
  j["quadrature"] = to_json(o.quadrature);
  if (!o.error.empty())
    j["error"] = o.error;
  j["pass"] = o.error.empty() && r.pass;
  return j;
}

inline Json to_json(const ConstantEstimate &e) {
  return Json{{"which", to_string(e.which)},
              {"p", e.p},
              {"value", e.value},
              {"bracket", {e.bracket[0], e.bracket[1]}},
              {"argmin", {e.argmin[0], e.argmin[1]}},
              {"attained", e.attained},
              {"boundary_limit", {{"origin", e.limit_at_origin}, {"infinity", e.limit_at_infinity}}},
              {"evaluations", e.evaluations},
              {"converged", e.converged}};
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV summary: one row per case in config order.
inline std::string summary_csv(const SuiteResult &res) {
  std::string s = "case_id,p,N,lhs,residual,rel_residual,pass\n";
  for (const auto &o : res.outcomes) {
    const auto &r = o.report;
    s += r.case_id + "," + format_double(r.p) + "," + std::to_string(r.N) + "," +
         format_double(r.lhs.value) + "," + format_double(r.residual) + "," +
         format_double(r.rel_residual) + "," + (o.error.empty() && r.pass ? "true" : "false") +
         "\n";
  }
  return s;
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Writes <case_id>.json per case, summary.csv and suite.json into out_dir.
inline void write_suite_outputs(const SuiteResult &res, const std::filesystem::path &out_dir) {
  std::filesystem::create_directories(out_dir);
  Json ids = Json::array();
  for (const auto &o : res.outcomes) {
    write_text(out_dir / (o.report.case_id + ".json"), to_json(o).dump(2) + "\n");
    ids.push_back(o.report.case_id);
  }
  write_text(out_dir / "summary.csv", summary_csv(res));
  Json suite{{"schema", kReportSchema},
             {"suite_name", res.suite_name},
             {"cases", ids},
             {"exit_code", res.exit_code},
             {"pass", res.exit_code == exit_pass}};
  write_text(out_dir / "suite.json", suite.dump(2) + "\n");
}

/// Text for `describe`: theorem, system, exponent, weights and the source of the case.
inline std::string describe_case(const std::string &id) {
  const IdentityCase c = case_library(id);
  std::ostringstream os;
  os << "id:        " << c.id << "\n"
     << "theorem:   " << to_string(c.theorem) << "\n"
     << "system:    " << to_string(c.system.kind);
  if (c.system.kind == SystemKind::grushin)
    os << " (m = " << c.system.params.m << ", k = " << c.system.params.k
       << ", gamma = " << c.system.params.gamma << ")";
  os << "\n"
     << "p:         " << detail::fmt(c.p) << "\n"
     << "N:         " << c.N << "\n"
     << "lambda:    " << detail::fmt(c.lambda) << "\n"
     << "phi:       " << c.phi.note() << "\n"
     << "V:         " << c.V.note() << "\n"
     << "W:         " << c.W.note() << "\n";
  if (c.theorem == Theorem::hardy_directional)
    os << "Z:         x / |x|\n";
  os << "u:         " << c.u.note() << "\n"
     << "tolerance: rel " << c.rel_tol << ", abs " << c.abs_tol << "\n"
     << "validated: " << (c.validation.passed ? "yes" : "no") << " (max PDE residual "
     << c.validation.max_relative_residual << " over " << c.validation.points << " points)\n"
     << "source:    " << c.summary << "\n";
  return os.str();
}

} // namespace hardylab
