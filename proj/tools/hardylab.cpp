#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "hardylab/suite.hpp"

using namespace hardylab;

namespace {

int cmd_verify(const std::string &config, const std::string &out_dir) {
  const SuiteConfig cfg = load_suite_config(config);
  const SuiteResult res = run_suite(cfg, suite_threads());
  write_suite_outputs(res, out_dir);
  int passed = 0;
  for (const auto &o : res.outcomes) {
    const bool ok = o.error.empty() && o.report.pass;
    passed += ok;
    std::cout << (ok ? "PASS " : "FAIL ") << o.report.case_id << "  rel_residual "
              << o.report.rel_residual;
    if (!o.error.empty())
      std::cout << "  error: " << o.error;
    else if (!o.report.validation.passed)
      std::cout << "  validation: " << o.report.validation.message;
    std::cout << "\n";
  }
  std::cout << cfg.suite_name << ": " << passed << "/" << res.outcomes.size() << " passed\n";
  return res.exit_code;
}

std::vector<double> parse_p_list(const std::string &text) {
  std::vector<double> ps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      throw InvalidArgument("--p: cannot parse '" + item + "'");
    }
    if (used != item.size())
      throw InvalidArgument("--p: cannot parse '" + item + "'");
    ps.push_back(v);
  }
  if (ps.empty())
    throw InvalidArgument("--p: empty list");
  return ps;
}

std::vector<ConstantKind> parse_which(const std::string &text) {
  std::vector<ConstantKind> out;
  std::stringstream ss(text);
  std::string item;
  std::set<std::string> seen;
  while (std::getline(ss, item, ',')) {
    if (!seen.insert(item).second)
      continue;
    if (item == "c1")
      out.push_back(ConstantKind::c1);
    else if (item == "c2")
      out.push_back(ConstantKind::c2);
    else if (item == "c3")
      out.push_back(ConstantKind::c3);
    else
      throw InvalidArgument("--which: unknown constant '" + item + "'");
  }
  if (out.empty())
    throw InvalidArgument("--which: empty set");
  return out;
}

int cmd_constants(const std::string &p_text, const std::string &which_text,
                  const std::string &out_dir) {
  const auto ps = parse_p_list(p_text);
  const auto which = parse_which(which_text);
  for (ConstantKind w : which)
    for (double p : ps)
      if (!in_lemma_range(w, p))
        throw OutOfRange("p = " + detail::fmt(p) + " is outside the admissible range for " +
                         to_string(w));
  Json records = Json::array();
  for (ConstantKind w : which)
    for (double p : ps) {
      const ConstantEstimate e = compute_constant(w, p);
      records.push_back(to_json(e));
      std::cout << to_string(w) << "(" << detail::fmt(p) << ") = " << format_double(e.value)
                << "  bracket [" << format_double(e.bracket[0]) << ", "
                << format_double(e.bracket[1]) << "]\n";
    }
  std::filesystem::create_directories(out_dir);
  const Json doc{{"schema", kReportSchema}, {"constants", records}};
  write_text(std::filesystem::path(out_dir) / "constants.json", doc.dump(2) + "\n");
  return exit_pass;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Numerical verification of Hardy and Rellich identities with sharp remainders"};
  app.require_subcommand(1);

  std::string config, out_dir, p_text, which_text = "c1,c2,c3", id;
  auto *verify_cmd = app.add_subcommand("verify", "Run a verification suite from a JSON config");
  verify_cmd->add_option("config", config, "Suite config (JSON)")->required();
  verify_cmd->add_option("--out", out_dir, "Output directory for reports")->required();

  auto *const_cmd = app.add_subcommand("constants", "Compute the sharp constants c1, c2, c3");
  const_cmd->add_option("--p", p_text, "Comma-separated exponents")->required();
  const_cmd->add_option("--which", which_text, "Comma-separated subset of c1,c2,c3");
  const_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto *list_cmd = app.add_subcommand("list", "List registered case ids");
  auto *describe_cmd = app.add_subcommand("describe", "Describe a registered case");
  describe_cmd->add_option("id", id, "Case id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_usage;
  }

  try {
    if (*verify_cmd)
      return cmd_verify(config, out_dir);
    if (*const_cmd)
      return cmd_constants(p_text, which_text, out_dir);
    if (*list_cmd) {
      for (const auto &c : list_case_ids())
        std::cout << c << "\n";
      return exit_pass;
    }
    if (*describe_cmd) {
      std::cout << describe_case(id);
      return exit_pass;
    }
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const UnknownCase &e) {
    std::cerr << "unknown case: " << e.what() << "\n";
    return exit_unknown_case;
  } catch (const QuadratureAbort &e) {
    std::cerr << "quadrature aborted: " << e.what() << "\n";
    return exit_quadrature_abort;
  } catch (const OutOfRange &e) {
    std::cerr << "out of range: " << e.what() << "\n";
    return exit_usage;
  } catch (const InvalidArgument &e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_fail;
  }
  return exit_usage;
}
