// meroren: germ | renorm | qft | polar | check.
// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 usage or config error.

#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;
using namespace meroren::cli;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meromorphic germs, renormalization by projection, and toy QFT amplitudes"};
  app.require_subcommand(1);

  std::string config_path, out_path, cache_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  auto add_common = [&](CLI::App* sub, bool wants_config) {
    if (wants_config) sub->add_option("--config", config_path, "JSON request file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "write the JSON result here instead of stdout");
    sub->add_option("--cache-dir", cache_dir, "content-addressed result cache");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--tol", tol, "quadrature tolerance (overrides the config)")->check(CLI::PositiveNumber);
  };

  std::string expr;
  std::optional<std::size_t> vars;
  auto* germ = app.add_subcommand("germ", "project a germ expression: singular and holomorphic parts");
  germ->add_option("expr", expr, "expression in l1..lp, e.g. \"(l1+l2)/l1\"");
  germ->add_option("--vars", vars, "number of variables (default: largest index used)");
  add_common(germ, true);

  auto* renorm = app.add_subcommand("renorm", "R_pi of a catalog pairing");
  add_common(renorm, true);
  auto* qft = app.add_subcommand("qft", "toy QFT amplitudes and locality checks");
  add_common(qft, true);
  auto* polar = app.add_subcommand("polar", "sum-polarization on a configuration pair or random batch");
  add_common(polar, true);

  std::string suite = "all";
  auto* check = app.add_subcommand("check", "run a named check suite (or all)");
  check->add_option("suite", suite, "suite name");
  add_common(check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunContext ctx;
    ctx.seed = seed;
    ctx.tol = tol;
    if (!cache_dir.empty()) ctx.cache = ResultCache(cache_dir);

    auto need_config = [&](const char* name) {
      if (config_path.empty()) throw ConfigError(std::string(name) + ": --config is required");
      return load_config(config_path);
    };

    Outcome out;
    if (*germ) {
      json cfg = config_path.empty() ? json::object() : load_config(config_path);
      if (!expr.empty()) cfg["expr"] = expr;
      if (vars) cfg["vars"] = *vars;
      out = cmd_germ(cfg, ctx);
    } else if (*renorm) {
      out = cmd_renorm(need_config("renorm"), ctx);
    } else if (*qft) {
      out = cmd_qft(need_config("qft"), ctx);
    } else if (*polar) {
      out = cmd_polar(need_config("polar"), ctx);
    } else {
      out = cmd_check(suite, ctx);
    }

    const std::string text = out.output.dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      write_atomic(out_path, text);
    return out.pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "meroren: " << e.what() << "\n";
    return 2;
  } catch (const meroren::ValidityError& e) {
    std::cerr << "meroren: " << e.what() << "\n";
    return 2;
  } catch (const meroren::CatalogError& e) {
    std::cerr << "meroren: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "meroren: " << e.what() << "\n";
    return 1;
  }
}
