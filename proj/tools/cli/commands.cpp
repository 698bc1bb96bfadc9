#include "commands.hpp"

#include "suites/suites.hpp"

#include "meroren/germ_json.hpp"
#include "meroren/germ_parser.hpp"
#include "meroren/qft.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace meroren::cli {
namespace {

using nlohmann::json;

constexpr const char* kFormatVersion = "meroren-results-1";

// --- schema helpers --------------------------------------------------------

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed,
                const std::set<std::string>& required = {}) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  for (const auto& k : required)
    if (!j.contains(k)) throw ConfigError(where + ": missing key '" + k + "'");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return get<T>(j, key, where, T{});
}

Complex complex_from(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where + ": expected a number or [re, im]");
}

QuadratureConfig quadrature_from(const json& root, const RunContext& ctx) {
  QuadratureConfig cfg;
  if (root.contains("quadrature")) {
    const auto& q = root.at("quadrature");
    const std::string w = "quadrature";
    check_keys(q, w, {"tolerance", "max_level", "nodes", "max_nodes", "contour_radius", "extra_order"});
    cfg.tolerance = get<double>(q, "tolerance", w, cfg.tolerance);
    cfg.max_level = get<int>(q, "max_level", w, cfg.max_level);
    cfg.nodes = get<int>(q, "nodes", w, cfg.nodes);
    cfg.max_nodes = get<int>(q, "max_nodes", w, cfg.max_nodes);
    cfg.extra_order = get<int>(q, "extra_order", w, cfg.extra_order);
    if (q.contains("contour_radius")) cfg.contour_radius = get<double>(q, "contour_radius", w);
  }
  if (ctx.tol) cfg.tolerance = *ctx.tol;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("quadrature: ") + e.what());
  }
  return cfg;
}

std::uint64_t seed_from(const json& root, const RunContext& ctx) {
  if (ctx.seed) return *ctx.seed;
  return get<std::uint64_t>(root, "seed", "config", 1);
}

/// The request as it will actually run: CLI overrides folded in.
json effective_request(const std::string& command, json config, const RunContext& ctx) {
  if (ctx.seed) config["seed"] = *ctx.seed;
  if (ctx.tol) config["quadrature"]["tolerance"] = *ctx.tol;
  return {{"command", command}, {"config", std::move(config)}, {"format", kFormatVersion}};
}

template <class F>
Outcome cached(const std::string& command, const json& config, RunContext& ctx, F&& compute) {
  const std::string key = cache_key(effective_request(command, config, ctx));
  if (auto hit = ctx.cache.get(key)) return {*hit, hit->value("pass", true)};
  Outcome out = compute();
  out.output["pass"] = out.pass;
  ctx.cache.put(key, out.output);
  return out;
}

std::vector<BumpFactor> bump_factors(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of factors");
  std::vector<BumpFactor> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    check_keys(j[i], w, {"center", "half_width", "poly"}, {"center", "half_width"});
    BumpFactor f;
    f.center = get<double>(j[i], "center", w);
    f.half_width = get<double>(j[i], "half_width", w);
    f.poly = get<std::vector<double>>(j[i], "poly", w, {1.0});
    if (!(f.half_width > 0.0)) throw ConfigError(w + ".half_width: must be positive");
    if (f.poly.empty()) throw ConfigError(w + ".poly: must be nonempty");
    out.push_back(std::move(f));
  }
  return out;
}

// --- germ --------------------------------------------------------------------

std::size_t infer_vars(const std::string& text) {
  std::size_t p = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != 'l') continue;
    std::size_t j = i + 1, v = 0;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) v = 10 * v + (text[j++] - '0');
    p = std::max(p, v);
  }
  return p;
}

}  // namespace

Outcome cmd_germ(const json& config, RunContext&) {
  check_keys(config, "germ", {"expr", "vars"}, {"expr"});
  auto expr = get<std::string>(config, "expr", "germ");
  auto p = get<std::size_t>(config, "vars", "germ", infer_vars(expr));
  ExactGerm g;
  try {
    g = parse_germ(expr, p);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("germ: ") + e.what());
  } catch (const GermError& e) {
    throw ConfigError(std::string("germ: ") + e.what());
  }
  json out = to_json(project_pi(g));
  out["input"] = to_text(g);
  return {out, true};
}

// --- renorm ------------------------------------------------------------------

Outcome cmd_renorm(const json& config, RunContext& ctx) {
  const std::string w = "renorm";
  check_keys(config, w, {"factors", "exponents", "phi", "check", "tolerance", "quadrature", "seed"},
             {"factors", "exponents", "phi"});
  RenormRequest req;
  req.cfg = quadrature_from(config, ctx);
  const auto& fs = config.at("factors");
  if (!fs.is_array() || fs.empty()) throw ConfigError(w + ".factors: expected a nonempty array");
  std::size_t next = 0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::string wf = w + ".factors[" + std::to_string(i) + "]";
    FactorSpec f;
    if (fs[i].is_string()) {
      f.entry = fs[i].get<std::string>();
    } else {
      check_keys(fs[i], wf, {"entry", "block"}, {"entry"});
      f.entry = get<std::string>(fs[i], "entry", wf);
      f.block = get<std::vector<std::size_t>>(fs[i], "block", wf, {});
    }
    std::size_t dim = 0;
    try {
      dim = catalog_entry(f.entry).dim;
    } catch (const CatalogError& e) {
      throw ConfigError(wf + ": " + e.what());
    }
    if (f.block.empty())
      for (std::size_t k = 0; k < dim; ++k) f.block.push_back(next + k);
    if (f.block.size() != dim) throw ConfigError(wf + ".block: needs " + std::to_string(dim) + " indices");
    next = std::max(next, *std::max_element(f.block.begin(), f.block.end()) + 1);
    req.factors.push_back(std::move(f));
  }
  req.exponents = get<std::vector<long long>>(config, "exponents", w);
  if (req.exponents.size() != req.factors.size()) throw ConfigError(w + ".exponents: one per factor");
  const auto& pj = config.at("phi");
  check_keys(pj, w + ".phi", {"factors"}, {"factors"});
  auto phi = std::make_shared<TestFunction>(bump_factors(pj.at("factors"), w + ".phi.factors"));
  if (phi->dim() != next) throw ConfigError(w + ".phi: dimension does not match the factor blocks");
  req.phi = phi;
  auto check = get<std::string>(config, "check", w, "none");
  if (check != "none" && check != "extension") throw ConfigError(w + ".check: expected 'none' or 'extension'");
  double tol = get<double>(config, "tolerance", w, 1e-6);

  return cached("renorm", config, ctx, [&] {
    Outcome o;
    o.output = {{"result", to_json(renormalize(req))}};
    if (check == "extension") {
      auto rep = check_extension(req, tol);
      o.output["check"] = to_json(rep);
      o.pass = rep.pass;
    }
    return o;
  });
}

// --- qft -----------------------------------------------------------------------

namespace {

Isometry isometry_from(const json& j, const Spacetime& s) {
  const std::string w = "qft.isometry";
  check_keys(j, w, {"translation", "boost", "reflection"});
  Isometry g = Isometry::identity(s.dim());
  auto compose = [](const Isometry& a, const Isometry& b) {  // a o b
    Isometry c;
    const std::size_t n = a.Lambda.size();
    c.Lambda.assign(n, std::vector<double>(n, 0.0));
    c.a = a.a;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        c.a[i] += a.Lambda[i][k] * b.a[k];
        for (std::size_t m = 0; m < n; ++m) c.Lambda[i][m] += a.Lambda[i][k] * b.Lambda[k][m];
      }
    return c;
  };
  if (get<bool>(j, "reflection", w, false)) g = compose(Isometry::reflection(s.dim()), g);
  if (j.contains("boost")) {
    if (s.d != 2) throw ConfigError(w + ".boost: needs d = 2");
    g = compose(Isometry::boost(get<double>(j, "boost", w)), g);
  }
  if (j.contains("translation")) {
    auto a = get<std::vector<double>>(j, "translation", w);
    if (a.size() != s.dim()) throw ConfigError(w + ".translation: wrong dimension");
    g = compose(Isometry::translation(a), g);
  }
  return g;
}

json feynman_json(const FeynmanReport& r) {
  return {{"pass", r.pass},
          {"cases", r.cases},
          {"failures", r.failures},
          {"reversed_accepted", r.reversed_accepted},
          {"detail", r.detail}};
}

}  // namespace

Outcome cmd_qft(const json& config, RunContext& ctx) {
  const std::string w = "qft";
  check_keys(config, w,
             {"d", "model", "spec", "vertices", "task", "lambda", "route", "declared_poles", "I", "isometry",
              "tolerance", "options", "samples", "quadrature", "seed"},
             {"d"});
  Spacetime s{get<int>(config, "d", w)};
  if (s.d != 1 && s.d != 2) throw ConfigError(w + ".d: expected 1 or 2");
  PropagatorModel model;
  if (config.contains("model")) {
    const auto& m = config.at("model");
    check_keys(m, w + ".model", {"U", "V", "W"});
    model.U = get<double>(m, "U", w + ".model", 1.0);
    model.V = get<double>(m, "V", w + ".model", 0.0);
    model.W = get<double>(m, "W", w + ".model", 0.0);
  }
  const auto task = get<std::string>(config, "task", w, "renormalize");
  static const std::set<std::string> tasks{"renormalize", "amplitude", "germ", "factorization", "covariance",
                                           "feynman"};
  if (!tasks.count(task)) throw ConfigError(w + ".task: unknown task '" + task + "'");

  AmplitudeOptions opt;
  opt.cfg = quadrature_from(config, ctx);
  opt.seed = seed_from(config, ctx);
  if (config.contains("options")) {
    const auto& o = config.at("options");
    const std::string wo = w + ".options";
    check_keys(o, wo, {"node_budget", "germ_node_budget", "mc_samples", "factorization_samples",
                       "independent_samples"});
    opt.node_budget = get<std::size_t>(o, "node_budget", wo, opt.node_budget);
    opt.germ_node_budget = get<std::size_t>(o, "germ_node_budget", wo, opt.germ_node_budget);
    opt.mc_samples = get<std::size_t>(o, "mc_samples", wo, opt.mc_samples);
    opt.factorization_samples = get<std::size_t>(o, "factorization_samples", wo, opt.factorization_samples);
    opt.independent_samples = get<bool>(o, "independent_samples", wo, opt.independent_samples);
  }
  try {
    opt.route = route_from_string(get<std::string>(config, "route", w, "auto"));
  } catch (const Error& e) {
    throw ConfigError(w + ".route: " + e.what());
  }

  if (task == "feynman") {
    auto samples = get<std::size_t>(config, "samples", w, 1000);
    auto rep = feynman_relation_check(s, model, samples, opt.seed);
    return {json{{"task", task}, {"report", feynman_json(rep)}, {"pass", rep.pass}}, rep.pass};
  }

  AmplitudeSpec spec;
  std::vector<VertexFunction> phi;
  try {
    spec = amplitude_spec_from_json(config.at("spec"));
    for (const auto& v : config.at("vertices")) phi.push_back(vertex_function_from_json(v, s));
  } catch (const json::exception& e) {
    throw ConfigError(w + ": spec and vertices required (" + std::string(e.what()) + ")");
  } catch (const Error& e) {
    throw ConfigError(w + ": " + e.what());
  }
  if (phi.size() != spec.n) throw ConfigError(w + ".vertices: one vertex function per vertex");

  return cached("qft", config, ctx, [&]() -> Outcome {
    json out{{"task", task}};
    if (task == "renormalize") {
      out["result"] = to_json(renormalize_amplitude(s, model, spec, phi, opt));
      return {out, true};
    }
    if (task == "amplitude") {
      if (!config.contains("lambda") || !config.at("lambda").is_array())
        throw ConfigError(w + ".lambda: one exponent per edge required");
      std::vector<Complex> lam;
      for (const auto& l : config.at("lambda")) lam.push_back(complex_from(l, w + ".lambda"));
      if (lam.size() != spec.edge_list().size()) throw ConfigError(w + ".lambda: one exponent per edge");
      out["result"] = to_json(regularized_amplitude(s, model, spec, lam, phi, opt));
      return {out, true};
    }
    if (task == "germ") {
      std::optional<PoleSet> declared;
      if (config.contains("declared_poles")) declared = poles_from_json(config.at("declared_poles"));
      auto g = amplitude_germ(s, model, spec, phi, declared, opt);
      out["germ"] = to_json(g);
      out["decomposition"] = to_json(project_pi(g.germ));
      return {out, true};
    }
    double tol = get<double>(config, "tolerance", w, task == "factorization" ? 1e-4 : 1e-8);
    CheckReport rep;
    if (task == "factorization") {
      auto I = get<std::vector<std::size_t>>(config, "I", w);
      rep = check_qft_factorization(s, model, spec, I, phi, opt, tol);
    } else {
      if (!config.contains("isometry")) throw ConfigError(w + ": covariance needs 'isometry'");
      rep = check_covariance(s, model, spec, phi, isometry_from(config.at("isometry"), s), opt, tol);
    }
    out["report"] = to_json(rep);
    return {out, rep.pass};
  });
}

// --- polar ---------------------------------------------------------------------

Outcome cmd_polar(const json& config, RunContext& ctx) {
  const std::string w = "polar";
  check_keys(config, w, {"d", "cases", "admissible", "sampler", "u", "v", "seed"}, {"d"});
  auto d = get<std::size_t>(config, "d", w);
  if (d < 1 || d > 3) throw ConfigError(w + ".d: expected 1, 2 or 3 spatial dimensions");
  CausalSite site{d};
  if (config.contains("u") || config.contains("v")) {
    PolarizedConfig u, v;
    try {
      u = polarized_config_from_json(config.at("u"));
      v = polarized_config_from_json(config.at("v"));
    } catch (const std::exception& e) {
      throw ConfigError(w + ": u and v must both be configurations (" + e.what() + ")");
    }
    for (const auto* c : {&u, &v})
      for (const auto& e : *c)
        if (e.x.size() != site.dim()) throw ConfigError(w + ": points must have dimension 1 + d");
    auto r = check_sum_polarization(site, u, v);
    bool pass = !r.precondition || (r.nonzero_sum && r.maxA_eq_maxB_cap_maxC);
    return {json{{"mode", "pair"}, {"report", to_json(r)}, {"pass", pass}}, pass};
  }
  auto cases = get<std::size_t>(config, "cases", w, 1000);
  bool admissible = get<bool>(config, "admissible", w, true);
  auto sampler_name = get<std::string>(config, "sampler", w, "default");
  PolarizationSampler sampler;
  if (sampler_name == "degenerate")
    sampler = PolarizationSampler::degenerate();
  else if (sampler_name != "default")
    throw ConfigError(w + ".sampler: expected 'default' or 'degenerate'");
  auto seed = seed_from(config, ctx);
  auto b = run_polarization_batch(site, cases, seed, admissible, sampler);
  json ce = json::array();
  for (const auto& [u, v] : b.counterexamples) ce.push_back({{"u", to_json(u)}, {"v", to_json(v)}});
  // Admissible, generic: every assertion must hold. Degenerate: only the
  // nonzero sum is asserted. Inadmissible controls: a counterexample is the
  // expected outcome.
  bool pass = admissible ? (b.nonzero_sum_failures == 0 &&
                            (sampler_name == "degenerate" || b.max_identity_failures == 0))
                         : !b.counterexamples.empty();
  json out{{"mode", "batch"},
           {"d", d},
           {"seed", seed},
           {"admissible", admissible},
           {"sampler", sampler_name},
           {"cases", b.cases},
           {"nonzero_sum_failures", b.nonzero_sum_failures},
           {"max_identity_failures", b.max_identity_failures},
           {"strict_sum_failures", b.strict_sum_failures},
           {"counterexamples", ce},
           {"pass", pass}};
  return {out, pass};
}

// --- check -----------------------------------------------------------------------

Outcome cmd_check(const std::string& suite, RunContext& ctx) {
  std::vector<std::string> names;
  if (suite == "all")
    names = suites::suite_names();
  else if (suites::has_suite(suite))
    names = {suite};
  else {
    std::string known;
    for (const auto& n : suites::suite_names()) known += " " + n;
    throw ConfigError("check: unknown suite '" + suite + "'; known:" + known + " all");
  }
  suites::SuiteOptions opt;
  if (ctx.seed) opt.seed = *ctx.seed;
  json reports = json::array();
  bool pass = true;
  for (const auto& n : names) {
    auto r = suites::run_suite(n, opt);
    pass = pass && r.pass;
    reports.push_back(r.report);
  }
  return {json{{"suites", reports}, {"seed", opt.seed}, {"pass", pass}}, pass};
}

}  // namespace meroren::cli
