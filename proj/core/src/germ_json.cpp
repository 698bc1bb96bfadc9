#include "meroren/germ_json.hpp"

#include "meroren/germ_parser.hpp"

namespace meroren {

nlohmann::json poles_to_json(const PoleSet& poles) {
  auto arr = nlohmann::json::array();
  for (const auto& [form, power] : poles) arr.push_back({form.coeffs(), power});
  return arr;
}

PoleSet poles_from_json(const nlohmann::json& j) {
  PoleSet poles;
  for (const auto& entry : j) {
    LinearForm f(entry.at(0).get<std::vector<long long>>());
    poles[f.canonicalize().first] += entry.at(1).get<int>();
  }
  return poles;
}

namespace {

template <class C>
nlohmann::json decomposition_json(const Decomposition<C>& d) {
  nlohmann::json j;
  j["center"] = d.center;
  auto sing = nlohmann::json::array();
  for (const auto& t : d.singular)
    sing.push_back({{"numerator", t.numerator.to_string()}, {"poles", poles_to_json(t.poles)}});
  j["singular"] = std::move(sing);
  j["holomorphic"] = d.holomorphic.to_string();
  return j;
}

}  // namespace

nlohmann::json to_json(const Decomposition<GaussRational>& d) { return decomposition_json(d); }
nlohmann::json to_json(const Decomposition<Complex>& d) { return decomposition_json(d); }

Decomposition<GaussRational> exact_decomposition_from_json(const nlohmann::json& j) {
  Decomposition<GaussRational> d;
  d.center = j.at("center").get<std::vector<long long>>();
  const std::size_t p = d.center.size();
  for (const auto& t : j.at("singular")) {
    PolarTerm<GaussRational> term;
    term.numerator = parse_germ(t.at("numerator").get<std::string>(), p).numerator();
    term.poles = poles_from_json(t.at("poles"));
    std::vector<LinearForm> forms;
    for (const auto& [f, s] : term.poles) forms.push_back(f);
    term.complement = orth_complement(forms, p);
    d.singular.push_back(std::move(term));
  }
  d.holomorphic = parse_germ(j.at("holomorphic").get<std::string>(), p).numerator();
  return d;
}

}  // namespace meroren
