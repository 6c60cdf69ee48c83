#include "qrisk/io.hpp"

#include "qrisk/errors.hpp"
#include "qrisk/numeric.hpp"

#include "format.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qrisk {

namespace detail {

namespace {

std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError((path.empty() ? std::string("/") : path) + ": " + what);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail(at(path, key), "unknown key");
  }
}

double number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key))
    fail(at(path, key), "missing");
  const auto& v = j.at(key);
  if (!v.is_number())
    fail(at(path, key), "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  return j.contains(key) ? number(j, path, key) : fallback;
}

std::string kind_of(const json& j, const std::string& path) {
  if (!j.is_object())
    fail(path, "expected an object");
  if (!j.contains("kind") || !j.at("kind").is_string())
    fail(at(path, "kind"), "missing or not a string");
  return j.at("kind").get<std::string>();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad())
    throw IoError("cannot read '" + path + "'");
  return os.str();
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

json atoms_json(const Distribution& x) {
  json a = json::array();
  for (const auto& atom : x.atoms())
    a.push_back({atom.value, atom.probability});
  return a;
}

json pieces_json(const std::vector<DensityPiece>& pieces) {
  json a = json::array();
  for (const auto& p : pieces)
    a.push_back({{"lo", p.lo},
                 {"hi", p.hi},
                 {"coef", p.term.coef},
                 {"origin", p.term.origin},
                 {"scale", p.term.scale},
                 {"exponent", p.term.exponent}});
  return a;
}

json points_json(const std::vector<WeightedPoint>& points) {
  json a = json::array();
  for (const auto& p : points)
    a.push_back({{"u", p.u}, {"mass", p.mass}});
  return a;
}

} // namespace

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
}

Distribution distribution_from_json(const json& j, const std::string& path) {
  const auto kind = kind_of(j, path);
  if (kind == "empirical") {
    check_keys(j, path, {"kind", "values"});
    if (!j.contains("values") || !j.at("values").is_array())
      fail(at(path, "values"), "expected an array of numbers");
    std::vector<double> values;
    for (const auto& v : j.at("values")) {
      if (!v.is_number())
        fail(at(path, "values"), "expected an array of numbers");
      values.push_back(v.get<double>());
    }
    return Distribution::empirical(values);
  }
  if (kind == "discrete") {
    check_keys(j, path, {"kind", "atoms"});
    if (!j.contains("atoms") || !j.at("atoms").is_array())
      fail(at(path, "atoms"), "expected an array of [value, probability] pairs");
    std::vector<Atom> atoms;
    std::size_t i = 0;
    for (const auto& a : j.at("atoms")) {
      const auto where = at(at(path, "atoms"), std::to_string(i++));
      if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number())
        atoms.push_back({a[0].get<double>(), a[1].get<double>()});
      else if (a.is_object()) {
        check_keys(a, where, {"value", "probability"});
        atoms.push_back({number(a, where, "value"), number(a, where, "probability")});
      } else
        fail(where, "expected [value, probability]");
    }
    return Distribution::discrete(std::move(atoms));
  }
  if (kind == "point_mass") {
    check_keys(j, path, {"kind", "value"});
    return Distribution::point_mass(number(j, path, "value"));
  }
  if (kind == "pareto_negative") {
    check_keys(j, path, {"kind", "beta", "tail_index"});
    return Distribution::pareto_negative(number(j, path, "beta"), number_or(j, path, "tail_index", 2.0));
  }
  if (kind == "pareto_positive") {
    check_keys(j, path, {"kind", "tail_index", "scale"});
    return Distribution::pareto_positive(number(j, path, "tail_index"), number_or(j, path, "scale", 1.0));
  }
  if (kind == "transformed") {
    check_keys(j, path, {"kind", "op", "a", "c", "base"});
    if (!j.contains("op") || !j.at("op").is_string())
      fail(at(path, "op"), "missing or not a string");
    if (!j.contains("base"))
      fail(at(path, "base"), "missing");
    const auto base = distribution_from_json(j.at("base"), at(path, "base"));
    const auto op = j.at("op").get<std::string>();
    if (op == "scale")
      return base.scaled(number(j, path, "a"));
    if (op == "shift")
      return base.shifted(number(j, path, "c"));
    if (op == "pos_part")
      return base.positive_part();
    if (op == "neg_part")
      return base.negative_part();
    if (op == "abs")
      return base.absolute();
    fail(at(path, "op"), "unknown transform '" + op + "' (scale, shift, pos_part, neg_part, abs)");
  }
  if (kind == "comonotone_sum") {
    check_keys(j, path, {"kind", "terms"});
    if (!j.contains("terms") || !j.at("terms").is_array() || j.at("terms").empty())
      fail(at(path, "terms"), "expected a non-empty array of distributions");
    const auto& terms = j.at("terms");
    auto total = distribution_from_json(terms[0], at(at(path, "terms"), "0"));
    for (std::size_t i = 1; i < terms.size(); ++i)
      total = comonotone_sum(total, distribution_from_json(terms[i], at(at(path, "terms"), std::to_string(i))));
    return total;
  }
  if (kind == "csv") {
    check_keys(j, path, {"kind", "path"});
    if (!j.contains("path") || !j.at("path").is_string())
      fail(at(path, "path"), "missing or not a string");
    return read_distribution_csv(j.at("path").get<std::string>());
  }
  fail(at(path, "kind"), "unknown distribution kind '" + kind + "'");
}

Distortion distortion_from_json(const json& j, const std::string& path) {
  const auto kind = kind_of(j, path);
  if (kind == "expectation") {
    check_keys(j, path, {"kind"});
    return Distortion::expectation();
  }
  if (kind == "var") {
    check_keys(j, path, {"kind", "alpha"});
    return Distortion::value_at_risk(number(j, path, "alpha"));
  }
  if (kind == "es") {
    check_keys(j, path, {"kind", "alpha"});
    return Distortion::expected_shortfall(number(j, path, "alpha"));
  }
  if (kind == "es_n") {
    check_keys(j, path, {"kind", "n", "alpha"});
    const double n = number(j, path, "n");
    if (n != std::floor(n) || n < 1.0 || n > 1e6)
      throw DomainError("es_n needs an integer order n >= 1, got " + format_number(n));
    return Distortion::expected_shortfall_order(static_cast<int>(n), number(j, path, "alpha"));
  }
  if (kind == "threshold") {
    check_keys(j, path, {"kind", "delta"});
    return Distortion::threshold(number(j, path, "delta"));
  }
  if (kind == "sqrt_example") {
    check_keys(j, path, {"kind"});
    return Distortion::sqrt_example();
  }
  if (kind == "piecewise") {
    check_keys(j, path, {"kind", "pieces"});
    if (!j.contains("pieces") || !j.at("pieces").is_array())
      fail(at(path, "pieces"), "expected an array of pieces");
    std::vector<DistortionPiece> pieces;
    std::size_t i = 0;
    for (const auto& p : j.at("pieces")) {
      const auto where = at(at(path, "pieces"), std::to_string(i++));
      check_keys(p, where, {"lo", "hi", "offset", "coef", "origin", "scale", "exponent"});
      pieces.push_back({number(p, where, "lo"),
                        number(p, where, "hi"),
                        number_or(p, where, "offset", 0.0),
                        {number_or(p, where, "coef", 0.0), number_or(p, where, "origin", 0.0),
                         number_or(p, where, "scale", 1.0), number_or(p, where, "exponent", 0.0)}});
    }
    return Distortion::piecewise(std::move(pieces));
  }
  fail(at(path, "kind"), "unknown distortion kind '" + kind + "'");
}

json distortion_json(const Distortion& d) {
  switch (d.kind()) {
  case DistortionKind::Expectation: return {{"kind", "expectation"}};
  case DistortionKind::ValueAtRisk: return {{"kind", "var"}, {"alpha", d.alpha()}};
  case DistortionKind::ExpectedShortfall: return {{"kind", "es"}, {"alpha", d.alpha()}};
  case DistortionKind::ExpectedShortfallOrder: return {{"kind", "es_n"}, {"n", d.order()}, {"alpha", d.alpha()}};
  case DistortionKind::Threshold: return {{"kind", "threshold"}, {"delta", d.alpha()}};
  case DistortionKind::SqrtExample: return {{"kind", "sqrt_example"}};
  case DistortionKind::Piecewise: {
    json pieces = json::array();
    for (const auto& p : d.pieces())
      pieces.push_back({{"lo", p.lo},
                        {"hi", p.hi},
                        {"offset", p.offset},
                        {"coef", p.term.coef},
                        {"origin", p.term.origin},
                        {"scale", p.term.scale},
                        {"exponent", p.term.exponent}});
    return {{"kind", "piecewise"}, {"pieces", pieces}};
  }
  case DistortionKind::Opaque: return {{"kind", "opaque"}, {"name", d.name()}};
  }
  return {};
}

json risk_value_json(const ExtendedRisk& r) {
  switch (r.kind) {
  case RiskKind::Finite: return r.value;
  case RiskKind::NegInfinity: return "-inf";
  case RiskKind::NotInDomain: return "not-in-domain";
  }
  return nullptr;
}

json risk_record(const std::string& measure, const Distribution& x, const std::string& distortion,
                 const ExtendedRisk& value, const std::string& representation, double tolerance) {
  return {{"schema", kResultSchema},
          {"measure", measure},
          {"distribution", x.describe()},
          {"distortion", distortion},
          {"value", risk_value_json(value)},
          {"representation", representation},
          {"tolerance", tolerance}};
}

json convexity_json(const Distortion& d, const ConvexityReport& r) {
  json out{{"schema", kResultSchema},
           {"measure", "convexity"},
           {"distortion", d.name()},
           {"convex", r.convex},
           {"method", r.exact ? "structural" : "grid"}};
  if (r.witness) {
    const auto& w = *r.witness;
    out["witness"] = {{"u", w.u}, {"eps", w.eps}, {"two_d_u", 2.0 * d(w.u)}, {"d_minus_plus_d_plus", d(w.u - w.eps) + d(w.u + w.eps)}};
  } else {
    out["witness"] = nullptr;
  }
  return out;
}

json spectrum_json(const Distortion& d) {
  const auto s = spectral_of(d);
  const auto nu = mixture_measure_of(s);
  const auto q = measure_of(d);
  json grid = json::array();
  for (int k = 1; k < 20; ++k) {
    const double u = k / 20.0;
    grid.push_back({{"u", u}, {"D", d(u)}, {"s", s(u)}, {"nu_cumulative", nu.cumulative(u)}});
  }
  return {{"schema", kResultSchema},
          {"measure", "spectrum"},
          {"distortion", d.name()},
          {"spectral_density", {{"pieces", pieces_json(s.pieces())}, {"integral", s.integral()}}},
          {"mixture_measure", {{"atoms", points_json(nu.atoms)}, {"density", pieces_json(nu.density)}}},
          {"distortion_measure",
           {{"atoms", points_json(q.atoms)}, {"density", pieces_json(q.density)}, {"total_mass", q.total_mass()}}},
          {"grid", grid}};
}

json table_json(const JointTable& t) {
  json cells = json::array();
  for (const auto& c : t.cells())
    cells.push_back({c.x, c.y, c.probability});
  return {{"cells", cells}, {"x", atoms_json(t.first())}, {"y", atoms_json(t.second())}, {"sum", atoms_json(t.sum())}};
}

json counterexample_json(const CounterexampleReport& r) {
  return {{"schema", kResultSchema},
          {"measure", "counterexample"},
          {"witness", {{"u", r.witness.u}, {"eps", r.witness.eps}}},
          {"a", r.a},
          {"table", table_json(r.table)},
          {"rho_x", r.rho_x},
          {"rho_y", r.rho_y},
          {"rho_sum", r.rho_sum},
          {"rho_x_plus_rho_y", r.rho_x + r.rho_y},
          {"gap", r.gap},
          {"gap_identity", r.gap_identity},
          {"identities", {{"rho_x", r.rho_x_identity}, {"rho_y", r.rho_y_identity}, {"rho_sum", r.rho_sum_identity}}},
          {"sum_matches_table", r.sum_matches_table}};
}

json verdict_json(const Distribution& x, const Distortion& d, const MembershipVerdict& v) {
  json out{{"schema", kResultSchema},
           {"measure", "classify"},
           {"distribution", x.describe()},
           {"distortion", d.name()},
           {"class", to_string(v.domain)},
           {"verdict", to_string(v.verdict)},
           {"method", to_string(v.method)},
           {"reason", v.reason}};
  if (v.method == ClassifyMethod::Probe) {
    out["partial_integrals"] = v.partial_integrals;
    out["increments_near_zero"] = v.increments_near_zero;
    out["increments_near_one"] = v.increments_near_one;
  }
  return out;
}

json comparison_json(const Distortion& d1, const Distortion& d2, const DomainComparison& c) {
  auto sandwich = [](const std::optional<Sandwich>& s) -> json {
    if (!s)
      return nullptr;
    return {{"n", s->n}, {"alpha", s->alpha}};
  };
  return {{"schema", kResultSchema},
          {"measure", "compare"},
          {"first", d1.name()},
          {"second", d2.name()},
          {"delta", c.delta},
          {"first_below_second", c.first_below_second},
          {"second_below_first", c.second_below_first},
          {"first_sandwich", sandwich(c.first_sandwich)},
          {"second_sandwich", sandwich(c.second_sandwich)},
          {"relation", to_string(c.relation)}};
}

json search_json(const Distortion& d, const SearchOptions& o, const SubadditivityReport& r) {
  json out{{"schema", kResultSchema},
           {"measure", "subadditivity_search"},
           {"distortion", d.name()},
           {"trials", r.trials},
           {"seed", o.seed},
           {"slack", o.slack},
           {"violations", r.violations},
           {"max_gap", r.trials ? json(r.max_gap) : json(nullptr)},
           {"max_abs_gap", r.max_abs_gap}};
  if (r.worst) {
    const auto& w = *r.worst;
    out["worst"] = {{"trial", w.trial},      {"extra_table", w.extra}, {"rho_x", w.rho_x}, {"rho_y", w.rho_y},
                    {"rho_sum", w.rho_sum}, {"gap", w.gap},           {"table", table_json(w.table)}};
  } else {
    out["worst"] = nullptr;
  }
  return out;
}

} // namespace detail

//------------------------------------------------------------------------------

Distribution parse_distribution_json(const std::string& text) {
  return detail::distribution_from_json(detail::parse_json_text(text));
}

Distortion parse_distortion_json(const std::string& text) {
  return detail::distortion_from_json(detail::parse_json_text(text));
}

std::string distortion_to_json(const Distortion& d) { return detail::distortion_json(d).dump(); }

namespace {

bool parse_double(const std::string& field, double& out) {
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+')
    ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ','))
    out.push_back(detail::trim(field));
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

} // namespace

Distribution parse_distribution_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool seen_data = false;
  std::vector<double> values;
  std::map<double, double> weights;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#')
      continue;
    auto fields = split_fields(line);
    if (!seen_data && (fields[0] == "value")) {
      if (fields.size() > 2 || (fields.size() == 2 && fields[1] != "weight"))
        throw ParseError("header must be 'value' or 'value,weight'", line_no);
      seen_data = true;
      columns = fields.size();
      continue;
    }
    if (fields.size() > 2)
      throw ParseError("expected 'value' or 'value,weight', got " + std::to_string(fields.size()) + " fields",
                       line_no);
    if (columns == 0)
      columns = fields.size();
    else if (fields.size() != columns)
      throw ParseError("expected " + std::to_string(columns) + " field(s) as on the first data line", line_no);
    seen_data = true;
    double v = 0.0;
    if (!parse_double(fields[0], v))
      throw ParseError("cannot parse value '" + fields[0] + "'", line_no);
    if (!std::isfinite(v))
      throw ParseError("value must be finite (NaN and Inf are rejected)", line_no);
    if (columns == 1) {
      values.push_back(v);
      continue;
    }
    double w = 0.0;
    if (!parse_double(fields[1], w))
      throw ParseError("cannot parse weight '" + fields[1] + "'", line_no);
    if (!std::isfinite(w) || !(w > 0.0))
      throw ParseError("weight must be finite and positive", line_no);
    weights[v] += w;
  }
  if (in.bad())
    throw IoError("read error");
  if (columns == 1 && !values.empty())
    return Distribution::empirical(values);
  if (weights.empty())
    throw ParseError("no data rows", line_no);
  numeric::CompensatedSum total;
  for (const auto& [v, w] : weights)
    total.add(w);
  std::vector<Atom> atoms;
  for (const auto& [v, w] : weights)
    atoms.push_back({v, w / total.value()});
  return Distribution::discrete(std::move(atoms));
}

Distribution read_distribution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  try {
    return parse_distribution_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Distribution load_distribution(const std::string& spec) {
  const auto s = detail::trim(spec);
  if (!s.empty() && s[0] == '{')
    return parse_distribution_json(s);
  if (s.size() >= 5 && s.compare(s.size() - 5, 5, ".json") == 0)
    return parse_distribution_json(detail::read_file(s));
  return read_distribution_csv(s);
}

Distortion load_distortion(const std::string& spec) {
  const auto s = detail::trim(spec);
  if (!s.empty() && s[0] == '{')
    return parse_distortion_json(s);
  return parse_distortion_json(detail::read_file(s));
}

} // namespace qrisk
