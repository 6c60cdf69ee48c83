// qrisk command line front end. Talks to the library only through qrisk.h.

#include "qrisk/qrisk.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

// Thrown after a failing library call; carries the exit code.
struct Failure {
  int code;
};

int exit_code(qrisk_status s) {
  switch (s) {
  case QRISK_OK: return 0;
  case QRISK_DOMAIN:
  case QRISK_NOT_SPECTRAL:
  case QRISK_NO_COUNTEREXAMPLE:
  case QRISK_UNSUPPORTED:
  case QRISK_INCONCLUSIVE: return 2;
  default: return 1;
  }
}

void check(qrisk_status s) {
  if (s == QRISK_OK)
    return;
  std::cerr << "qrisk: " << qrisk_status_name(s) << ": " << qrisk_last_error() << "\n";
  throw Failure{exit_code(s)};
}

json take(char* s) {
  json j = json::parse(s);
  qrisk_string_free(s);
  return j;
}

struct Dist {
  qrisk_distribution* p = nullptr;
  explicit Dist(const std::string& spec) { check(qrisk_distribution_load(spec.c_str(), &p)); }
  ~Dist() { qrisk_distribution_free(p); }
  Dist(const Dist&) = delete;
  Dist& operator=(const Dist&) = delete;
};

struct Dstn {
  qrisk_distortion* p = nullptr;
  explicit Dstn(const std::string& spec) { check(qrisk_distortion_load(spec.c_str(), &p)); }
  ~Dstn() { qrisk_distortion_free(p); }
  Dstn(const Dstn&) = delete;
  Dstn& operator=(const Dstn&) = delete;
};

std::string number(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v < 0 ? "-inf" : "inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string scalar(const json& v) {
  if (v.is_number_float())
    return number(v.get<double>());
  if (v.is_number_integer() || v.is_number_unsigned())
    return v.dump();
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_null())
    return "-";
  if (v.is_boolean())
    return v.get<bool>() ? "true" : "false";
  return v.dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char c : s)
    q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void print_rows(std::ostream& os, const std::vector<std::vector<std::string>>& rows, bool csv) {
  if (rows.empty())
    return;
  if (csv) {
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i)
        os << (i ? "," : "") << csv_field(r[i]);
      os << "\n";
    }
    return;
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
      width[i] = std::max(width[i], r[i].size());
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size())
        line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ')
      line.pop_back();
    os << line << "\n";
  }
}

// Flat record: "key value" lines as a table, header + row as CSV.
void print_record(std::ostream& os, const json& j, const std::string& format) {
  if (format == "csv") {
    std::vector<std::string> keys, values;
    for (const auto& [k, v] : j.items())
      if (v.is_primitive()) {
        keys.push_back(k);
        values.push_back(scalar(v));
      }
    print_rows(os, {keys, values}, true);
    return;
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, v] : j.items())
    if (v.is_primitive())
      rows.push_back({k, scalar(v)});
  print_rows(os, rows, false);
}

void emit(const json& j, const std::string& format, void (*table)(std::ostream&, const json&, bool) = nullptr) {
  if (format == "json") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  if (table)
    table(std::cout, j, format == "csv");
  else
    print_record(std::cout, j, format);
}

void spectrum_table(std::ostream& os, const json& j, bool csv) {
  std::vector<std::vector<std::string>> rows{{"u", "D", "s", "nu_cumulative"}};
  for (const auto& g : j["grid"])
    rows.push_back({scalar(g["u"]), scalar(g["D"]), scalar(g["s"]), scalar(g["nu_cumulative"])});
  if (!csv) {
    os << "distortion  " << scalar(j["distortion"]) << "\n";
    os << "spectral density pieces:\n";
    std::vector<std::vector<std::string>> pieces{{"  lo", "hi", "coef", "origin", "scale", "exponent"}};
    for (const auto& p : j["spectral_density"]["pieces"])
      pieces.push_back({"  " + scalar(p["lo"]), scalar(p["hi"]), scalar(p["coef"]), scalar(p["origin"]),
                        scalar(p["scale"]), scalar(p["exponent"])});
    print_rows(os, pieces, false);
    os << "mixture measure atoms:";
    for (const auto& a : j["mixture_measure"]["atoms"])
      os << " (" << scalar(a["u"]) << ", " << scalar(a["mass"]) << ")";
    os << "\n\n";
  }
  print_rows(os, rows, csv);
}

void convexity_table(std::ostream& os, const json& j, bool csv) {
  json flat{{"distortion", j["distortion"]}, {"convex", j["convex"]}, {"method", j["method"]}};
  if (!j["witness"].is_null())
    for (const auto& [k, v] : j["witness"].items())
      flat[k] = v;
  if (j.contains("search"))
    for (const char* k : {"trials", "seed", "violations", "max_gap"})
      flat[std::string("search_") + k] = j["search"][k];
  print_record(os, flat, csv ? "csv" : "table");
}

// Joint law laid out as a grid of P[X = x, Y = y], followed by the law of X+Y.
void counterexample_table(std::ostream& os, const json& j, bool csv) {
  const auto& cells = j["table"]["cells"];
  if (csv) {
    std::vector<std::vector<std::string>> rows{{"x", "y", "probability"}};
    for (const auto& c : cells)
      rows.push_back({scalar(c[0]), scalar(c[1]), scalar(c[2])});
    print_rows(os, rows, true);
    return;
  }
  std::vector<double> xs, ys;
  for (const auto& a : j["table"]["x"])
    xs.push_back(a[0].get<double>());
  for (const auto& a : j["table"]["y"])
    ys.push_back(a[0].get<double>());
  std::map<std::pair<double, double>, double> p;
  for (const auto& c : cells)
    p[{c[0].get<double>(), c[1].get<double>()}] = c[2].get<double>();

  os << "distortion " << scalar(j["distortion"]) << ", witness u=" << scalar(j["witness"]["u"])
     << " eps=" << scalar(j["witness"]["eps"]) << ", a=" << scalar(j["a"]) << "\n\n";
  std::vector<std::vector<std::string>> grid{{"X \\ Y"}};
  for (double y : ys)
    grid[0].push_back(number(y));
  for (double x : xs) {
    std::vector<std::string> row{number(x)};
    for (double y : ys) {
      auto it = p.find({x, y});
      row.push_back(it == p.end() ? "0" : number(it->second));
    }
    grid.push_back(row);
  }
  print_rows(os, grid, false);
  os << "\n";
  std::vector<std::vector<std::string>> sum{{"X+Y"}, {"P"}};
  for (const auto& a : j["table"]["sum"]) {
    sum[0].push_back(scalar(a[0]));
    sum[1].push_back(scalar(a[1]));
  }
  print_rows(os, sum, false);
  os << "\n";
  print_rows(os,
             {{"rho[X]", scalar(j["rho_x"]), "identity", scalar(j["identities"]["rho_x"])},
              {"rho[Y]", scalar(j["rho_y"]), "identity", scalar(j["identities"]["rho_y"])},
              {"rho[X+Y]", scalar(j["rho_sum"]), "identity", scalar(j["identities"]["rho_sum"])},
              {"rho[X]+rho[Y]", scalar(j["rho_x_plus_rho_y"])},
              {"gap", scalar(j["gap"]), "identity", scalar(j["gap_identity"])},
              {"sum matches table", scalar(j["sum_matches_table"])}},
             false);
}

void classify_table(std::ostream& os, const json& j, bool csv) {
  std::vector<std::vector<std::string>> rows{{"class", "verdict", "method", "reason"}};
  for (const auto& v : j["verdicts"])
    rows.push_back({scalar(v["class"]), scalar(v["verdict"]), scalar(v["method"]), scalar(v["reason"])});
  if (!csv)
    os << "distribution  " << scalar(j["distribution"]) << "\ndistortion    " << scalar(j["distortion"]) << "\n\n";
  print_rows(os, rows, csv);
}

void compare_table(std::ostream& os, const json& j, bool csv) {
  json flat = j;
  for (const char* k : {"first_sandwich", "second_sandwich"})
    flat[k] = j[k].is_null() ? json(nullptr) : json("es_n(" + scalar(j[k]["n"]) + ", " + scalar(j[k]["alpha"]) + ")");
  print_record(os, flat, csv ? "csv" : "table");
}

void suite_table(std::ostream& os, const json& j, bool csv) {
  std::vector<std::vector<std::string>> rows{{"check", "distribution", "distortion", "status", "max_error", "detail"}};
  for (const auto& r : j["results"])
    rows.push_back({scalar(r["check"]), r["distribution"].get<std::string>().empty() ? "-" : scalar(r["distribution"]),
                    r["distortion"].get<std::string>().empty() ? "-" : scalar(r["distortion"]), scalar(r["status"]),
                    scalar(r["max_error"]), scalar(r["detail"])});
  print_rows(os, rows, csv);
  if (!csv) {
    const auto& s = j["summary"];
    os << "\n" << scalar(s["pass"]) << " pass, " << scalar(s["fail"]) << " fail, " << scalar(s["expected_failure"])
       << " expected-failure, " << scalar(s["skipped"]) << " skipped\n";
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "qrisk: io-error: cannot open '" << path << "'\n";
    throw Failure{1};
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const std::map<std::string, qrisk_representation> kRepresentations{{"quantile", QRISK_REP_QUANTILE},
                                                                    {"choquet", QRISK_REP_CHOQUET},
                                                                    {"mixture", QRISK_REP_MIXTURE},
                                                                    {"closed-form", QRISK_REP_CLOSED_FORM},
                                                                    {"infimum", QRISK_REP_INFIMUM}};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"qrisk: quantile risk measures, spectral representations and domain classes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qrisk_version()));

  std::string dist, distortion, other, format = "table", representation = "quantile", method, klass = "all",
                                       config;
  double tolerance = 1e-9, alpha = 0.0, a = 1.0, delta = 0.0, slack = 1e-9;
  std::uint64_t seed = 1, trials = 1000;
  bool search = false;

  auto positive = CLI::PositiveNumber;
  auto common = [&](CLI::App* s) {
    s->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "json", "csv"}));
  };
  auto with_tolerance = [&](CLI::App* s) {
    s->add_option("--tolerance", tolerance, "Absolute quadrature tolerance (default 1e-9)")->check(positive);
  };

  auto* eval = app.add_subcommand("eval", "Evaluate rho_Q[X] for a distortion D");
  eval->add_option("--dist", dist, "Distribution: CSV file, .json file or inline JSON")->required();
  eval->add_option("--distortion", distortion, "Distortion: inline JSON or .json file")->required();
  eval->add_option("--representation", representation, "quantile, choquet, mixture, closed-form or infimum")
      ->check(CLI::IsMember({"quantile", "choquet", "mixture", "closed-form", "infimum"}));
  common(eval);
  with_tolerance(eval);

  auto* es = app.add_subcommand("es", "Expected shortfall ES_alpha[X]");
  es->add_option("--dist", dist, "Distribution")->required();
  es->add_option("--alpha", alpha, "Level in [0,1)")->required();
  es->add_option("--method", method, "closed-form (default), infimum or quantile")
      ->check(CLI::IsMember({"closed-form", "infimum", "quantile"}));
  common(es);
  with_tolerance(es);

  auto* var = app.add_subcommand("var", "Value at risk (lower quantile) at level alpha");
  var->add_option("--dist", dist, "Distribution")->required();
  var->add_option("--alpha", alpha, "Level in (0,1)")->required();
  common(var);

  auto* spectrum = app.add_subcommand("spectrum", "Spectral density s = D' and mixture measure of a convex D");
  spectrum->add_option("--distortion", distortion, "Distortion")->required();
  common(spectrum);

  auto* convexity = app.add_subcommand("check-convexity", "Midpoint convexity test of D");
  convexity->add_option("--distortion", distortion, "Distortion")->required();
  convexity->add_flag("--search", search, "Also run the seeded subadditivity search");
  convexity->add_option("--trials", trials, "Random joint tables for --search");
  convexity->add_option("--seed", seed, "Seed for --search");
  convexity->add_option("--slack", slack, "Violation slack for --search")->check(CLI::NonNegativeNumber);
  common(convexity);

  auto* counter = app.add_subcommand("counterexample", "Joint law with rho[X+Y] > rho[X] + rho[Y] for non-convex D");
  counter->add_option("--distortion", distortion, "Distortion")->required();
  counter->add_option("--a", a, "Offset a > 0 (default 1)")->check(positive);
  common(counter);

  auto* classify = app.add_subcommand("classify", "Membership of X in the LQ, Acerbi and Pichler domains");
  classify->add_option("--dist", dist, "Distribution")->required();
  classify->add_option("--distortion", distortion, "Distortion")->required();
  classify->add_option("--class", klass, "lq, acerbi, pichler or all")
      ->check(CLI::IsMember({"lq", "acerbi", "pichler", "all"}));
  classify->add_option("--method", method, "auto (default), analytic or probe")
      ->check(CLI::IsMember({"auto", "analytic", "probe"}));
  common(classify);

  auto* compare = app.add_subcommand("compare", "Compare the domains of two distortions on [delta, 1)");
  compare->add_option("--distortion", distortion, "First distortion")->required();
  compare->add_option("--other", other, "Second distortion")->required();
  compare->add_option("--delta", delta, "Lower end of the comparison range, in [0,1)");
  common(compare);

  auto* suite = app.add_subcommand("suite", "Run the property suite over a matrix of distributions and distortions");
  suite->add_option("--config", config, "JSON matrix (default: built-in acceptance matrix)");
  auto* suite_seed = suite->add_option("--seed", seed, "Seed of the subadditivity search");
  auto* suite_trials = suite->add_option("--trials", trials, "Random joint tables per convex distortion");
  common(suite);
  auto* suite_tol = suite->add_option("--tolerance", tolerance, "Quadrature tolerance")->check(positive);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (eval->parsed()) {
      Dist x(dist);
      Dstn d(distortion);
      char* out = nullptr;
      check(qrisk_rho_json(x.p, d.p, kRepresentations.at(representation), tolerance, &out));
      emit(take(out), format);
    } else if (es->parsed()) {
      Dist x(dist);
      char* out = nullptr;
      check(qrisk_es_json(x.p, alpha, kRepresentations.at(method.empty() ? "closed-form" : method), tolerance, &out));
      emit(take(out), format);
    } else if (var->parsed()) {
      Dist x(dist);
      char* out = nullptr;
      check(qrisk_var_json(x.p, alpha, &out));
      emit(take(out), format);
    } else if (spectrum->parsed()) {
      Dstn d(distortion);
      char* out = nullptr;
      check(qrisk_spectrum_json(d.p, &out));
      emit(take(out), format, spectrum_table);
    } else if (convexity->parsed()) {
      Dstn d(distortion);
      char* out = nullptr;
      check(qrisk_convexity_json(d.p, &out));
      auto j = take(out);
      if (search) {
        check(qrisk_subadditivity_json(d.p, trials, seed, slack, &out));
        j["search"] = take(out);
      }
      emit(j, format, convexity_table);
    } else if (counter->parsed()) {
      Dstn d(distortion);
      char* out = nullptr;
      check(qrisk_counterexample_json(d.p, a, &out));
      emit(take(out), format, counterexample_table);
    } else if (classify->parsed()) {
      Dist x(dist);
      Dstn d(distortion);
      const std::map<std::string, qrisk_classify_method> methods{
          {"auto", QRISK_METHOD_AUTO}, {"analytic", QRISK_METHOD_ANALYTIC}, {"probe", QRISK_METHOD_PROBE}};
      const std::vector<std::pair<std::string, qrisk_domain_class>> classes{
          {"lq", QRISK_CLASS_LQ}, {"acerbi", QRISK_CLASS_ACERBI}, {"pichler", QRISK_CLASS_PICHLER}};
      json j;
      json verdicts = json::array();
      for (const auto& [name, c] : classes) {
        if (klass != "all" && klass != name)
          continue;
        char* out = nullptr;
        check(qrisk_classify_json(x.p, d.p, c, methods.at(method.empty() ? "auto" : method), &out));
        auto v = take(out);
        if (j.is_null())
          j = {{"schema", v["schema"]},
               {"measure", "classify"},
               {"distribution", v["distribution"]},
               {"distortion", v["distortion"]}};
        for (const char* k : {"schema", "measure", "distribution", "distortion"})
          v.erase(k);
        verdicts.push_back(v);
      }
      j["verdicts"] = verdicts;
      emit(j, format, classify_table);
    } else if (compare->parsed()) {
      Dstn d1(distortion), d2(other);
      char* out = nullptr;
      check(qrisk_compare_json(d1.p, d2.p, delta, &out));
      emit(take(out), format, compare_table);
    } else if (suite->parsed()) {
      std::string text;
      if (!config.empty())
        text = read_text(config);
      int ok = 0;
      char* out = nullptr;
      check(qrisk_suite_json(config.empty() ? nullptr : text.c_str(), suite_tol->count() ? tolerance : 0.0,
                             suite_trials->count() ? static_cast<std::int64_t>(trials) : -1,
                             suite_seed->count() ? static_cast<std::int64_t>(seed) : -1, &ok, &out));
      emit(take(out), format, suite_table);
      if (!ok) {
        std::cerr << "qrisk: suite: at least one check failed\n";
        return 2;
      }
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
