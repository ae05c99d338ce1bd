#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nbqi/harness.hpp"

namespace nbqi {

namespace {

std::string g17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

nlohmann::json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace

double ReportRow::slack() const noexcept {
  return std::isfinite(bound) ? bound - measured : std::numeric_limits<double>::quiet_NaN();
}

std::size_t ExperimentReport::pass_count() const noexcept {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.pass ? 1 : 0;
  return n;
}

std::size_t ExperimentReport::fail_count() const noexcept {
  return rows.size() - pass_count();
}

const ReportRow* ExperimentReport::worst_case() const noexcept {
  // Failing rows rank first (those without a bound before all others), then
  // smallest slack.
  const auto key = [](const ReportRow& r) {
    const double s = r.slack();
    return std::pair<int, double>(r.pass ? 1 : 0,
                                  std::isnan(s) ? -std::numeric_limits<double>::infinity() : s);
  };
  const ReportRow* worst = nullptr;
  for (const auto& r : rows) {
    if (r.pass && std::isnan(r.slack())) continue;
    if (!worst || key(r) < key(*worst)) worst = &r;
  }
  return worst;
}

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "# experiment=" << experiment << " generator=" << kRandomGenerator << '\n';
  out << "partition,operator,m,p,index,quantity,measured,bound,pass,note\n";
  for (const auto& r : rows) {
    out << csv_field(r.partition) << ',' << csv_field(r.op) << ',' << r.m << ',' << r.p << ',';
    if (r.index) out << *r.index;
    out << ',' << csv_field(r.quantity) << ',' << g17(r.measured) << ',' << g17(r.bound) << ','
        << (r.pass ? "pass" : "fail") << ',' << csv_field(r.note) << '\n';
  }
}

std::string ExperimentReport::summary_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["generator"] = kRandomGenerator;
  j["pass_count"] = pass_count();
  j["fail_count"] = fail_count();
  if (const ReportRow* w = worst_case()) {
    nlohmann::ordered_json r;
    r["partition"] = w->partition;
    r["operator"] = w->op;
    r["m"] = w->m;
    r["p"] = w->p;
    r["index"] = w->index ? nlohmann::ordered_json(*w->index) : nlohmann::ordered_json(nullptr);
    r["quantity"] = w->quantity;
    r["measured"] = number(w->measured);
    r["bound"] = number(w->bound);
    r["slack"] = number(w->slack());
    r["pass"] = w->pass;
    r["note"] = w->note;
    j["worst_case"] = r;
  } else {
    j["worst_case"] = nullptr;
  }
  nlohmann::ordered_json n = nlohmann::ordered_json::object();
  for (const auto& [k, v] : notes) n[k] = number(v);
  j["notes"] = n;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config: top level must be an object");
  static const char* const known[] = {"experiment", "operators", "degrees", "partitions",
                                      "p_values", "tolerances", "quadrature", "grid",
                                      "lebesgue", "convergence", "section11"};
  for (const auto& [key, _] : j.items())
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw DataError("config: unknown key '" + key + "'");
  ExperimentConfig c;
  try {
    c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("operators")) c.operators = j["operators"].get<std::vector<std::string>>();
    if (j.contains("degrees")) c.degrees = j["degrees"].get<std::vector<int>>();
    if (j.contains("partitions")) c.partitions = j["partitions"].get<std::vector<std::string>>();
    if (j.contains("p_values")) c.p_values = j["p_values"].get<std::vector<int>>();
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      c.tolerances.exactness = t.value("exactness", c.tolerances.exactness);
      c.tolerances.bound = t.value("bound", c.tolerances.bound);
      c.tolerances.nearbest = t.value("nearbest", c.tolerances.nearbest);
      c.tolerances.eoc = t.value("eoc", c.tolerances.eoc);
    }
    if (j.contains("quadrature")) c.quadrature_nodes = j["quadrature"].value("nodes", 0);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      c.points_per_interval = g.value("points_per_interval", c.points_per_interval);
      c.samples = g.value("samples", c.samples);
      c.integral_kernel = g.value("integral_kernel", c.integral_kernel);
    }
    if (j.contains("lebesgue")) c.lebesgue = j["lebesgue"].get<bool>();
    if (j.contains("convergence")) {
      const auto& v = j["convergence"];
      c.function = v.value("function", c.function);
      c.levels = v.value("levels", c.levels);
      c.base_partition = v.value("base", c.base_partition);
    }
    if (j.contains("section11")) c.h_values = j["section11"].at("h").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  if (c.points_per_interval < 1) throw DataError("config: grid.points_per_interval must be >= 1");
  if (c.samples < 2) throw DataError("config: grid.samples must be >= 2");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str());
}

std::vector<CoefficientRow> coefficient_table(const QuasiInterpolant& qi) {
  const KnotWindow& w = qi.window();
  std::vector<CoefficientRow> rows;
  for (const Functional& fn : qi.functionals()) {
    if (const auto* d = std::get_if<DiscreteFunctional>(&fn)) {
      for (const auto& t : d->terms)
        rows.push_back({d->center, to_string(t.kind), t.node,
                        t.kind == NodeKind::knot ? w.t(t.node) : theta(w, t.node), t.weight});
    } else {
      const auto& g = std::get<IntegralFunctional>(fn);
      for (const auto& t : g.terms)
        rows.push_back({g.center, "m_spline", t.m_spline, theta(w, t.m_spline), t.weight});
      for (const auto& t : g.endpoint_terms)
        rows.push_back({g.center, "endpoint", t.knot, w.t(t.knot), t.weight});
    }
  }
  return rows;
}

void write_coefficients_csv(std::ostream& out, const QuasiInterpolant& qi) {
  out << "index,kind,node,abscissa,weight\n";
  for (const auto& r : coefficient_table(qi))
    out << r.index << ',' << r.kind << ',' << r.node << ',' << g17(r.abscissa) << ','
        << g17(r.weight) << '\n';
}

}  // namespace nbqi
