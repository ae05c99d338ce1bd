#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nbqi/dqi.hpp"
#include "nbqi/harness.hpp"
#include "nbqi/norms.hpp"

using namespace nbqi;
using doctest::Approx;

namespace {

std::string csv(const ExperimentReport& r) {
  std::ostringstream os;
  r.write_csv(os);
  return os.str();
}

ExperimentConfig config(const std::string& experiment, std::vector<std::string> ops,
                        std::vector<int> degrees, std::vector<std::string> partitions) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.operators = std::move(ops);
  c.degrees = std::move(degrees);
  c.partitions = std::move(partitions);
  return c;
}

class ScopedThreads {
 public:
  explicit ScopedThreads(const char* value) {
    if (const char* old = std::getenv("QI_THREADS")) saved_ = old;
    ::setenv("QI_THREADS", value, 1);
  }
  ~ScopedThreads() {
    if (saved_.empty()) ::unsetenv("QI_THREADS");
    else ::setenv("QI_THREADS", saved_.c_str(), 1);
  }

 private:
  std::string saved_;
};

}  // namespace

TEST_CASE("operator identifiers") {
  const OperatorSpec a = parse_operator("gpstar:p=4");
  CHECK(a.id == "gpstar");
  CHECK(a.p == 4);
  CHECK(a.text() == "gpstar:p=4");
  CHECK(parse_operator("qpstar:q=3").q == 3);
  CHECK(operator_strides(parse_operator("qpstar"), 3) == std::vector<int>{3, 4, 5, 6});
  CHECK(operator_strides(a, 2) == std::vector<int>{4});
  CHECK(operator_strides(parse_operator("g2"), 5) == std::vector<int>{0});
  CHECK(declared_exactness(parse_operator("q3")) == 3);
  CHECK(declared_exactness(parse_operator("g1")) == 1);
  CHECK(declared_exactness(parse_operator("q2")) == 2);
  for (const char* bad : {"q4", "q2star:p=3", "gpstar:p", "gpstar:p=x", "g2:r=1", "q3:q=-1"})
    CHECK_THROWS_AS(parse_operator(bad), ParameterError);

  const KnotWindow w = generate(parse_partition("uniform:20"), 3)[0].window;
  CHECK(build_operator(parse_operator("qpstar"), w, 4).name() == "Q4*");
  CHECK(build_operator(parse_operator("g1"), w, 0).name() == "G1");
  CHECK(operator_bound(parse_operator("gpstar"), w) == 3.0);
  CHECK(operator_bound(parse_operator("q2star"), w) == 3.0);
  CHECK(operator_bound(parse_operator("q3"), w) == Approx(mesh_ratio_bound(1.0)));
  CHECK_THROWS_AS(operator_bound(parse_operator("q2"), w), ParameterError);
}

TEST_CASE("test function catalog") {
  for (const char* name : {"sin", "exp", "runge", "e2", "e3"}) {
    const TestFunction f = test_function(name);
    CHECK(f.lo < f.hi);
    for (double x : {f.lo, 0.3 * f.lo + 0.7 * f.hi, f.hi}) {
      const double h = 1e-3;
      const double fd = (f.f(x + h) - 2 * f.f(x) + f.f(x - h)) / (h * h);
      CHECK(f.f2(x) == Approx(fd).epsilon(1e-4).scale(1.0));
    }
  }
  CHECK_THROWS_AS(test_function("cos"), ParameterError);
}

TEST_CASE("config documents") {
  const ExperimentConfig c = config_from_json(R"({
    "experiment": "bounds", "operators": ["q2star", "g2"], "degrees": [2, 4],
    "partitions": ["uniform:20"], "p_values": [3],
    "tolerances": {"bound": 1e-8, "eoc": 0.1},
    "quadrature": {"nodes": 7}, "grid": {"points_per_interval": 16, "samples": 50},
    "lebesgue": false, "convergence": {"function": "exp", "levels": 4},
    "section11": {"h": [1, 100]}})");
  CHECK(c.experiment == "bounds");
  CHECK(c.operators.size() == 2);
  CHECK(c.degrees == std::vector<int>{2, 4});
  CHECK(c.p_values == std::vector<int>{3});
  CHECK(c.tolerances.bound == 1e-8);
  CHECK(c.tolerances.exactness == 1e-9);
  CHECK(c.tolerances.eoc == 0.1);
  CHECK(c.quadrature_nodes == 7);
  CHECK(c.points_per_interval == 16);
  CHECK(c.samples == 50);
  CHECK_FALSE(c.lebesgue);
  CHECK(c.function == "exp");
  CHECK(c.levels == 4);
  CHECK(c.h_values == std::vector<double>{1, 100});

  CHECK_THROWS_AS(config_from_json("{"), DataError);
  CHECK_THROWS_AS(config_from_json("[]"), DataError);
  CHECK_THROWS_AS(config_from_json(R"({"operators": []})"), DataError);
  CHECK_THROWS_AS(config_from_json(R"({"experiment": "bounds", "colour": 1})"), DataError);
  CHECK_THROWS_AS(config_from_json(R"({"experiment": "bounds", "degrees": "two"})"), DataError);
  CHECK_THROWS_AS(config_from_json(R"({"experiment": "x", "grid": {"samples": 1}})"), DataError);
  CHECK_THROWS_AS(load_config("/nonexistent/nbqi.json"), DataError);
  CHECK_THROWS_AS(run_experiment(config("plot", {"q2star"}, {2}, {"uniform:10"})), ParameterError);
}

TEST_CASE("report serialization") {
  ExperimentReport r;
  r.experiment = "demo";
  r.rows.push_back({"uniform:10", "q2star", 2, 0, 5, "nu1", 1.0 / 3.0, 3.0, true, ""});
  r.rows.push_back({"uniform:10", "g2", 2, 0, std::nullopt, "nu1", 2.5, 2.0, false, "a, \"b\""});
  r.rows.push_back({"uniform:10", "q3", 3, 0, std::nullopt, "lambda_s", 7.0,
                    std::numeric_limits<double>::quiet_NaN(), true, ""});
  CHECK(r.pass_count() == 2);
  CHECK(r.fail_count() == 1);
  REQUIRE(r.worst_case() != nullptr);
  CHECK(r.worst_case()->op == "g2");

  const std::string text = csv(r);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# experiment=demo generator=mt19937_64");
  std::getline(in, line);
  CHECK(line == "partition,operator,m,p,index,quantity,measured,bound,pass,note");
  std::getline(in, line);
  CHECK(line == "uniform:10,q2star,2,0,5,nu1,0.33333333333333331,3,pass,");
  std::getline(in, line);
  CHECK(line == "uniform:10,g2,2,0,,nu1,2.5,2,fail,\"a, \"\"b\"\"\"");
  std::getline(in, line);
  CHECK(line == "uniform:10,q3,3,0,,lambda_s,7,nan,pass,");

  const auto j = nlohmann::json::parse(r.summary_json());
  CHECK(j["pass_count"] == 2);
  CHECK(j["fail_count"] == 1);
  CHECK(j["generator"] == "mt19937_64");
  CHECK(j["worst_case"]["operator"] == "g2");
  CHECK(j["worst_case"]["slack"].get<double>() == -0.5);

  ExperimentReport empty;
  CHECK(empty.worst_case() == nullptr);
  CHECK(nlohmann::json::parse(empty.summary_json())["worst_case"].is_null());
}

TEST_CASE("parallel_for") {
  ScopedThreads threads("4");
  CHECK(worker_count() == 4);
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t k) { hit[k] += 1; });
  for (int h : hit) CHECK(h == 1);
  std::atomic<int> calls{0};
  CHECK_THROWS_AS(parallel_for(50,
                               [&](std::size_t k) {
                                 ++calls;
                                 if (k == 7) throw DataError("boom");
                               }),
                  DataError);
  parallel_for(0, [](std::size_t) { FAIL("no calls expected"); });
  {
    ScopedThreads one("1");
    CHECK(worker_count() == 1);
  }
  ScopedThreads junk("zero");
  CHECK(worker_count() >= 1);
}

TEST_CASE("exactness experiment") {
  const auto rep = run_exactness(
      config("exactness", {"q2star", "qpstar:q=3", "q3", "g1", "gpstar:p=3"}, {3}, {"random:3:seed=2:n=30"}));
  CHECK(rep.experiment == "exactness");
  int e3_fail = 0, other_fail = 0;
  for (const auto& row : rep.rows) {
    CHECK(row.pass == (row.measured <= row.bound));
    if (!row.pass) (row.op == "qpstar:q=3" && row.quantity == "e3" ? e3_fail : other_fail)++;
  }
  CHECK(e3_fail == 4 * 3);
  CHECK(other_fail == 0);
  // q3 is checked through e3; g1 only through e1.
  CHECK(std::count_if(rep.rows.begin(), rep.rows.end(),
                      [](const ReportRow& r) { return r.op == "q3" && r.quantity == "e3"; }) == 3);
  CHECK(std::count_if(rep.rows.begin(), rep.rows.end(),
                      [](const ReportRow& r) { return r.op == "g1" && r.quantity == "e2"; }) == 0);
}

TEST_CASE("bounds experiment") {
  auto c = config("bounds", {"q2star", "qpstar", "g1", "g2", "gpstar"}, {2, 3},
                  {"random:10:seed=3", "geometric:30:rho=2", "uniform:25"});
  c.points_per_interval = 16;
  const auto rep = run_bounds(c);
  CHECK(rep.fail_count() == 0);
  for (const auto& row : rep.rows) {
    CHECK(row.pass == (row.measured <= row.bound + c.tolerances.bound));
    CHECK(std::isfinite(row.bound));
  }
  // Each nu1 row is followed by its Lebesgue row bounded by that nu1.
  for (std::size_t k = 0; k + 1 < rep.rows.size(); k += 2) {
    CHECK(rep.rows[k].quantity == "nu1");
    CHECK(rep.rows[k + 1].bound == rep.rows[k].measured);
  }

  // q2 has no point-value bound; a window too short for the stride fails its case.
  CHECK_THROWS_AS(run_bounds(config("bounds", {"q2"}, {2}, {"uniform:20"})), ParameterError);
  const auto short_rep = run_bounds(config("bounds", {"qpstar:p=9"}, {2}, {"uniform:8"}));
  REQUIRE(short_rep.rows.size() == 1);
  CHECK(short_rep.rows[0].quantity == "build");
  CHECK_FALSE(short_rep.rows[0].pass);

  // The stretched family stays under its (growing) mesh-ratio bound.
  const auto s11 = run_bounds(config("bounds", {"q3"}, {3}, {"section11:h=10", "section11:h=1000"}));
  CHECK(s11.fail_count() == 0);
  CHECK(s11.rows[2].measured > 10 * s11.rows[0].measured);
}

TEST_CASE("nearbest experiment") {
  auto c = config("nearbest", {}, {2}, {"uniform:20"});
  c.p_values = {2, 3, 4};
  const auto rep = run_nearbest(c);
  CHECK(rep.fail_count() == 0);
  CHECK(rep.rows.size() > 30);
  for (const auto& row : rep.rows) {
    CHECK(row.note.starts_with("condition=true;certificate=accepted"));
    CHECK(row.measured <= 1e-10);
  }

  // One long interval breaks the discrete condition near the jump.
  const auto path = std::filesystem::temp_directory_path() / "nbqi_jump_knots.txt";
  {
    std::ofstream out(path);
    for (double t : {0, 1, 2, 3, 4, 5, 6, 16, 26, 36, 46, 56}) out << t << '\n';
  }
  auto j = config("nearbest", {}, {2}, {"file:" + path.string()});
  j.p_values = {2};
  const auto jump = run_nearbest(j);
  std::filesystem::remove(path);
  int failing = 0;
  for (const auto& row : jump.rows)
    if (row.quantity == "dqi_optimum_gap" && row.note.starts_with("condition=false")) {
      ++failing;
      CHECK(row.pass);
      CHECK(row.measured > 1e-3);
    }
  CHECK(failing > 0);
  CHECK_THROWS_AS(run_nearbest(config("nearbest", {}, {2}, {})), ParameterError);
}

TEST_CASE("convergence experiment") {
  auto c = config("convergence", {"q2star", "q3"}, {3}, {});
  const auto rep = run_convergence(c);
  CHECK(rep.fail_count() == 0);
  std::map<std::string, double> finest;
  for (const auto& row : rep.rows)
    if (row.note == "finest pair") finest[row.op] = row.measured;
  CHECK(finest["q2star"] == Approx(3.0).epsilon(0.2 / 3));
  CHECK(finest["q3"] == Approx(4.0).epsilon(0.2 / 4));
  CHECK(rep.notes.count("guarded_lo:q3:m=3") == 1);

  c.operators = {"q2star"};
  c.function = "e2";
  const auto exact = run_convergence(c);
  CHECK(exact.fail_count() == 0);
  for (const auto& row : exact.rows)
    if (row.quantity == "eoc:e2") {
      CHECK(std::isnan(row.measured));
      CHECK(row.note.starts_with("undefined"));
    }

  c.levels = 1;
  CHECK_THROWS_AS(run_convergence(c), ParameterError);
}

TEST_CASE("section11 experiment") {
  ExperimentConfig c;
  c.experiment = "section11";
  c.h_values = {1, 10, 100, 1000};
  const auto rep = run_stretched_interval(c);
  CHECK(rep.fail_count() == 0);
  CHECK(rep.notes.at("lambda_ratio") == Approx(10.0).epsilon(0.1));
  int ratios = 0, h1_checks = 0;
  for (const auto& row : rep.rows) {
    ratios += row.quantity == "lambda_ratio";
    h1_checks += row.quantity == "alpha1_defect" || row.quantity == "gamma2_defect";
  }
  CHECK(ratios == 3);
  CHECK(h1_checks == 2);
  c.h_values = {-1};
  CHECK_THROWS_AS(run_stretched_interval(c), ParameterError);
}

TEST_CASE("reports are deterministic across thread counts") {
  auto c = config("bounds", {"q2star", "gpstar"}, {2, 3}, {"random:12:seed=99"});
  c.points_per_interval = 8;
  std::string one, many;
  {
    ScopedThreads t("1");
    one = csv(run_bounds(c));
  }
  {
    ScopedThreads t("8");
    many = csv(run_bounds(c));
  }
  CHECK(one == many);
  CHECK(csv(run_bounds(c)) == one);
}

TEST_CASE("coefficient dump") {
  const QuasiInterpolant q3 = build_Q3_cubic(generate(parse_partition("uniform:10"), 3)[0].window);
  const auto rows = coefficient_table(q3);
  REQUIRE(rows.size() == 3 * q3.indices().size());
  for (std::size_t k = 0; k < rows.size(); k += 3) {
    CHECK(rows[k].weight == Approx(-1.0 / 6.0).epsilon(1e-14));
    CHECK(rows[k + 1].weight == Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(rows[k + 2].weight == Approx(-1.0 / 6.0).epsilon(1e-14));
    CHECK(rows[k].kind == "knot");
  }
  std::ostringstream os;
  write_coefficients_csv(os, q3);
  CHECK(os.str().starts_with("index,kind,node,abscissa,weight\n"));
  CHECK(os.str().find("-0.16666666666666666") != std::string::npos);

  const auto g2 = coefficient_table(
      build_operator(parse_operator("g2"), generate(parse_partition("uniform:12"), 2)[0].window, 0));
  CHECK(g2.front().kind == "m_spline");
}
