#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nbqi/partition.hpp"
#include "nbqi/quasi_interpolant.hpp"

namespace nbqi {

/// Operator identifier: q2, q2star, qpstar, q3, g1, g2, gpstar, optionally
/// followed by ":p=P" (stride) and ":q=Q" (degree tested by the exactness
/// experiment).
struct OperatorSpec {
  std::string id;
  std::optional<int> p;
  std::optional<int> q;

  std::string text() const;
};

OperatorSpec parse_operator(const std::string& text);

/// Declared polynomial exactness of the operator family.
int declared_exactness(const OperatorSpec& op);

/// Strides swept for degree m: the explicit p, else m..m+3 for the stride
/// families and {0} for the others.
std::vector<int> operator_strides(const OperatorSpec& op, int m);

QuasiInterpolant build_operator(const OperatorSpec& op, const KnotWindow& w,
                                int p, const BuildOptions& opt = {});

/// Closed-form bound on max_i ||lambda_i||_1 for the operator on w
/// (Q3 uses the mesh-ratio bound of w). Throws ParameterError for q2.
double operator_bound(const OperatorSpec& op, const KnotWindow& w);

/// Built-in smooth functions for the convergence experiment.
struct TestFunction {
  std::string name;
  RealFunction f;
  RealFunction f2;  ///< second derivative
  double lo = 0.0;  ///< interval on which the error is measured
  double hi = 1.0;
};

/// sin on [0, 2pi]; exp, runge (1/(1+25x^2)), e2 (x^2), e3 (x^3) on [-1, 1].
TestFunction test_function(const std::string& name);

struct Tolerances {
  double exactness = 1e-9;
  double bound = 1e-9;
  double nearbest = 1e-10;
  double eoc = 0.2;
};

/// JSON document:
/// {
///   "experiment": "bounds",
///   "operators": ["q2star", "gpstar:p=4"],
///   "degrees": [2, 3],
///   "partitions": ["random:200:seed=7", "geometric:40:rho=2"],
///   "p_values": [2, 3],
///   "tolerances": {"exactness": 1e-9, "bound": 1e-9, "nearbest": 1e-10, "eoc": 0.2},
///   "quadrature": {"nodes": 0},
///   "grid": {"points_per_interval": 64, "samples": 200, "integral_kernel": false},
///   "lebesgue": true,
///   "convergence": {"function": "sin", "levels": 5, "base": "random:1:seed=1:n=24:r=1.5"},
///   "section11": {"h": [1, 10, 100, 1000, 10000]}
/// }
/// Every key except "experiment" is optional.
struct ExperimentConfig {
  std::string experiment;
  std::vector<std::string> operators;
  std::vector<int> degrees;
  std::vector<std::string> partitions;
  std::vector<int> p_values;  ///< nearbest strides; empty = m..m+2
  Tolerances tolerances;
  int quadrature_nodes = 0;
  int points_per_interval = 64;
  int samples = 200;
  bool integral_kernel = false;
  bool lebesgue = true;  ///< bounds: add the sampled Lebesgue rows
  std::string function = "sin";
  int levels = 5;
  std::string base_partition = "random:1:seed=1:n=24:r=1.5";
  std::vector<double> h_values;
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ReportRow {
  std::string partition;
  std::string op;
  int m = 0;
  int p = 0;
  std::optional<Index> index;  ///< centre, level or none
  std::string quantity;
  double measured = 0.0;
  double bound = 0.0;  ///< NaN when informational
  bool pass = true;
  std::string note;

  /// bound - measured (NaN for informational rows).
  double slack() const noexcept;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<ReportRow> rows;
  std::map<std::string, double> notes;  ///< extra summary values

  std::size_t pass_count() const noexcept;
  std::size_t fail_count() const noexcept;
  /// Failing rows first, then the smallest slack among rows with a bound.
  const ReportRow* worst_case() const noexcept;

  /// "# experiment=... generator=mt19937_64", then the fixed header
  /// partition,operator,m,p,index,quantity,measured,bound,pass,note.
  void write_csv(std::ostream& out) const;
  /// {"experiment", "generator", "pass_count", "fail_count", "worst_case",
  /// "notes"}.
  std::string summary_json() const;
};

ExperimentReport run_exactness(const ExperimentConfig& config);
ExperimentReport run_bounds(const ExperimentConfig& config);
ExperimentReport run_nearbest(const ExperimentConfig& config);
ExperimentReport run_convergence(const ExperimentConfig& config);
ExperimentReport run_stretched_interval(const ExperimentConfig& config);
/// Dispatch on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// One row per functional term.
struct CoefficientRow {
  Index index = 0;
  std::string kind;  ///< greville, knot, second_derivative, m_spline, endpoint
  Index node = 0;
  double abscissa = 0.0;
  double weight = 0.0;
};
std::vector<CoefficientRow> coefficient_table(const QuasiInterpolant& qi);
/// Header index,kind,node,abscissa,weight.
void write_coefficients_csv(std::ostream& out, const QuasiInterpolant& qi);

/// Worker threads: QI_THREADS when set to a positive integer (at most 256),
/// else the hardware concurrency.
unsigned worker_count();

/// Calls body(k) for k in [0, n) on worker_count() threads. The first
/// exception thrown by any call is rethrown after all workers finish.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t threads = std::min<std::size_t>(worker_count(), n);
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::mutex lock;
  std::size_t next = 0;
  std::exception_ptr error;
  const auto work = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> g(lock);
        if (next >= n || error) return;
        k = next++;
      }
      try {
        body(k);
      } catch (...) {
        std::lock_guard<std::mutex> g(lock);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nbqi
