#include "nbqi/nearbest.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nbqi {

namespace {

struct LocalFrame {
  double origin;
  double scale;
};

LocalFrame frame(const KnotWindow& w, Index i, int p) {
  const double o = theta(w, i);
  const double L = p > 0 ? theta(w, i + p) - theta(w, i - p)
                         : w.t(i + 1) - w.t(i - w.degree());
  return {o, L};
}

void check_orders(const KnotWindow& w, int p, int q) {
  if (p < 0) throw ParameterError("stencil half-width p must be >= 0");
  if (q < 0 || q > w.degree())
    throw ParameterError("exactness order q must be in 0..m");
  if (2 * p + 1 < q + 1)
    throw DegenerateProblemError("fewer stencil columns than constraints");
}

L1Problem base_problem(const KnotWindow& w, Index i, int p, int q,
                       const LocalFrame& f, const char* family) {
  L1Problem pr;
  pr.p = p;
  pr.q = q;
  pr.V.resize(q + 1, 2 * p + 1);
  pr.b.resize(q + 1);
  for (int r = 0; r <= q; ++r) pr.b(r) = greville_power(w, i, r, f.origin, f.scale);
  std::ostringstream o, s;
  o.precision(17);
  s.precision(17);
  o << f.origin;
  s << f.scale;
  pr.meta = {{"family", family}, {"index", std::to_string(i)},
             {"degree", std::to_string(w.degree())}, {"origin", o.str()},
             {"scale", s.str()}};
  return pr;
}

std::vector<Index> support_of(const Eigen::VectorXd& a) {
  const double cut = 1e-12 * a.lpNorm<1>();
  std::vector<Index> s;
  for (Index k = 0; k < a.size(); ++k)
    if (std::abs(a(k)) > cut) s.push_back(k);
  return s;
}

// Advances a sorted k-subset of {0..n-1} in lexicographic order.
bool next_combination(std::vector<Index>& c, Index n) {
  const Index k = static_cast<Index>(c.size());
  for (Index pos = k - 1; pos >= 0; --pos) {
    if (c[pos] < n - k + pos) {
      ++c[pos];
      for (Index j = pos + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<Index> first_combination(Index k) {
  std::vector<Index> c(k);
  for (Index j = 0; j < k; ++j) c[j] = j;
  return c;
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& V, const std::vector<Index>& S) {
  Eigen::MatrixXd M(V.rows(), static_cast<Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j) M.col(j) = V.col(S[j]);
  return M;
}

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

L1Problem make_discrete_problem(const KnotWindow& w, Index i, int p, int q) {
  check_orders(w, p, q);
  const LocalFrame f = frame(w, i, p);
  L1Problem pr = base_problem(w, i, p, q, f, "discrete");
  for (int s = -p; s <= p; ++s) {
    const double u = (theta(w, i + s) - f.origin) / f.scale;
    double x = 1.0;
    for (int r = 0; r <= q; ++r, x *= u) pr.V(r, s + p) = x;
  }
  return pr;
}

L1Problem make_integral_problem(const KnotWindow& w, Index i, int p, int q) {
  if (w.degree() < 2) throw UnsupportedDegreeError("moment problems need m >= 2");
  check_orders(w, p, q);
  const LocalFrame f = frame(w, i, p);
  L1Problem pr = base_problem(w, i, p, q, f, "integral");
  for (int s = -p; s <= p; ++s)
    for (int r = 0; r <= q; ++r) pr.V(r, s + p) = moment(w, i + s, r, f.origin, f.scale);
  return pr;
}

Index numerical_rank(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double cut = 1e-10 * sv(0);
  return (sv.array() > cut).count();
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& V) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullV);
  const Index r = numerical_rank(V);
  return svd.matrixV().rightCols(V.cols() - r);
}

L1Solution solve_l1(const L1Problem& pr) {
  const Index k = pr.V.rows();
  const Index n = pr.V.cols();
  if (pr.b.size() != k) throw ParameterError("solve_l1: b does not match V");
  if (k == 0 || n < k || numerical_rank(pr.V) < k)
    throw DegenerateProblemError("solve_l1: constraint matrix has rank < q+1");

  const double bnorm = pr.b.lpNorm<Eigen::Infinity>();
  std::optional<L1Solution> best;
  std::vector<Index> S = first_combination(k);
  do {
    const Eigen::MatrixXd M = columns(pr.V, S);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd x = lu.solve(pr.b);
    if ((M * x - pr.b).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + bnorm)) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (Index j = 0; j < k; ++j) a(S[j]) = x(j);
    const double obj = a.lpNorm<1>();
    std::vector<Index> supp = support_of(a);
    bool better = !best;
    if (best) {
      const double tie = 1e-12 * (1.0 + best->objective);
      better = obj < best->objective - tie ||
               (obj <= best->objective + tie && supp < best->support);
    }
    if (better) best = L1Solution{a, obj, std::move(supp), S};
  } while (next_combination(S, n));

  if (!best) throw DegenerateProblemError("solve_l1: no nonsingular subsystem");
  return *best;
}

Verdict watson_verify(const L1Problem& pr, const Eigen::VectorXd& a,
                      const Certificate& cert, const Eigen::MatrixXd& A) {
  const Index n = pr.V.cols();
  const Eigen::VectorXd& v = cert.v;
  if (a.size() != n || v.size() != n || A.rows() != n || pr.b.size() != pr.V.rows())
    throw ParameterError("watson_verify: dimension mismatch");

  const double mag = 1.0 + (pr.V.cwiseAbs() * a.cwiseAbs()).maxCoeff();
  const double infeas = (pr.V * a - pr.b).lpNorm<Eigen::Infinity>();
  if (infeas > 1e-9 * mag) return {false, "candidate infeasible: |Va - b| = " + fmt(infeas), infeas};

  const double vmax = v.lpNorm<Eigen::Infinity>();
  if (vmax > 1.0 + 1e-10) return {false, "‖v‖∞ > 1 (" + fmt(vmax) + ")", vmax};

  for (Index c = 0; c < A.cols(); ++c) {
    const double dot = std::abs(A.col(c).dot(v));
    if (dot > 1e-9 * (1.0 + A.col(c).lpNorm<1>()))
      return {false, "Aᵀv ≠ 0 (column " + std::to_string(c) + ": " + fmt(dot) + ")", dot};
  }

  for (Index k : support_of(a)) {
    const double miss = std::abs(v(k) - sign(a(k)));
    if (miss > 1e-9)
      return {false,
              "sign mismatch at offset " + std::to_string(pr.offset_of(k)) +
                  " (a = " + fmt(a(k)) + ", v = " + fmt(v(k)) + ")",
              miss};
  }
  return {true, "", 0.0};
}

Verdict watson_verify(const L1Problem& pr, const Eigen::VectorXd& a,
                      const Certificate& cert) {
  return watson_verify(pr, a, cert, null_space(pr.V));
}

std::optional<Certificate> recover_certificate(const L1Problem& pr,
                                               const L1Solution& sol) {
  const Index k = pr.V.rows();
  const Index n = pr.V.cols();
  const std::vector<Index> supp = support_of(sol.a);

  const auto attempt = [&](const std::vector<Index>& S) -> std::optional<Certificate> {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(columns(pr.V, S).transpose());
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) return std::nullopt;
    // Fixed signs on the support, free signs elsewhere in S.
    std::vector<Index> free;
    Eigen::VectorXd sigma(k);
    for (Index j = 0; j < k; ++j) {
      const bool in_supp = std::binary_search(supp.begin(), supp.end(), S[j]);
      sigma(j) = in_supp ? sign(sol.a(S[j])) : 1.0;
      if (!in_supp) free.push_back(j);
    }
    for (unsigned long pattern = 0; pattern < (1ul << free.size()); ++pattern) {
      for (std::size_t f = 0; f < free.size(); ++f)
        sigma(free[f]) = (pattern >> f & 1ul) ? -1.0 : 1.0;
      const Eigen::VectorXd y = lu.solve(sigma);
      Certificate c{pr.V.transpose() * y};
      if (watson_verify(pr, sol.a, c)) return c;
    }
    return std::nullopt;
  };

  if (static_cast<Index>(sol.basis.size()) == k)
    if (auto c = attempt(sol.basis)) return c;
  std::vector<Index> S = first_combination(k);
  do {
    if (auto c = attempt(S)) return c;
  } while (next_combination(S, n));
  return std::nullopt;
}

ThreeColumnCoords three_column_coords(const L1Problem& pr, int k) {
  if (pr.V.rows() != 3) throw ParameterError("three-column coordinates need q = 2");
  const int p = pr.p;
  if (k == 0 || k <= -p || k >= p)
    throw ParameterError("offset must lie strictly between -p and p, excluding 0");
  const auto c = [&](int off) -> Eigen::Vector3d { return pr.V.col(off + p); };
  const auto det = [&](int x, int y, int z) {
    Eigen::Matrix3d M;
    M << c(x), c(y), c(z);
    return M.determinant();
  };
  const double W = det(-p, 0, p);
  if (!(std::abs(W) > 0.0))
    throw DegenerateProblemError("columns at -p, 0, p are linearly dependent");
  if (k < 0) return {det(k, 0, p) / W, det(-p, k, p) / W, det(-p, k, 0) / W};
  return {det(0, k, p) / W, det(-p, k, p) / W, det(-p, 0, k) / W};
}

Certificate explicit_certificate(const L1Problem& pr) {
  const int p = pr.p;
  Eigen::VectorXd v(2 * p + 1);
  v(0) = -1.0;
  v(p) = 1.0;
  v(2 * p) = -1.0;
  for (int k = -p + 1; k < p; ++k) {
    if (k == 0) continue;
    const ThreeColumnCoords t = three_column_coords(pr, k);
    v(k + p) = k < 0 ? -t.alpha + t.beta + t.gamma : t.alpha + t.beta - t.gamma;
  }
  return {v};
}

Eigen::MatrixXd explicit_null_matrix(const L1Problem& pr) {
  const int p = pr.p;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * p + 1, std::max(2 * p - 2, 0));
  Index col = 0;
  for (int k = -p + 1; k < p; ++k) {
    if (k == 0) continue;
    const ThreeColumnCoords t = three_column_coords(pr, k);
    const double sgn = k < 0 ? 1.0 : -1.0;
    A(0, col) = sgn * t.alpha;
    A(k + p, col) = -1.0;
    A(p, col) = t.beta;
    A(2 * p, col) = -sgn * t.gamma;
    ++col;
  }
  return A;
}

Certificate discrete_certificate(const KnotWindow& w, Index i, int p) {
  return explicit_certificate(make_discrete_problem(w, i, p, 2));
}

Eigen::MatrixXd discrete_null_matrix(const KnotWindow& w, Index i, int p) {
  return explicit_null_matrix(make_discrete_problem(w, i, p, 2));
}

bool knot_condition(const KnotWindow& w, Index i, int p) {
  if (p < w.degree())
    throw ParameterError("knot_condition: p must be >= m");
  const double lo = theta(w, i - 1) + theta(w, i);
  const double mid = theta(w, i - p) + theta(w, i + p);
  const double hi = theta(w, i) + theta(w, i + 1);
  const double tol = 1e-12 * (theta(w, i + p) - theta(w, i - p) + std::abs(mid));
  return lo <= mid + tol && mid <= hi + tol;
}

Certificate integral_certificate(const KnotWindow& w, Index i, int p) {
  return explicit_certificate(make_integral_problem(w, i, p, 2));
}

double chord_barycenter(const KnotWindow& w, Index a, Index b) {
  if (!(a < b)) throw ParameterError("chord_barycenter: need a < b");
  const int m = w.degree();
  double sw = 0.0, swt = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double wk = w.t(b - m + k) - w.t(a - m + k);
    double s = 0.0;
    for (Index j = a - m + k; j <= a; ++j) s += w.t(j);
    for (Index j = b - m + 1; j <= b - m + k; ++j) s += w.t(j);
    sw += wk;
    swt += wk * s / (m + 1);
  }
  return swt / sw;
}

namespace {

template <typename Value>
BarycenterReport compare_chords(Index i, int p, Value value,
                               double tol) {
  if (p < 1) throw ParameterError("barycenter_conditions: p must be >= 1");
  BarycenterReport rep;
  const auto add = [&](int which, int off, double lhs, double rhs) {
    BarycenterCheck c{which, off, lhs, rhs, lhs <= rhs + tol};
    rep.holds = rep.holds && c.holds;
    rep.checks.push_back(c);
  };
  const double outer = value(i - p, i + p);
  for (int r = 1; r < p; ++r) {
    add(1, r, value(i - r, i), outer);
    add(2, r, value(i - p, i - r), value(i - r, i + p));
  }
  for (int s = 1; s < p; ++s) {
    add(3, s, outer, value(i, i + s));
    add(4, s, value(i - p, i + s), value(i + s, i + p));
  }
  return rep;
}

}  // namespace

BarycenterReport barycenter_conditions(const KnotWindow& w, Index i, int p) {
  if (w.degree() < 2) throw UnsupportedDegreeError("barycenter_conditions: m >= 2");
  const double width = theta(w, i + p) - theta(w, i - p);
  const double tol = 1e-12 * (width + std::abs(theta(w, i)));
  return compare_chords(
      i, p, [&](Index a, Index b) { return chord_barycenter(w, a, b); }, tol);
}

BarycenterReport moment_ratio_conditions(const KnotWindow& w, Index i,
                                                  int p) {
  if (w.degree() < 2) throw UnsupportedDegreeError("barycenter_conditions: m >= 2");
  const LocalFrame f = frame(w, i, p);
  const auto ratio = [&](Index a, Index b) {
    const double dm = moment(w, b, 2, f.origin, f.scale) - moment(w, a, 2, f.origin, f.scale);
    return dm / ((theta(w, b) - theta(w, a)) / f.scale);
  };
  return compare_chords(i, p, ratio, 2e-12 * (1.0 + std::abs(f.origin) / f.scale));
}

std::string problem_to_json(const L1Problem& pr) {
  nlohmann::json j;
  std::vector<double> flat;
  for (Index r = 0; r < pr.V.rows(); ++r)
    for (Index c = 0; c < pr.V.cols(); ++c) flat.push_back(pr.V(r, c));
  j["V"] = flat;
  j["b"] = std::vector<double>(pr.b.data(), pr.b.data() + pr.b.size());
  j["p"] = pr.p;
  j["q"] = pr.q;
  j["meta"] = pr.meta;
  return j.dump(2);
}

L1Problem problem_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("problem JSON: ") + e.what());
  }
  try {
    L1Problem pr;
    pr.p = j.at("p").get<int>();
    pr.q = j.at("q").get<int>();
    const auto b = j.at("b").get<std::vector<double>>();
    pr.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Index>(b.size()));
    const Index rows = pr.q + 1, cols = 2 * pr.p + 1;
    if (static_cast<Index>(b.size()) != rows)
      throw DataError("problem JSON: b must have q+1 entries");
    pr.V.resize(rows, cols);
    const auto& V = j.at("V");
    if (!V.empty() && V.front().is_array()) {
      const auto nested = V.get<std::vector<std::vector<double>>>();
      if (static_cast<Index>(nested.size()) != rows)
        throw DataError("problem JSON: V must have q+1 rows");
      for (Index r = 0; r < rows; ++r) {
        if (static_cast<Index>(nested[r].size()) != cols)
          throw DataError("problem JSON: each row of V needs 2p+1 entries");
        for (Index c = 0; c < cols; ++c) pr.V(r, c) = nested[r][c];
      }
    } else {
      const auto flat = V.get<std::vector<double>>();
      if (static_cast<Index>(flat.size()) != rows * cols)
        throw DataError("problem JSON: V needs (q+1)(2p+1) entries");
      for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) pr.V(r, c) = flat[r * cols + c];
    }
    if (j.contains("meta"))
      for (const auto& [key, value] : j.at("meta").items())
        pr.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
    return pr;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("problem JSON: ") + e.what());
  }
}

}  // namespace nbqi
