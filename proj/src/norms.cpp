#include "nbqi/norms.hpp"

#include <Eigen/Dense>

#include "nbqi/dqi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace nbqi {

namespace {

using SiteKey = std::pair<int, Index>;

const DiscreteFunctional& point_functional(const QuasiInterpolant& qi, Index i) {
  const auto* d = std::get_if<DiscreteFunctional>(&qi.functional(i));
  if (!d)
    throw UnsupportedOperationError(qi.name() +
                                    ": fundamental functions need point-value functionals");
  return *d;
}

void require_point_values(const QuasiInterpolant& qi) {
  if (qi.family() != Family::discrete)
    throw UnsupportedOperationError(qi.name() +
                                    ": fundamental functions need point-value functionals");
  if (qi.uses_derivatives())
    throw UnsupportedOperationError(qi.name() +
                                    ": derivative data has no fundamental function");
}

double site_abscissa(const KnotWindow& w, NodeKind kind, Index node) {
  return kind == NodeKind::knot ? w.t(node) : theta(w, node);
}

}  // namespace

const char* to_string(ProfileKind kind) noexcept {
  switch (kind) {
    case ProfileKind::exact: return "exact";
    case ProfileKind::nu1_upper_profile: return "nu1_upper_profile";
    case ProfileKind::integral_kernel: return "integral_kernel";
  }
  return "?";
}

std::vector<FundamentalFunction> fundamental_functions(const QuasiInterpolant& qi) {
  require_point_values(qi);
  std::map<SiteKey, std::map<Index, double>> sites;
  for (Index i = qi.indices().first; i <= qi.indices().last; ++i)
    for (const auto& t : point_functional(qi, i).terms)
      sites[{static_cast<int>(t.kind), t.node}][i] += t.weight;

  const KnotWindow& w = qi.window();
  std::vector<FundamentalFunction> out;
  for (const auto& [key, coeffs] : sites) {
    const Index first = coeffs.begin()->first;
    const Index last = coeffs.rbegin()->first;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(last - first + 1);
    for (const auto& [i, v] : coeffs) c(i - first) = v;
    const auto kind = static_cast<NodeKind>(key.first);
    out.push_back({kind, key.second, site_abscissa(w, kind, key.second),
                   SplineExpansion(w, first, std::move(c), true)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.abscissa < b.abscissa;
  });
  return out;
}

double lebesgue_value(const QuasiInterpolant& qi, double x) {
  require_point_values(qi);
  const KnotWindow& w = qi.window();
  const Index k = locate_interval(w, qi.domain(), x);
  const Eigen::VectorXd N = active_basis(w, k, x);
  std::map<SiteKey, double> acc;
  for (int r = 0; r <= w.degree(); ++r)
    for (const auto& t : point_functional(qi, k + r).terms)
      acc[{static_cast<int>(t.kind), t.node}] += t.weight * N(r);
  double s = 0.0;
  for (const auto& [key, v] : acc) s += std::abs(v);
  return s;
}

double nu1_profile_value(const QuasiInterpolant& qi, double x) {
  const KnotWindow& w = qi.window();
  const Index k = locate_interval(w, qi.domain(), x);
  const Eigen::VectorXd N = active_basis(w, k, x);
  double s = 0.0;
  for (int r = 0; r <= w.degree(); ++r) {
    double l1 = 0.0;
    for (double a : qi.weights(k + r)) l1 += std::abs(a);
    s += l1 * N(r);
  }
  return s;
}

double integral_lebesgue_value(const QuasiInterpolant& qi, double x) {
  if (qi.family() != Family::integral)
    throw UnsupportedOperationError(qi.name() + " is not an integral QI");
  const KnotWindow& w = qi.window();
  const int m = w.degree();
  const Index k = locate_interval(w, qi.domain(), x);
  const Eigen::VectorXd N = active_basis(w, k, x);

  // K(x, t) = sum_j c_j M_j(t); endpoint terms add point masses.
  std::map<Index, double> c;
  double point_mass = 0.0;
  for (int r = 0; r <= m; ++r) {
    const auto& f = std::get<IntegralFunctional>(qi.functional(k + r));
    for (const auto& t : f.terms) c[t.m_spline] += N(r) * t.weight;
    for (const auto& t : f.endpoint_terms) point_mass += std::abs(N(r) * t.weight);
  }
  const Index lo = c.begin()->first - m + 1;
  const Index hi = c.rbegin()->first;
  const auto kernel = [&](double t) {
    double s = 0.0;
    for (const auto& [j, cj] : c)
      if (cj != 0.0) s += cj * eval_M(w, j, t);
    return s;
  };
  const GaussRule& rule = gauss_legendre(std::max(2, (m + 1) / 2 + 1));
  const auto integrate_abs = [&](double a, double b) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (Index q = 0; q < rule.nodes.size(); ++q)
      s += rule.weights(q) * kernel(mid + half * rule.nodes(q));
    return std::abs(half * s);
  };

  // On each knot interval K is a polynomial of degree m-2: split at its
  // sign changes, then integrate each signed piece exactly.
  const int probes = 4 * m + 1;
  double total = 0.0;
  for (Index l = lo; l < hi; ++l) {
    const double a = w.t(l), b = w.t(l + 1);
    std::vector<double> cuts{a};
    const auto at = [&](int q) { return q == probes ? b - 1e-15 * (b - a) : a + (b - a) * q / probes; };
    double prev = kernel(at(0));
    for (int q = 1; q <= probes; ++q) {
      const double cur = kernel(at(q));
      if ((prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0)) {
        double u = at(q - 1), v = at(q), fu = prev;
        for (int it = 0; it < 80 && v - u > 1e-15 * (b - a); ++it) {
          const double mid = 0.5 * (u + v), fm = kernel(mid);
          if ((fm < 0.0) == (fu < 0.0)) {
            u = mid;
            fu = fm;
          } else {
            v = mid;
          }
        }
        cuts.push_back(0.5 * (u + v));
      }
      if (cur != 0.0) prev = cur;
    }
    cuts.push_back(b);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) total += integrate_abs(cuts[p], cuts[p + 1]);
  }
  return total + point_mass;
}

void LebesgueProfile::write_csv(std::ostream& out) const {
  out << "x,lambda\n";
  char buf[64];
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[k], values[k]);
    out << buf;
  }
}

LebesgueProfile lebesgue_sample(const QuasiInterpolant& qi,
                                const LebesgueOptions& options) {
  if (options.points_per_interval < 1)
    throw ParameterError("lebesgue_sample: need at least one point per interval");
  LebesgueProfile prof;
  double (*value)(const QuasiInterpolant&, double) = nullptr;
  if (qi.family() == Family::discrete) {
    require_point_values(qi);
    prof.kind = ProfileKind::exact;
    value = &lebesgue_value;
  } else if (options.integral_kernel) {
    prof.kind = ProfileKind::integral_kernel;
    value = &integral_lebesgue_value;
  } else {
    prof.kind = ProfileKind::nu1_upper_profile;
    value = &nu1_profile_value;
  }
  const KnotWindow& w = qi.window();
  const Interval dom = qi.domain();
  const Index k_first = w.interval_of(dom.lo);
  const Index k_last = locate_interval(w, dom, dom.hi);
  const int n = options.points_per_interval;
  for (Index k = k_first; k <= k_last; ++k)
    for (int j = 0; j < n; ++j) prof.x.push_back(w.t(k) + (w.t(k + 1) - w.t(k)) * j / n);
  prof.x.push_back(dom.hi);
  prof.values.reserve(prof.x.size());
  prof.max = -1.0;
  for (double x : prof.x) {
    const double v = value(qi, x);
    prof.values.push_back(v);
    if (v > prof.max) {
      prof.max = v;
      prof.argmax = x;
    }
  }
  return prof;
}

double nu1_bound(const QuasiInterpolant& qi) {
  double best = 0.0;
  for (Index i = qi.indices().first; i <= qi.indices().last; ++i) {
    double l1 = 0.0;
    for (double a : qi.weights(i)) l1 += std::abs(a);
    best = std::max(best, l1);
  }
  return best;
}

namespace bounds {

namespace {
void check_m(int m) {
  if (m < 2) throw ParameterError("bound needs m >= 2");
}
}  // namespace

double q2_star(int m) {
  check_m(m);
  return static_cast<double>((m + 4) / 2);
}
double qp_star(int m) {
  check_m(m);
  return (m + 1.0) / (m - 1.0);
}
double g2(int m) {
  check_m(m);
  return m % 2 ? m + 2.0 : m + 3.0;
}
double gp_star_C(int m) {
  check_m(m);
  const double md = m;
  return m % 2 ? (md + 1) * (md + 1) / (md - 1) : md * md * (md + 2) / ((md - 1) * (md - 1));
}
double gp_star_c(int m) {
  check_m(m);
  return m % 2 ? 0.25 * (m * m - 1.0) : 0.25 * m * m;
}
double gp_star(int m) { return 1.0 + 0.25 * gp_star_C(m); }

}  // namespace bounds

double mesh_ratio_bound(double r) {
  if (!(r >= 1.0)) throw ParameterError("mesh ratio bound needs r >= 1");
  return ((1 + r) * (1 + r) + 2 * r * r / (1 + r)) / 3.0;
}

KnotWindow stretched_partition(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("stretch h must be > 0");
  std::vector<double> t;
  for (int i = -4; i <= 9; ++i) t.push_back(i <= 2 ? i : i - 1 + h);
  return KnotWindow(std::move(t), 3, -4);
}

StretchedIntervalValues stretched_interval_values(double h, int points_per_interval) {
  const KnotWindow w = stretched_partition(h);
  const QuasiInterpolant q3 = build_Q3_cubic(w);
  // Internal index j is the cubic B-spline centred at t_{j-1}.
  StretchedIntervalValues v;
  v.h = h;
  const double t2 = w.t(2), t3 = w.t(3);
  v.s = 0.5 * (t2 + t3);
  v.alpha1 = eval_B(w, 2, t2);
  v.alpha2 = eval_B(w, 3, t2);
  v.delta2 = eval_B(w, 3, t3);

  // Bernstein coefficients of the cubic piece on [t2, t3] by collocation.
  Eigen::Matrix4d A;
  Eigen::Vector4d y;
  for (int k = 0; k < 4; ++k) {
    const double u = k / 3.0;
    const double x = k == 3 ? t3 : t2 + u * (t3 - t2);
    for (int l = 0; l < 4; ++l)
      A(k, l) = binomial(3, l) * std::pow(u, l) * std::pow(1.0 - u, 3 - l);
    y(k) = eval_B(w, 3, x);
  }
  const Eigen::Vector4d bb = A.fullPivLu().solve(y);
  v.beta2 = bb(1);
  v.gamma2 = bb(2);

  v.B1_s = eval_B(w, 2, v.s);
  v.B2_s = eval_B(w, 3, v.s);
  v.lambda_s = lebesgue_value(q3, v.s);
  v.lambda_max_on_I = 0.0;
  for (int j = 0; j <= points_per_interval; ++j)
    v.lambda_max_on_I = std::max(
        v.lambda_max_on_I, lebesgue_value(q3, t2 + (t3 - t2) * j / points_per_interval));
  return v;
}

namespace stretched_reference {
double alpha1(double h) { return h / (3 * (1 + h)); }
double alpha2(double h) {
  return (2 * h * h * h + h * h + 9) / (3 * (h + 1) * (h * h - h + 3));
}
double delta2(double h) { return h / ((h + 1) * (h * h - h + 3)); }
double gamma2(double h) { return 1 / (h * h - h + 3); }
}  // namespace stretched_reference

namespace stretched_exact {
double alpha1(double h) { return h * h / ((1 + h) * (2 + h)); }
double alpha2(double h) { return (3 * h + 1) / ((1 + h) * (2 + h)); }
double delta2(double h) { return 1 / ((1 + h) * (2 + h)); }
double gamma2(double h) { return 1 / (h + 2); }
}  // namespace stretched_exact

}  // namespace nbqi
