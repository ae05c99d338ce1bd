#include "nbqi/partition.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "nbqi/norms.hpp"

namespace nbqi {

const char* to_string(PartitionKind kind) noexcept {
  switch (kind) {
    case PartitionKind::uniform: return "uniform";
    case PartitionKind::arithmetic: return "arithmetic";
    case PartitionKind::geometric: return "geometric";
    case PartitionKind::random_mesh_ratio: return "random";
    case PartitionKind::stretched: return "section11";
    case PartitionKind::file: return "file";
  }
  return "?";
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    throw ParameterError("partition: bad value for " + what + ": '" + text + "'");
  return v;
}

long long to_int(const std::string& text, const std::string& what) {
  long long v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw ParameterError("partition: bad integer for " + what + ": '" + text + "'");
  return v;
}

// Shortest text that reads back to the same double.
std::string shortest(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

std::string PartitionSpec::text() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case PartitionKind::uniform:
      os << ':' << intervals << ":h=" << shortest(h);
      break;
    case PartitionKind::arithmetic:
      os << ':' << intervals << ":h=" << shortest(h) << ":d=" << shortest(d);
      break;
    case PartitionKind::geometric:
      os << ':' << intervals << ":rho=" << shortest(rho) << ":h=" << shortest(h);
      break;
    case PartitionKind::random_mesh_ratio:
      os << ':' << count << ":seed=" << seed << ":n=" << intervals << ":r=" << shortest(ratio);
      break;
    case PartitionKind::stretched:
      os << ":h=" << shortest(h);
      break;
    case PartitionKind::file:
      os << ':' << path;
      break;
  }
  return os.str();
}

PartitionSpec parse_partition(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  PartitionSpec s;
  if (kind == "file") {
    if (rest.empty()) throw ParameterError("partition: file needs a path");
    s.kind = PartitionKind::file;
    s.path = rest;
    return s;
  }
  if (kind == "uniform") s.kind = PartitionKind::uniform;
  else if (kind == "arithmetic") s.kind = PartitionKind::arithmetic;
  else if (kind == "geometric") s.kind = PartitionKind::geometric;
  else if (kind == "random" || kind == "random_mesh_ratio") s.kind = PartitionKind::random_mesh_ratio;
  else if (kind == "section11") s.kind = PartitionKind::stretched;
  else throw ParameterError("partition: unknown kind '" + kind + "'");

  bool have_h = false;
  const auto fields = rest.empty() ? std::vector<std::string>{} : split(rest, ':');
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const std::string& f = fields[k];
    const auto eq = f.find('=');
    if (eq == std::string::npos) {
      if (k != 0 || s.kind == PartitionKind::stretched)
        throw ParameterError("partition: unexpected field '" + f + "'");
      const long long n = to_int(f, kind == "random" ? "count" : "N");
      if (n < 1) throw ParameterError("partition: count must be positive");
      (s.kind == PartitionKind::random_mesh_ratio ? s.count : s.intervals) = static_cast<int>(n);
      continue;
    }
    const std::string key = f.substr(0, eq), val = f.substr(eq + 1);
    if (key == "h") {
      s.h = to_double(val, key);
      have_h = true;
    } else if (key == "d" && s.kind == PartitionKind::arithmetic) {
      s.d = to_double(val, key);
    } else if (key == "rho" && s.kind == PartitionKind::geometric) {
      s.rho = to_double(val, key);
    } else if (key == "r" && s.kind == PartitionKind::random_mesh_ratio) {
      s.ratio = to_double(val, key);
    } else if (key == "seed" && s.kind == PartitionKind::random_mesh_ratio) {
      const long long v = to_int(val, key);
      if (v < 0) throw ParameterError("partition: seed must be >= 0");
      s.seed = static_cast<std::uint64_t>(v);
    } else if (key == "n" && (s.kind == PartitionKind::random_mesh_ratio)) {
      s.intervals = static_cast<int>(to_int(val, key));
    } else {
      throw ParameterError("partition: unknown parameter '" + key + "' for " + kind);
    }
  }
  if (s.kind == PartitionKind::stretched && !have_h)
    throw ParameterError("partition: section11 needs h=");
  if (!(s.h > 0.0)) throw ParameterError("partition: h must be > 0");
  if (!(s.rho > 0.0)) throw ParameterError("partition: rho must be > 0");
  if (!(s.ratio >= 1.0)) throw ParameterError("partition: r must be >= 1");
  if (s.intervals < 1) throw ParameterError("partition: need at least one interval");
  return s;
}

std::vector<double> random_mesh_ratio_knots(int intervals, double ratio,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double log_r = std::log(ratio);
  std::vector<double> t{0.0};
  double h = 1.0;
  for (int k = 0; k < intervals; ++k) {
    t.push_back(t.back() + h);
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    h *= std::exp((2.0 * u - 1.0) * log_r);
  }
  return t;
}

std::vector<double> dyadic_refinement(const std::vector<double>& base, int level) {
  if (level < 0) throw ParameterError("refinement level must be >= 0");
  const int parts = 1 << level;
  std::vector<double> t;
  for (std::size_t k = 0; k + 1 < base.size(); ++k)
    for (int j = 0; j < parts; ++j)
      t.push_back(base[k] + (base[k + 1] - base[k]) * j / parts);
  t.push_back(base.back());
  return t;
}

std::vector<GeneratedWindow> generate(const PartitionSpec& s, int m) {
  const auto steps_to_knots = [](const std::vector<double>& steps) {
    std::vector<double> t{0.0};
    for (double h : steps) {
      if (!(h > 0.0)) throw ParameterError("partition: generated step is not positive");
      t.push_back(t.back() + h);
    }
    return t;
  };
  const bool generated = s.kind != PartitionKind::stretched && s.kind != PartitionKind::file;
  if (generated && s.intervals < m + 2)
    throw ParameterError("partition: need at least m+2 = " + std::to_string(m + 2) +
                         " intervals, got " + std::to_string(s.intervals));
  std::vector<GeneratedWindow> out;
  switch (s.kind) {
    case PartitionKind::uniform:
    case PartitionKind::arithmetic:
    case PartitionKind::geometric: {
      std::vector<double> steps;
      for (int k = 0; k < s.intervals; ++k)
        steps.push_back(s.kind == PartitionKind::uniform      ? s.h
                        : s.kind == PartitionKind::arithmetic ? s.h + k * s.d
                                                              : s.h * std::pow(s.rho, k));
      out.push_back({s.text(), KnotWindow(steps_to_knots(steps), m)});
      break;
    }
    case PartitionKind::random_mesh_ratio:
      for (int k = 0; k < s.count; ++k)
        out.push_back({s.text() + "#" + std::to_string(k),
                       KnotWindow(random_mesh_ratio_knots(s.intervals, s.ratio, s.seed + k), m)});
      break;
    case PartitionKind::stretched: {
      if (m != 3) throw UnsupportedDegreeError("section11 partitions are cubic (m = 3)");
      out.push_back({s.text(), stretched_partition(s.h)});
      break;
    }
    case PartitionKind::file:
      out.push_back({s.text(), load_knot_file(s.path, m)});
      break;
  }
  return out;
}

}  // namespace nbqi
