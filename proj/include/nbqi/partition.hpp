#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nbqi/knots.hpp"

namespace nbqi {

enum class PartitionKind { uniform, arithmetic, geometric, random_mesh_ratio, stretched, file };

const char* to_string(PartitionKind kind) noexcept;

/// Parsed form of the `kind:params` grammar:
///   uniform:N[:h=H]
///   arithmetic:N[:h=H][:d=D]          steps H, H+D, H+2D, ...
///   geometric:N[:rho=R][:h=H]         steps H, HR, HR^2, ...
///   random:COUNT[:seed=S][:n=N][:r=R] COUNT windows, consecutive step ratios in [1/R, R]
///   section11:h=H
///   file:PATH
/// All knot sequences start at 0 except section11 and file.
struct PartitionSpec {
  PartitionKind kind = PartitionKind::uniform;
  int intervals = 40;  ///< N (n= for random)
  int count = 1;       ///< windows generated (random only)
  double h = 1.0;
  double d = 0.0;
  double rho = 2.0;
  double ratio = 3.0;
  std::uint64_t seed = 1;
  std::string path;

  /// Canonical text form; parse(text()).text() == text().
  std::string text() const;
};

PartitionSpec parse_partition(const std::string& text);

/// One labelled window of a generated family.
struct GeneratedWindow {
  std::string label;
  KnotWindow window;
};

/// Windows for spline degree m. Random windows use std::mt19937_64 seeded
/// with seed + k for the k-th window; steps follow
/// h_{i+1} = h_i * exp((2U - 1) ln r) with U = (draw >> 11) * 2^-53.
std::vector<GeneratedWindow> generate(const PartitionSpec& spec, int m);

/// Knots of a random mesh-ratio sequence (first knot 0, first step 1).
std::vector<double> random_mesh_ratio_knots(int intervals, double ratio,
                                            std::uint64_t seed);

/// Each interval of `base` split into 2^level equal parts.
std::vector<double> dyadic_refinement(const std::vector<double>& base, int level);

inline constexpr const char* kRandomGenerator = "mt19937_64";

}  // namespace nbqi
