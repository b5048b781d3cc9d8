#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>

namespace frmc {

// New families go here and in kernel_family_from_name; every family must be
// symmetric with unit mass.
enum class KernelFamily { gaussian, epanechnikov_product };

KernelFamily kernel_family_from_name(std::string_view name);
std::string_view kernel_family_name(KernelFamily family);

struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  std::size_t dim = 1;
  /// K(u) = 0 for |u| > radius; infinity means untruncated.
  double radius = std::numeric_limits<double>::infinity();

  bool truncated() const { return radius < std::numeric_limits<double>::infinity(); }
};

/// Kernel of the given family whose radius comes from truncation_radius(eta).
/// eta == 0 leaves the Gaussian untruncated; compact families ignore eta.
KernelSpec make_kernel(KernelFamily family, std::size_t dim, double eta);

/// K(0).
double kernel_peak(KernelFamily family, std::size_t dim);

/// Untruncated K at squared norm |u|^2 (Gaussian) or at u (product families).
double kernel_profile(KernelFamily family, std::span<const double> u);

/// K(u) honoring the truncation radius.
double kernel_value(const KernelSpec& kernel, std::span<const double> u);

/// Radius r with K(v) < eta for |v| > r. Gaussian: sqrt(-2 ln(eta (2 pi)^{d/2})).
double truncation_radius(const KernelSpec& kernel, double eta);

struct BandwidthRule {
  enum class Kind { fixed_alpha, automatic };
  Kind kind = Kind::automatic;
  double alpha = 0.4;

  static BandwidthRule fixed(double alpha) { return {Kind::fixed_alpha, alpha}; }
  static BandwidthRule automatic() { return {Kind::automatic, 0.4}; }
};

/// eps = C N^{-alpha} for d <= 4 (alpha in [1/4, 1/d]; automatic uses 0.4),
/// eps = C N^{-2/(4+d)} for d > 4 under the automatic rule.
double bandwidth(std::size_t N, std::size_t d, double C, BandwidthRule rule);

}  // namespace frmc
