#include "frmc/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "frmc/errors.hpp"

namespace frmc {

KernelFamily kernel_family_from_name(std::string_view name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "epanechnikov" || name == "epanechnikov-product") return KernelFamily::epanechnikov_product;
  throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

std::string_view kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian:
      return "gaussian";
    case KernelFamily::epanechnikov_product:
      return "epanechnikov";
  }
  return "unknown";
}

double kernel_peak(KernelFamily family, std::size_t dim) {
  const double d = static_cast<double>(dim);
  switch (family) {
    case KernelFamily::gaussian:
      return std::pow(2.0 * std::numbers::pi, -0.5 * d);
    case KernelFamily::epanechnikov_product:
      return std::pow(0.75, d);
  }
  return 0.0;
}

double kernel_profile(KernelFamily family, std::span<const double> u) {
  switch (family) {
    case KernelFamily::gaussian: {
      double r2 = 0.0;
      for (double v : u) r2 += v * v;
      return kernel_peak(family, u.size()) * std::exp(-0.5 * r2);
    }
    case KernelFamily::epanechnikov_product: {
      double k = 1.0;
      for (double v : u) {
        if (std::abs(v) >= 1.0) return 0.0;
        k *= 0.75 * (1.0 - v * v);
      }
      return k;
    }
  }
  return 0.0;
}

double kernel_value(const KernelSpec& kernel, std::span<const double> u) {
  if (u.size() != kernel.dim) {
    throw ValidationError("kernel_value: argument has dimension " + std::to_string(u.size()) + ", kernel has " +
                          std::to_string(kernel.dim));
  }
  if (kernel.truncated()) {
    double r2 = 0.0;
    for (double v : u) r2 += v * v;
    if (r2 > kernel.radius * kernel.radius) return 0.0;
  }
  return kernel_profile(kernel.family, u);
}

double truncation_radius(const KernelSpec& kernel, double eta) {
  const double peak = kernel_peak(kernel.family, kernel.dim);
  if (!(eta > 0.0) || !(eta < peak)) {
    throw ValidationError("truncation threshold eta must lie in (0, K(0)); K(0) = " + std::to_string(peak));
  }
  switch (kernel.family) {
    case KernelFamily::gaussian:
      return std::sqrt(-2.0 * std::log(eta / peak));
    case KernelFamily::epanechnikov_product:
      return std::sqrt(static_cast<double>(kernel.dim));
  }
  return 0.0;
}

KernelSpec make_kernel(KernelFamily family, std::size_t dim, double eta) {
  if (dim == 0) throw ValidationError("kernel dimension must be positive");
  KernelSpec k{family, dim, std::numeric_limits<double>::infinity()};
  if (family == KernelFamily::epanechnikov_product) {
    k.radius = std::sqrt(static_cast<double>(dim));
  } else if (eta != 0.0) {
    k.radius = truncation_radius(k, eta);
  }
  return k;
}

double bandwidth(std::size_t N, std::size_t d, double C, BandwidthRule rule) {
  if (N < 1) throw ValidationError("bandwidth: N must be at least 1");
  if (d < 1) throw ValidationError("bandwidth: dimension must be positive");
  if (!(C > 0.0)) throw ValidationError("bandwidth: scale C must be positive");
  const double n = static_cast<double>(N);
  const double dd = static_cast<double>(d);
  if (rule.kind == BandwidthRule::Kind::fixed_alpha) {
    if (d > 4) throw ValidationError("bandwidth: a fixed rate alpha requires d <= 4; use the automatic rule");
    if (!(rule.alpha >= 0.25 && rule.alpha <= 1.0 / dd)) {
      throw ValidationError("bandwidth: alpha must lie in [1/4, 1/d] for root-N consistency, got " +
                            std::to_string(rule.alpha));
    }
    return C * std::pow(n, -rule.alpha);
  }
  if (d > 4) return C * std::pow(n, -2.0 / (4.0 + dd));
  return C * std::pow(n, -std::min(0.4, 1.0 / dd));
}

}  // namespace frmc
