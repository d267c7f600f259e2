#pragma once

#include <aggfem/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <stdexcept>
#include <variant>

namespace aggfem {

/// Sup norms over R^2 of an interaction kernel and its derivatives.
struct KernelNorms {
  double sup_K = 0.0;
  double sup_gradK = 0.0;
  double sup_lapK = 0.0;

  /// The W^{2,inf} norm, taken as the largest of the three sup norms.
  double w2inf() const { return std::max({sup_K, sup_gradK, sup_lapK}); }
};

/// K(x) = r(|x|) with r nonincreasing, plus the sup norms the scheme needs.
template <class K>
concept RadialKernel = requires(const K& k, Vec2 x, double s) {
  { k.eval(x) } -> std::convertible_to<double>;
  { k.profile(s) } -> std::convertible_to<double>;
  { k.norms() } -> std::convertible_to<KernelNorms>;
};

/// K(x) = exp(-|x|^2 / w^2) / (pi w^2). Unit mass; w = 1 is the default.
class GaussianKernel {
 public:
  explicit GaussianKernel(double width = 1.0) : width_(width) {
    if (!(width > 0.0) || !std::isfinite(width)) {
      throw std::invalid_argument("GaussianKernel: width must be positive and finite");
    }
    inv_w2_ = 1.0 / (width * width);
    peak_ = inv_w2_ / std::numbers::pi;
  }

  double width() const { return width_; }

  double profile(double s) const { return std::exp(-s * s * inv_w2_) * peak_; }

  double eval(Vec2 x) const { return std::exp(-dot(x, x) * inv_w2_) * peak_; }

  // |r'(s)| = 2 s / w^2 r(s), largest at s = w / sqrt(2).
  // |Laplacian| = |4 s^2 / w^4 - 4 / w^2| r(s), largest at s = 0.
  KernelNorms norms() const {
    const double w = width_;
    return {peak_,
            std::numbers::sqrt2 * std::exp(-0.5) / (std::numbers::pi * w * w * w),
            4.0 / (std::numbers::pi * w * w * w * w)};
  }

 private:
  double width_;
  double inv_w2_;
  double peak_;
};

/// K = 0: switches off the nonlocal attraction.
struct ZeroKernel {
  double profile(double) const { return 0.0; }
  double eval(Vec2) const { return 0.0; }
  KernelNorms norms() const { return {}; }
};

static_assert(RadialKernel<GaussianKernel>);
static_assert(RadialKernel<ZeroKernel>);

using AnyKernel = std::variant<GaussianKernel, ZeroKernel>;

template <RadialKernel K>
KernelNorms kernel_norms(const K& kernel) {
  return kernel.norms();
}

inline KernelNorms kernel_norms(const AnyKernel& kernel) {
  return std::visit([](const auto& k) { return k.norms(); }, kernel);
}

}  // namespace aggfem
