#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace aggfem {

/// The nonlinear diffusion function A with A(0) = 0 and A nondecreasing on
/// [0, inf). Built-in laws are extended by A(s) = A(0) = 0 for s < 0.
class DiffusionLaw {
 public:
  using Fn = std::function<double(double)>;

  struct PowerLaw {
    double nu;
    double m;
  };

  DiffusionLaw(Fn a, Fn a_prime = {}) : a_(std::move(a)), a_prime_(std::move(a_prime)) {
    if (!a_) throw std::invalid_argument("DiffusionLaw: empty function");
    if (a_(0.0) != 0.0) throw std::invalid_argument("DiffusionLaw: A(0) must be 0");
  }

  /// A(s) = (nu / m) s^m.
  static DiffusionLaw power_law(double nu, double m) {
    if (!(nu >= 0.0) || !std::isfinite(nu)) {
      throw std::invalid_argument("DiffusionLaw: nu must be finite and >= 0");
    }
    if (!(m >= 1.0) || !std::isfinite(m)) {
      throw std::invalid_argument("DiffusionLaw: exponent m must be finite and >= 1");
    }
    const double c = nu / m;
    DiffusionLaw law(
        [c, m](double s) { return s > 0.0 ? c * std::pow(s, m) : 0.0; },
        [nu, m](double s) { return s > 0.0 ? nu * std::pow(s, m - 1.0) : (m == 1.0 ? nu : 0.0); });
    law.power_ = PowerLaw{nu, m};
    return law;
  }

  /// A(s) = s (linear diffusion, no clamping).
  static DiffusionLaw linear() {
    return DiffusionLaw([](double s) { return s; }, [](double) { return 1.0; });
  }

  /// A = 0.
  static DiffusionLaw none() {
    return DiffusionLaw([](double) { return 0.0; }, [](double) { return 0.0; });
  }

  double operator()(double s) const { return a_(s); }

  bool has_derivative() const { return static_cast<bool>(a_prime_); }

  double derivative(double s) const {
    if (!a_prime_) throw std::logic_error("DiffusionLaw: derivative not available");
    return a_prime_(s);
  }

  const std::optional<PowerLaw>& power_parameters() const { return power_; }

  /// A_T(s) = A(min(max(s, 0), cap)).
  DiffusionLaw truncated(double cap) const {
    if (!(cap >= 0.0)) throw std::invalid_argument("DiffusionLaw::truncated: cap must be >= 0");
    Fn a = a_;
    Fn da = a_prime_;
    Fn dt;
    if (da) {
      dt = [da, cap](double s) { return (s > 0.0 && s < cap) ? da(s) : 0.0; };
    }
    return DiffusionLaw([a, cap](double s) { return a(std::clamp(s, 0.0, cap)); }, std::move(dt));
  }

  /// sup of A' over [0, cap], sampled on a uniform grid including both ends
  /// (exact for laws whose derivative is monotone).
  double lipschitz_on(double cap, int samples = 2048) const {
    if (!a_prime_) throw std::logic_error("DiffusionLaw: derivative not available");
    double lip = 0.0;
    for (int i = 0; i <= samples; ++i) {
      lip = std::max(lip, a_prime_(cap * i / samples));
    }
    return lip;
  }

  /// Sampled check of A(0) = 0 and monotonicity on [0, s_max].
  bool is_admissible(double s_max, int samples = 1024) const {
    if (a_(0.0) != 0.0) return false;
    double prev = 0.0;
    for (int i = 1; i <= samples; ++i) {
      const double v = a_(s_max * i / samples);
      if (!std::isfinite(v) || v < prev) return false;
      prev = v;
    }
    return true;
  }

 private:
  Fn a_;
  Fn a_prime_;
  std::optional<PowerLaw> power_;
};

}  // namespace aggfem
