#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cmix {

enum class KernelId { Epanechnikov, Quartic, Triweight, FlatTop };

KernelId parse_kernel_id(const std::string& name);
std::string to_string(KernelId id);

/// Summary constants of a kernel.
struct KernelSpec {
  KernelId id = KernelId::Epanechnikov;
  int D = 1;
  double M = 1.0;            // support radius
  double lip = 0.0;          // Lipschitz constant (on the open support)
  double kappa_alpha = 0.0;  // int ||u||^alpha K(u) du
  double kbar = 0.0;         // sup K
  double kmin = 0.0;         // inf of K over its support
};

/// Spherical polynomial kernel K(u) = c (1 - ||u||^2)^p on the unit ball,
/// p = 1, 2, 3.  The flat-top variant is max(c (1 - ||u||^2), floor)
/// renormalised on the ball; it is bounded below on its support and
/// therefore jumps at ||u|| = 1.
template <class Scalar = double>
class Kernel {
 public:
  explicit Kernel(KernelId id = KernelId::Epanechnikov, int D = 1) : id_(id), D_(D) {
    if (D < 1) throw std::invalid_argument("kernel dimension must be >= 1");
    power_ = id == KernelId::Quartic ? 2 : id == KernelId::Triweight ? 3 : 1;
    const double half = 0.5 * D;
    surface_ = 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
    // c_p = Gamma(D/2 + p + 1) / (pi^(D/2) Gamma(p + 1))
    coef_ = std::tgamma(half + power_ + 1.0) /
            (std::pow(std::numbers::pi, half) * std::tgamma(power_ + 1.0));
    if (id == KernelId::FlatTop) {
      floor_ = 0.25 * coef_;
      knee_ = std::sqrt(1.0 - floor_ / coef_);
      scale_ = 1.0 / (surface_ * flat_moment(0.0));
    }
  }

  KernelId id() const { return id_; }
  int dim() const { return D_; }
  static constexpr Scalar support_radius() { return Scalar(1); }

  /// K evaluated at squared radius r2 = ||u||^2.
  Scalar at_squared(Scalar r2) const {
    if (r2 > Scalar(1)) return Scalar(0);
    const Scalar base = Scalar(1) - r2;
    if (id_ == KernelId::FlatTop)
      return Scalar(scale_) * std::max(Scalar(coef_) * base, Scalar(floor_));
    Scalar v = base;
    for (int k = 1; k < power_; ++k) v *= base;
    return Scalar(coef_) * v;
  }

  template <class Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& u) const {
    return at_squared(u.squaredNorm());
  }

  Scalar operator()(Scalar u) const { return at_squared(u * u); }

  double sup() const { return id_ == KernelId::FlatTop ? scale_ * coef_ : coef_; }

  double inf_on_support() const { return id_ == KernelId::FlatTop ? scale_ * floor_ : 0.0; }

  double lipschitz() const {
    if (id_ == KernelId::FlatTop) return scale_ * 2.0 * coef_ * knee_;
    if (power_ == 1) return 2.0 * coef_;
    const double r = 1.0 / std::sqrt(2.0 * power_ - 1.0);
    return 2.0 * power_ * coef_ * r * std::pow(1.0 - r * r, power_ - 1);
  }

  /// int ||u||^alpha K(u) du
  double moment(double alpha) const {
    if (id_ == KernelId::FlatTop) return scale_ * surface_ * flat_moment(alpha);
    return surface_ * coef_ * 0.5 * std::beta(0.5 * (D_ + alpha), power_ + 1.0);
  }

  /// int K(u)^2 du
  double roughness() const {
    if (id_ == KernelId::FlatTop) {
      // c^2 int_0^knee r^(D-1) (1 - r^2)^2 dr + floor^2 (1 - knee^D) / D
      const double D = D_, k = knee_;
      const double poly = std::pow(k, D) / D - 2.0 * std::pow(k, D + 2) / (D + 2) +
                          std::pow(k, D + 4) / (D + 4);
      return scale_ * scale_ * surface_ *
             (coef_ * coef_ * poly + floor_ * floor_ * (1.0 - std::pow(k, D)) / D);
    }
    return surface_ * coef_ * coef_ * 0.5 * std::beta(0.5 * D_, 2.0 * power_ + 1.0);
  }

  KernelSpec spec(double alpha = 1.0) const {
    return KernelSpec{id_, D_, 1.0, lipschitz(), moment(alpha), sup(), inf_on_support()};
  }

 private:
  // int_0^1 r^(D-1+alpha) max(c(1 - r^2), floor) dr
  double flat_moment(double alpha) const {
    const double e = D_ + alpha, k = knee_;
    return coef_ * (std::pow(k, e) / e - std::pow(k, e + 2.0) / (e + 2.0)) +
           floor_ * (1.0 - std::pow(k, e)) / e;
  }

  KernelId id_;
  int D_;
  int power_ = 1;
  double surface_ = 2.0;
  double coef_ = 0.75;
  double floor_ = 0.0;
  double knee_ = 1.0;
  double scale_ = 1.0;
};

inline KernelId parse_kernel_id(const std::string& name) {
  if (name == "epanechnikov") return KernelId::Epanechnikov;
  if (name == "quartic" || name == "biweight") return KernelId::Quartic;
  if (name == "triweight") return KernelId::Triweight;
  if (name == "flat-top" || name == "flattop") return KernelId::FlatTop;
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

inline std::string to_string(KernelId id) {
  switch (id) {
    case KernelId::Epanechnikov: return "epanechnikov";
    case KernelId::Quartic: return "quartic";
    case KernelId::Triweight: return "triweight";
    case KernelId::FlatTop: return "flat-top";
  }
  return "unknown";
}

/// Lipschitz semi-norm of u -> K((u - x)/h) and the suggested omega.
struct SeminormBound {
  double B = 0.0;
  double omega_suggest = 2.0;
};

template <class Scalar>
SeminormBound kernel_seminorm_bound(const Kernel<Scalar>& kernel, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  // B = O(1/h) and h is polynomial in N under both bandwidth rules
  return {kernel.lipschitz() / h, 2.0};
}

}  // namespace cmix
