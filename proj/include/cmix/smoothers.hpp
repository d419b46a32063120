#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cmix/kernels.hpp"

namespace cmix {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Estimates on a grid.  Undefined points (empty kernel window) carry NaN
/// and defined[g] == false; they are never reported as 0.
template <class Scalar>
struct Estimate {
  VectorX<Scalar> values;
  Eigen::Array<bool, Eigen::Dynamic, 1> defined;
  /// Sample points dropped because the first-stage fit was undefined there
  /// (two-step variance only).
  Eigen::Index dropped = 0;

  Eigen::Index size() const { return values.size(); }
  Eigen::Index defined_count() const { return defined.count(); }
  bool any_defined() const { return defined.any(); }
};

/// Evaluation points (G x D), optionally restricted to [margin, 1 - margin]^D.
template <class Scalar>
struct EstimateGrid {
  MatrixX<Scalar> points;
  Scalar interior_margin = Scalar(0);
};

/// Equispaced one-dimensional grid on [margin, 1 - margin].
template <class Scalar = double>
EstimateGrid<Scalar> interior_grid(Scalar margin, Eigen::Index count) {
  if (count < 1) throw std::invalid_argument("grid needs at least one point");
  if (!(margin >= 0) || !(margin < Scalar(0.5)))
    throw std::invalid_argument("interior margin must lie in [0, 0.5)");
  EstimateGrid<Scalar> g;
  g.interior_margin = margin;
  g.points = count == 1 ? MatrixX<Scalar>::Constant(1, 1, Scalar(0.5))
                        : MatrixX<Scalar>(VectorX<Scalar>::LinSpaced(count, margin, 1 - margin));
  return g;
}

/// Equispaced y grid on [lo, hi] with spacing at most max_step.
template <class Scalar = double>
VectorX<Scalar> spaced_grid(Scalar lo, Scalar hi, Scalar max_step) {
  if (!(hi >= lo) || !(max_step > 0)) throw std::invalid_argument("bad y-grid range");
  const auto count = static_cast<Eigen::Index>(std::ceil((hi - lo) / max_step)) + 1;
  return VectorX<Scalar>::LinSpaced(std::max<Eigen::Index>(count, 2), lo, hi);
}

// ---------------------------------------------------------------------------
// bandwidth rules

/// ((ln N)^((gamma+1)/gamma) / N)^(1/(2 alpha + D))
inline double bandwidth_geometric(double N, double alpha, int D, double gamma) {
  if (N < 2.0) throw std::invalid_argument("bandwidth rule needs N >= 2");
  return std::pow(std::pow(std::log(N), (gamma + 1.0) / gamma) / N, 1.0 / (2.0 * alpha + D));
}

/// (ln N / N)^(1/(2 alpha + D))
inline double bandwidth_optimal(double N, double alpha, int D) {
  if (N < 2.0) throw std::invalid_argument("bandwidth rule needs N >= 2");
  return std::pow(std::log(N) / N, 1.0 / (2.0 * alpha + D));
}

/// Conditional-mode rule (ln N / N)^(1/(2 alpha + D + 1)).
inline double bandwidth_mode(double N, double alpha, int D) {
  if (N < 2.0) throw std::invalid_argument("bandwidth rule needs N >= 2");
  return std::pow(std::log(N) / N, 1.0 / (2.0 * alpha + D + 1.0));
}

namespace detail {

/// Visits the sample points within sup-distance `radius` of a query.  In
/// one dimension the points are sorted once and visited through a window;
/// otherwise every point is visited and the kernel rejects the rest.
template <class Scalar>
class Neighbors {
 public:
  explicit Neighbors(const MatrixX<Scalar>& x) : x_(x) {
    if (x.cols() == 1) {
      order_.resize(static_cast<std::size_t>(x.rows()));
      std::iota(order_.begin(), order_.end(), Eigen::Index{0});
      std::stable_sort(order_.begin(), order_.end(),
                       [&x](Eigen::Index a, Eigen::Index b) { return x(a, 0) < x(b, 0); });
      sorted_.resize(order_.size());
      for (std::size_t k = 0; k < order_.size(); ++k) sorted_[k] = x(order_[k], 0);
    }
  }

  template <class Point, class F>
  void visit(const Point& q, Scalar radius, F&& f) const {
    if (x_.cols() == 1) {
      auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), q(0) - radius);
      auto hi = std::upper_bound(lo, sorted_.end(), q(0) + radius);
      for (auto it = lo; it != hi; ++it) f(order_[static_cast<std::size_t>(it - sorted_.begin())]);
    } else {
      for (Eigen::Index i = 0; i < x_.rows(); ++i) f(i);
    }
  }

 private:
  const MatrixX<Scalar>& x_;
  std::vector<Eigen::Index> order_;
  std::vector<Scalar> sorted_;
};

template <class Scalar>
void check_inputs(const MatrixX<Scalar>& x, Scalar h, const Kernel<Scalar>& kernel) {
  if (!(h > 0)) throw std::invalid_argument("bandwidth h must be > 0");
  if (x.rows() == 0) throw std::invalid_argument("no observations");
  if (x.cols() != kernel.dim())
    throw std::invalid_argument("kernel dimension does not match data dimension");
}

template <class Scalar>
Scalar scaled_kernel(const MatrixX<Scalar>& x, Eigen::Index i,
                     const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& q,
                     Scalar h, const Kernel<Scalar>& kernel) {
  return kernel.at_squared((x.row(i) - q).squaredNorm() / (h * h));
}

template <class Scalar>
Estimate<Scalar> make_estimate(Eigen::Index n) {
  Estimate<Scalar> e;
  e.values = VectorX<Scalar>::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
  e.defined = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, false);
  return e;
}

// Kernel-weighted average of `values` at each query row.
template <class Scalar>
Estimate<Scalar> weighted_average(const Neighbors<Scalar>& nb, const MatrixX<Scalar>& x,
                                  const VectorX<Scalar>& values, const MatrixX<Scalar>& queries,
                                  Scalar h, const Kernel<Scalar>& kernel) {
  auto est = make_estimate<Scalar>(queries.rows());
  const Scalar radius = h * Kernel<Scalar>::support_radius();
  for (Eigen::Index g = 0; g < queries.rows(); ++g) {
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> q = queries.row(g);
    Scalar num = 0, den = 0;
    nb.visit(q, radius, [&](Eigen::Index i) {
      const Scalar w = scaled_kernel(x, i, q, h, kernel);
      num += w * values[i];
      den += w;
    });
    if (den > 0) {
      est.values[g] = num / den;
      est.defined[g] = true;
    }
  }
  return est;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// estimators

/// Kernel density estimate (N h^D)^-1 sum_i K((X_i - x)/h).
template <class Scalar>
VectorX<Scalar> kde(const MatrixX<Scalar>& x, Scalar h, const Kernel<Scalar>& kernel,
                    const MatrixX<Scalar>& grid) {
  detail::check_inputs(x, h, kernel);
  detail::Neighbors<Scalar> nb(x);
  const Scalar norm = Scalar(1) / (Scalar(x.rows()) * std::pow(h, Scalar(x.cols())));
  VectorX<Scalar> out(grid.rows());
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> q = grid.row(g);
    Scalar acc = 0;
    nb.visit(q, h, [&](Eigen::Index i) { acc += detail::scaled_kernel(x, i, q, h, kernel); });
    out[g] = acc * norm;
  }
  return out;
}

/// Nadaraya-Watson mean sum K_i Y_i / sum K_i.
template <class Scalar>
Estimate<Scalar> nw_mean(const MatrixX<Scalar>& x, const VectorX<Scalar>& y, Scalar h,
                         const Kernel<Scalar>& kernel, const MatrixX<Scalar>& grid) {
  detail::check_inputs(x, h, kernel);
  if (y.size() != x.rows()) throw std::invalid_argument("|x| != |y|");
  detail::Neighbors<Scalar> nb(x);
  auto est = detail::weighted_average(nb, x, y, grid, h, kernel);
  if (!est.any_defined())
    throw std::runtime_error("conditional mean undefined at every grid point");
  return est;
}

/// Two-step variance: smooth the squared residuals (Y_i - m(X_i))^2 of a
/// first-stage Nadaraya-Watson fit with the same bandwidth.
template <class Scalar>
Estimate<Scalar> two_step_variance(const MatrixX<Scalar>& x, const VectorX<Scalar>& y,
                                   Scalar h, const Kernel<Scalar>& kernel,
                                   const MatrixX<Scalar>& grid) {
  detail::check_inputs(x, h, kernel);
  if (y.size() != x.rows()) throw std::invalid_argument("|x| != |y|");
  detail::Neighbors<Scalar> nb(x);
  const auto fitted = detail::weighted_average(nb, x, y, x, h, kernel);

  // points whose own fit is undefined are dropped from the second stage;
  // with K(0) > 0 this only happens for kernels vanishing at the origin
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (fitted.defined[i]) keep.push_back(i);
  const auto n_keep = static_cast<Eigen::Index>(keep.size());
  MatrixX<Scalar> xs(n_keep, x.cols());
  VectorX<Scalar> resid(n_keep);
  for (Eigen::Index k = 0; k < n_keep; ++k) {
    const auto i = keep[static_cast<std::size_t>(k)];
    xs.row(k) = x.row(i);
    const Scalar r = y[i] - fitted.values[i];
    resid[k] = r * r;
  }
  if (n_keep == 0) throw std::runtime_error("first-stage mean undefined at every sample point");
  detail::Neighbors<Scalar> nb2(xs);
  auto est = detail::weighted_average(nb2, xs, resid, grid, h, kernel);
  est.dropped = x.rows() - n_keep;
  if (!est.any_defined())
    throw std::runtime_error("conditional variance undefined at every grid point");
  return est;
}

/// Conditional density f(y|x) = sum K_i L((Y_i - y)/h) / (h sum K_i).
/// Rows follow grid_x, columns grid_y; undefined rows are NaN.
template <class Scalar>
struct ConditionalDensity {
  MatrixX<Scalar> values;
  Eigen::Array<bool, Eigen::Dynamic, 1> defined;
};

template <class Scalar>
ConditionalDensity<Scalar> conditional_density(const MatrixX<Scalar>& x,
                                               const VectorX<Scalar>& y, Scalar h,
                                               const Kernel<Scalar>& kx,
                                               const Kernel<Scalar>& ky,
                                               const MatrixX<Scalar>& grid_x,
                                               const VectorX<Scalar>& grid_y) {
  detail::check_inputs(x, h, kx);
  if (y.size() != x.rows()) throw std::invalid_argument("|x| != |y|");
  if (ky.dim() != 1) throw std::invalid_argument("response kernel must be one-dimensional");
  if (!std::is_sorted(grid_y.data(), grid_y.data() + grid_y.size()))
    throw std::invalid_argument("y grid must be sorted ascending");
  detail::Neighbors<Scalar> nb(x);
  ConditionalDensity<Scalar> out;
  out.values = MatrixX<Scalar>::Constant(grid_x.rows(), grid_y.size(),
                                         std::numeric_limits<Scalar>::quiet_NaN());
  out.defined = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(grid_x.rows(), false);

  std::vector<Eigen::Index> idx;
  std::vector<Scalar> w;
  for (Eigen::Index g = 0; g < grid_x.rows(); ++g) {
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> q = grid_x.row(g);
    idx.clear();
    w.clear();
    Scalar den = 0;
    nb.visit(q, h, [&](Eigen::Index i) {
      const Scalar k = detail::scaled_kernel(x, i, q, h, kx);
      if (k > 0) {
        idx.push_back(i);
        w.push_back(k);
        den += k;
      }
    });
    if (!(den > 0)) continue;
    out.defined[g] = true;
    // each observation only touches the y-grid points within h of Y_i
    auto row = out.values.row(g);
    row.setZero();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Scalar yi = y[idx[k]];
      const auto lo = std::lower_bound(grid_y.data(), grid_y.data() + grid_y.size(), yi - h);
      const auto hi = std::upper_bound(lo, grid_y.data() + grid_y.size(), yi + h);
      for (auto it = lo; it != hi; ++it) row[it - grid_y.data()] += w[k] * ky((yi - *it) / h);
    }
    row /= h * den;
  }
  if (!out.defined.any())
    throw std::runtime_error("conditional density undefined at every grid point");
  return out;
}

/// Grid argmax of the conditional density; ties go to the smallest y.
template <class Scalar>
Estimate<Scalar> modal_regression(const MatrixX<Scalar>& x, const VectorX<Scalar>& y, Scalar h,
                                  const Kernel<Scalar>& kx, const Kernel<Scalar>& ky,
                                  const MatrixX<Scalar>& grid_x,
                                  const VectorX<Scalar>& grid_y) {
  const auto dens = conditional_density(x, y, h, kx, ky, grid_x, grid_y);
  auto est = detail::make_estimate<Scalar>(grid_x.rows());
  for (Eigen::Index g = 0; g < grid_x.rows(); ++g) {
    if (!dens.defined[g]) continue;
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < grid_y.size(); ++c)
      if (dens.values(g, c) > dens.values(g, best)) best = c;
    est.values[g] = grid_y[best];
    est.defined[g] = true;
  }
  return est;
}

// ---------------------------------------------------------------------------

struct SupError {
  double value = 0.0;           // max |estimate - truth| over defined points
  Eigen::Index excluded = 0;    // undefined points skipped
};

template <class Scalar>
SupError sup_error(const Estimate<Scalar>& est, const std::function<double(double)>& truth,
                   const MatrixX<Scalar>& grid) {
  if (est.size() != grid.rows()) throw std::invalid_argument("estimate/grid size mismatch");
  SupError s;
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    if (!est.defined[g]) {
      ++s.excluded;
      continue;
    }
    s.value = std::max(s.value, std::abs(double(est.values[g]) - truth(double(grid(g, 0)))));
  }
  return s;
}

template <class Scalar>
SupError sup_error(const VectorX<Scalar>& values, const std::function<double(double)>& truth,
                   const MatrixX<Scalar>& grid) {
  Estimate<Scalar> e;
  e.values = values;
  e.defined = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(values.size(), true);
  return sup_error(e, truth, grid);
}

}  // namespace cmix
