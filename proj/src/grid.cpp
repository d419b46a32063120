#include "cmix/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace cmix {

MixingSpec MixingSpec::geometric(double nu, double b, double gamma) {
  MixingSpec s{Kind::Geometric, nu, b, gamma};
  s.validate();
  return s;
}

MixingSpec MixingSpec::algebraic(double b, double gamma) {
  MixingSpec s{Kind::Algebraic, 0.0, b, gamma};
  s.validate();
  return s;
}

void MixingSpec::validate() const {
  if (kind == Kind::Geometric && !(nu > 1.0))
    throw std::invalid_argument("geometric mixing requires nu > 1");
  if (!(b > 0.0)) throw std::invalid_argument("mixing rate b must be > 0");
  if (!(gamma > 0.0))
    throw std::invalid_argument("mixing exponent gamma must be > 0");
}

double MixingSpec::coefficient(double r) const {
  if (r < 0.0) throw std::invalid_argument("mixing distance must be >= 0");
  if (kind == Kind::Geometric) return std::pow(nu, -b * std::pow(r, gamma));
  if (r == 0.0) return 1.0;
  return std::min(1.0, b / std::pow(r, gamma));
}

double MixingSpec::log_nu(double x) const { return std::log(x) / std::log(nu); }

std::string to_string(MixingSpec::Kind kind) {
  return kind == MixingSpec::Kind::Geometric ? "geometric" : "algebraic";
}

SampleGrid::SampleGrid(int d, int d_eff, std::int64_t n0,
                       std::vector<std::int64_t> n_k)
    : d_(d), d_eff_(d_eff), n0_(n0), n_k_(std::move(n_k)) {
  if (d < 1) throw std::invalid_argument("grid dimension d must be >= 1");
  if (d_eff < 1 || d_eff > d)
    throw std::invalid_argument("effective dimension must satisfy 0 < d' <= d");
  if (static_cast<int>(n_k_.size()) != d_eff)
    throw std::invalid_argument("need exactly d' diverging counts n_k");
  if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
  for (auto n : n_k_)
    if (n < 1) throw std::invalid_argument("every n_k must be >= 1");
  m_ = 1;
  for (int k = 0; k < d - d_eff; ++k) m_ *= n0;
  n_hat_ = std::accumulate(n_k_.begin(), n_k_.end(), std::int64_t{1},
                           std::multiplies<>());
}

SampleGrid SampleGrid::series(std::int64_t n) { return SampleGrid(1, 1, 1, {n}); }

std::vector<std::int64_t> SampleGrid::extents() const {
  std::vector<std::int64_t> ext(static_cast<std::size_t>(d_ - d_eff_), n0_);
  ext.insert(ext.end(), n_k_.begin(), n_k_.end());
  return ext;
}

bool SampleGrid::satisfies_log_condition() const {
  auto lo = *std::min_element(n_k_.begin(), n_k_.end());
  return std::log(static_cast<double>(n_hat_)) <= static_cast<double>(lo);
}

std::vector<std::int64_t> SampleGrid::to_lattice(std::int64_t scalar) const {
  if (scalar < 1 || scalar > size())
    throw std::out_of_range("scalar index outside 1..N");
  auto ext = extents();
  std::vector<std::int64_t> v(ext.size());
  std::int64_t rest = scalar - 1;
  for (std::size_t k = ext.size(); k-- > 0;) {
    v[k] = rest % ext[k] + 1;
    rest /= ext[k];
  }
  return v;
}

std::int64_t SampleGrid::to_scalar(const std::vector<std::int64_t>& lattice) const {
  auto ext = extents();
  if (lattice.size() != ext.size())
    throw std::invalid_argument("lattice vector has wrong dimension");
  std::int64_t s = 0;
  for (std::size_t k = 0; k < ext.size(); ++k) {
    if (lattice[k] < 1 || lattice[k] > ext[k])
      throw std::out_of_range("lattice coordinate outside grid");
    s = s * ext[k] + (lattice[k] - 1);
  }
  return s + 1;
}

std::int64_t sup_distance(const std::vector<std::int64_t>& a,
                          const std::vector<std::int64_t>& b) {
  std::int64_t r = 0;
  for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, std::abs(a[k] - b[k]));
  return r;
}

}  // namespace cmix
