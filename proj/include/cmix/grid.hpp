#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmix {

/// Decay law of the C-mixing coefficient C(r).
///
/// Geometric: C(r) = nu^(-b r^gamma).  Algebraic: C(r) = b / r^gamma.
struct MixingSpec {
  enum class Kind { Geometric, Algebraic };

  Kind kind = Kind::Geometric;
  double nu = 2.718281828459045;  // geometric only
  double b = 1.0;
  double gamma = 1.0;

  static MixingSpec geometric(double nu, double b, double gamma);
  static MixingSpec algebraic(double b, double gamma);

  void validate() const;

  /// Coefficient at distance r >= 0.  The algebraic law is capped at 1
  /// near r = 0, where b / r^gamma would blow up.
  double coefficient(double r) const;

  /// ln(x) / ln(nu).
  double log_nu(double x) const;
};

std::string to_string(MixingSpec::Kind kind);

/// Index geometry on Z^{d+}.  The first d - d_eff directions hold n0
/// locations each; the last d_eff directions hold n_k locations.
class SampleGrid {
 public:
  SampleGrid() = default;
  SampleGrid(int d, int d_eff, std::int64_t n0, std::vector<std::int64_t> n_k);

  /// One-dimensional time series of length n.
  static SampleGrid series(std::int64_t n);

  int d() const { return d_; }
  int d_eff() const { return d_eff_; }
  std::int64_t n0() const { return n0_; }
  const std::vector<std::int64_t>& diverging_counts() const { return n_k_; }

  /// m = n0^(d - d_eff)
  std::int64_t m() const { return m_; }
  /// N-hat = product of diverging counts
  std::int64_t n_hat() const { return n_hat_; }
  /// N = m * N-hat
  std::int64_t size() const { return m_ * n_hat_; }

  /// Per-direction extents, length d.
  std::vector<std::int64_t> extents() const;

  /// log(N-hat) <= min n_k.
  bool satisfies_log_condition() const;

  /// Scalar index 1..N to 1-based lattice vector (length d).  Row-major,
  /// the fixed directions vary slowest.
  std::vector<std::int64_t> to_lattice(std::int64_t scalar) const;
  std::int64_t to_scalar(const std::vector<std::int64_t>& lattice) const;

 private:
  int d_ = 1;
  int d_eff_ = 1;
  std::int64_t n0_ = 1;
  std::vector<std::int64_t> n_k_{1};
  std::int64_t m_ = 1;
  std::int64_t n_hat_ = 1;
};

/// Sup-norm distance between lattice vectors.
std::int64_t sup_distance(const std::vector<std::int64_t>& a,
                          const std::vector<std::int64_t>& b);

}  // namespace cmix
