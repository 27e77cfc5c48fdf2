#pragma once

#include "mfmfe/core.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mfmfe {

struct MaternParams {
  double nu = 0.5;
  double range = 0.3;
  double variance = 1.0;

  void validate() const {
    if (!(nu > 0.0) || !(range > 0.0) || !(variance > 0.0)) {
      throw ParameterError("matern: nu, range and variance must be positive");
    }
    if (nu != 0.5 && nu != 1.5) {
      throw ParameterError("matern: only nu = 0.5 and nu = 1.5 are supported (got " +
                           std::to_string(nu) + ")");
    }
  }
};

/// Matern covariance in the (2 sqrt(nu) h / r) scaling, closed forms for
/// nu = 1/2 and nu = 3/2.
inline double matern_cov(const MaternParams& prm, double h) {
  prm.validate();
  if (!(h >= 0.0)) throw DomainError("matern_cov: negative distance");
  const double x = 2.0 * std::sqrt(prm.nu) * h / prm.range;
  if (prm.nu == 0.5) return prm.variance * std::exp(-x);
  return prm.variance * (1.0 + x) * std::exp(-x);
}

/// Cell-centred values of log k on an nx x ny grid of the unit square,
/// stored row-major (index j*nx + i, i along x).
struct FieldSample {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  MaternParams params;

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }

  std::vector<double> permeability() const {
    std::vector<double> k(values.size());
    for (std::size_t a = 0; a < values.size(); ++a) k[a] = std::exp(values[a]);
    return k;
  }
};

namespace detail {

// Standard normals by Box-Muller on mt19937_64, so streams are identical
// across standard library implementations.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

private:
  double uniform() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// In-place 2D DFT of an mx x my array stored with x fastest.
inline void fft2(std::vector<std::complex<double>>& a, int mx, int my, bool inverse = false) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<std::complex<double>> in, out;
  in.resize(mx);
  for (int j = 0; j < my; ++j) {
    std::copy(a.begin() + static_cast<std::ptrdiff_t>(j) * mx,
              a.begin() + static_cast<std::ptrdiff_t>(j + 1) * mx, in.begin());
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    std::copy(out.begin(), out.end(), a.begin() + static_cast<std::ptrdiff_t>(j) * mx);
  }
  in.resize(my);
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) in[j] = a[static_cast<std::size_t>(j) * mx + i];
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    for (int j = 0; j < my; ++j) a[static_cast<std::size_t>(j) * mx + i] = out[j];
  }
}

} // namespace detail

/// Stationary Gaussian field sampler on a regular cell-centred grid.
///
/// Uses circulant embedding of the covariance on a periodic grid of
/// padding * (nx, ny) cells, increasing the padding until the embedded
/// spectrum is non-negative. Grids with at most 64 x 64 cells fall back to a
/// dense Cholesky factorisation if no admissible embedding is found.
class GaussianFieldSampler {
public:
  GaussianFieldSampler(int nx, int ny, MaternParams params, int max_padding = 8)
      : nx_(nx), ny_(ny), prm_(params) {
    prm_.validate();
    if (nx < 1 || ny < 1) throw ParameterError("random field: grid dimensions must be positive");
    for (int pad = 2; pad <= max_padding; ++pad) {
      if (try_embedding(pad)) return;
    }
    if (static_cast<long>(nx) * ny <= 64L * 64L) {
      build_dense();
      return;
    }
    throw SamplingError("random field: circulant embedding is not positive semidefinite up to "
                        "padding " + std::to_string(max_padding) +
                        "; increase the padding factor or reduce the correlation range");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  bool uses_circulant() const { return dense_.size() == 0; }
  int padding() const { return padding_; }

  FieldSample sample(std::uint64_t seed) const {
    FieldSample out;
    out.nx = nx_;
    out.ny = ny_;
    out.seed = seed;
    out.params = prm_;
    out.values.resize(static_cast<std::size_t>(nx_) * ny_);
    detail::NormalStream normal(seed);
    if (uses_circulant()) {
      std::vector<std::complex<double>> a(sqrt_lambda_.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double re = normal.next();
        const double im = normal.next();
        a[k] = sqrt_lambda_[k] * std::complex<double>(re, im);
      }
      detail::fft2(a, mx_, my_);
      for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i)
          out.values[static_cast<std::size_t>(j) * nx_ + i] =
              a[static_cast<std::size_t>(j) * mx_ + i].real();
    } else {
      Eigen::VectorXd xi(nx_ * ny_);
      for (int k = 0; k < xi.size(); ++k) xi[k] = normal.next();
      const Eigen::VectorXd y = dense_ * xi;
      for (int k = 0; k < y.size(); ++k) out.values[k] = y[k];
    }
    return out;
  }

private:
  double distance(int di, int dj) const {
    return std::hypot(di / static_cast<double>(nx_), dj / static_cast<double>(ny_));
  }

  bool try_embedding(int pad) {
    const int mx = pad * nx_, my = pad * ny_;
    std::vector<std::complex<double>> c(static_cast<std::size_t>(mx) * my);
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < mx; ++i)
        c[static_cast<std::size_t>(j) * mx + i] =
            matern_cov(prm_, distance(std::min(i, mx - i), std::min(j, my - j)));
    detail::fft2(c, mx, my);
    double lmax = 0.0, lmin = 0.0;
    for (const auto& z : c) {
      lmax = std::max(lmax, z.real());
      lmin = std::min(lmin, z.real());
    }
    if (lmin < -1e-10 * lmax) return false;
    const double M = static_cast<double>(mx) * my;
    sqrt_lambda_.resize(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) sqrt_lambda_[k] = std::sqrt(std::max(0.0, c[k].real()) / M);
    mx_ = mx;
    my_ = my;
    padding_ = pad;
    return true;
  }

  void build_dense() {
    const int n = nx_ * ny_;
    Eigen::MatrixXd C(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        C(a, b) = matern_cov(prm_, distance(a % nx_ - b % nx_, a / nx_ - b / nx_));
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success) {
      throw SamplingError("random field: dense covariance factorisation failed; the covariance "
                          "matrix is not positive definite at this resolution");
    }
    dense_ = llt.matrixL();
    padding_ = 0;
  }

  int nx_, ny_;
  MaternParams prm_;
  int mx_ = 0, my_ = 0, padding_ = 0;
  std::vector<double> sqrt_lambda_;
  Eigen::MatrixXd dense_;
};

/// One draw of log k on an nx x ny cell-centred grid of the unit square.
inline FieldSample sample_log_normal_field(int nx, int ny, const MaternParams& params,
                                           std::uint64_t seed) {
  return GaussianFieldSampler(nx, ny, params).sample(seed);
}

} // namespace mfmfe
