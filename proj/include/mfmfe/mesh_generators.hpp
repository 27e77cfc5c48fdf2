#pragma once

#include "mfmfe/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace mfmfe {

enum class MeshFamily { Uniform, Smooth, Kershaw, RandomPerturbed };

inline std::string_view to_string(MeshFamily f) {
  switch (f) {
  case MeshFamily::Uniform: return "uniform";
  case MeshFamily::Smooth: return "smooth";
  case MeshFamily::Kershaw: return "kershaw";
  case MeshFamily::RandomPerturbed: return "random";
  }
  return "?";
}

inline MeshFamily parse_mesh_family(std::string_view s) {
  if (s == "uniform") return MeshFamily::Uniform;
  if (s == "smooth") return MeshFamily::Smooth;
  if (s == "kershaw") return MeshFamily::Kershaw;
  if (s == "random" || s == "random-perturbed") return MeshFamily::RandomPerturbed;
  throw ParameterError("unknown mesh family '" + std::string(s) + "'");
}

struct MeshFamilyParams {
  MeshFamily family = MeshFamily::Uniform;
  int n = 16;                          ///< cells per direction
  std::optional<std::uint64_t> seed{}; ///< RandomPerturbed only

  void validate() const {
    if (n < 2) throw ParameterError("mesh: n must be at least 2");
    if (family == MeshFamily::RandomPerturbed && !seed) {
      throw ParameterError("mesh: the random family requires a seed");
    }
    if (family != MeshFamily::RandomPerturbed && seed) {
      throw ParameterError("mesh: a seed is only meaningful for the random family");
    }
  }
};

/// Counter-based generator: splitmix64 finaliser applied to a hashed key, so
/// the stream for vertex (i, j) does not depend on generation order.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  static SplitMix64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) {
    SplitMix64 g(seed);
    std::uint64_t key = g.next();
    for (std::uint64_t x : {a, b, c}) {
      SplitMix64 h(key ^ (x * 0xD1B54A32D192ED03ULL));
      key = h.next();
    }
    return SplitMix64(key);
  }

private:
  std::uint64_t state_;
};

namespace detail {

// Piecewise-linear interpolation through (xs[k], ys[k]).
inline double piecewise_linear(double x, const double* xs, const double* ys, int n) {
  if (x <= xs[0]) return ys[0];
  for (int k = 1; k < n; ++k) {
    if (x <= xs[k]) {
      const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
      return (1 - t) * ys[k - 1] + t * ys[k];
    }
  }
  return ys[n - 1];
}

inline Vec2 smooth_map(double x, double y) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double s = std::sin(two_pi * x) * std::sin(two_pi * y);
  return Vec2(x + 0.06 * s, y - 0.05 * s);
}

// Vertical zig-zag displacement: amplitude alternates +-0.25 across four
// bands in x and is modulated by a hat in y that vanishes on y = 0, 1.
inline Vec2 kershaw_map(double x, double y) {
  static constexpr double ax[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  static constexpr double ay[5] = {0.25, -0.25, 0.25, -0.25, 0.25};
  static constexpr double bx[3] = {0.0, 0.5, 1.0};
  static constexpr double by[3] = {0.0, 1.0, 0.0};
  const double amp = piecewise_linear(x, ax, ay, 5);
  const double hat = piecewise_linear(y, bx, by, 3);
  return Vec2(x, y + amp * hat);
}

inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

} // namespace detail

/// Convexity test for a counterclockwise quadrilateral: all consecutive edge
/// cross products strictly positive.
inline bool is_convex_quadrilateral(const std::array<Vec2, 4>& r) {
  for (int i = 0; i < 4; ++i) {
    const Vec2 e0 = r[(i + 1) % 4] - r[i];
    const Vec2 e1 = r[(i + 2) % 4] - r[(i + 1) % 4];
    if (!(detail::cross(e0, e1) > 0.0)) return false;
  }
  return true;
}

/// N x N quadrilateral mesh of the unit square. Cell (i, j) has index
/// j*n + i, vertex (i, j) has index j*(n+1) + i. All boundary faces are
/// marked Dirichlet.
inline Mesh<2> generate_mesh(const MeshFamilyParams& params) {
  params.validate();
  const int n = params.n;
  const double h = 1.0 / n;
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x = i * h, y = j * h;
      const bool boundary = i == 0 || j == 0 || i == n || j == n;
      switch (params.family) {
      case MeshFamily::Uniform: vertices.emplace_back(x, y); break;
      case MeshFamily::Smooth: vertices.push_back(detail::smooth_map(x, y)); break;
      case MeshFamily::Kershaw: vertices.push_back(detail::kershaw_map(x, y)); break;
      case MeshFamily::RandomPerturbed: {
        if (boundary) {
          vertices.emplace_back(x, y);
          break;
        }
        auto g = SplitMix64::stream(*params.seed, static_cast<std::uint64_t>(n),
                                    static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
        const double rx = g.uniform(), ry = g.uniform();
        const double amp = std::sqrt(2.0) / 3.0 * h;
        vertices.emplace_back(x + amp * (rx - 0.5), y + amp * (ry - 0.5));
        break;
      }
      }
    }
  }
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v0 = j * (n + 1) + i;
      Cell c{CellKind::Quadrilateral, {v0, v0 + 1, v0 + n + 2, v0 + n + 1}};
      const std::array<Vec2, 4> r = {vertices[c.vertices[0]], vertices[c.vertices[1]],
                                     vertices[c.vertices[2]], vertices[c.vertices[3]]};
      if (!is_convex_quadrilateral(r)) {
        throw MeshGenerationError("generate_mesh(" + std::string(to_string(params.family)) +
                                  ", n=" + std::to_string(n) + "): cell " +
                                  std::to_string(j * n + i) + " (i=" + std::to_string(i) +
                                  ", j=" + std::to_string(j) + ") is not convex");
      }
      cells.push_back(std::move(c));
    }
  }
  return Mesh<2>(std::move(vertices), std::move(cells));
}

} // namespace mfmfe
