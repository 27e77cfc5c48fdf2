#pragma once

#include "mfmfe/reference.hpp"

#include <array>
#include <vector>

namespace mfmfe {

template <int Dim>
struct QuadraturePoint {
  Vec<Dim> point;
  double weight;
};

template <int Dim>
using QuadratureRule = std::vector<QuadraturePoint<Dim>>;

/// Gauss-Legendre rule with `n` points on [0, 1], n in 1..5.
inline QuadratureRule<1> gauss_legendre(int n) {
  // nodes/weights on [-1, 1]
  static const std::array<std::vector<double>, 5> nodes = {{
      {0.0},
      {-0.57735026918962576451, 0.57735026918962576451},
      {-0.77459666924148337704, 0.0, 0.77459666924148337704},
      {-0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480,
       0.86113631159405257522},
      {-0.90617984593866399280, -0.53846931010568309104, 0.0, 0.53846931010568309104,
       0.90617984593866399280},
  }};
  static const std::array<std::vector<double>, 5> weights = {{
      {2.0},
      {1.0, 1.0},
      {0.55555555555555555556, 0.88888888888888888889, 0.55555555555555555556},
      {0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
       0.34785484513745385737},
      {0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889,
       0.47862867049936646804, 0.23692688505618908751},
  }};
  if (n < 1 || n > 5) throw DomainError("gauss_legendre: supported orders are 1..5");
  QuadratureRule<1> rule;
  for (int i = 0; i < n; ++i) {
    Vec<1> p;
    p[0] = 0.5 * (nodes[n - 1][i] + 1.0);
    rule.push_back({p, 0.5 * weights[n - 1][i]});
  }
  return rule;
}

/// Tensor-product Gauss rule with `n` points per direction on the unit
/// square / cube.
template <int Dim>
QuadratureRule<Dim> tensor_gauss(int n) {
  const auto g = gauss_legendre(n);
  QuadratureRule<Dim> rule;
  if constexpr (Dim == 2) {
    for (const auto& b : g)
      for (const auto& a : g) rule.push_back({Vec2(a.point[0], b.point[0]), a.weight * b.weight});
  } else {
    for (const auto& c : g)
      for (const auto& b : g)
        for (const auto& a : g)
          rule.push_back({Vec3(a.point[0], b.point[0], c.point[0]),
                          a.weight * b.weight * c.weight});
  }
  return rule;
}

/// Seven-point degree-5 rule on the unit triangle.
inline QuadratureRule<2> triangle_rule7() {
  const double a1 = 0.059715871789769820459, b1 = 0.47014206410511508977;
  const double a2 = 0.79742698535308732240, b2 = 0.10128650732345633880;
  const double w0 = 0.225, w1 = 0.13239415278850618074, w2 = 0.12593918054482715260;
  QuadratureRule<2> r;
  r.push_back({Vec2(1.0 / 3.0, 1.0 / 3.0), w0});
  r.push_back({Vec2(b1, b1), w1});
  r.push_back({Vec2(a1, b1), w1});
  r.push_back({Vec2(b1, a1), w1});
  r.push_back({Vec2(b2, b2), w2});
  r.push_back({Vec2(a2, b2), w2});
  r.push_back({Vec2(b2, a2), w2});
  for (auto& q : r) q.weight *= 0.5;
  return r;
}

/// Four-point degree-2 rule on the unit tetrahedron.
inline QuadratureRule<3> tetrahedron_rule4() {
  const double a = 0.58541019662496845446, b = 0.13819660112501051518;
  const double w = 1.0 / 24.0;
  return {{Vec3(b, b, b), w}, {Vec3(a, b, b), w}, {Vec3(b, a, b), w}, {Vec3(b, b, a), w}};
}

/// Element rule used for volume integrals: "order" is the per-direction
/// Gauss count on tensor cells; simplices use their fixed rules.
template <int Dim>
QuadratureRule<Dim> cell_rule(CellKind kind, int order) {
  if (kind == CellKind::Triangle) {
    if constexpr (Dim == 2) return triangle_rule7();
  } else if (kind == CellKind::Tetrahedron) {
    if constexpr (Dim == 3) return tetrahedron_rule4();
  } else {
    return tensor_gauss<Dim>(order);
  }
  throw DomainError("cell_rule: cell kind does not match the dimension");
}

/// Maps a point of the reference face parameter domain ([0,1] for edges,
/// [0,1]^2 or the unit triangle for 3D faces) to the reference cell.
template <int Dim>
Vec<Dim> face_point(const ReferenceCell<Dim>& ref, int face, const Vec<Dim - 1>& s) {
  const auto& f = ref.faces[face];
  if constexpr (Dim == 2) {
    return (1 - s[0]) * ref.vertices[f[0]] + s[0] * ref.vertices[f[1]];
  } else {
    if (f.size() == 3) {
      return (1 - s[0] - s[1]) * ref.vertices[f[0]] + s[0] * ref.vertices[f[1]] +
             s[1] * ref.vertices[f[2]];
    }
    return (1 - s[0]) * (1 - s[1]) * ref.vertices[f[0]] + s[0] * (1 - s[1]) * ref.vertices[f[1]] +
           s[0] * s[1] * ref.vertices[f[2]] + (1 - s[0]) * s[1] * ref.vertices[f[3]];
  }
}

/// Nodal (P1 or Q1) shape functions of a face in its parameter domain; entry k
/// belongs to face vertex k.
template <int Dim>
std::vector<double> face_shape(int face_vertices, const Vec<Dim - 1>& s) {
  if constexpr (Dim == 2) {
    return {1 - s[0], s[0]};
  } else {
    if (face_vertices == 3) return {1 - s[0] - s[1], s[0], s[1]};
    return {(1 - s[0]) * (1 - s[1]), s[0] * (1 - s[1]), s[0] * s[1], (1 - s[0]) * s[1]};
  }
}

/// Quadrature on a face parameter domain; weights sum to the parameter-domain
/// measure (1 for segments and squares, 1/2 for triangles).
template <int Dim>
QuadratureRule<Dim - 1> face_rule(int face_vertices, int order) {
  if constexpr (Dim == 2) {
    return gauss_legendre(order);
  } else {
    if (face_vertices == 3) return triangle_rule7();
    return tensor_gauss<2>(order);
  }
}

} // namespace mfmfe
