#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "softbody/error.hpp"
#include "softbody/model.hpp"

namespace softbody::testing {

#define EXPECT_ERROR_CODE(stmt, expected)                                      \
  do {                                                                         \
    try {                                                                      \
      stmt;                                                                    \
      ADD_FAILURE() << "expected " << ::softbody::to_string(expected);         \
    } catch (const ::softbody::Error& e) {                                     \
      EXPECT_EQ(e.code(), expected) << e.what();                               \
    }                                                                          \
  } while (0)

inline void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

// Axis-aligned box [0,sx]x[0,sy]x[0,sz] as 8 particles and 12 outward triangles.
inline SoftBody make_box(double sx = 1.0, double sy = 1.0, double sz = 1.0) {
  SoftBody b;
  b.id = allocate_body_id();
  b.dimension = Dimension::Three;
  b.pressure_coefficient = 0.0;
  Layer outer{std::string(kOuterLayer), {}, 0};
  for (int i = 0; i < 8; ++i) {
    Particle p;
    p.id = i;
    p.mass = 0.125;
    p.position = {(i & 1) * sx, ((i >> 1) & 1) * sy, ((i >> 2) & 1) * sz};
    b.particles.push_back(p);
    outer.particles.push_back(i);
  }
  b.layers.push_back(outer);
  // Each quad listed counter-clockwise as seen from outside.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    add_face(b, q[0], q[1], q[2]);
    add_face(b, q[0], q[2], q[3]);
  }
  return b;
}

// Independent volume: tetrahedra fanned from the vertex mean, 3x3 determinants by hand.
inline double tetra_fan_volume(const std::vector<Vec3>& pts, const std::vector<std::array<int, 3>>& tris) {
  Vec3 apex;
  for (const Vec3& p : pts) apex = apex + p;
  apex = apex / static_cast<double>(pts.size());
  double v = 0.0;
  for (const auto& t : tris) {
    const Vec3 a = pts[t[0]] - apex, b = pts[t[1]] - apex, c = pts[t[2]] - apex;
    const double det = a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x);
    v += det / 6.0;
  }
  return v;
}

}  // namespace softbody::testing
