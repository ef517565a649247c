#include <algorithm>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "softbody/model.hpp"
#include "support.hpp"

namespace softbody {
namespace {

using testing::expect_vec_near;
using testing::make_box;
using testing::tetra_fan_volume;

std::map<SpringKind, int> count_kinds(const SoftBody& b) {
  std::map<SpringKind, int> out;
  for (const Spring& s : b.springs) ++out[s.kind];
  return out;
}

TEST(CreateDefault, OneDimensionalChain) {
  const SoftBody b = create_default_soft_body(Dimension::One);
  EXPECT_EQ(b.particles.size(), 8u);
  EXPECT_EQ(b.springs.size(), 7u);
  EXPECT_TRUE(b.faces.empty());
  EXPECT_FALSE(b.pressure_coefficient.has_value());
  for (const Spring& s : b.springs) {
    EXPECT_EQ(s.kind, SpringKind::Structural);
    EXPECT_NEAR(s.rest_length, 1.0 / 7.0, 1e-12);
  }
}

TEST(CreateDefault, TwoDimensionalRings) {
  const SoftBody b = create_default_soft_body(Dimension::Two);
  EXPECT_EQ(b.particles.size(), 32u);
  EXPECT_EQ(b.springs.size(), 80u);
  auto kinds = count_kinds(b);
  EXPECT_EQ(kinds[SpringKind::Structural], 32);
  EXPECT_EQ(kinds[SpringKind::Radius], 16);
  EXPECT_EQ(kinds[SpringKind::Shear], 32);
  for (const Particle& p : b.particles) EXPECT_DOUBLE_EQ(p.mass, 1.0 / 32.0);
  ASSERT_EQ(b.layers.size(), 2u);
  EXPECT_EQ(b.layers[0].label, "outer");
  EXPECT_EQ(b.layers[1].label, "inner");
  EXPECT_EQ(b.pressure_coefficient, 5.0);
  EXPECT_EQ(b.color, (Color{0.8, 0.2, 0.2}));
}

TEST(CreateDefault, ThreeDimensionalSpheres) {
  const SoftBody b = create_default_soft_body(Dimension::Three);
  // 8 x 6 grid plus two poles per layer.
  EXPECT_EQ(b.particles.size(), 100u);
  // Outer surface only: a closed UV sphere has 2*8*6 = 96 triangles.
  EXPECT_EQ(b.faces.size(), 96u);
  EXPECT_TRUE(is_closed_surface(b.faces));
  auto kinds = count_kinds(b);
  // Edges of the sphere: 3V - 6 = 144 per layer.
  EXPECT_EQ(kinds[SpringKind::Structural], 288);
  EXPECT_EQ(kinds[SpringKind::Radius], 50);
  EXPECT_EQ(kinds[SpringKind::Shear], 288);
  EXPECT_GT(compute_volume(b), 0.0);
}

TEST(CreateSoftBody, SmallRingRadii) {
  CreationParams p = default_creation_params(Dimension::Two);
  p.particle_count = 4;
  const SoftBody b = create_soft_body(p);
  ASSERT_EQ(b.particles.size(), 8u);
  for (int id : b.layers[0].particles) EXPECT_NEAR(norm(b.particles[id].position), 1.0, 1e-12);
  for (int id : b.layers[1].particles) EXPECT_NEAR(norm(b.particles[id].position), 0.5, 1e-12);
}

TEST(CreateSoftBody, MassSplitEvenly) {
  CreationParams p = default_creation_params(Dimension::Two);
  p.particle_count = 4;
  p.total_mass = 2.0;
  for (const Particle& q : create_soft_body(p).particles) EXPECT_EQ(q.mass, 0.25);
}

TEST(CreateSoftBody, DensityDeterminesMass) {
  CreationParams p = default_creation_params(Dimension::One);
  p.size = 2.0;
  p.density = 3.0;
  const SoftBody b = create_soft_body(p);
  EXPECT_NEAR(b.total_mass(), 6.0, 1e-12);
}

TEST(CreateSoftBody, ThreeLayersGetMiddleLabel) {
  CreationParams p = default_creation_params(Dimension::Two);
  p.layer_count = 3;
  const SoftBody b = create_soft_body(p);
  ASSERT_EQ(b.layers.size(), 3u);
  EXPECT_EQ(b.layers[1].label, "layer1");
  EXPECT_EQ(b.layers[2].label, "inner");
}

TEST(CreateSoftBody, TwoLayerSpheresHaveRadiusSprings) {
  CreationParams p = default_creation_params(Dimension::Three);
  const SoftBody b = create_soft_body(p);
  for (const Spring& s : b.springs) {
    if (s.kind != SpringKind::Radius) continue;
    const Vec3 a = b.particles[s.head].position;
    const Vec3 c = b.particles[s.tail].position;
    // Corresponding vertices sit on the same ray from the center.
    expect_vec_near(a / norm(a), c / norm(c), 1e-12);
    EXPECT_NEAR(s.rest_length, 0.5, 1e-12);
  }
}

TEST(CreateSoftBody, RejectsBadParams) {
  auto with = [](auto mutate) {
    CreationParams p = default_creation_params(Dimension::Two);
    mutate(p);
    return p;
  };
  EXPECT_ERROR_CODE(create_soft_body(with([](CreationParams& p) { p.particle_count = 0; })), ErrorCode::InvalidParams);
  EXPECT_ERROR_CODE(create_soft_body(with([](CreationParams& p) { p.total_mass = 0.0; })), ErrorCode::InvalidParams);
  EXPECT_ERROR_CODE(create_soft_body(with([](CreationParams& p) { p.size = -1.0; })), ErrorCode::InvalidParams);
  EXPECT_ERROR_CODE(create_soft_body(with([](CreationParams& p) { p.inner_ratio = 1.0; })), ErrorCode::InvalidParams);
  EXPECT_ERROR_CODE(create_soft_body(with([](CreationParams& p) { p.inner_ratio = 0.0; })), ErrorCode::InvalidParams);
  CreationParams one = default_creation_params(Dimension::One);
  one.layer_count = 2;
  EXPECT_ERROR_CODE(create_soft_body(one), ErrorCode::InvalidParams);
}

class CreationProperties : public ::testing::TestWithParam<Dimension> {};

TEST_P(CreationProperties, Idempotent) {
  const SoftBody a = create_default_soft_body(GetParam());
  const SoftBody b = create_default_soft_body(GetParam());
  ASSERT_EQ(a.particles.size(), b.particles.size());
  ASSERT_EQ(a.springs.size(), b.springs.size());
  ASSERT_EQ(a.faces.size(), b.faces.size());
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    expect_vec_near(a.particles[i].position, b.particles[i].position, 1e-12);
  }
}

TEST_P(CreationProperties, RestLengthsMatchGeometry) {
  const SoftBody b = create_default_soft_body(GetParam());
  for (const Spring& s : b.springs) {
    EXPECT_LT(std::abs(norm(b.particles[s.tail].position - b.particles[s.head].position) - s.rest_length), 1e-9);
  }
}

TEST_P(CreationProperties, Masked) {
  CreationParams p = default_creation_params(GetParam());
  p.center = {0.3, 2.0, -1.5};
  const SoftBody b = create_soft_body(p);
  for (const Particle& q : b.particles) {
    if (GetParam() == Dimension::One) {
      EXPECT_EQ(q.position.y, 0.0);
      EXPECT_EQ(q.position.z, 0.0);
    }
    if (GetParam() == Dimension::Two) EXPECT_EQ(q.position.z, 0.0);
  }
  EXPECT_NO_THROW(validate(b));
}

INSTANTIATE_TEST_SUITE_P(AllDimensions, CreationProperties,
                         ::testing::Values(Dimension::One, Dimension::Two, Dimension::Three));

TEST(AddSpring, RestLengthIsDistance) {
  SoftBody b = create_default_soft_body(Dimension::Three);
  b.particles[0].position = {0, 0, 0};
  b.particles[1].position = {3, 4, 0};
  const std::size_t before = b.springs.size();
  const int id = add_spring(b, 0, 1, SpringKind::Shear, 10.0, 1.0);
  EXPECT_EQ(b.springs.size(), before + 1);
  EXPECT_EQ(b.find_spring(id)->rest_length, 5.0);
}

TEST(AddSpring, Errors) {
  SoftBody b = create_default_soft_body(Dimension::Two);
  EXPECT_ERROR_CODE(add_spring(b, 3, 3, SpringKind::Structural, 1, 1), ErrorCode::SelfLoop);
  EXPECT_ERROR_CODE(add_spring(b, 0, 999, SpringKind::Structural, 1, 1), ErrorCode::UnknownParticle);
}

TEST(AddSpring, DuplicatePairAllowed) {
  SoftBody b = create_default_soft_body(Dimension::Two);
  const std::size_t before = b.springs.size();
  const int s1 = add_spring(b, 0, 5, SpringKind::Structural, 1, 1);
  const int s2 = add_spring(b, 0, 5, SpringKind::Structural, 1, 1);
  EXPECT_NE(s1, s2);
  EXPECT_EQ(b.springs.size(), before + 2);
}

TEST(AddFace, OneDimensionalRejected) {
  SoftBody b = create_default_soft_body(Dimension::One);
  EXPECT_ERROR_CODE(add_face(b, 0, 1, 2), ErrorCode::DimensionForbidsFace);
}

TEST(AddFace, RepeatedVertexRejected) {
  SoftBody b = create_default_soft_body(Dimension::Two);
  EXPECT_ERROR_CODE(add_face(b, 0, 1, 0), ErrorCode::DegenerateFace);
}

SoftBody triangle_body() {
  SoftBody b;
  b.dimension = Dimension::Two;
  for (int i = 0; i < 3; ++i) b.particles.push_back({i, 1.0, {double(i == 1), double(i == 2), 0}, {}, {}, {}, false});
  return b;
}

TEST(AddFace, UsesExistingSprings) {
  SoftBody b = triangle_body();
  const int s01 = add_spring(b, 0, 1, SpringKind::Structural, 1, 1);
  const int s12 = add_spring(b, 1, 2, SpringKind::Structural, 1, 1);
  const int s20 = add_spring(b, 2, 0, SpringKind::Structural, 1, 1);
  add_face(b, 0, 1, 2);
  EXPECT_EQ(b.springs.size(), 3u);
  EXPECT_EQ(b.faces.back().springs, (std::array<int, 3>{s01, s12, s20}));
  EXPECT_EQ(b.faces.back().vertices, (std::array<int, 3>{0, 1, 2}));
}

TEST(AddFace, MissingEdgeAutoCreated) {
  SoftBody b = triangle_body();
  add_spring(b, 0, 1, SpringKind::Structural, 1, 1);
  add_spring(b, 1, 2, SpringKind::Structural, 1, 1);
  add_face(b, 0, 1, 2);
  EXPECT_EQ(b.springs.size(), 3u);
  EXPECT_EQ(b.springs.back().kind, SpringKind::Structural);
  EXPECT_NO_THROW(validate(b));
}

TEST(Attach, CombinedCounts) {
  const SoftBody a = create_default_soft_body(Dimension::One);
  const SoftBody b = create_default_soft_body(Dimension::One);
  const std::vector<AttachPair> pairs{{{a.id, 7}, {b.id, 0}}, {{a.id, 6}, {b.id, 1}}};
  const CombinedBody c = attach_objects(a, b, pairs, SpringKind::Structural, 50.0, 0.5);
  EXPECT_EQ(c.body.particles.size(), 16u);
  EXPECT_EQ(c.body.springs.size(), a.springs.size() + b.springs.size() + 2);
  EXPECT_NEAR(c.body.total_mass(), a.total_mass() + b.total_mass(), 1e-15);
  EXPECT_NE(c.body.id, a.id);
  EXPECT_NE(c.body.id, b.id);
  EXPECT_NO_THROW(validate(c.body));
  const Spring& last = c.body.springs.back();
  EXPECT_EQ(last.head, c.a_to_combined[6]);
  EXPECT_EQ(last.tail, c.b_to_combined[1]);
  EXPECT_NEAR(last.rest_length, norm(c.body.particles[last.tail].position - c.body.particles[last.head].position),
              1e-15);
}

TEST(Attach, OriginalsUntouched) {
  const SoftBody a = create_default_soft_body(Dimension::Two);
  const SoftBody b = create_default_soft_body(Dimension::Two);
  const auto a_springs = a.springs.size();
  attach_objects(a, b, std::vector<AttachPair>{{{a.id, 0}, {b.id, 0}}}, SpringKind::Shear, 1, 1);
  EXPECT_EQ(a.springs.size(), a_springs);
}

TEST(Attach, SameObjectRejected) {
  const SoftBody a = create_default_soft_body(Dimension::Two);
  const SoftBody b = create_default_soft_body(Dimension::Two);
  EXPECT_ERROR_CODE(attach_objects(a, b, std::vector<AttachPair>{{{a.id, 0}, {a.id, 1}}}, SpringKind::Structural, 1, 1),
                    ErrorCode::SameObject);
  EXPECT_ERROR_CODE(attach_objects(a, a, {}, SpringKind::Structural, 1, 1), ErrorCode::SameObject);
}

TEST(Attach, UnknownParticleRejected) {
  const SoftBody a = create_default_soft_body(Dimension::Two);
  const SoftBody b = create_default_soft_body(Dimension::Two);
  EXPECT_ERROR_CODE(attach_objects(a, b, std::vector<AttachPair>{{{a.id, 0}, {b.id, 500}}}, SpringKind::Structural, 1, 1),
                    ErrorCode::UnknownParticle);
}

TEST(Attach, EmptyPairsMerges) {
  const SoftBody a = create_default_soft_body(Dimension::Two);
  const SoftBody b = create_default_soft_body(Dimension::Three);
  const CombinedBody c = attach_objects(a, b, {}, SpringKind::Structural, 1, 1);
  EXPECT_EQ(c.body.particles.size(), a.particles.size() + b.particles.size());
  EXPECT_EQ(c.body.springs.size(), a.springs.size() + b.springs.size());
  EXPECT_EQ(c.body.dimension, Dimension::Three);
}

TEST(Attach, RandomizedConservation) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    CreationParams pa = default_creation_params(Dimension::Two);
    pa.particle_count = 3 + static_cast<int>(rng() % 10);
    pa.total_mass = 0.5 + (rng() % 100) / 50.0;
    CreationParams pb = default_creation_params(Dimension::Two);
    pb.particle_count = 3 + static_cast<int>(rng() % 10);
    const SoftBody a = create_soft_body(pa);
    const SoftBody b = create_soft_body(pb);
    std::vector<AttachPair> pairs;
    const int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      pairs.push_back({{a.id, static_cast<int>(rng() % a.particles.size())},
                       {b.id, static_cast<int>(rng() % b.particles.size())}});
    }
    const CombinedBody c = attach_objects(a, b, pairs, SpringKind::Radius, 10, 1);
    EXPECT_EQ(c.body.particles.size(), a.particles.size() + b.particles.size());
    EXPECT_EQ(c.body.springs.size(), a.springs.size() + b.springs.size() + pairs.size());
    EXPECT_NEAR(c.body.total_mass(), a.total_mass() + b.total_mass(), 1e-12);
  }
}

TEST(Volume, UnitCube) { EXPECT_NEAR(compute_volume(make_box()), 1.0, 1e-9); }

TEST(Volume, ScaledCube) { EXPECT_NEAR(compute_volume(make_box(2.0)), 2.0, 1e-9); }

TEST(Volume, NotVolumetric) {
  EXPECT_ERROR_CODE(compute_volume(create_default_soft_body(Dimension::Two)), ErrorCode::NotVolumetric);
  EXPECT_ERROR_CODE(compute_volume(create_default_soft_body(Dimension::One)), ErrorCode::NotVolumetric);
}

TEST(Volume, OpenSurface) {
  SoftBody box = make_box();
  box.faces.pop_back();
  EXPECT_ERROR_CODE(compute_volume(box), ErrorCode::OpenSurface);
}

TEST(Volume, SphereAgreesWithTetraFan) {
  for (int count : {50, 122, 402}) {
    CreationParams p = default_creation_params(Dimension::Three);
    p.particle_count = count;
    p.size = 1.3;
    p.center = {0.5, -2.0, 1.0};
    const SoftBody b = create_soft_body(p);
    std::vector<Vec3> pts;
    for (int id : b.layers[0].particles) pts.push_back(b.particles[id].position);
    std::vector<std::array<int, 3>> tris;
    for (const Face& f : b.faces) tris.push_back(f.vertices);
    const double oracle = tetra_fan_volume(pts, tris);
    EXPECT_NEAR(compute_volume(b) / oracle, 1.0, 1e-6) << count;
    // Inscribed polyhedron stays below the true sphere.
    EXPECT_LT(oracle, 4.0 / 3.0 * std::numbers::pi * 1.3 * 1.3 * 1.3);
  }
}

TEST(Volume, TranslationInvariant) {
  SoftBody box = make_box(1.0, 2.0, 3.0);
  const double v0 = compute_volume(box);
  for (Particle& p : box.particles) p.position += Vec3{10.0, -4.0, 7.0};
  EXPECT_NEAR(compute_volume(box), v0, 1e-9);
}

TEST(Geometry, SphereResolution) {
  EXPECT_EQ(sphere_resolution(50), (std::array<int, 2>{8, 6}));
  const auto r = sphere_resolution(122);
  EXPECT_EQ(r[0] * r[1], 120);
}

TEST(Geometry, EnclosedAreaOfRing) {
  const SoftBody b = create_default_soft_body(Dimension::Two);
  // Regular 16-gon of circumradius 1.
  const double expected = 0.5 * 16 * std::sin(2 * std::numbers::pi / 16);
  EXPECT_NEAR(enclosed_area(b), expected, 1e-12);
}

TEST(Geometry, SpringNormalsZeroWithoutFaces) {
  const SoftBody b = create_default_soft_body(Dimension::Two);
  for (const Spring& s : b.springs) EXPECT_EQ(s.normal, Vec3{});
}

TEST(Geometry, SpringNormalsUnitOnSurface) {
  const SoftBody b = create_default_soft_body(Dimension::Three);
  std::set<int> on_surface;
  for (const Face& f : b.faces) on_surface.insert(f.springs.begin(), f.springs.end());
  for (const Spring& s : b.springs) {
    if (on_surface.count(s.id)) {
      EXPECT_NEAR(norm(s.normal), 1.0, 1e-9);
    } else {
      EXPECT_EQ(s.normal, Vec3{});
    }
  }
}

TEST(Validate, CatchesBrokenInvariants) {
  SoftBody b = create_default_soft_body(Dimension::Two);
  b.particles[3].position.z = 0.1;
  EXPECT_ERROR_CODE(validate(b), ErrorCode::InvariantViolation);
  b = create_default_soft_body(Dimension::Two);
  b.particles[0].mass = 0.0;
  EXPECT_ERROR_CODE(validate(b), ErrorCode::InvariantViolation);
  b = create_default_soft_body(Dimension::Two);
  b.springs[0].tail = 1000;
  EXPECT_ERROR_CODE(validate(b), ErrorCode::InvariantViolation);
}

}  // namespace
}  // namespace softbody
