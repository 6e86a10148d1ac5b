#pragma once

#include <cmath>

#include <Eigen/Core>

namespace jetyak {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Vector2 = Vec2<double>;

// Rotation taking boat-frame (forward, starboard) components onto world
// (east, north) components for a heading psi measured clockwise from north.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> boat_to_world_rotation(Scalar psi) {
  using std::cos;
  using std::sin;
  const Scalar s = sin(psi);
  const Scalar c = cos(psi);
  Eigen::Matrix<Scalar, 2, 2> r;
  r << s, c,
       c, -s;
  return r;
}

// World-frame velocity of a quantity measured relative to a boat moving at
// `v_ground`: v_ground + R(psi) * rel.
template <typename DerivedRel, typename DerivedGround>
Vec2<typename DerivedRel::Scalar> boat_to_world(const Eigen::MatrixBase<DerivedRel>& rel,
                                                typename DerivedRel::Scalar psi,
                                                const Eigen::MatrixBase<DerivedGround>& v_ground) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedRel, 2);
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedGround, 2);
  return v_ground + boat_to_world_rotation(psi) * rel;
}

// Inverse of boat_to_world: field velocity relative to the moving boat,
// expressed as (forward, starboard).
template <typename DerivedField, typename DerivedGround>
Vec2<typename DerivedField::Scalar> world_to_boat(const Eigen::MatrixBase<DerivedField>& field_world,
                                                  typename DerivedField::Scalar psi,
                                                  const Eigen::MatrixBase<DerivedGround>& v_ground) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedField, 2);
  // R is symmetric and orthonormal, so it is its own inverse.
  return boat_to_world_rotation(psi) * (field_world - v_ground);
}

// Unit vector pointing along a heading, in (east, north).
template <typename Scalar>
Vec2<Scalar> heading_vector(Scalar psi) {
  using std::cos;
  using std::sin;
  return Vec2<Scalar>(sin(psi), cos(psi));
}

}  // namespace jetyak
