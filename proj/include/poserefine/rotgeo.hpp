#pragma once

#include <array>
#include <cmath>

// Rotation algebra on SO(3): unit quaternions, axis-angle, 3x3 rotation
// matrices, and the geodesic metric. All functions here are pure and
// double-precision; angles are radians (degree conversion happens only at
// CLI/config boundaries, see angles.hpp).

namespace poserefine {

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

/// Rotation by `angle` radians about the unit vector `axis`.
struct AxisAngle {
    Vec3 axis{1.0, 0.0, 0.0};
    double angle = 0.0;  // radians
};

/// Unit quaternion (w, x, y, z). q and -q represent the same rotation;
/// use geodesic_angle (or same_rotation) for equality, never operator==.
struct UnitQuaternion {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static UnitQuaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    double dot(const UnitQuaternion& o) const {
        return w * o.w + x * o.x + y * o.y + z * o.z;
    }
    UnitQuaternion negated() const { return {-w, -x, -y, -z}; }

    /// Representative with non-negative scalar part.
    UnitQuaternion canonical() const { return w < 0.0 ? negated() : *this; }

    /// Rescales to unit norm. Throws std::invalid_argument on a near-zero
    /// input (norm < 1e-12).
    UnitQuaternion normalized() const;
};

/// Row-major 3x3 matrix. Rows are the X, Y, Z direction vectors; only
/// matrices near SO(3) are meaningful to most operations.
struct RotationMatrix3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static RotationMatrix3 identity() { return {}; }

    double& at(int r, int c) { return m[static_cast<size_t>(r * 3 + c)]; }
    double at(int r, int c) const { return m[static_cast<size_t>(r * 3 + c)]; }

    Vec3 row(int r) const { return {at(r, 0), at(r, 1), at(r, 2)}; }
    void set_row(int r, const Vec3& v) {
        at(r, 0) = v.x;
        at(r, 1) = v.y;
        at(r, 2) = v.z;
    }

    RotationMatrix3 transposed() const;
    RotationMatrix3 operator*(const RotationMatrix3& o) const;
    Vec3 operator*(const Vec3& v) const;

    double trace() const { return at(0, 0) + at(1, 1) + at(2, 2); }
    double det() const;

    /// ||R^T R - I||_F, the orthonormality residual.
    double gram_residual() const;

    double frobenius_distance(const RotationMatrix3& o) const;
};

/// q(n, theta) = [cos(t/2), n sin(t/2)]. The axis must be unit-norm within
/// 1e-6 or std::invalid_argument is thrown.
UnitQuaternion axis_angle_to_quat(const AxisAngle& aa);

/// Inverse of axis_angle_to_quat: theta = 2 acos(w), axis = v / |v|.
/// At the identity (theta ~ 0) the axis is arbitrary; (1,0,0) is returned.
AxisAngle quat_to_axis_angle(const UnitQuaternion& q);

/// Hamilton product, re-normalized. Composes the rotations: applying
/// quat_mul(a, b) equals applying b then a in the fixed frame.
UnitQuaternion quat_mul(const UnitQuaternion& a, const UnitQuaternion& b);

/// (w, -v): the reverse rotation. Inverse equals conjugate on unit norm.
UnitQuaternion quat_inverse(const UnitQuaternion& q);

/// Angle in [0, pi] of the relative rotation q1 * q2^-1, i.e.
/// 2 acos(clamp(|scalar(q1 * q2^-1)|, 0, 1)). Evaluated through
/// atan2(|vec|, |scalar|), which computes the same value but stays accurate
/// at both ends of the range where acos loses all precision. Symmetric,
/// zero iff q1 and q2 are the same rotation (the |.| handles q vs -q).
double geodesic_angle(const UnitQuaternion& q1, const UnitQuaternion& q2);

/// True if the two quaternions are the same rotation within tol radians.
bool same_rotation(const UnitQuaternion& q1, const UnitQuaternion& q2,
                   double tol = 1e-9);

/// Repairs a matrix that drifted off SO(3) (e.g. rounded annotation data):
/// splits the X.Y dot-product error evenly between the two rows, rebuilds Z
/// as their cross product, and renormalizes every row with the Taylor step
/// v <- (3 - v.v)/2 * v. The pass is repeated until the Gram residual
/// converges (quadratic; two passes typically suffice), so the operation is
/// idempotent to machine precision and exactly orthogonal inputs pass
/// through unchanged. Throws std::invalid_argument if the residual still
/// exceeds 1e-3 after the first pass (input too far from SO(3)).
RotationMatrix3 reorthogonalize(const RotationMatrix3& m);

/// Branch-on-largest-diagonal conversion (stable near 180-degree
/// rotations). Scalar part canonicalized to w >= 0. Throws
/// std::invalid_argument if the input fails the orthonormality gate
/// (gram_residual > 1e-5 or det <= 0); reorthogonalize raw data first.
UnitQuaternion rotmat_to_quat(const RotationMatrix3& m);

/// Standard homogeneous expansion of a unit quaternion. The result is
/// identical for q and -q (every term is a product of two components).
RotationMatrix3 quat_to_matrix(const UnitQuaternion& q);

/// R * v convenience for the renderer and oracles.
Vec3 rotate_vector(const UnitQuaternion& q, const Vec3& v);

}  // namespace poserefine
