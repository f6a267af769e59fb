#include "poserefine/rotgeo.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace poserefine {

UnitQuaternion UnitQuaternion::normalized() const {
    const double n = norm();
    if (n < 1e-12) {
        throw std::invalid_argument(
            "UnitQuaternion::normalized: near-zero quaternion (norm " +
            std::to_string(n) + ")");
    }
    return {w / n, x / n, y / n, z / n};
}

RotationMatrix3 RotationMatrix3::transposed() const {
    RotationMatrix3 t;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) t.at(r, c) = at(c, r);
    return t;
}

RotationMatrix3 RotationMatrix3::operator*(const RotationMatrix3& o) const {
    RotationMatrix3 p;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            p.at(r, c) = at(r, 0) * o.at(0, c) + at(r, 1) * o.at(1, c) +
                         at(r, 2) * o.at(2, c);
        }
    }
    return p;
}

Vec3 RotationMatrix3::operator*(const Vec3& v) const {
    return {at(0, 0) * v.x + at(0, 1) * v.y + at(0, 2) * v.z,
            at(1, 0) * v.x + at(1, 1) * v.y + at(1, 2) * v.z,
            at(2, 0) * v.x + at(2, 1) * v.y + at(2, 2) * v.z};
}

double RotationMatrix3::det() const {
    return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
           at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
           at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
}

double RotationMatrix3::gram_residual() const {
    const RotationMatrix3 g = transposed() * (*this);
    double s = 0.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const double d = g.at(r, c) - (r == c ? 1.0 : 0.0);
            s += d * d;
        }
    }
    return std::sqrt(s);
}

double RotationMatrix3::frobenius_distance(const RotationMatrix3& o) const {
    double s = 0.0;
    for (size_t i = 0; i < 9; ++i) {
        const double d = m[i] - o.m[i];
        s += d * d;
    }
    return std::sqrt(s);
}

UnitQuaternion axis_angle_to_quat(const AxisAngle& aa) {
    const double n = aa.axis.norm();
    if (std::abs(n - 1.0) > 1e-6) {
        throw std::invalid_argument(
            "axis_angle_to_quat: axis norm " + std::to_string(n) +
            " deviates from 1 beyond 1e-6");
    }
    const double h = 0.5 * aa.angle;
    const double s = std::sin(h);
    return UnitQuaternion{std::cos(h), aa.axis.x * s, aa.axis.y * s,
                          aa.axis.z * s}
        .normalized();
}

AxisAngle quat_to_axis_angle(const UnitQuaternion& q) {
    // Work from the canonical representative so the angle lands in [0, pi].
    const UnitQuaternion c = q.canonical();
    const double vn = std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z);
    if (vn < 1e-12) {
        return AxisAngle{{1.0, 0.0, 0.0}, 0.0};  // identity; axis by convention
    }
    // atan2 form of theta = 2 acos(w): accurate for small angles too.
    const double angle = 2.0 * std::atan2(vn, c.w);
    return AxisAngle{{c.x / vn, c.y / vn, c.z / vn}, angle};
}

UnitQuaternion quat_mul(const UnitQuaternion& a, const UnitQuaternion& b) {
    const UnitQuaternion p{
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    };
    return p.normalized();
}

UnitQuaternion quat_inverse(const UnitQuaternion& q) {
    return {q.w, -q.x, -q.y, -q.z};
}

double geodesic_angle(const UnitQuaternion& q1, const UnitQuaternion& q2) {
    // Relative rotation q1 * q2^-1 without the renormalization (the raw
    // component magnitudes are what matters; atan2 ignores common scale).
    const UnitQuaternion& a = q1;
    const UnitQuaternion b = quat_inverse(q2);
    const double rw = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
    const double rx = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y;
    const double ry = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x;
    const double rz = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w;
    const double vn = std::sqrt(rx * rx + ry * ry + rz * rz);
    return 2.0 * std::atan2(vn, std::abs(rw));
}

bool same_rotation(const UnitQuaternion& q1, const UnitQuaternion& q2,
                   double tol) {
    return geodesic_angle(q1, q2) <= tol;
}

namespace {

Vec3 taylor_normalize(const Vec3& v) {
    return v * (0.5 * (3.0 - v.dot(v)));
}

// One orthogonalization pass: split the X.Y error between the rows, rebuild
// Z, Taylor-normalize all three rows.
RotationMatrix3 reorthogonalize_pass(const RotationMatrix3& m) {
    const Vec3 x = m.row(0);
    const Vec3 y = m.row(1);
    const double error = x.dot(y);
    const Vec3 x_orth = x - y * (error * 0.5);
    const Vec3 y_orth = y - x * (error * 0.5);
    const Vec3 z_orth = x_orth.cross(y_orth);
    RotationMatrix3 out;
    out.set_row(0, taylor_normalize(x_orth));
    out.set_row(1, taylor_normalize(y_orth));
    out.set_row(2, taylor_normalize(z_orth));
    return out;
}

}  // namespace

RotationMatrix3 reorthogonalize(const RotationMatrix3& m) {
    RotationMatrix3 r = reorthogonalize_pass(m);
    if (r.gram_residual() > 1e-3) {
        throw std::invalid_argument(
            "reorthogonalize: input too far from SO(3), residual " +
            std::to_string(r.gram_residual()) + " after one pass");
    }
    // Quadratic convergence; iterate so a second call is a no-op to
    // machine precision.
    for (int i = 0; i < 8 && r.gram_residual() > 1e-14; ++i) {
        r = reorthogonalize_pass(r);
    }
    return r;
}

UnitQuaternion rotmat_to_quat(const RotationMatrix3& m) {
    if (m.gram_residual() > 1e-5 || m.det() <= 0.0) {
        throw std::invalid_argument(
            "rotmat_to_quat: matrix is not a rotation (gram residual " +
            std::to_string(m.gram_residual()) + ", det " +
            std::to_string(m.det()) + ")");
    }
    const double t = m.trace();
    double w, x, y, z;
    if (t > 0.0) {
        const double s = std::sqrt(t + 1.0) * 2.0;
        w = 0.25 * s;
        x = (m.at(2, 1) - m.at(1, 2)) / s;
        y = (m.at(0, 2) - m.at(2, 0)) / s;
        z = (m.at(1, 0) - m.at(0, 1)) / s;
    } else if (m.at(0, 0) > m.at(1, 1) && m.at(0, 0) > m.at(2, 2)) {
        const double s = std::sqrt(1.0 + m.at(0, 0) - m.at(1, 1) - m.at(2, 2)) * 2.0;
        w = (m.at(2, 1) - m.at(1, 2)) / s;
        x = 0.25 * s;
        y = (m.at(0, 1) + m.at(1, 0)) / s;
        z = (m.at(0, 2) + m.at(2, 0)) / s;
    } else if (m.at(1, 1) > m.at(2, 2)) {
        const double s = std::sqrt(1.0 + m.at(1, 1) - m.at(0, 0) - m.at(2, 2)) * 2.0;
        w = (m.at(0, 2) - m.at(2, 0)) / s;
        x = (m.at(0, 1) + m.at(1, 0)) / s;
        y = 0.25 * s;
        z = (m.at(1, 2) + m.at(2, 1)) / s;
    } else {
        const double s = std::sqrt(1.0 + m.at(2, 2) - m.at(0, 0) - m.at(1, 1)) * 2.0;
        w = (m.at(1, 0) - m.at(0, 1)) / s;
        x = (m.at(0, 2) + m.at(2, 0)) / s;
        y = (m.at(1, 2) + m.at(2, 1)) / s;
        z = 0.25 * s;
    }
    return UnitQuaternion{w, x, y, z}.normalized().canonical();
}

RotationMatrix3 quat_to_matrix(const UnitQuaternion& q) {
    const double ww = q.w * q.w, xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
    const double wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
    const double xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
    RotationMatrix3 r;
    r.at(0, 0) = ww + xx - yy - zz;
    r.at(0, 1) = 2.0 * (xy - wz);
    r.at(0, 2) = 2.0 * (xz + wy);
    r.at(1, 0) = 2.0 * (xy + wz);
    r.at(1, 1) = ww - xx + yy - zz;
    r.at(1, 2) = 2.0 * (yz - wx);
    r.at(2, 0) = 2.0 * (xz - wy);
    r.at(2, 1) = 2.0 * (yz + wx);
    r.at(2, 2) = ww - xx - yy + zz;
    return r;
}

Vec3 rotate_vector(const UnitQuaternion& q, const Vec3& v) {
    return quat_to_matrix(q) * v;
}

}  // namespace poserefine
