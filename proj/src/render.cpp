#include <algorithm>
#include <cmath>

#include "poserefine/dataset.hpp"

// Orthographic raycaster for the reference cuboid. Per pixel, the camera
// ray is transformed into the object frame (inverse rotation) and
// intersected with the axis-aligned box via the slab method; the color of
// the face owning the entry point is written. No sampling, no blending:
// the output is a pure function of (q, size, params), and since the
// rotation matrix of q equals that of -q term by term, both render
// byte-identically.

namespace poserefine {

namespace {

struct Hit {
    bool hit = false;
    int face = 0;  // 0 +x, 1 -x, 2 +y, 3 -y, 4 +z, 5 -z
};

Hit raycast_box(const Vec3& origin, const Vec3& dir, const double half[3]) {
    // Slabs; entry plane = the axis with the largest t_near. Axis priority
    // x, y, z breaks exact ties (edges/corners, measure zero).
    double t_near = -1e300, t_far = 1e300;
    int near_axis = -1;
    double near_sign = 0.0;
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
            if (o[a] < -half[a] || o[a] > half[a]) return {};
            continue;
        }
        double t0 = (-half[a] - o[a]) / d[a];
        double t1 = (half[a] - o[a]) / d[a];
        double sign = -1.0;  // entering through the -a face
        if (t0 > t1) {
            std::swap(t0, t1);
            sign = 1.0;
        }
        if (t0 > t_near) {
            t_near = t0;
            near_axis = a;
            near_sign = sign;
        }
        t_far = std::min(t_far, t1);
        if (t_near > t_far) return {};
    }
    if (near_axis < 0) return {};
    Hit h;
    h.hit = true;
    h.face = near_axis * 2 + (near_sign > 0.0 ? 0 : 1);
    return h;
}

}  // namespace

ImageU8 render_cuboid(const UnitQuaternion& q, int size,
                      const RenderParams& params) {
    ImageU8 img = ImageU8::filled(size, size, params.background[0],
                                  params.background[1], params.background[2]);
    const double half[3] = {params.half_x, params.half_y, params.half_z};
    const double reach =
        std::sqrt(half[0] * half[0] + half[1] * half[1] + half[2] * half[2]);
    // World units per pixel, sized so the cuboid fits at any orientation.
    const double px = 2.0 * reach * (1.0 + params.margin) / size;

    // Inverse rotation (object frame <- camera frame) as matrix rows.
    const RotationMatrix3 rt = quat_to_matrix(q).transposed();
    const Vec3 dir_obj = rt * Vec3{0.0, 0.0, -1.0};

    for (int iy = 0; iy < size; ++iy) {
        const double wy = (size * 0.5 - iy - 0.5) * px;  // +y up
        for (int ix = 0; ix < size; ++ix) {
            const double wx = (ix + 0.5 - size * 0.5) * px;
            const Vec3 origin_obj = rt * Vec3{wx, wy, 4.0 * reach};
            const Hit h = raycast_box(origin_obj, dir_obj, half);
            if (h.hit) {
                uint8_t* p = img.pixel(ix, iy);
                p[0] = params.face_colors[h.face][0];
                p[1] = params.face_colors[h.face][1];
                p[2] = params.face_colors[h.face][2];
            }
        }
    }
    return img;
}

BoundingBox project_cuboid_bbox(const UnitQuaternion& q, int size,
                                const RenderParams& params) {
    const double half[3] = {params.half_x, params.half_y, params.half_z};
    const double reach =
        std::sqrt(half[0] * half[0] + half[1] * half[1] + half[2] * half[2]);
    const double px = 2.0 * reach * (1.0 + params.margin) / size;
    const RotationMatrix3 r = quat_to_matrix(q);

    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (int corner = 0; corner < 8; ++corner) {
        const Vec3 obj{(corner & 1) ? half[0] : -half[0],
                       (corner & 2) ? half[1] : -half[1],
                       (corner & 4) ? half[2] : -half[2]};
        const Vec3 cam = r * obj;
        x_lo = std::min(x_lo, cam.x);
        x_hi = std::max(x_hi, cam.x);
        y_lo = std::min(y_lo, cam.y);
        y_hi = std::max(y_hi, cam.y);
    }
    // Invert the pixel mapping used by render_cuboid, pad one pixel.
    BoundingBox b;
    b.x_min = static_cast<int>(std::floor(x_lo / px + size * 0.5 - 0.5)) - 1;
    b.x_max = static_cast<int>(std::ceil(x_hi / px + size * 0.5 - 0.5)) + 2;
    b.y_min = static_cast<int>(std::floor(size * 0.5 - 0.5 - y_hi / px)) - 1;
    b.y_max = static_cast<int>(std::ceil(size * 0.5 - 0.5 - y_lo / px)) + 2;
    return b.clamped(size, size);
}

}  // namespace poserefine
