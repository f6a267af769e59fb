#pragma once

#include <cstdint>
#include <string>

#include "poserefine/rng.hpp"
#include "poserefine/rotgeo.hpp"

// Coarse-pose simulation: perturbs a ground-truth orientation by a random
// rotation and emits the matching correction label. This is both the
// training-data augmentation and the test-input generator.

namespace poserefine {

/// Distribution of the perturbation angle. All fields are in degrees (the
/// public configuration surface); angles are converted to radians
/// internally and clamped to [0, 180].
struct NoiseConfig {
    enum class Kind { kUniform, kNormal };
    Kind kind = Kind::kUniform;
    double lo_deg = 0.0;     // uniform
    double hi_deg = 30.0;    // uniform
    double mean_deg = 0.0;   // normal
    double sd_deg = 1.0;     // normal

    static NoiseConfig uniform_deg(double lo, double hi);
    static NoiseConfig normal_deg(double mean, double sd);

    /// Parses "uniform:LO:HI" or "normal:MEAN:SD" (degrees).
    static NoiseConfig parse(const std::string& text);
    std::string to_string() const;

    void validate() const;  // throws std::invalid_argument
};

/// One simulated coarse estimate: q_in is fed to the network, q_label is
/// the correction it should output, q_noise is the perturbation that was
/// applied. quat_mul(q_in, q_label) recovers the originating rotation.
struct NoisePair {
    UnitQuaternion q_in;
    UnitQuaternion q_label;
    UnitQuaternion q_noise;
};

/// Uniformly distributed unit axis: n = (sqrt(1-s^2) cos a, sqrt(1-s^2)
/// sin a, s) with a ~ U(0, 2pi), s ~ U(-1, 1).
Vec3 sample_noise_axis(Rng& rng);

/// Axis from sample_noise_axis plus an angle drawn from cfg (converted to
/// radians, clamped to [0, pi]).
AxisAngle sample_noise(const NoiseConfig& cfg, Rng& rng);

/// q_in = q_gt * quat(n, theta); q_label = quat(n, -theta).
NoisePair perturb(const UnitQuaternion& q_gt, const NoiseConfig& cfg, Rng& rng);

/// Uniform random rotation (uniform axis, uniform angle in [0, pi] weighted
/// by the Haar measure via the subgroup algorithm of Shoemake).
UnitQuaternion random_rotation(Rng& rng);

}  // namespace poserefine
