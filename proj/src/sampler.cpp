#include "poserefine/sampler.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace poserefine {

NoiseConfig NoiseConfig::uniform_deg(double lo, double hi) {
    NoiseConfig c;
    c.kind = Kind::kUniform;
    c.lo_deg = lo;
    c.hi_deg = hi;
    c.validate();
    return c;
}

NoiseConfig NoiseConfig::normal_deg(double mean, double sd) {
    NoiseConfig c;
    c.kind = Kind::kNormal;
    c.mean_deg = mean;
    c.sd_deg = sd;
    c.validate();
    return c;
}

NoiseConfig NoiseConfig::parse(const std::string& text) {
    std::istringstream ss(text);
    std::string kind, a, b;
    if (!std::getline(ss, kind, ':') || !std::getline(ss, a, ':') ||
        !std::getline(ss, b)) {
        throw std::invalid_argument("noise spec '" + text +
                                    "' is not KIND:A:B");
    }
    try {
        if (kind == "uniform") return uniform_deg(std::stod(a), std::stod(b));
        if (kind == "normal") return normal_deg(std::stod(a), std::stod(b));
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("noise spec '" + text +
                                    "' has non-numeric parameters");
    }
    throw std::invalid_argument("noise kind '" + kind +
                                "' is not uniform|normal");
}

std::string NoiseConfig::to_string() const {
    std::ostringstream ss;
    if (kind == Kind::kUniform)
        ss << "uniform:" << lo_deg << ":" << hi_deg;
    else
        ss << "normal:" << mean_deg << ":" << sd_deg;
    return ss.str();
}

void NoiseConfig::validate() const {
    if (kind == Kind::kUniform) {
        if (!(0.0 <= lo_deg && lo_deg < hi_deg && hi_deg <= 180.0)) {
            throw std::invalid_argument(
                "uniform noise requires 0 <= lo < hi <= 180, got [" +
                std::to_string(lo_deg) + ", " + std::to_string(hi_deg) + "]");
        }
    } else {
        if (!(mean_deg >= 0.0) || !(sd_deg > 0.0)) {
            throw std::invalid_argument(
                "normal noise requires mean >= 0 and sd > 0, got mean " +
                std::to_string(mean_deg) + ", sd " + std::to_string(sd_deg));
        }
    }
}

Vec3 sample_noise_axis(Rng& rng) {
    const double alpha = uniform(rng, 0.0, 2.0 * kPi);
    const double s = uniform(rng, -1.0, 1.0);
    const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
    return {c * std::cos(alpha), c * std::sin(alpha), s};
}

AxisAngle sample_noise(const NoiseConfig& cfg, Rng& rng) {
    cfg.validate();
    const Vec3 axis = sample_noise_axis(rng);
    double deg;
    if (cfg.kind == NoiseConfig::Kind::kUniform) {
        deg = uniform(rng, cfg.lo_deg, cfg.hi_deg);
    } else {
        deg = normal(rng, cfg.mean_deg, cfg.sd_deg);
    }
    deg = std::clamp(deg, 0.0, 180.0);
    return {axis, deg_to_rad(deg)};
}

NoisePair perturb(const UnitQuaternion& q_gt, const NoiseConfig& cfg,
                  Rng& rng) {
    const AxisAngle n = sample_noise(cfg, rng);
    NoisePair p;
    p.q_noise = axis_angle_to_quat(n);
    p.q_in = quat_mul(q_gt, p.q_noise);
    p.q_label = axis_angle_to_quat({n.axis, -n.angle});
    return p;
}

UnitQuaternion random_rotation(Rng& rng) {
    // Shoemake's method: uniform w.r.t. the Haar measure on SO(3).
    const double u0 = uniform01(rng);
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double r1 = std::sqrt(1.0 - u0);
    const double r2 = std::sqrt(u0);
    const double t1 = 2.0 * kPi * u1;
    const double t2 = 2.0 * kPi * u2;
    return UnitQuaternion{r2 * std::cos(t2), r1 * std::sin(t1),
                          r1 * std::cos(t1), r2 * std::sin(t2)}
        .normalized();
}

}  // namespace poserefine
