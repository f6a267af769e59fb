#include "poserefine/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "poserefine/errors.hpp"

namespace poserefine {

Adam::Adam(std::vector<Tensor*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Tensor* p : params_) {
        if (!p->tracks_grad()) {
            throw std::invalid_argument(
                "Adam: parameter without gradient buffer");
        }
        m_.emplace_back(p->v.size(), 0.0f);
        v_.emplace_back(p->v.size(), 0.0f);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(cfg_.beta1), t_);
    const double bc2 = 1.0 - std::pow(static_cast<double>(cfg_.beta2), t_);
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = *params_[pi];
        float* m = m_[pi].data();
        float* v = v_[pi].data();
        for (size_t i = 0; i < p.v.size(); ++i) {
            const float g = p.g[i];
            if (!std::isfinite(g)) {
                throw TrainingDivergence(
                    "Adam: non-finite gradient at step " + std::to_string(t_));
            }
            m[i] = cfg_.beta1 * m[i] + (1.0f - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0f - cfg_.beta2) * g * g;
            const double mhat = static_cast<double>(m[i]) / bc1;
            const double vhat = static_cast<double>(v[i]) / bc2;
            p.v[i] -= static_cast<float>(
                static_cast<double>(cfg_.lr) * mhat /
                (std::sqrt(vhat) + static_cast<double>(cfg_.eps)));
            if (!std::isfinite(p.v[i])) {
                throw TrainingDivergence(
                    "Adam: non-finite parameter after step " +
                    std::to_string(t_));
            }
        }
    }
}

}  // namespace poserefine
