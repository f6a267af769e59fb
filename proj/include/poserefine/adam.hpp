#pragma once

#include <cstdint>
#include <vector>

#include "poserefine/tensor.hpp"

namespace poserefine {

struct AdamConfig {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

/// Bias-corrected Adam over a fixed parameter list. Throws
/// TrainingDivergence if a gradient or an updated parameter is non-finite.
class Adam {
  public:
    Adam(std::vector<Tensor*> params, AdamConfig cfg);

    void step();
    int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

  private:
    std::vector<Tensor*> params_;
    std::vector<std::vector<float>> m_, v_;
    AdamConfig cfg_;
    int64_t t_ = 0;
};

}  // namespace poserefine
