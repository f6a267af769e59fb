#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "poserefine/layers.hpp"
#include "poserefine/rotgeo.hpp"
#include "poserefine/tensor.hpp"

// The three-stage refinement network. A bounding-box image and a coarse
// orientation go in; a unit-quaternion *correction* comes out (never an
// absolute pose). Compose with refined_pose to obtain the refined
// orientation.
//
// CNN stage:   conv 3->16 5x5 pad 2, BN, relu, pool 2x2,
//              conv 16->16 5x5 pad 2, BN, relu, pool 2x2, flatten -> 4096
// Pose stage:  fc 4->64, relu, fc 64->512, relu, fc 512->4096, relu
// Head:        concat -> 8192, fc->4096, relu, fc->1024, relu,
//              fc->128, relu, fc->4, L2 normalize

namespace poserefine {

constexpr int kRefinerInputSize = 64;
constexpr uint32_t kRefinerArchVersion = 1;
constexpr int64_t kCnnFeatureDim = 4096;
constexpr int64_t kConcatDim = 8192;

class Refiner {
  public:
    /// Fan-in-scaled uniform init for conv/fc weights and biases; BN scale
    /// 1, shift 0. Deterministic per seed.
    explicit Refiner(uint64_t seed);

    /// images {B,3,64,64}, q_in {B,4} unit rows. Returns {B,4} unit rows
    /// (the correction). Caches intermediates for backward when train is
    /// true or gradients are wanted.
    Tensor forward(const Tensor& images, const Tensor& q_in, bool train);

    /// g_out: gradient of the loss w.r.t. the normalized output.
    /// Accumulates parameter gradients.
    void backward(const Tensor& g_out);

    /// Single-sample convenience used by evaluation. The input quaternion
    /// is canonicalized (w >= 0) before it reaches the pose stage, so q and
    /// -q produce the same output.
    UnitQuaternion predict(const Tensor& image, const UnitQuaternion& q_in,
                           bool train = false);

    std::vector<Tensor*> parameters();  // trainable only
    std::vector<std::pair<std::string, Tensor*>> named_tensors();  // + BN stats

    void zero_grad();

    /// Checkpoint = autonet container + a "meta" entry holding
    /// [arch_version, input_size, 4 x 16-bit chunks of the config digest].
    void save(const std::string& path, uint64_t config_digest = 0) const;

    /// Refuses checkpoints whose architecture version or input size
    /// disagree. Returns the stored config digest.
    uint64_t load(const std::string& path);

    int input_size() const { return kRefinerInputSize; }

    /// Packs unit quaternions into a {B,4} tensor, canonicalized to w >= 0.
    static Tensor pack_quats(const std::vector<UnitQuaternion>& qs);
    static UnitQuaternion unpack_quat(const Tensor& t, int64_t row);

  private:
    Conv2d conv1_, conv2_;
    BatchNorm2d bn1_, bn2_;
    MaxPool2x2 pool1_, pool2_;
    ReLU relu_c1_, relu_c2_, relu_p1_, relu_p2_, relu_p3_, relu_h1_,
        relu_h2_, relu_h3_;
    Linear pose1_, pose2_, pose3_;
    Linear head1_, head2_, head3_, head4_;
    L2NormalizeRows norm_;
    int64_t last_batch_ = 0;
};

/// q_refined = q_in * q_out.
UnitQuaternion refined_pose(const UnitQuaternion& q_in,
                            const UnitQuaternion& q_out);

/// Geodesic loss over a batch: mean of 2 acos(|<q_out, q_label>|) per row,
/// evaluated stably (exactly zero when q_out == +-q_label). The gradient
/// clamps the dot magnitude to 1 - 1e-7 before the acos derivative, which
/// bounds it near zero loss; rows inside the clamp get zero gradient.
/// Returns the loss; writes d(loss)/d(q_out) into g_out if non-null.
double geodesic_loss(const Tensor& q_out, const Tensor& q_label,
                     Tensor* g_out);

/// MSE warmup loss: mean over batch and the 4 components of
/// (q_out - q_label)^2, labels canonicalized to w >= 0 by pack_quats.
double mse_loss(const Tensor& q_out, const Tensor& q_label, Tensor* g_out);

}  // namespace poserefine
