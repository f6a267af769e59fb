#pragma once

#include <cstdint>
#include <vector>

#include "poserefine/tensor.hpp"

// The layer set of the refinement network. Each layer owns its parameters
// (gradient-tracked tensors), caches what backward needs during forward,
// and accumulates parameter gradients in backward. Activations are NCHW /
// (batch, features). Single-threaded and bit-deterministic.

namespace poserefine {

/// Cross-correlation with square kernels. Sums accumulate in double.
struct Conv2d {
    Conv2d(int64_t in_ch, int64_t out_ch, int64_t ksize, int64_t stride,
           int64_t pad);

    Tensor forward(const Tensor& x);     // {B,in,H,W} -> {B,out,OH,OW}
    Tensor backward(const Tensor& gy);   // accumulates weight.g / bias.g

    int64_t in_ch, out_ch, ksize, stride, pad;
    Tensor weight;  // {out, in, k, k}
    Tensor bias;    // {out}

  private:
    Tensor x_cache_;
    std::vector<float> col_;        // im2col scratch, one sample
    std::vector<double> scratch_;   // gemm accumulator row
};

/// Per-channel batch normalization over (batch, height, width).
/// Train mode requires batch size >= 2 and updates the running statistics;
/// eval mode normalizes with them. Statistics accumulate in double.
struct BatchNorm2d {
    explicit BatchNorm2d(int64_t channels, float momentum = 0.1f,
                         float eps = 1e-5f);

    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& gy);

    int64_t channels;
    float momentum, eps;
    Tensor scale, shift;               // learnable
    Tensor running_mean, running_var;  // buffers, saved but not optimized

  private:
    bool train_mode_ = false;
    Tensor x_cache_;
    std::vector<double> mean_, inv_sd_;  // statistics used by the last forward
};

/// 2x2 window, stride 2. Ties go to the first element in row-major window
/// order. Spatial dims must be even.
struct MaxPool2x2 {
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

  private:
    std::vector<int64_t> argmax_;  // flat input index per output element
    std::vector<int64_t> in_shape_;
};

struct ReLU {
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

  private:
    Tensor x_cache_;
};

/// y = x W^T + b over a batch of row vectors.
struct Linear {
    Linear(int64_t in_features, int64_t out_features);

    Tensor forward(const Tensor& x);    // {B,in} -> {B,out}
    Tensor backward(const Tensor& gy);

    int64_t in_features, out_features;
    Tensor weight;  // {out, in}
    Tensor bias;    // {out}

  private:
    Tensor x_cache_;
};

/// Row-wise x / ||x||. Throws NumericError when a row norm is < 1e-12.
struct L2NormalizeRows {
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

  private:
    Tensor y_cache_;
    std::vector<double> norms_;
};

/// {B,F1} ++ {B,F2} -> {B,F1+F2} along the feature axis.
Tensor concat_cols(const Tensor& a, const Tensor& b);

/// Splits a {B,F1+F2} gradient back into the two inputs of concat_cols.
void split_cols(const Tensor& g, int64_t f1, Tensor& ga, Tensor& gb);

}  // namespace poserefine
