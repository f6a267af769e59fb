#include "poserefine/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kernels.hpp"
#include "poserefine/errors.hpp"

namespace poserefine {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Expands one {C,H,W} sample into the {C*k*k, OH*OW} patch matrix.
void im2col(const float* x, int64_t C, int64_t H, int64_t W, int64_t k,
            int64_t stride, int64_t pad, int64_t OH, int64_t OW, float* col) {
    const int64_t P = OH * OW;
    for (int64_t c = 0; c < C; ++c) {
        const float* plane = x + c * H * W;
        for (int64_t ky = 0; ky < k; ++ky) {
            for (int64_t kx = 0; kx < k; ++kx) {
                float* dst = col + ((c * k + ky) * k + kx) * P;
                for (int64_t oy = 0; oy < OH; ++oy) {
                    const int64_t iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= H) {
                        std::fill(dst, dst + OW, 0.0f);
                        dst += OW;
                        continue;
                    }
                    const float* src = plane + iy * W;
                    for (int64_t ox = 0; ox < OW; ++ox) {
                        const int64_t ix = ox * stride + kx - pad;
                        *dst++ = (ix >= 0 && ix < W) ? src[ix] : 0.0f;
                    }
                }
            }
        }
    }
}

}  // namespace

Conv2d::Conv2d(int64_t in_ch_, int64_t out_ch_, int64_t ksize_,
               int64_t stride_, int64_t pad_)
    : in_ch(in_ch_),
      out_ch(out_ch_),
      ksize(ksize_),
      stride(stride_),
      pad(pad_),
      weight({out_ch_, in_ch_, ksize_, ksize_}, true),
      bias({out_ch_}, true) {}

Tensor Conv2d::forward(const Tensor& x) {
    require(x.rank() == 4 && x.dim(1) == in_ch,
            "Conv2d: expected input [Bx" + std::to_string(in_ch) +
                "xHxW], got " + x.shape_str());
    const int64_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
    require(H + 2 * pad >= ksize && W + 2 * pad >= ksize,
            "Conv2d: input " + x.shape_str() + " smaller than kernel");
    const int64_t OH = (H + 2 * pad - ksize) / stride + 1;
    const int64_t OW = (W + 2 * pad - ksize) / stride + 1;
    const int64_t R = in_ch * ksize * ksize;
    const int64_t P = OH * OW;

    col_.resize(static_cast<size_t>(R * P));
    scratch_.resize(static_cast<size_t>(P));
    Tensor y({B, out_ch, OH, OW});
    for (int64_t b = 0; b < B; ++b) {
        im2col(x.v.data() + b * in_ch * H * W, in_ch, H, W, ksize, stride, pad,
               OH, OW, col_.data());
        kernels::matmul_ikj_d(weight.v.data(), col_.data(), bias.v.data(),
                              y.v.data() + b * out_ch * P, out_ch, R, P,
                              scratch_.data());
    }
    x_cache_ = x;
    return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
    const Tensor& x = x_cache_;
    const int64_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int64_t OH = (H + 2 * pad - ksize) / stride + 1;
    const int64_t OW = (W + 2 * pad - ksize) / stride + 1;
    const int64_t R = in_ch * ksize * ksize;
    const int64_t P = OH * OW;
    check_shape(gy, {B, out_ch, OH, OW}, "Conv2d::backward");

    // W^T once; it is tiny compared to the activations.
    std::vector<float> wt(static_cast<size_t>(R * out_ch));
    for (int64_t oc = 0; oc < out_ch; ++oc)
        for (int64_t r = 0; r < R; ++r) wt[r * out_ch + oc] = weight.v[oc * R + r];

    std::vector<double> gw_acc(static_cast<size_t>(out_ch * R), 0.0);
    std::vector<double> gb_acc(static_cast<size_t>(out_ch), 0.0);
    std::vector<float> gcol(static_cast<size_t>(R * P));
    std::vector<double> dimg(static_cast<size_t>(in_ch * H * W));
    col_.resize(static_cast<size_t>(R * P));
    scratch_.resize(static_cast<size_t>(P));

    Tensor gx({B, in_ch, H, W});
    for (int64_t b = 0; b < B; ++b) {
        const float* gy_b = gy.v.data() + b * out_ch * P;
        im2col(x.v.data() + b * in_ch * H * W, in_ch, H, W, ksize, stride, pad,
               OH, OW, col_.data());
        for (int64_t oc = 0; oc < out_ch; ++oc) {
            const float* g = gy_b + oc * P;
            gb_acc[static_cast<size_t>(oc)] += kernels::sum_d(g, P);
            for (int64_t r = 0; r < R; ++r) {
                gw_acc[static_cast<size_t>(oc * R + r)] +=
                    kernels::dot_d(g, col_.data() + r * P, P);
            }
        }
        kernels::matmul_ikj_d(wt.data(), gy_b, nullptr, gcol.data(), R, out_ch,
                              P, scratch_.data());
        // col2im scatter-add, accumulated in double.
        std::fill(dimg.begin(), dimg.end(), 0.0);
        for (int64_t c = 0; c < in_ch; ++c) {
            for (int64_t ky = 0; ky < ksize; ++ky) {
                for (int64_t kx = 0; kx < ksize; ++kx) {
                    const float* src =
                        gcol.data() + ((c * ksize + ky) * ksize + kx) * P;
                    for (int64_t oy = 0; oy < OH; ++oy) {
                        const int64_t iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        double* dplane = dimg.data() + (c * H + iy) * W;
                        const float* srow = src + oy * OW;
                        for (int64_t ox = 0; ox < OW; ++ox) {
                            const int64_t ix = ox * stride + kx - pad;
                            if (ix >= 0 && ix < W) dplane[ix] += srow[ox];
                        }
                    }
                }
            }
        }
        float* gx_b = gx.v.data() + b * in_ch * H * W;
        for (size_t i = 0; i < dimg.size(); ++i)
            gx_b[i] = static_cast<float>(dimg[i]);
    }
    for (int64_t i = 0; i < out_ch * R; ++i)
        weight.g[static_cast<size_t>(i)] +=
            static_cast<float>(gw_acc[static_cast<size_t>(i)]);
    for (int64_t oc = 0; oc < out_ch; ++oc)
        bias.g[static_cast<size_t>(oc)] +=
            static_cast<float>(gb_acc[static_cast<size_t>(oc)]);
    return gx;
}

BatchNorm2d::BatchNorm2d(int64_t channels_, float momentum_, float eps_)
    : channels(channels_),
      momentum(momentum_),
      eps(eps_),
      scale({channels_}, true),
      shift({channels_}, true),
      running_mean({channels_}),
      running_var({channels_}) {
    std::fill(scale.v.begin(), scale.v.end(), 1.0f);
    std::fill(running_var.v.begin(), running_var.v.end(), 1.0f);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
    require(x.rank() == 4 && x.dim(1) == channels,
            "BatchNorm2d: expected input [Bx" + std::to_string(channels) +
                "xHxW], got " + x.shape_str());
    const int64_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int64_t plane = H * W;
    const int64_t n = B * plane;
    train_mode_ = train;
    mean_.assign(static_cast<size_t>(channels), 0.0);
    inv_sd_.assign(static_cast<size_t>(channels), 0.0);

    Tensor y(x.shape);
    if (train) {
        require(B >= 2,
                "BatchNorm2d: train mode needs batch size >= 2, got " +
                    std::to_string(B));
        for (int64_t c = 0; c < channels; ++c) {
            double s = 0.0;
            for (int64_t b = 0; b < B; ++b)
                s += kernels::sum_d(x.v.data() + (b * channels + c) * plane,
                                    plane);
            const double mean = s / static_cast<double>(n);
            double ss = 0.0;
            for (int64_t b = 0; b < B; ++b) {
                const float* p = x.v.data() + (b * channels + c) * plane;
                double acc = 0.0;
                for (int64_t i = 0; i < plane; ++i) {
                    const double d = static_cast<double>(p[i]) - mean;
                    acc += d * d;
                }
                ss += acc;
            }
            const double var = ss / static_cast<double>(n);
            const double inv_sd = 1.0 / std::sqrt(var + static_cast<double>(eps));
            mean_[static_cast<size_t>(c)] = mean;
            inv_sd_[static_cast<size_t>(c)] = inv_sd;

            const double unbiased =
                n > 1 ? ss / static_cast<double>(n - 1) : var;
            auto& rm = running_mean.v[static_cast<size_t>(c)];
            auto& rv = running_var.v[static_cast<size_t>(c)];
            rm = static_cast<float>((1.0 - momentum) * rm + momentum * mean);
            rv = static_cast<float>((1.0 - momentum) * rv + momentum * unbiased);
        }
    } else {
        for (int64_t c = 0; c < channels; ++c) {
            mean_[static_cast<size_t>(c)] =
                running_mean.v[static_cast<size_t>(c)];
            inv_sd_[static_cast<size_t>(c)] =
                1.0 / std::sqrt(
                          static_cast<double>(
                              running_var.v[static_cast<size_t>(c)]) +
                          static_cast<double>(eps));
        }
    }
    for (int64_t b = 0; b < B; ++b) {
        for (int64_t c = 0; c < channels; ++c) {
            const float* px = x.v.data() + (b * channels + c) * plane;
            float* py = y.v.data() + (b * channels + c) * plane;
            const float m = static_cast<float>(mean_[static_cast<size_t>(c)]);
            const float is = static_cast<float>(inv_sd_[static_cast<size_t>(c)]);
            const float g = scale.v[static_cast<size_t>(c)];
            const float s = shift.v[static_cast<size_t>(c)];
            for (int64_t i = 0; i < plane; ++i)
                py[i] = (px[i] - m) * is * g + s;
        }
    }
    x_cache_ = x;
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& gy) {
    const Tensor& x = x_cache_;
    check_same_shape(gy, x, "BatchNorm2d::backward");
    const int64_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int64_t plane = H * W;
    const int64_t n = B * plane;

    Tensor gx(x.shape);
    for (int64_t c = 0; c < channels; ++c) {
        const double mean = mean_[static_cast<size_t>(c)];
        const double inv_sd = inv_sd_[static_cast<size_t>(c)];
        const double g = scale.v[static_cast<size_t>(c)];
        double s1 = 0.0, s2 = 0.0;  // sum(gy), sum(gy * xhat)
        for (int64_t b = 0; b < B; ++b) {
            const float* px = x.v.data() + (b * channels + c) * plane;
            const float* pg = gy.v.data() + (b * channels + c) * plane;
            double a1 = 0.0, a2 = 0.0;
            for (int64_t i = 0; i < plane; ++i) {
                const double xh = (static_cast<double>(px[i]) - mean) * inv_sd;
                a1 += pg[i];
                a2 += pg[i] * xh;
            }
            s1 += a1;
            s2 += a2;
        }
        scale.g[static_cast<size_t>(c)] += static_cast<float>(s2);
        shift.g[static_cast<size_t>(c)] += static_cast<float>(s1);

        if (train_mode_) {
            const double m1 = s1 / static_cast<double>(n);
            const double m2 = s2 / static_cast<double>(n);
            for (int64_t b = 0; b < B; ++b) {
                const float* px = x.v.data() + (b * channels + c) * plane;
                const float* pg = gy.v.data() + (b * channels + c) * plane;
                float* pd = gx.v.data() + (b * channels + c) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    const double xh =
                        (static_cast<double>(px[i]) - mean) * inv_sd;
                    pd[i] = static_cast<float>(g * inv_sd *
                                               (pg[i] - m1 - xh * m2));
                }
            }
        } else {
            const double k = g * inv_sd;
            for (int64_t b = 0; b < B; ++b) {
                const float* pg = gy.v.data() + (b * channels + c) * plane;
                float* pd = gx.v.data() + (b * channels + c) * plane;
                for (int64_t i = 0; i < plane; ++i)
                    pd[i] = static_cast<float>(k * pg[i]);
            }
        }
    }
    return gx;
}

Tensor MaxPool2x2::forward(const Tensor& x) {
    require(x.rank() == 4, "MaxPool2x2: expected rank-4 input, got " +
                               x.shape_str());
    const int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    require(H % 2 == 0 && W % 2 == 0,
            "MaxPool2x2: spatial dims must be even, got " + x.shape_str());
    const int64_t OH = H / 2, OW = W / 2;
    Tensor y({B, C, OH, OW});
    argmax_.assign(static_cast<size_t>(y.numel()), 0);
    in_shape_ = {B, C, H, W};
    int64_t o = 0;
    for (int64_t bc = 0; bc < B * C; ++bc) {
        const float* plane = x.v.data() + bc * H * W;
        const int64_t base = bc * H * W;
        for (int64_t oy = 0; oy < OH; ++oy) {
            for (int64_t ox = 0; ox < OW; ++ox) {
                const int64_t i0 = (2 * oy) * W + 2 * ox;
                // Row-major window order; strict > keeps the first max.
                int64_t best = i0;
                float bv = plane[i0];
                const int64_t idx[3] = {i0 + 1, i0 + W, i0 + W + 1};
                for (int64_t cand : idx) {
                    if (plane[cand] > bv) {
                        bv = plane[cand];
                        best = cand;
                    }
                }
                y.v[static_cast<size_t>(o)] = bv;
                argmax_[static_cast<size_t>(o)] = base + best;
                ++o;
            }
        }
    }
    return y;
}

Tensor MaxPool2x2::backward(const Tensor& gy) {
    require(!in_shape_.empty(), "MaxPool2x2::backward before forward");
    check_shape(gy, {in_shape_[0], in_shape_[1], in_shape_[2] / 2,
                     in_shape_[3] / 2},
                "MaxPool2x2::backward");
    Tensor gx(in_shape_);
    for (int64_t o = 0; o < gy.numel(); ++o) {
        gx.v[static_cast<size_t>(argmax_[static_cast<size_t>(o)])] +=
            gy.v[static_cast<size_t>(o)];
    }
    return gx;
}

Tensor ReLU::forward(const Tensor& x) {
    Tensor y(x.shape);
    for (size_t i = 0; i < x.v.size(); ++i) y.v[i] = std::max(0.0f, x.v[i]);
    x_cache_ = x;
    return y;
}

Tensor ReLU::backward(const Tensor& gy) {
    check_same_shape(gy, x_cache_, "ReLU::backward");
    Tensor gx(gy.shape);
    for (size_t i = 0; i < gy.v.size(); ++i)
        gx.v[i] = x_cache_.v[i] > 0.0f ? gy.v[i] : 0.0f;
    return gx;
}

Linear::Linear(int64_t in_features_, int64_t out_features_)
    : in_features(in_features_),
      out_features(out_features_),
      weight({out_features_, in_features_}, true),
      bias({out_features_}, true) {}

Tensor Linear::forward(const Tensor& x) {
    require(x.rank() == 2 && x.dim(1) == in_features,
            "Linear: expected input [Bx" + std::to_string(in_features) +
                "], got " + x.shape_str());
    const int64_t B = x.dim(0);
    Tensor y({B, out_features});
    kernels::matmul_rows_f(x.v.data(), weight.v.data(), bias.v.data(),
                           y.v.data(), B, out_features, in_features);
    x_cache_ = x;
    return y;
}

Tensor Linear::backward(const Tensor& gy) {
    const Tensor& x = x_cache_;
    const int64_t B = x.dim(0);
    check_shape(gy, {B, out_features}, "Linear::backward");

    Tensor gx({B, in_features});
    for (int64_t b = 0; b < B; ++b) {
        float* gxr = gx.v.data() + b * in_features;
        const float* gyr = gy.v.data() + b * out_features;
        for (int64_t o = 0; o < out_features; ++o) {
            if (gyr[o] != 0.0f)
                kernels::axpy_f(gxr, gyr[o], weight.v.data() + o * in_features,
                                in_features);
        }
    }
    for (int64_t o = 0; o < out_features; ++o) {
        float* gw = weight.g.data() + o * in_features;
        double gb = 0.0;
        for (int64_t b = 0; b < B; ++b) {
            const float s = gy.v[static_cast<size_t>(b * out_features + o)];
            gb += s;
            if (s != 0.0f)
                kernels::axpy_f(gw, s, x.v.data() + b * in_features,
                                in_features);
        }
        bias.g[static_cast<size_t>(o)] += static_cast<float>(gb);
    }
    return gx;
}

Tensor L2NormalizeRows::forward(const Tensor& x) {
    require(x.rank() == 2, "L2NormalizeRows: expected rank-2 input, got " +
                               x.shape_str());
    const int64_t B = x.dim(0), F = x.dim(1);
    Tensor y(x.shape);
    norms_.assign(static_cast<size_t>(B), 0.0);
    for (int64_t b = 0; b < B; ++b) {
        const float* px = x.v.data() + b * F;
        const double n = std::sqrt(kernels::dot_d(px, px, F));
        if (n < 1e-12) {
            throw NumericError(
                "l2_normalize: input row " + std::to_string(b) +
                " has near-zero norm " + std::to_string(n));
        }
        norms_[static_cast<size_t>(b)] = n;
        float* py = y.v.data() + b * F;
        for (int64_t i = 0; i < F; ++i)
            py[i] = static_cast<float>(px[i] / n);
    }
    y_cache_ = y;
    return y;
}

Tensor L2NormalizeRows::backward(const Tensor& gy) {
    const Tensor& y = y_cache_;
    check_same_shape(gy, y, "L2NormalizeRows::backward");
    const int64_t B = y.dim(0), F = y.dim(1);
    Tensor gx(y.shape);
    for (int64_t b = 0; b < B; ++b) {
        const float* py = y.v.data() + b * F;
        const float* pg = gy.v.data() + b * F;
        const double n = norms_[static_cast<size_t>(b)];
        const double d = kernels::dot_d(py, pg, F);
        float* px = gx.v.data() + b * F;
        for (int64_t i = 0; i < F; ++i)
            px[i] = static_cast<float>((pg[i] - py[i] * d) / n);
    }
    return gx;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
        throw std::invalid_argument("concat_cols: incompatible shapes " +
                                    a.shape_str() + " and " + b.shape_str());
    }
    const int64_t B = a.dim(0), F1 = a.dim(1), F2 = b.dim(1);
    Tensor y({B, F1 + F2});
    for (int64_t r = 0; r < B; ++r) {
        std::copy_n(a.v.data() + r * F1, F1, y.v.data() + r * (F1 + F2));
        std::copy_n(b.v.data() + r * F2, F2, y.v.data() + r * (F1 + F2) + F1);
    }
    return y;
}

void split_cols(const Tensor& g, int64_t f1, Tensor& ga, Tensor& gb) {
    const int64_t B = g.dim(0), F = g.dim(1);
    const int64_t f2 = F - f1;
    ga = Tensor({B, f1});
    gb = Tensor({B, f2});
    for (int64_t r = 0; r < B; ++r) {
        std::copy_n(g.v.data() + r * F, f1, ga.v.data() + r * f1);
        std::copy_n(g.v.data() + r * F + f1, f2, gb.v.data() + r * f2);
    }
}

}  // namespace poserefine
