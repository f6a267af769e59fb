#include "poserefine/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poserefine/checkpoint.hpp"
#include "poserefine/errors.hpp"
#include "poserefine/rng.hpp"

namespace poserefine {

namespace {

void init_fan_in(Tensor& t, int64_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (float& v : t.v)
        v = static_cast<float>(uniform(rng, -bound, bound));
}

uint64_t meta_digest(const Tensor& meta) {
    uint64_t d = 0;
    for (int i = 0; i < 4; ++i) {
        d |= static_cast<uint64_t>(
                 static_cast<uint32_t>(meta.v[static_cast<size_t>(2 + i)]))
             << (16 * i);
    }
    return d;
}

}  // namespace

Refiner::Refiner(uint64_t seed)
    : conv1_(3, 16, 5, 1, 2),
      conv2_(16, 16, 5, 1, 2),
      bn1_(16),
      bn2_(16),
      pose1_(4, 64),
      pose2_(64, 512),
      pose3_(512, kCnnFeatureDim),
      head1_(kConcatDim, 4096),
      head2_(4096, 1024),
      head3_(1024, 128),
      head4_(128, 4) {
    Rng rng = make_rng(seed, /*stream=*/201);  // weight init stream
    auto init_conv = [&](Conv2d& c) {
        const int64_t fan_in = c.in_ch * c.ksize * c.ksize;
        init_fan_in(c.weight, fan_in, rng);
        init_fan_in(c.bias, fan_in, rng);
    };
    auto init_linear = [&](Linear& l) {
        init_fan_in(l.weight, l.in_features, rng);
        init_fan_in(l.bias, l.in_features, rng);
    };
    init_conv(conv1_);
    init_conv(conv2_);
    init_linear(pose1_);
    init_linear(pose2_);
    init_linear(pose3_);
    init_linear(head1_);
    init_linear(head2_);
    init_linear(head3_);
    init_linear(head4_);
}

Tensor Refiner::forward(const Tensor& images, const Tensor& q_in,
                        bool train) {
    const int64_t S = kRefinerInputSize;
    if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != S ||
        images.dim(3) != S) {
        throw std::invalid_argument("Refiner: expected images [Bx3x" +
                                    std::to_string(S) + "x" +
                                    std::to_string(S) + "], got " +
                                    images.shape_str());
    }
    const int64_t B = images.dim(0);
    check_shape(q_in, {B, 4}, "Refiner: q_in");
    last_batch_ = B;

    // CNN feature extraction stage.
    Tensor t = conv1_.forward(images);
    t = bn1_.forward(t, train);
    t = relu_c1_.forward(t);
    t = pool1_.forward(t);
    t = conv2_.forward(t);
    t = bn2_.forward(t, train);
    t = relu_c2_.forward(t);
    t = pool2_.forward(t);
    Tensor feat = Tensor::from_values({B, kCnnFeatureDim}, std::move(t.v));

    // Pose input stage.
    Tensor p = relu_p1_.forward(pose1_.forward(q_in));
    p = relu_p2_.forward(pose2_.forward(p));
    p = relu_p3_.forward(pose3_.forward(p));

    // Refinement stage.
    Tensor h = concat_cols(feat, p);
    h = relu_h1_.forward(head1_.forward(h));
    h = relu_h2_.forward(head2_.forward(h));
    h = relu_h3_.forward(head3_.forward(h));
    h = head4_.forward(h);
    return norm_.forward(h);
}

void Refiner::backward(const Tensor& g_out) {
    Tensor g = norm_.backward(g_out);
    g = head4_.backward(g);
    g = head3_.backward(relu_h3_.backward(g));
    g = head2_.backward(relu_h2_.backward(g));
    g = head1_.backward(relu_h1_.backward(g));

    Tensor g_feat, g_pose;
    split_cols(g, kCnnFeatureDim, g_feat, g_pose);

    g_pose = pose3_.backward(relu_p3_.backward(g_pose));
    g_pose = pose2_.backward(relu_p2_.backward(g_pose));
    pose1_.backward(relu_p1_.backward(g_pose));

    Tensor g_cnn = Tensor::from_values({last_batch_, 16, 16, 16},
                                       std::move(g_feat.v));
    g_cnn = pool2_.backward(g_cnn);
    g_cnn = bn2_.backward(relu_c2_.backward(g_cnn));
    g_cnn = conv2_.backward(g_cnn);
    g_cnn = pool1_.backward(g_cnn);
    g_cnn = bn1_.backward(relu_c1_.backward(g_cnn));
    conv1_.backward(g_cnn);
}

UnitQuaternion Refiner::predict(const Tensor& image,
                                const UnitQuaternion& q_in, bool train) {
    Tensor batch({1, 3, kRefinerInputSize, kRefinerInputSize});
    check_shape(image, {3, kRefinerInputSize, kRefinerInputSize},
                "Refiner::predict image");
    std::copy(image.v.begin(), image.v.end(), batch.v.begin());
    const Tensor q = pack_quats({q_in});
    const Tensor out = forward(batch, q, train);
    return unpack_quat(out, 0);
}

std::vector<Tensor*> Refiner::parameters() {
    return {&conv1_.weight, &conv1_.bias,   &bn1_.scale,     &bn1_.shift,
            &conv2_.weight, &conv2_.bias,   &bn2_.scale,     &bn2_.shift,
            &pose1_.weight, &pose1_.bias,   &pose2_.weight,  &pose2_.bias,
            &pose3_.weight, &pose3_.bias,   &head1_.weight,  &head1_.bias,
            &head2_.weight, &head2_.bias,   &head3_.weight,  &head3_.bias,
            &head4_.weight, &head4_.bias};
}

std::vector<std::pair<std::string, Tensor*>> Refiner::named_tensors() {
    return {{"cnn.conv1.weight", &conv1_.weight},
            {"cnn.conv1.bias", &conv1_.bias},
            {"cnn.bn1.scale", &bn1_.scale},
            {"cnn.bn1.shift", &bn1_.shift},
            {"cnn.bn1.running_mean", &bn1_.running_mean},
            {"cnn.bn1.running_var", &bn1_.running_var},
            {"cnn.conv2.weight", &conv2_.weight},
            {"cnn.conv2.bias", &conv2_.bias},
            {"cnn.bn2.scale", &bn2_.scale},
            {"cnn.bn2.shift", &bn2_.shift},
            {"cnn.bn2.running_mean", &bn2_.running_mean},
            {"cnn.bn2.running_var", &bn2_.running_var},
            {"pose.fc1.weight", &pose1_.weight},
            {"pose.fc1.bias", &pose1_.bias},
            {"pose.fc2.weight", &pose2_.weight},
            {"pose.fc2.bias", &pose2_.bias},
            {"pose.fc3.weight", &pose3_.weight},
            {"pose.fc3.bias", &pose3_.bias},
            {"head.fc1.weight", &head1_.weight},
            {"head.fc1.bias", &head1_.bias},
            {"head.fc2.weight", &head2_.weight},
            {"head.fc2.bias", &head2_.bias},
            {"head.fc3.weight", &head3_.weight},
            {"head.fc3.bias", &head3_.bias},
            {"head.fc4.weight", &head4_.weight},
            {"head.fc4.bias", &head4_.bias}};
}

void Refiner::zero_grad() {
    for (Tensor* p : parameters()) p->zero_grad();
}

void Refiner::save(const std::string& path, uint64_t config_digest) const {
    Tensor meta({6});
    meta.v[0] = static_cast<float>(kRefinerArchVersion);
    meta.v[1] = static_cast<float>(kRefinerInputSize);
    for (int i = 0; i < 4; ++i) {
        meta.v[static_cast<size_t>(2 + i)] = static_cast<float>(
            (config_digest >> (16 * i)) & 0xffffULL);
    }
    std::vector<std::pair<std::string, const Tensor*>> entries;
    entries.emplace_back("meta", &meta);
    for (auto& [name, t] : const_cast<Refiner*>(this)->named_tensors()) {
        entries.emplace_back(name, t);
    }
    save_checkpoint(path, entries);
}

uint64_t Refiner::load(const std::string& path) {
    auto map = load_checkpoint_map(path);
    const auto meta_it = map.find("meta");
    if (meta_it == map.end() || meta_it->second.numel() != 6) {
        throw DataError("checkpoint '" + path + "' has no valid meta entry");
    }
    const Tensor& meta = meta_it->second;
    const auto arch = static_cast<uint32_t>(meta.v[0]);
    const auto in_size = static_cast<int>(meta.v[1]);
    if (arch != kRefinerArchVersion || in_size != kRefinerInputSize) {
        throw DataError(
            "checkpoint '" + path + "' was written for architecture v" +
            std::to_string(arch) + " with input size " +
            std::to_string(in_size) + "; this build expects v" +
            std::to_string(kRefinerArchVersion) + " at " +
            std::to_string(kRefinerInputSize));
    }
    for (auto& [name, dst] : named_tensors()) {
        const auto it = map.find(name);
        if (it == map.end()) {
            throw DataError("checkpoint '" + path + "' is missing entry '" +
                            name + "'");
        }
        check_shape(it->second, dst->shape, name.c_str());
        dst->v = it->second.v;
    }
    return meta_digest(meta);
}

Tensor Refiner::pack_quats(const std::vector<UnitQuaternion>& qs) {
    Tensor t({static_cast<int64_t>(qs.size()), 4});
    for (size_t i = 0; i < qs.size(); ++i) {
        const UnitQuaternion c = qs[i].canonical();
        t.v[i * 4 + 0] = static_cast<float>(c.w);
        t.v[i * 4 + 1] = static_cast<float>(c.x);
        t.v[i * 4 + 2] = static_cast<float>(c.y);
        t.v[i * 4 + 3] = static_cast<float>(c.z);
    }
    return t;
}

UnitQuaternion Refiner::unpack_quat(const Tensor& t, int64_t row) {
    const size_t o = static_cast<size_t>(row * 4);
    return UnitQuaternion{t.v[o], t.v[o + 1], t.v[o + 2], t.v[o + 3]}
        .normalized();
}

UnitQuaternion refined_pose(const UnitQuaternion& q_in,
                            const UnitQuaternion& q_out) {
    return quat_mul(q_in, q_out);
}

double geodesic_loss(const Tensor& q_out, const Tensor& q_label,
                     Tensor* g_out) {
    check_same_shape(q_out, q_label, "geodesic_loss");
    const int64_t B = q_out.dim(0);
    if (g_out) *g_out = Tensor(q_out.shape);
    double total = 0.0;
    for (int64_t b = 0; b < B; ++b) {
        const size_t o = static_cast<size_t>(b * 4);
        const UnitQuaternion qo{q_out.v[o], q_out.v[o + 1], q_out.v[o + 2],
                                q_out.v[o + 3]};
        const UnitQuaternion ql{q_label.v[o], q_label.v[o + 1],
                                q_label.v[o + 2], q_label.v[o + 3]};
        total += geodesic_angle(qo, ql);

        if (g_out) {
            // d/dq 2 acos(|<q, l>|) = -2 sign(<q, l>) l / sqrt(1 - c^2),
            // with |c| clamped to 1 - 1e-7 (saturating: zero inside).
            const double c = qo.dot(ql);
            const double ac = std::abs(c);
            if (ac < 1.0 - 1e-7) {
                const double k =
                    -2.0 * (c < 0.0 ? -1.0 : 1.0) / std::sqrt(1.0 - ac * ac);
                const double scale = k / static_cast<double>(B);
                g_out->v[o] = static_cast<float>(scale * ql.w);
                g_out->v[o + 1] = static_cast<float>(scale * ql.x);
                g_out->v[o + 2] = static_cast<float>(scale * ql.y);
                g_out->v[o + 3] = static_cast<float>(scale * ql.z);
            }
        }
    }
    return total / static_cast<double>(B);
}

double mse_loss(const Tensor& q_out, const Tensor& q_label, Tensor* g_out) {
    check_same_shape(q_out, q_label, "mse_loss");
    const int64_t n = q_out.numel();
    if (g_out) *g_out = Tensor(q_out.shape);
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(q_out.v[static_cast<size_t>(i)]) -
                         q_label.v[static_cast<size_t>(i)];
        total += d * d;
        if (g_out) {
            g_out->v[static_cast<size_t>(i)] =
                static_cast<float>(2.0 * d / static_cast<double>(n));
        }
    }
    return total / static_cast<double>(n);
}

}  // namespace poserefine
