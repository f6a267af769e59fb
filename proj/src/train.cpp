#include "poserefine/train.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "poserefine/adam.hpp"
#include "poserefine/errors.hpp"
#include "poserefine/eval.hpp"

namespace poserefine {

namespace {

// rng stream tags within a training run
constexpr uint64_t kStreamValNoise = 301;
constexpr uint64_t kStreamShuffleBase = 400;
constexpr uint64_t kStreamNoiseBase = 20000;

struct Batch {
    Tensor images;
    Tensor q_in;
    Tensor q_label;
};

Batch assemble(const LoadedDataset& data, const std::vector<int>& indices,
               size_t begin, size_t count,
               const std::vector<NoisePair>& pairs) {
    const int64_t S = data.input_size;
    Batch b;
    b.images = Tensor({static_cast<int64_t>(count), 3, S, S});
    std::vector<UnitQuaternion> qi(count), ql(count);
    const int64_t stride = 3 * S * S;
    for (size_t i = 0; i < count; ++i) {
        const int idx = indices[begin + i];
        const Tensor& img = data.images[static_cast<size_t>(idx)];
        std::copy(img.v.begin(), img.v.end(),
                  b.images.v.begin() + static_cast<int64_t>(i) * stride);
        qi[i] = pairs[begin + i].q_in;
        ql[i] = pairs[begin + i].q_label;
    }
    b.q_in = Refiner::pack_quats(qi);
    b.q_label = Refiner::pack_quats(ql);
    return b;
}

std::vector<NoisePair> draw_pairs(const LoadedDataset& data,
                                  const std::vector<int>& indices,
                                  const NoiseConfig& noise, Rng& rng) {
    std::vector<NoisePair> pairs;
    pairs.reserve(indices.size());
    for (int idx : indices) {
        pairs.push_back(
            perturb(data.q_gt[static_cast<size_t>(idx)], noise, rng));
    }
    return pairs;
}

double validation_error_deg(Refiner& net, const LoadedDataset& data,
                            const std::vector<int>& val_indices,
                            const std::vector<NoisePair>& val_pairs) {
    if (val_indices.empty()) return 0.0;
    const size_t n = val_indices.size();
    const size_t chunk = 64;
    double total = 0.0;
    for (size_t at = 0; at < n; at += chunk) {
        const size_t count = std::min(chunk, n - at);
        Batch b = assemble(data, val_indices, at, count, val_pairs);
        const Tensor out = net.forward(b.images, b.q_in, /*train=*/false);
        for (size_t i = 0; i < count; ++i) {
            const UnitQuaternion q_out =
                Refiner::unpack_quat(out, static_cast<int64_t>(i));
            const UnitQuaternion refined =
                refined_pose(val_pairs[at + i].q_in, q_out);
            const int idx = val_indices[at + i];
            total += angular_error_deg(refined,
                                       data.q_gt[static_cast<size_t>(idx)]);
        }
    }
    return total / static_cast<double>(n);
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs_mse < 0 || epochs_geodesic < 0) {
        throw std::invalid_argument("train: epoch counts must be >= 0");
    }
    if (batch_size < 2) {
        throw std::invalid_argument(
            "train: batch_size must be >= 2 (batch norm), got " +
            std::to_string(batch_size));
    }
    if (!(lr > 0.0f)) {
        throw std::invalid_argument("train: learning rate must be positive");
    }
    noise.validate();
}

uint64_t TrainConfig::digest() const {
    // FNV-1a over the canonical config text.
    char buf[256];
    std::snprintf(buf, sizeof(buf), "mse=%d geo=%d bs=%d lr=%.9g noise=%s "
                  "seed=%llu det=%d redraw=%d",
                  epochs_mse, epochs_geodesic, batch_size,
                  static_cast<double>(lr), noise.to_string().c_str(),
                  static_cast<unsigned long long>(seed),
                  deterministic ? 1 : 0, redraw_noise_per_epoch ? 1 : 0);
    uint64_t h = 1469598103934665603ULL;
    for (const char* p = buf; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 1099511628211ULL;
    }
    return h;
}

TrainResult train(Refiner& net, const LoadedDataset& data,
                  const DatasetSplit& split, const TrainConfig& cfg,
                  std::ostream* live_log) {
    cfg.validate();
    if (data.size() == 0 || split.train.empty()) {
        throw std::invalid_argument("train: empty dataset or train split");
    }

    Adam adam(net.parameters(), AdamConfig{cfg.lr, 0.9f, 0.999f, 1e-8f});

    // Validation pairs are fixed for the whole run so the per-epoch metric
    // tracks the model, not the noise draw.
    Rng val_rng = make_rng(cfg.seed, kStreamValNoise);
    const std::vector<NoisePair> val_pairs =
        draw_pairs(data, split.validation, cfg.noise, val_rng);

    std::vector<NoisePair> fixed_pairs;
    if (!cfg.redraw_noise_per_epoch) {
        Rng rng = make_rng(cfg.seed, kStreamNoiseBase);
        fixed_pairs = draw_pairs(data, split.train, cfg.noise, rng);
    }

    TrainResult result;
    const int total_epochs = cfg.epochs_mse + cfg.epochs_geodesic;
    std::vector<int> order = split.train;  // per-epoch shuffled copy
    // Maps a dataset index back to its slot in split.train (fixed-noise mode).
    std::vector<size_t> position(static_cast<size_t>(data.size()));

    for (int epoch = 1; epoch <= total_epochs; ++epoch) {
        const bool mse_phase = epoch <= cfg.epochs_mse;

        // Deterministic per-epoch shuffle of sample order.
        order = split.train;
        Rng shuffle_rng =
            make_rng(cfg.seed, kStreamShuffleBase + static_cast<uint64_t>(epoch));
        shuffle(shuffle_rng, order);

        std::vector<NoisePair> pairs;
        if (cfg.redraw_noise_per_epoch) {
            Rng noise_rng = make_rng(
                cfg.seed, kStreamNoiseBase + static_cast<uint64_t>(epoch));
            pairs = draw_pairs(data, order, cfg.noise, noise_rng);
        } else {
            // Reorder the fixed pairs to match the shuffled sample order.
            for (size_t i = 0; i < split.train.size(); ++i)
                position[static_cast<size_t>(split.train[i])] = i;
            pairs.resize(order.size());
            for (size_t i = 0; i < order.size(); ++i)
                pairs[i] =
                    fixed_pairs[position[static_cast<size_t>(order[i])]];
        }

        double loss_sum = 0.0;
        size_t counted = 0;
        int batch_index = 0;
        for (size_t at = 0; at + 2 <= order.size();
             at += static_cast<size_t>(cfg.batch_size)) {
            const size_t count =
                std::min(static_cast<size_t>(cfg.batch_size),
                         order.size() - at);
            if (count < 2) break;  // batch norm needs >= 2; drop remainder
            ++batch_index;

            Batch b = assemble(data, order, at, count, pairs);
            const Tensor out = net.forward(b.images, b.q_in, /*train=*/true);
            Tensor g_out;
            const double loss = mse_phase
                                    ? mse_loss(out, b.q_label, &g_out)
                                    : geodesic_loss(out, b.q_label, &g_out);
            if (!std::isfinite(loss)) {
                throw TrainingDivergence(
                    "train: non-finite loss at epoch " +
                    std::to_string(epoch) + ", batch " +
                    std::to_string(batch_index));
            }
            net.zero_grad();
            net.backward(g_out);
            adam.step();

            loss_sum += loss * static_cast<double>(count);
            counted += count;
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.phase = mse_phase ? "mse" : "geodesic";
        m.train_loss = counted ? loss_sum / static_cast<double>(counted) : 0.0;
        m.val_err_deg =
            validation_error_deg(net, data, split.validation, val_pairs);

        char line[160];
        std::snprintf(line, sizeof(line),
                      "epoch=%d phase=%s train_loss=%.17g val_err_deg=%.17g\n",
                      m.epoch, m.phase.c_str(), m.train_loss, m.val_err_deg);
        result.log_text += line;
        if (live_log) (*live_log) << line << std::flush;
        result.log.push_back(std::move(m));
    }
    return result;
}

}  // namespace poserefine
