#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "poserefine/dataset.hpp"
#include "poserefine/refiner.hpp"
#include "poserefine/sampler.hpp"

namespace poserefine {

/// Two-phase training: epochs_mse epochs under the MSE warmup loss, then
/// epochs_geodesic under the geodesic loss, Adam throughout.
struct TrainConfig {
    int epochs_mse = 5;
    int epochs_geodesic = 10;
    int batch_size = 32;
    float lr = 1e-3f;
    NoiseConfig noise = NoiseConfig{};  // uniform 0..30 degrees
    uint64_t seed = 0;
    bool deterministic = true;  // sequential, ordered batch production
    bool redraw_noise_per_epoch = true;

    void validate() const;  // throws std::invalid_argument
    uint64_t digest() const;
};

struct EpochMetrics {
    int epoch = 0;              // 1-based, across both phases
    std::string phase;          // "mse" or "geodesic"
    double train_loss = 0.0;    // mean over samples, units of the phase loss
    double val_err_deg = 0.0;   // mean angular error on the validation split
};

struct TrainResult {
    std::vector<EpochMetrics> log;
    std::string log_text;  // exact emitted lines; byte-stable per seed
};

/// Trains `net` in place on the split's train indices, validating on its
/// validation indices after every epoch. `net` may carry loaded checkpoint
/// weights (fine-tuning); the optimizer state always starts fresh.
/// Validation noise pairs are drawn once per run; training noise is
/// re-drawn every epoch unless redraw_noise_per_epoch is off. Throws
/// TrainingDivergence with epoch/batch context on a non-finite loss.
TrainResult train(Refiner& net, const LoadedDataset& data,
                  const DatasetSplit& split, const TrainConfig& cfg,
                  std::ostream* live_log = nullptr);

}  // namespace poserefine
