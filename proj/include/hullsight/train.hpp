#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "hullsight/checkpoint.hpp"
#include "hullsight/noise.hpp"
#include "hullsight/quality.hpp"
#include "hullsight/sgd.hpp"

namespace hullsight {

struct TrainConfig {
  double lr = 1e-5;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int batch = 8;  // 128 at full scale
  int epochs = 50;
  int patch = 32;  // low-resolution network input; targets are patch * sr_scale
  NoiseKind noise = NoiseKind::salt_pepper;
  // Draw a severity per sample from the training ranges; otherwise use `fixed`.
  bool random_severity = true;
  NoiseParams fixed{};
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
  SgdOptions sgd() const { return {lr, momentum, weight_decay}; }
};

struct EpochLog {
  int epoch = 0;
  LossWeights weights;
  double mean_loss = 0;
  MetricReport val_denoise;
  MetricReport val_sr;
  MetricReport val_noisy_input;  // noisy LR input vs clean LR reference
};

// One training pair built from a clean full-resolution image.
struct TrainSample {
  Image noisy_lr;
  Image clean_lr;
  Image clean_hr;
};

// Random (patch * sr_scale)^2 crop, box-downscaled by sr_scale, then noised.
// Everything is a function of `sample_seed`.
TrainSample make_sample(const Image& clean, const ModelConfig& model, const TrainConfig& cfg,
                        std::uint64_t sample_seed);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// The first round(n * train_fraction) images train, the rest validate.
TrainResult train(const std::vector<Image>& images, const TrainConfig& cfg, const ModelConfig& model,
                  const EpochCallback& on_epoch = {});

// Loads every PNG/PGM/PPM in `data_dir` (sorted by name) and trains on them.
TrainResult train(const std::filesystem::path& data_dir, const TrainConfig& cfg, const ModelConfig& model,
                  const EpochCallback& on_epoch = {});

std::vector<Image> load_image_dir(const std::filesystem::path& dir);

struct Enhanced {
  Image denoised;
  Image super_resolved;
};

Enhanced infer(const Checkpoint& ckpt, const Image& img);

// Seed used for the i-th held-out sample; stable across epochs.
std::uint64_t validation_seed(std::uint64_t seed, std::size_t index);

}  // namespace hullsight
