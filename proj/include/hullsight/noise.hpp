#pragma once

#include <cstdint>
#include <string_view>

#include "hullsight/image.hpp"

namespace hullsight {

enum class NoiseKind { shot, salt_pepper };

NoiseKind parse_noise_kind(std::string_view name);  // "shot" | "sp"
std::string_view to_string(NoiseKind kind);

struct NoiseParams {
  NoiseKind kind = NoiseKind::salt_pepper;
  double p = 0;         // shot: probability a sample is replaced by a Poisson draw
  double p_salt = 0;    // salt-and-pepper: probability of 255
  double p_pepper = 0;  // salt-and-pepper: probability of 0
  std::uint64_t seed = 0;

  void validate() const;
};

// Stateless 64-bit mixer; every random draw in the library is a function of
// (seed, counter, stream), never of traversal order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter, std::uint64_t stream = 0);

// Uniform in [0, 1) from the counter hash.
double counter_uniform(std::uint64_t seed, std::uint64_t counter, std::uint64_t stream = 0);

// Poisson draw given two independent uniforms. Sequential inversion below
// mean 10, rounded normal approximation (clamped at 0) from 10 up.
std::uint32_t poisson_sample(double mean, double u1, double u2);

// Each sample, independently with probability p, becomes Poisson(value)
// clamped to [0, 255].
Image apply_shot_noise(const Image& img, double p, std::uint64_t seed, unsigned threads = 1);

// Each pixel (all channels jointly unless per_channel) becomes 255 with
// probability p_salt, 0 with probability p_pepper, else stays.
Image apply_sp_noise(const Image& img, double p_salt, double p_pepper, std::uint64_t seed, unsigned threads = 1,
                     bool per_channel = false);

Image apply_noise(const Image& img, const NoiseParams& params, unsigned threads = 1);

// Training severities: p_salt, p_pepper ~ U[0, 0.1]; p ~ U[0, 0.2].
NoiseParams sample_training_severity(NoiseKind kind, std::uint64_t seed);

inline constexpr double kMaxTrainingSaltPepper = 0.1;
inline constexpr double kMaxTrainingShot = 0.2;

}  // namespace hullsight
