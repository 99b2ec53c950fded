#include "hullsight/noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

namespace hullsight {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValueError(std::string(what) + " must lie in [0, 1]");
}

// Runs body(row_begin, row_end) over disjoint row bands.
void for_rows(int rows, unsigned threads, const std::function<void(int, int)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(rows, 1))));
  if (threads == 1) {
    body(0, rows);
    return;
  }
  std::vector<std::jthread> pool;
  const int band = (rows + static_cast<int>(threads) - 1) / static_cast<int>(threads);
  for (int r0 = 0; r0 < rows; r0 += band) pool.emplace_back(body, r0, std::min(rows, r0 + band));
}

}  // namespace

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "shot") return NoiseKind::shot;
  if (name == "sp" || name == "salt_pepper") return NoiseKind::salt_pepper;
  throw ValueError("unknown noise kind '" + std::string(name) + "' (expected sp or shot)");
}

std::string_view to_string(NoiseKind kind) { return kind == NoiseKind::shot ? "shot" : "sp"; }

void NoiseParams::validate() const {
  check_probability(p, "shot noise probability P");
  check_probability(p_salt, "salt probability");
  check_probability(p_pepper, "pepper probability");
  if (p_salt + p_pepper > 1.0) throw ValueError("salt + pepper probabilities must not exceed 1");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter, std::uint64_t stream) {
  return splitmix(splitmix(splitmix(seed) ^ counter) ^ (stream * 0xd6e8feb86659fd93ULL));
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter, std::uint64_t stream) {
  return static_cast<double>(mix_seed(seed, counter, stream) >> 11) * 0x1.0p-53;
}

std::uint32_t poisson_sample(double mean, double u1, double u2) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ValueError("poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    double prob = std::exp(-mean);
    double cdf = prob;
    std::uint32_t k = 0;
    while (u1 > cdf && k < 1000) {
      ++k;
      prob *= mean / k;
      cdf += prob;
    }
    return k;
  }
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));  // 1 - u1 lies in (0, 1]
  const double z = r * std::cos(2.0 * std::numbers::pi * u2);
  return static_cast<std::uint32_t>(std::max(0.0, std::round(mean + std::sqrt(mean) * z)));
}

Image apply_shot_noise(const Image& img, double p, std::uint64_t seed, unsigned threads) {
  validate(img);
  check_probability(p, "shot noise probability P");
  Image out = img;
  if (p == 0.0) return out;
  const int ch = img.channels;
  for_rows(img.height, threads, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int c = 0; c < ch; ++c) {
          const std::uint64_t key = (static_cast<std::uint64_t>(y) * img.width + x) * ch + c;
          if (counter_uniform(seed, key, 0) >= p) continue;
          const std::uint32_t v = poisson_sample(img.at(x, y, c), counter_uniform(seed, key, 1),
                                                 counter_uniform(seed, key, 2));
          out.at(x, y, c) = static_cast<std::uint8_t>(std::min<std::uint32_t>(v, 255));
        }
  });
  return out;
}

Image apply_sp_noise(const Image& img, double p_salt, double p_pepper, std::uint64_t seed, unsigned threads,
                     bool per_channel) {
  validate(img);
  NoiseParams{NoiseKind::salt_pepper, 0.0, p_salt, p_pepper, seed}.validate();
  Image out = img;
  if (p_salt == 0.0 && p_pepper == 0.0) return out;
  const int ch = img.channels;
  const int draws = per_channel ? ch : 1;
  for_rows(img.height, threads, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int d = 0; d < draws; ++d) {
          const std::uint64_t pixel = static_cast<std::uint64_t>(y) * img.width + x;
          const double u = counter_uniform(seed, per_channel ? pixel * ch + d : pixel, 0);
          int value = -1;
          if (u < p_salt) {
            value = 255;
          } else if (u < p_salt + p_pepper) {
            value = 0;
          }
          if (value < 0) continue;
          if (per_channel) {
            out.at(x, y, d) = static_cast<std::uint8_t>(value);
          } else {
            for (int c = 0; c < ch; ++c) out.at(x, y, c) = static_cast<std::uint8_t>(value);
          }
        }
  });
  return out;
}

Image apply_noise(const Image& img, const NoiseParams& params, unsigned threads) {
  params.validate();
  if (params.kind == NoiseKind::shot) return apply_shot_noise(img, params.p, params.seed, threads);
  return apply_sp_noise(img, params.p_salt, params.p_pepper, params.seed, threads);
}

NoiseParams sample_training_severity(NoiseKind kind, std::uint64_t seed) {
  NoiseParams params;
  params.kind = kind;
  params.seed = mix_seed(seed, 0, 3);
  if (kind == NoiseKind::shot) {
    params.p = kMaxTrainingShot * counter_uniform(seed, 0, 0);
  } else {
    params.p_salt = kMaxTrainingSaltPepper * counter_uniform(seed, 0, 1);
    params.p_pepper = kMaxTrainingSaltPepper * counter_uniform(seed, 0, 2);
  }
  return params;
}

}  // namespace hullsight
