#include "hullsight/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

namespace hullsight {

namespace {

Tensor<float> stack(const std::vector<const Image*>& images) {
  const Image& first = *images.front();
  Tensor<float> t({static_cast<Index>(images.size()), first.channels, first.height, first.width});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const Tensor<float> one = to_tensor<float>(*images[n]);
    std::copy_n(one.data(), one.size(), t.plane(static_cast<Index>(n), 0));
  }
  return t;
}

std::uint64_t epoch_sample_seed(std::uint64_t seed, int epoch, std::size_t sample) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(epoch), 1), sample, 2);
}

MetricReport mean_report(const std::vector<MetricReport>& rs) {
  MetricReport m;
  if (rs.empty()) return m;
  for (const auto& r : rs) {
    m.psnr_db += r.psnr_db;
    m.ssim += r.ssim;
  }
  m.psnr_db /= double(rs.size());
  m.ssim /= double(rs.size());
  return m;
}

}  // namespace

void TrainConfig::validate() const {
  SgdOptions{lr, momentum, weight_decay}.validate();
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (patch < 2 || patch % 2 != 0) throw ConfigError("patch must be an even size >= 2");
  if (!(train_fraction > 0 && train_fraction <= 1)) throw ConfigError("train_fraction must lie in (0, 1]");
  if (!random_severity) {
    NoiseParams p = fixed;
    p.kind = noise;
    p.validate();
  }
}

std::uint64_t validation_seed(std::uint64_t seed, std::size_t index) { return mix_seed(seed, index, 9); }

TrainSample make_sample(const Image& clean, const ModelConfig& model, const TrainConfig& cfg,
                        std::uint64_t sample_seed) {
  const int hr = cfg.patch * static_cast<int>(model.sr_scale);
  if (clean.width < hr || clean.height < hr) {
    throw DataError("training image " + std::to_string(clean.width) + "x" + std::to_string(clean.height) +
                    " is smaller than the " + std::to_string(hr) + "x" + std::to_string(hr) + " crop");
  }
  if (clean.channels != model.in_channels) throw DataError("training image channels do not match the model");
  const int x0 = static_cast<int>(counter_uniform(sample_seed, 0, 4) * (clean.width - hr + 1));
  const int y0 = static_cast<int>(counter_uniform(sample_seed, 0, 5) * (clean.height - hr + 1));
  TrainSample s;
  s.clean_hr = crop(clean, x0, y0, hr, hr);
  s.clean_lr = box_downscale(s.clean_hr, static_cast<int>(model.sr_scale));
  NoiseParams params;
  if (cfg.random_severity) {
    params = sample_training_severity(cfg.noise, sample_seed);
  } else {
    params = cfg.fixed;
    params.kind = cfg.noise;
    params.seed = mix_seed(sample_seed, 0, 6);
  }
  s.noisy_lr = apply_noise(s.clean_lr, params);
  return s;
}

TrainResult train(const std::vector<Image>& images, const TrainConfig& cfg, const ModelConfig& model,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  model.validate();
  if (images.empty()) throw DataError("no training images");
  const std::size_t n_train =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(images.size() * cfg.train_fraction)), 1,
                              images.size());
  const std::size_t n_val = images.size() - n_train;

  ParameterList<float> params = init_parameters<float>(model, cfg.seed);
  SgdState<float> state;
  const Shape sample_shape{1, model.in_channels, cfg.patch, cfg.patch};
  std::map<Index, Graph<float>> graphs;  // keyed by batch size
  auto graph_for = [&](Index n) -> Graph<float>& {
    auto it = graphs.find(n);
    if (it == graphs.end()) {
      Shape s = sample_shape;
      s.n = n;
      it = graphs.emplace(n, build_training_graph<float>(model, params, s)).first;
    }
    return it->second;
  };

  std::vector<TrainSample> val;
  for (std::size_t i = 0; i < n_val; ++i) {
    val.push_back(make_sample(images[n_train + i], model, cfg, validation_seed(cfg.seed, i)));
  }

  TrainResult result;
  std::vector<std::size_t> order(n_train);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const LossWeights weights = schedule_weights(epoch);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch), 7));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < n_train; b0 += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t b1 = std::min(n_train, b0 + static_cast<std::size_t>(cfg.batch));
      std::vector<TrainSample> samples;
      for (std::size_t i = b0; i < b1; ++i) {
        samples.push_back(make_sample(images[order[i]], model, cfg, epoch_sample_seed(cfg.seed, epoch, order[i])));
      }
      std::vector<const Image*> noisy, lr, hr;
      for (const auto& s : samples) {
        noisy.push_back(&s.noisy_lr);
        lr.push_back(&s.clean_lr);
        hr.push_back(&s.clean_hr);
      }
      Graph<float>& g = graph_for(static_cast<Index>(samples.size()));
      g.set_parameters(params);
      const auto out = g.forward({{"noisy", stack(noisy)},
                                  {"clean_lr", stack(lr)},
                                  {"clean_hr", stack(hr)},
                                  {"lambda", Tensor<float>::scalar(float(weights.lambda))},
                                  {"beta", Tensor<float>::scalar(float(weights.beta))}});
      const double loss = out.at("loss").item();
      if (!std::isfinite(loss)) {
        throw DataError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches));
      }
      const auto grads = g.backward("loss", Tensor<float>::scalar(1.0f));
      sgd_step(params, grads, state, cfg.sgd());
      loss_sum += loss;
      ++batches;
    }

    EpochLog log;
    log.epoch = epoch;
    log.weights = weights;
    log.mean_loss = loss_sum / double(batches);
    if (!val.empty()) {
      std::vector<MetricReport> dn, sr, noisy;
      const Checkpoint probe{model, cfg.seed, epoch, params};
      for (const auto& s : val) {
        const Enhanced e = infer(probe, s.noisy_lr);
        dn.push_back(compare(s.clean_lr, e.denoised));
        sr.push_back(compare(s.clean_hr, e.super_resolved));
        noisy.push_back(compare(s.clean_lr, s.noisy_lr));
      }
      log.val_denoise = mean_report(dn);
      log.val_sr = mean_report(sr);
      log.val_noisy_input = mean_report(noisy);
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  result.checkpoint = Checkpoint{model, cfg.seed, cfg.epochs, std::move(params)};
  return result;
}

std::vector<Image> load_image_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Image> images;
  for (const auto& f : files) images.push_back(load_image(f));
  return images;
}

TrainResult train(const std::filesystem::path& data_dir, const TrainConfig& cfg, const ModelConfig& model,
                  const EpochCallback& on_epoch) {
  const auto images = load_image_dir(data_dir);
  if (images.empty()) throw DataError("no images found in '" + data_dir.string() + "'");
  return train(images, cfg, model, on_epoch);
}

Enhanced infer(const Checkpoint& ckpt, const Image& img) {
  validate(img);
  Graph<float> g =
      build_inference_graph<float>(ckpt.model, ckpt.parameters, {1, img.channels, img.height, img.width});
  const auto out = g.forward({{"input", to_tensor<float>(img)}});
  return {to_image(out.at("denoised")), to_image(out.at("super_resolved"))};
}

}  // namespace hullsight
