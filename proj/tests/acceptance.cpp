// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance            run all eight criteria
//   acceptance 2 5 6      run a subset

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hullsight/box_analytics.hpp"
#include "hullsight/checkpoint.hpp"
#include "hullsight/detection.hpp"
#include "hullsight/noise.hpp"
#include "hullsight/quality.hpp"
#include "hullsight/synthetic.hpp"
#include "hullsight/train.hpp"
#include "support/detection_instances.hpp"
#include "support/gradient_suite.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace hullsight;

namespace {

// Tolerances and budgets.
constexpr int kGradientSeedCount = 20;
constexpr double kGradientBudgetSeconds = 120;
constexpr double kPsnrClosedForm = 24.0484;
constexpr double kPsnrTolerance = 1e-3;
constexpr double kSelfSsimTolerance = 1e-9;
constexpr double kSsimClosedForm = 0.80007;
constexpr double kSsimClosedFormTolerance = 1e-4;
constexpr double kSsimOracleTolerance = 1e-6;
constexpr double kApTolerance = 1e-9;
constexpr int kApInstances = 50;
constexpr double kUpperBoundFixture = 14.125;
constexpr double kMinPsnrGainDb = 2.0;
constexpr double kTrainingBudgetSeconds = 600;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void gradients(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = testing::run_gradient_suite(kGradientSeedCount);
  const double secs = seconds_since(t0);
  double worst_primitive = 0, worst_end_to_end = 0;
  std::set<std::string> names;
  for (const auto& r : results) {
    names.insert(r.name);
    double& worst = r.tolerance > testing::kPrimitiveTolerance ? worst_end_to_end : worst_primitive;
    worst = std::max(worst, r.check.max_rel_error);
    o.require(r.passed(), r.name + " seed " + std::to_string(r.seed));
  }
  o.require(secs < kGradientBudgetSeconds, "runtime");
  o.detail << names.size() << " cases x " << kGradientSeedCount << " seeds, worst rel err primitive "
           << worst_primitive << " (<= " << testing::kPrimitiveTolerance << "), end-to-end " << worst_end_to_end
           << " (<= " << testing::kEndToEndTolerance << "), " << secs << " s";
}

void metrics(Outcome& o) {
  const Image a(40, 30, 1, 100), b(40, 30, 1, 116);
  const double db = psnr(a, b);
  o.require(std::abs(db - kPsnrClosedForm) <= kPsnrTolerance, "psnr closed form");

  double worst_self = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Image img = testing::random_image(31, 17, 1 + 2 * (s % 2), s);
    worst_self = std::max(worst_self, std::abs(ssim(img, img) - 1.0));
  }
  o.require(worst_self <= kSelfSsimTolerance, "ssim(a, a)");

  const double constant =
      similarity::ssim(TensorD::constant({1, 1, 32, 32}, 0.25), TensorD::constant({1, 1, 32, 32}, 0.5));
  o.require(std::abs(constant - kSsimClosedForm) <= kSsimClosedFormTolerance, "ssim constant closed form");

  double worst_oracle = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const TensorD x = testing::random_tensor({1, 2, 16 + Index(s), 20}, s, 0, 1);
    const TensorD y = testing::random_tensor({1, 2, 16 + Index(s), 20}, s + 100, 0, 1);
    worst_oracle = std::max(worst_oracle, std::abs(similarity::ssim(x, y) - oracle::ssim(x, y)));
  }
  o.require(worst_oracle <= kSsimOracleTolerance, "ssim vs windowed oracle");
  o.detail << "psnr " << db << " dB, |ssim(a,a)-1| " << worst_self << ", constant ssim " << constant
           << ", max |ssim-oracle| " << worst_oracle << " over 10 images";
}

void noise(Outcome& o) {
  const Image img = testing::random_image(37, 23, 3, 1);
  o.require(apply_shot_noise(img, 0.0, 5) == img && apply_sp_noise(img, 0.0, 0.0, 5) == img &&
                apply_sp_noise(img, 0.0, 0.0, 5, 4, true) == img,
            "p = 0 identity");

  const Image gray(1000, 1000, 1, 128);
  const Image sp = apply_sp_noise(gray, 0.05, 0.05, 2024, 3);
  std::size_t changed = 0;
  for (auto v : sp.pixels) changed += v != 128;
  const double fraction = double(changed) / 1e6;
  const double sigma = std::sqrt(0.1 * 0.9 / 1e6);
  o.require(std::abs(fraction - 0.1) <= 3 * sigma, "s&p fraction within 3 sigma");

  // Mean within 3 standard errors, variance within 5%.
  double worst_mean_z = 0, worst_var_rel = 0;
  for (int v : {3, 7, 100}) {
    const Image flat(1000, 1000, 1, static_cast<std::uint8_t>(v));
    const Image out = apply_shot_noise(flat, 1.0, 11 + v, 4);
    double sum = 0, sq = 0;
    for (auto p : out.pixels) sum += p;
    const double mean = sum / 1e6;
    for (auto p : out.pixels) sq += (p - mean) * (p - mean);
    const double var = sq / (1e6 - 1);
    const double z = std::abs(mean - v) / (std::sqrt(double(v)) / 1000.0);
    worst_mean_z = std::max(worst_mean_z, z);
    worst_var_rel = std::max(worst_var_rel, std::abs(var - v) / v);
  }
  o.require(worst_mean_z <= 3, "shot mean");
  o.require(worst_var_rel <= 0.05, "shot variance");

  const Image big = testing::random_image(257, 131, 3, 9);
  const Image sp1 = apply_sp_noise(big, 0.07, 0.03, 42, 1), shot1 = apply_shot_noise(big, 0.4, 42, 1);
  bool deterministic = true;
  for (unsigned t : {2u, 3u, 7u, 16u, 500u})
    deterministic = deterministic && apply_sp_noise(big, 0.07, 0.03, 42, t) == sp1 &&
                    apply_shot_noise(big, 0.4, 42, t) == shot1;
  o.require(deterministic, "thread determinism");
  o.detail << "s&p fraction " << fraction << " (0.1 +- " << 3 * sigma << "), shot worst mean z " << worst_mean_z
           << ", worst variance rel err " << worst_var_rel << ", threads 1/2/3/7/16/500 identical";
}

void scheduler(Outcome& o) {
  const LossWeights first = schedule_weights(1), last = schedule_weights(50);
  o.require(first.lambda == 1.0 && first.beta == 0.0, "epoch 1");
  o.require(last.lambda == 0.5 && last.beta == 0.5, "epoch 50");
  for (int e = 1; e <= 200; ++e) {
    const LossWeights w = schedule_weights(e);
    if (w.lambda + w.beta != 1.0) o.require(false, "sum at epoch " + std::to_string(e));
  }
  o.detail << "epoch 1 -> (" << first.lambda << ", " << first.beta << "), epoch 50 -> (" << last.lambda << ", "
           << last.beta << "), lambda + beta == 1 for epochs 1-200";
}

void map_engine(Outcome& o) {
  double worst = 0;
  std::size_t compared = 0;
  for (std::uint64_t seed = 0; seed < kApInstances; ++seed) {
    const auto in = testing::random_detection_instance(seed);
    for (int cls = 0; cls < 2; ++cls)
      for (double t : coco_iou_thresholds()) {
        const auto got = average_precision(in.dets, in.gts, cls, t);
        const auto want = oracle::average_precision(in.dets, in.gts, cls, t);
        if (got.has_value() != want.has_value()) {
          o.require(false, "definedness at seed " + std::to_string(seed));
          continue;
        }
        if (got) {
          worst = std::max(worst, std::abs(*got - *want));
          ++compared;
        }
      }
  }
  o.require(worst <= kApTolerance, "brute-force agreement");
  const EvalReport pair = evaluate(std::vector<Detection>{{{0, 0, 1, 1}, 0, 0.9, "img"}},
                                   std::vector<GroundTruth>{{{0, 0, 2, 1}, 0, "img"}});
  o.require(std::abs(pair.map5095 - 0.1) <= kApTolerance, "single pair mAP@[.5:.95]");
  o.detail << kApInstances << " instances, " << compared << " AP values, max |diff| " << worst
           << "; IoU 0.5 pair mAP@[.5:.95] " << pair.map5095;
}

void box_analytics(Outcome& o) {
  const double d = diagonal({0, 0, 3, 4});
  o.require(d == 5.0, "3-4-5 diagonal");
  const std::vector<double> fixture{10, 11, 11, 12, 12, 12, 13, 300};
  const AnomalyResult r = flag_anomalies(fixture);
  o.require(std::abs(r.upper_bound - kUpperBoundFixture) <= 1e-12, "upper bound");
  o.require(r.flagged == std::vector<std::size_t>{7}, "flagged set");
  bool invariant = true;
  for (double s : {0.001, 0.37, 2.5, 1000.0}) {
    std::vector<double> scaled;
    for (double v : fixture) scaled.push_back(v * s);
    invariant = invariant && flag_anomalies(scaled).flagged == r.flagged;
  }
  std::mt19937_64 rng(17);
  std::lognormal_distribution<double> len(4.0, 0.3);
  for (int trial = 0; trial < 100 && invariant; ++trial) {
    std::vector<double> v(5 + trial % 20), scaled;
    for (double& x : v) x = len(rng);
    v[trial % v.size()] *= 4;
    const double s = std::exp2(double(int(trial % 11) - 5));  // powers of two keep products exact
    for (double x : v) scaled.push_back(x * s);
    invariant = flag_anomalies(scaled).flagged == flag_anomalies(v).flagged;
  }
  o.require(invariant, "rescaling invariance");
  o.detail << "diagonal(3,4) = " << d << ", upper bound " << r.upper_bound << ", flagged {";
  for (std::size_t i : r.flagged) o.detail << i;
  o.detail << "}, invariant under rescaling";
}

void desk_training(Outcome& o) {
  SceneOptions scene;
  scene.width = scene.height = 160;
  const std::vector<Image> images = make_hull_images(scene, 5, 80);
  TrainConfig tc;
  tc.epochs = 200;
  tc.patch = 32;
  tc.train_fraction = 0.8;  // 64 train, 16 held out
  tc.random_severity = false;
  tc.fixed.kind = NoiseKind::salt_pepper;
  tc.fixed.p_salt = tc.fixed.p_pepper = 0.05;
  tc.seed = 1;
  ModelConfig mc;
  mc.base_channels = 8;

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult res = train(images, tc, mc, [&](const EpochLog& log) {
    if (log.epoch % 25 == 0)
      std::fprintf(stderr, "  epoch %d: loss %.4f denoised %.2f dB / %.4f, noisy %.2f dB / %.4f (%.0f s)\n",
                   log.epoch, log.mean_loss, log.val_denoise.psnr_db, log.val_denoise.ssim,
                   log.val_noisy_input.psnr_db, log.val_noisy_input.ssim, seconds_since(t0));
  });
  const double secs = seconds_since(t0);
  const EpochLog& last = res.log.back();
  const double gain = last.val_denoise.psnr_db - last.val_noisy_input.psnr_db;
  o.require(static_cast<int>(res.log.size()) == tc.epochs, "epoch count");
  o.require(gain >= kMinPsnrGainDb, "psnr gain");
  o.require(last.val_denoise.ssim > last.val_noisy_input.ssim, "ssim improvement");
  o.require(secs <= kTrainingBudgetSeconds, "runtime");
  o.detail << "held-out denoised " << last.val_denoise.psnr_db << " dB / " << last.val_denoise.ssim << " vs noisy "
           << last.val_noisy_input.psnr_db << " dB / " << last.val_noisy_input.ssim << " (gain " << gain
           << " dB >= " << kMinPsnrGainDb << "), sr " << last.val_sr.psnr_db << " dB, " << secs << " s";
}

void reproducibility(Outcome& o) {
  SceneOptions scene;
  scene.width = scene.height = 96;
  const std::vector<Image> images = make_hull_images(scene, 9, 10);
  TrainConfig tc;
  tc.epochs = 3;
  tc.patch = 16;
  tc.batch = 4;
  tc.lr = 1e-3;
  tc.seed = 77;
  const ModelConfig mc;
  const TrainResult a = train(images, tc, mc), b = train(images, tc, mc);
  bool same_trace = a.log.size() == b.log.size();
  for (std::size_t i = 0; same_trace && i < a.log.size(); ++i)
    same_trace = a.log[i].mean_loss == b.log[i].mean_loss && a.log[i].val_denoise.psnr_db == b.log[i].val_denoise.psnr_db;
  o.require(same_trace, "loss trace");

  const auto bytes = serialize(a.checkpoint);
  o.require(bytes == serialize(b.checkpoint), "checkpoints of two runs");
  testing::TempDir dir("acceptance");
  save_checkpoint(a.checkpoint, dir.path() / "model.ddsr");
  const auto reloaded = serialize(load_checkpoint(dir.path() / "model.ddsr"));
  o.require(reloaded == bytes, "file round trip");
  o.detail << "checkpoint " << bytes.size() << " bytes round-trips identically; " << a.log.size()
           << "-epoch loss trace identical across runs (final " << a.log.back().mean_loss << ")";
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("criteria", only, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "gradient suite", gradients},
      {2, "metric oracles", metrics},
      {3, "noise statistics", noise},
      {4, "loss scheduler", scheduler},
      {5, "mAP engine", map_engine},
      {6, "box analytics", box_analytics},
      {7, "desk-scale training", desk_training},
      {8, "checkpoint and determinism", reproducibility},
  };
  const std::set<int> wanted(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %d. %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
