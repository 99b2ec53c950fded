// hullsight: noise simulation, image metrics, DDSRNet training and inference,
// detection evaluation and hull length analytics.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hullsight/annotations.hpp"
#include "hullsight/box_analytics.hpp"
#include "hullsight/detection.hpp"
#include "hullsight/image.hpp"
#include "hullsight/noise.hpp"
#include "hullsight/overlay.hpp"
#include "hullsight/quality.hpp"
#include "hullsight/report.hpp"
#include "hullsight/run_config.hpp"
#include "hullsight/train.hpp"

namespace fs = std::filesystem;
using namespace hullsight;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

// Predictions with or without a confidence column; missing confidence is 1.
std::vector<Detection> read_boxes(const fs::path& path, ImageSize size) {
  std::vector<Detection> out;
  for (const auto& r : read_annotation_file(path, RecordKind::either))
    out.push_back({to_box(r, size), r.class_id, r.confidence.value_or(1.0), path.stem().string()});
  return out;
}

std::vector<double> diagonals(const std::vector<Detection>& dets) {
  std::vector<double> d;
  for (const auto& det : dets) d.push_back(diagonal(det.box));
  return d;
}

void write_overlay(const std::string& overlay, const std::string& image, const std::vector<OverlayBox>& boxes) {
  if (overlay.empty() != image.empty()) throw UsageError("--overlay and --image must be given together");
  if (overlay.empty()) return;
  save_image(draw_boxes(load_image(image), boxes), overlay);
}

std::map<std::string, fs::path> annotation_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  std::map<std::string, fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") files.emplace(e.path().stem().string(), e.path());
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hull imaging toolkit: noise, metrics, DDSRNet training and inference, detection analytics"};
  app.require_subcommand(1);

  // noise
  std::string noise_kind, noise_in, noise_out;
  double ps = 0, pp = 0, p = 0;
  std::uint64_t noise_seed = 0;
  unsigned threads = 1;
  auto* noise = app.add_subcommand("noise", "Corrupt an image with salt-and-pepper or shot noise");
  noise->add_option("--kind", noise_kind, "sp | shot")->required()->check(CLI::IsMember({"sp", "shot"}));
  noise->add_option("--ps", ps, "Salt probability (sp)");
  noise->add_option("--pp", pp, "Pepper probability (sp)");
  noise->add_option("--p", p, "Per-sample corruption probability (shot)");
  noise->add_option("--seed", noise_seed, "Random seed");
  noise->add_option("--threads", threads, "Worker threads; output does not depend on it")->check(CLI::Range(1u, 256u));
  noise->add_option("IN", noise_in, "Input image")->required();
  noise->add_option("OUT", noise_out, "Output image")->required();

  // metrics
  std::string ref_path, test_path;
  auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM of a test image against a reference");
  metrics->add_option("--ref", ref_path, "Reference image")->required();
  metrics->add_option("--test", test_path, "Test image")->required();

  // train
  std::string config_path, data_dir, train_noise, ckpt_out;
  auto* train_cmd = app.add_subcommand("train", "Train DDSRNet on a directory of clean images");
  train_cmd->add_option("--config", config_path, "Run configuration (TOML)")->required();
  train_cmd->add_option("--data", data_dir, "Directory of clean PNG/PGM/PPM images")->required();
  train_cmd->add_option("--noise", train_noise, "sp | shot (overrides the configuration)")
      ->check(CLI::IsMember({"sp", "shot"}));
  train_cmd->add_option("--out", ckpt_out, "Checkpoint to write")->required();

  // enhance
  std::string ckpt_in, enhance_in, out_denoised, out_sr;
  auto* enhance = app.add_subcommand("enhance", "Denoise and super-resolve an image with a checkpoint");
  enhance->add_option("--ckpt", ckpt_in, "Checkpoint")->required();
  enhance->add_option("--in", enhance_in, "Input image")->required();
  enhance->add_option("--out-denoised", out_denoised, "Denoised output image")->required();
  enhance->add_option("--out-sr", out_sr, "Super-resolved output image")->required();

  // eval-det
  std::string gt_dir, pred_dir, img_size;
  EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval-det", "Evaluate detections against ground truth");
  eval->add_option("--gt", gt_dir, "Directory of ground-truth .txt files")->required();
  eval->add_option("--pred", pred_dir, "Directory of prediction .txt files")->required();
  eval->add_option("--img-size", img_size, "Image size WxH")->required();
  eval->add_option("--conf", eval_opts.confidence_threshold, "Confidence threshold for precision/recall")
      ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--iou", eval_opts.iou_threshold, "IoU threshold for precision/recall")
      ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--classes", eval_opts.known_classes, "Classes to evaluate (default: classes in the ground truth)");

  // measure
  std::string pred_file, overlay_out, overlay_image;
  std::optional<double> mm_per_px;
  auto* measure = app.add_subcommand("measure", "Box diagonal lengths, optionally in millimeters");
  measure->add_option("--pred", pred_file, "Prediction .txt file")->required();
  measure->add_option("--img-size", img_size, "Image size WxH")->required();
  measure->add_option("--mm-per-px", mm_per_px, "Calibration scale");
  measure->add_option("--overlay", overlay_out, "Write boxes drawn on --image to this PNG");
  measure->add_option("--image", overlay_image, "Image to draw the overlay on");

  // anomaly
  double k = kDefaultIqrFactor;
  auto* anomaly = app.add_subcommand("anomaly", "Flag boxes whose diagonal exceeds Q3 + k * IQR");
  anomaly->add_option("--pred", pred_file, "Prediction .txt file")->required();
  anomaly->add_option("--img-size", img_size, "Image size WxH")->required();
  anomaly->add_option("--k", k, "IQR factor")->check(CLI::NonNegativeNumber);
  anomaly->add_option("--overlay", overlay_out, "Write boxes drawn on --image to this PNG");
  anomaly->add_option("--image", overlay_image, "Image to draw the overlay on");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (noise->parsed()) {
      NoiseParams params;
      params.kind = parse_noise_kind(noise_kind);
      params.p = p;
      params.p_salt = ps;
      params.p_pepper = pp;
      params.seed = noise_seed;
      params.validate();
      save_image(apply_noise(load_image(noise_in), params, threads), noise_out);
    } else if (metrics->parsed()) {
      print(to_json(compare(load_image(ref_path), load_image(test_path))));
    } else if (train_cmd->parsed()) {
      RunConfig cfg = load_run_config(config_path);
      if (const char* env = std::getenv(kSeedEnvVar)) apply_seed_override(cfg, std::string_view(env));
      if (!train_noise.empty()) cfg.train.noise = parse_noise_kind(train_noise);
      cfg.validate();
      const TrainResult result = train(fs::path(data_dir), cfg.train, cfg.model,
                                       [](const EpochLog& log) { std::cout << to_json(log).dump() << std::endl; });
      save_checkpoint(result.checkpoint, ckpt_out);
    } else if (enhance->parsed()) {
      const Enhanced e = infer(load_checkpoint(ckpt_in), load_image(enhance_in));
      save_image(e.denoised, out_denoised);
      save_image(e.super_resolved, out_sr);
    } else if (eval->parsed()) {
      const ImageSize size = parse_image_size(img_size);
      const auto gt_files = annotation_files(gt_dir);
      const auto pred_files = annotation_files(pred_dir);
      std::vector<GroundTruth> gts;
      std::vector<Detection> dets;
      for (const auto& [id, path] : gt_files) {
        const auto g = parse_ground_truths(path, size, id);
        gts.insert(gts.end(), g.begin(), g.end());
      }
      for (const auto& [id, path] : pred_files) {
        const auto d = parse_detections(path, size, id);
        dets.insert(dets.end(), d.begin(), d.end());
      }
      print(to_json(evaluate(dets, gts, eval_opts)));
    } else if (measure->parsed()) {
      const auto dets = read_boxes(pred_file, parse_image_size(img_size));
      std::optional<CalibrationScale> scale;
      if (mm_per_px) scale = CalibrationScale{*mm_per_px};
      const Json report = measurement_report(dets, scale);
      std::vector<OverlayBox> boxes;
      for (const auto& d : dets) boxes.push_back({d.box, kOverlayNormal});
      write_overlay(overlay_out, overlay_image, boxes);
      print(report);
    } else if (anomaly->parsed()) {
      const auto dets = read_boxes(pred_file, parse_image_size(img_size));
      const AnomalyResult result = flag_anomalies(diagonals(dets), k);
      std::vector<OverlayBox> boxes;
      for (const auto& d : dets) boxes.push_back({d.box, kOverlayNormal});
      for (std::size_t i : result.flagged) boxes[i].color = kOverlayFlagged;
      write_overlay(overlay_out, overlay_image, boxes);
      print(anomaly_report(dets, result));
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
