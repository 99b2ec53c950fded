// hullsight-synth: writes procedural hull scenes as PNG files, with optional
// YOLO-style ground-truth labels alongside.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hullsight/annotations.hpp"
#include "hullsight/noise.hpp"
#include "hullsight/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hullsight;

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic hull scenes"};
  std::string out_dir, size = "128x128", labels_dir;
  int count = 16;
  std::uint64_t seed = 0;
  SceneOptions opts;
  app.add_option("--out", out_dir, "Output directory for images")->required();
  app.add_option("--count", count, "Number of scenes")->check(CLI::Range(1, 100000));
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--size", size, "Scene size WxH");
  app.add_option("--channels", opts.channels, "1 (gray) or 3 (RGB)")->check(CLI::IsMember({1, 3}));
  app.add_option("--labels", labels_dir, "Directory for ground-truth .txt labels");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  try {
    const ImageSize s = parse_image_size(size);
    opts.width = s.width;
    opts.height = s.height;
    fs::create_directories(out_dir);
    if (!labels_dir.empty()) fs::create_directories(labels_dir);
    for (int i = 0; i < count; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "hull_%05d", i);
      const SyntheticScene scene = make_hull_scene(opts, mix_seed(seed, static_cast<std::uint64_t>(i), 41));
      save_image(scene.image, fs::path(out_dir) / (std::string(name) + ".png"));
      if (labels_dir.empty()) continue;
      std::ofstream labels(fs::path(labels_dir) / (std::string(name) + ".txt"));
      labels.precision(9);
      for (const auto& h : scene.hulls) {
        const AnnotationRecord r = to_record(h.box, h.class_id, s);
        labels << r.class_id << ' ' << r.cx << ' ' << r.cy << ' ' << r.w << ' ' << r.h << '\n';
      }
      if (!labels) throw DataError("cannot write labels for " + std::string(name));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
