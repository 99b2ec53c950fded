#include "hullsight/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hullsight/errors.hpp"
#include "hullsight/noise.hpp"

namespace hullsight {

namespace {

struct Capsule {
  double ax, ay, bx, by;  // segment end points
  double radius;
  double tone;            // peak brightness in [0, 1]
  double tint[3];
};

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3 - 2 * t);
}

// Distance from (px, py) to the segment and the position along it in [0, 1].
double segment_distance(const Capsule& c, double px, double py, double& along) {
  const double dx = c.bx - c.ax, dy = c.by - c.ay;
  const double len2 = dx * dx + dy * dy;
  along = len2 > 0 ? std::clamp(((px - c.ax) * dx + (py - c.ay) * dy) / len2, 0.0, 1.0) : 0.0;
  return std::hypot(px - (c.ax + along * dx), py - (c.ay + along * dy));
}

}  // namespace

void SceneOptions::validate() const {
  if (width < 16 || height < 16) throw ValueError("synthetic scenes need at least 16x16 pixels");
  if (channels != 1 && channels != 3) throw ValueError("synthetic scenes are gray or RGB");
  if (min_hulls < 0 || max_hulls < min_hulls) throw ValueError("invalid hull count range");
  if (!(min_length > 0 && min_length <= max_length && max_length <= 1)) throw ValueError("invalid hull length range");
}

SyntheticScene make_hull_scene(const SceneOptions& opts, std::uint64_t seed) {
  opts.validate();
  std::uint64_t counter = 0;
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * counter_uniform(seed, counter++, 31); };

  // Background: a tilted ramp plus two low-frequency waves.
  const double base = uniform(0.15, 0.35);
  const double ramp_x = uniform(-0.15, 0.15), ramp_y = uniform(-0.15, 0.15);
  double wave_amp[2], wave_kx[2], wave_ky[2], wave_phase[2];
  for (int i = 0; i < 2; ++i) {
    wave_amp[i] = uniform(0.02, 0.06);
    wave_kx[i] = uniform(-3, 3) * std::numbers::pi;
    wave_ky[i] = uniform(-3, 3) * std::numbers::pi;
    wave_phase[i] = uniform(0, 2 * std::numbers::pi);
  }

  const double side = std::min(opts.width, opts.height);
  const int n = opts.min_hulls + static_cast<int>(uniform(0, opts.max_hulls - opts.min_hulls + 1 - 1e-9));
  std::vector<Capsule> caps;
  SyntheticScene scene;
  for (int k = 0; k < n; ++k) {
    const double len = uniform(opts.min_length, opts.max_length) * side;
    const double radius = std::max(2.0, len * uniform(0.08, 0.16));
    const double angle = uniform(0, std::numbers::pi);
    const double cx = uniform(0.15, 0.85) * opts.width, cy = uniform(0.15, 0.85) * opts.height;
    const double hx = 0.5 * len * std::cos(angle), hy = 0.5 * len * std::sin(angle);
    Capsule c{cx - hx, cy - hy, cx + hx, cy + hy, radius, uniform(0.6, 0.95), {}};
    for (double& t : c.tint) t = uniform(0.8, 1.0);
    caps.push_back(c);

    BBox box{std::min(c.ax, c.bx) - radius, std::min(c.ay, c.by) - radius, std::max(c.ax, c.bx) + radius,
             std::max(c.ay, c.by) + radius};
    box.x_min = std::clamp(box.x_min, 0.0, double(opts.width));
    box.x_max = std::clamp(box.x_max, 0.0, double(opts.width));
    box.y_min = std::clamp(box.y_min, 0.0, double(opts.height));
    box.y_max = std::clamp(box.y_max, 0.0, double(opts.height));
    scene.hulls.push_back({box, 0, ""});
  }

  Image img(opts.width, opts.height, opts.channels);
  for (int y = 0; y < opts.height; ++y) {
    for (int x = 0; x < opts.width; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double u = px / opts.width, v = py / opts.height;
      double bg = base + ramp_x * (u - 0.5) + ramp_y * (v - 0.5);
      for (int i = 0; i < 2; ++i) bg += wave_amp[i] * std::sin(wave_kx[i] * u + wave_ky[i] * v + wave_phase[i]);
      double rgb[3] = {bg, bg, bg};
      for (const Capsule& c : caps) {
        double along = 0;
        const double d = segment_distance(c, px, py, along);
        const double cover = 1 - smoothstep(c.radius - 0.75, c.radius + 0.75, d);
        if (cover <= 0) continue;
        // Cylinder shading across the hull, a highlight band, darker rims at the ends.
        const double across = std::clamp(d / c.radius, 0.0, 1.0);
        const double shade = std::sqrt(1 - across * across);
        const double ends = 0.85 + 0.15 * std::sin(std::numbers::pi * along);
        const double value = c.tone * (0.55 + 0.45 * shade) * ends;
        for (int ch = 0; ch < 3; ++ch) rgb[ch] = (1 - cover) * rgb[ch] + cover * value * c.tint[ch];
      }
      for (int ch = 0; ch < opts.channels; ++ch) {
        const double s = opts.channels == 1 ? rgb[0] : rgb[ch];
        img.at(x, y, ch) = static_cast<std::uint8_t>(std::lround(std::clamp(s, 0.0, 1.0) * 255));
      }
    }
  }
  scene.image = std::move(img);
  return scene;
}

std::vector<Image> make_hull_images(const SceneOptions& opts, std::uint64_t seed, int count) {
  if (count < 0) throw ValueError("image count must be non-negative");
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(make_hull_scene(opts, mix_seed(seed, static_cast<std::uint64_t>(i), 41)).image);
  return out;
}

}  // namespace hullsight
