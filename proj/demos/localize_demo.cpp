// Localizes a few random UEs in a scene and prints every stage of the search.
//
//   wfl_demo [scene.json] [count]

#include <cstdio>
#include <random>
#include <string>

#include "wfl/wfl.hpp"

using namespace wfl;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "scenes/s2_like.json";
  const int count = argc > 2 ? std::stoi(argv[2]) : 5;
  try {
    const SceneFile sf = load_scene(path);
    const auto prop = std::make_shared<const Propagation>(sf.scene, sf.band, sf.max_order);
    const auto model = make_exact(prop);
    const double lam = prop->lambda0();
    const Localizer loc(model, sf.scene, GridSpec::defaults(lam), LocalizerConfig{});
    std::printf("%s: %zu antennas, %zu tones, lambda0 %.4f m, %zu model evals per UE at most\n", path.c_str(),
                prop->antennas(), prop->freqs(), lam, loc.predicted_evals());

    std::mt19937_64 rng(2024);
    for (int i = 0; i < count; ++i) {
      const Vec2 x = sample_location(sf.scene, rng);
      const auto r = loc.localize(prop->channel(x), static_cast<std::uint64_t>(i));
      auto stage = [&](const char* name, const Vec2& p) {
        std::printf("  %-9s (%8.4f, %8.4f)  error %.3e m\n", name, p.x, p.y, distance(p, x));
      };
      std::printf("UE %d at (%.4f, %.4f)\n", i, x.x, x.y);
      stage("global", r.stages.x_init);
      stage("local", r.stages.x_grid);
      if (r.stages.x_descent) stage("descent", *r.stages.x_descent);
      if (r.stages.x_circle) stage("circles", *r.stages.x_circle);
      if (r.stages.x_descent2) stage("descent2", *r.stages.x_descent2);
      std::printf("  final error %.3e m (%.2e lambda0), %zu evals\n", distance(r.estimate, x),
                  distance(r.estimate, x) / lam, r.model_evals);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
