#pragma once
// Dataset splits, experiment runs, sweeps and their CSV/JSON outputs.
//
// results.csv columns (one row per evaluation UE, in eval-set order):
//   ue, ue_x, ue_y, est_x, est_y, err_m, grid_x, grid_y, grid_err_m,
//   init_loss, grid_loss, final_ps, model_evals, descent_passes,
//   second_descent, wall_ns
// wall_ns is 0 unless timing is enabled, so that reruns are byte-identical.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "wfl/baselines.hpp"
#include "wfl/channel.hpp"
#include "wfl/config.hpp"
#include "wfl/dataset.hpp"
#include "wfl/locengine.hpp"
#include "wfl/model.hpp"
#include "wfl/parallel.hpp"
#include "wfl/theory.hpp"

namespace wfl {

inline constexpr const char* kVersion = "0.1.0";

struct ErrorSummary {
  double q10{0.0}, q25{0.0}, median{0.0}, q75{0.0}, q90{0.0};
  double mean{0.0}, max{0.0};
  std::size_t count{0};
};

/// Linear-interpolation (type 7) quantile of an ascending sequence.
inline double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) throw InvalidArgument("quantile: empty sequence");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile: p must be in [0, 1]");
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline ErrorSummary summarize_errors(std::vector<double> errors) {
  if (errors.empty()) throw InvalidArgument("summarize_errors: empty sequence");
  for (double e : errors)
    if (!std::isfinite(e)) throw InvalidArgument("summarize_errors: non-finite error");
  std::sort(errors.begin(), errors.end());
  ErrorSummary s;
  s.count = errors.size();
  s.q10 = quantile_sorted(errors, 0.10);
  s.q25 = quantile_sorted(errors, 0.25);
  s.median = quantile_sorted(errors, 0.50);
  s.q75 = quantile_sorted(errors, 0.75);
  s.q90 = quantile_sorted(errors, 0.90);
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean = sum / static_cast<double>(errors.size());
  s.max = errors.back();
  return s;
}

inline nlohmann::json summary_to_json(const ErrorSummary& s) {
  return {{"count", s.count}, {"q10", s.q10},   {"q25", s.q25}, {"median", s.median},
          {"q75", s.q75},     {"q90", s.q90},   {"mean", s.mean}, {"max", s.max}};
}

// ---------------------------------------------------------------------------
// Dataset splits

struct SplitOptions {
  std::size_t eval_count{1000};
  double test_spacing{0.0};        // 0 -> lambda0 / 4
  double min_separation{1e-6};
  std::optional<Rect> eval_region;  // eval draws restricted to this box
  bool with_test{true};
};

struct LocationSplits {
  std::vector<Vec2> train;
  std::vector<Vec2> test;
  std::vector<Vec2> eval;
  double test_spacing{0.0};
};

namespace detail {

/// Cell-centered lattice of spacing s over the scene bounds, exclusions removed.
inline std::vector<Vec2> test_lattice(const Scene& scene, double s) {
  const Rect box = scene.bounds();
  const auto nx = static_cast<std::size_t>(std::floor(box.width() / s + 1e-9));
  const auto ny = static_cast<std::size_t>(std::floor(box.height() / s + 1e-9));
  std::vector<Vec2> out;
  out.reserve(nx * ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const Vec2 p{box.min.x + (static_cast<double>(i) + 0.5) * s,
                   box.min.y + (static_cast<double>(j) + 0.5) * s};
      if (!scene.excluded(p)) out.push_back(p);
    }
  return out;
}

/// Exact-duplicate guard for random draws: hashed cells of side `sep`.
class SeparationIndex {
 public:
  explicit SeparationIndex(double sep) : sep_(sep) {}

  bool clear_of(const Vec2& p) const {
    const auto [cx, cy] = cell(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const auto& q : it->second)
          if (distance(p, q) <= sep_) return false;
      }
    return true;
  }

  void insert(const Vec2& p) {
    const auto [cx, cy] = cell(p);
    cells_[key(cx, cy)].push_back(p);
  }

 private:
  std::pair<std::int64_t, std::int64_t> cell(const Vec2& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / sep_)),
            static_cast<std::int64_t>(std::floor(p.y / sep_))};
  }
  static std::uint64_t key(std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(a) * 0x9E3779B97F4A7C15ull) ^ static_cast<std::uint64_t>(b);
  }

  double sep_;
  std::unordered_map<std::uint64_t, std::vector<Vec2>> cells_;
};

inline LocationSplits draw_splits(const Scene& scene, double lambda0, std::size_t n_train,
                                  std::uint64_t seed, const SplitOptions& opt) {
  if (!(lambda0 > 0.0)) throw InvalidArgument("generate_datasets: lambda0 must be positive");
  if (!(scene.feasible_area() > 0.0)) throw EmptyRegion("generate_datasets: empty feasible region");
  LocationSplits sp;
  sp.test_spacing = opt.test_spacing > 0.0 ? opt.test_spacing : lambda0 / 4;
  if (opt.with_test) sp.test = detail::test_lattice(scene, sp.test_spacing);

  const Rect box = scene.bounds();
  const double s = sp.test_spacing;
  auto near_test_node = [&](const Vec2& p) {
    if (!opt.with_test) return false;
    const double i = std::round((p.x - box.min.x) / s - 0.5);
    const double j = std::round((p.y - box.min.y) / s - 0.5);
    const Vec2 node{box.min.x + (i + 0.5) * s, box.min.y + (j + 0.5) * s};
    return distance(p, node) <= opt.min_separation;
  };

  SeparationIndex index(opt.min_separation);
  std::mt19937_64 rng(seed);
  std::mt19937_64 rng_eval(seed ^ 0xE7A1C0DEull);
  auto draw = [&](auto&& sampler, std::size_t count, std::vector<Vec2>& out) {
    out.reserve(count);
    while (out.size() < count) {
      const Vec2 p = sampler();
      if (near_test_node(p) || !index.clear_of(p)) continue;
      index.insert(p);
      out.push_back(p);
    }
  };

  draw([&] { return sample_location(scene, rng); }, n_train, sp.train);

  if (opt.eval_region) {
    const Rect r = *opt.eval_region;
    if (!r.valid()) throw InvalidArgument("generate_datasets: invalid eval region");
    std::uniform_real_distribution<double> ux(r.min.x, r.max.x);
    std::uniform_real_distribution<double> uy(r.min.y, r.max.y);
    draw(
        [&] {
          for (int a = 0; a < 1'000'000; ++a) {
            const Vec2 p{ux(rng_eval), uy(rng_eval)};
            if (scene.in_location_space(p)) return p;
          }
          throw EmptyRegion("generate_datasets: eval region has no feasible points");
        },
        opt.eval_count, sp.eval);
  } else {
    draw([&] { return sample_location(scene, rng_eval); }, opt.eval_count, sp.eval);
  }
  return sp;
}

}  // namespace detail

/// Train: round(density * feasible area) uniform draws. Test: lambda0/4 lattice.
/// Eval: uniform draws from an independent stream. Random draws closer than
/// `min_separation` to any accepted point or to a test node are redrawn.
inline LocationSplits generate_splits(const Scene& scene, double lambda0, double density,
                                      std::uint64_t seed, const SplitOptions& opt = {}) {
  if (!(density > 0.0)) throw InvalidArgument("generate_datasets: density must be positive");
  const auto n_train = static_cast<std::size_t>(std::llround(density * scene.feasible_area()));
  return detail::draw_splits(scene, lambda0, n_train, seed, opt);
}

struct DatasetSplits {
  Dataset train;
  Dataset test;
  Dataset eval;
};

/// Splits with channels synthesized. The test lattice is large (about 1.4e5
/// nodes on 100 m^2); stream it with write_split() for full-size scenes.
inline DatasetSplits generate_datasets(const Propagation& prop, double density, std::uint64_t seed,
                                       const SplitOptions& opt = {}) {
  const LocationSplits sp = generate_splits(prop.scene(), prop.lambda0(), density, seed, opt);
  return {build_dataset(prop, sp.train), build_dataset(prop, sp.test), build_dataset(prop, sp.eval)};
}

/// Streams a location set with synthesized channels to a dataset file.
inline void write_split(const std::string& path, const Propagation& prop, const std::vector<Vec2>& locs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  io::DatasetWriter w(os, locs.size(), prop.antennas(), prop.freqs());
  constexpr std::size_t kBlock = 256;
  std::vector<ChannelMatrix> block;
  for (std::size_t start = 0; start < locs.size(); start += kBlock) {
    const std::size_t n = std::min(kBlock, locs.size() - start);
    block.assign(n, ChannelMatrix{});
    parallel_for(n, [&](std::size_t i) { prop.channel_into(locs[start + i], block[i]); });
    for (std::size_t i = 0; i < n; ++i) w.write(locs[start + i], block[i]);
  }
  if (!os) throw FormatError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentSeeds {
  std::uint64_t data{1};
  std::uint64_t model{2};
  std::uint64_t noise{3};
};

/// model spec: "exact", "perturbed:<eps>", "surrogate:<path>", or
/// "surrogate:fit" (kernel surrogate fitted on the training split at `density`).
struct ExperimentConfig {
  std::string scene_path;
  SceneFile scene;
  std::string model{"exact"};
  GridSpec grids;
  LocalizerConfig localizer;
  std::size_t eval_count{1000};
  std::optional<double> snr_db;
  ExperimentSeeds seeds;
  std::string output_dir;
  double density{175.0};
  std::optional<Rect> eval_region;
  std::size_t knn_k{1};
  bool timing{false};
  std::string eval_set;  // dataset file of eval locations and measured channels; overrides eval_count

  void validate() const {
    if (eval_count < 1) throw InvalidArgument("ExperimentConfig: eval_count must be >= 1");
    if (!eval_set.empty() && !std::filesystem::exists(eval_set))
      throw FormatError("eval set not found: " + eval_set);
    if (!(density > 0.0)) throw InvalidArgument("ExperimentConfig: density must be positive");
    grids.validate();
    localizer.validate();
  }
};

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scene"] = c.scene_path;
  j["scene_data"] = scene_to_json(c.scene);
  j["model"] = c.model;
  j["grids"] = grids_to_json(c.grids);
  j["localizer"] = localizer_to_json(c.localizer);
  j["eval_count"] = c.eval_count;
  j["snr_db"] = c.snr_db ? nlohmann::json(*c.snr_db) : nlohmann::json(nullptr);
  j["seeds"] = {{"data", c.seeds.data}, {"model", c.seeds.model}, {"noise", c.seeds.noise}};
  j["output"] = c.output_dir;
  j["density"] = c.density;
  if (c.eval_region)
    j["eval_region"] = {{"min", detail::vec_to(c.eval_region->min)},
                        {"max", detail::vec_to(c.eval_region->max)}};
  j["knn_k"] = c.knn_k;
  j["timing"] = c.timing;
  if (!c.eval_set.empty()) j["eval_set"] = c.eval_set;
  return j;
}

/// An inline "scene_data" object (as written to manifests) takes precedence over
/// "scene". Relative scene paths resolve against `base_dir`, normally the
/// config file's directory.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".") {
  try {
    ExperimentConfig c;
    c.scene_path = j.value("scene", std::string());
    if (j.contains("scene_data")) {
      c.scene = scene_from_json(j.at("scene_data"));
    } else {
      std::filesystem::path sp(c.scene_path);
      if (sp.is_relative()) sp = std::filesystem::path(base_dir) / sp;
      if (!std::filesystem::exists(sp)) throw FormatError("scene file not found: " + sp.string());
      c.scene = load_scene(sp.string());
    }
    c.model = j.value("model", c.model);
    c.grids = grids_from_json(j.value("grids", nlohmann::json::object()), c.scene.band.lambda0());
    c.localizer = localizer_from_json(j.value("localizer", nlohmann::json::object()));
    c.eval_count = j.value("eval_count", c.eval_count);
    if (j.contains("snr_db") && !j.at("snr_db").is_null()) c.snr_db = j.at("snr_db").get<double>();
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      c.seeds.data = s.value("data", c.seeds.data);
      c.seeds.model = s.value("model", c.seeds.model);
      c.seeds.noise = s.value("noise", c.seeds.noise);
    }
    c.output_dir = j.value("output", std::string("out"));
    c.density = j.value("density", c.density);
    if (j.contains("eval_region"))
      c.eval_region = Rect{detail::vec_from(j.at("eval_region").at("min"), "eval_region.min"),
                           detail::vec_from(j.at("eval_region").at("max"), "eval_region.max")};
    c.knn_k = j.value("knn_k", c.knn_k);
    c.timing = j.value("timing", c.timing);
    if (j.contains("eval_set")) {
      std::filesystem::path ep(j.at("eval_set").get<std::string>());
      if (ep.is_relative()) ep = std::filesystem::path(base_dir) / ep;
      c.eval_set = ep.string();
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("experiment config: ") + e.what());
  }
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  return config_from_json(read_json_file(path), std::filesystem::path(path).parent_path().string());
}

/// FNV-1a 64 over the serialized config.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : config_to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct UeResult {
  Vec2 truth;
  LocalizationResult loc;
  double error{0.0};
  double grid_error{0.0};
  std::int64_t wall_ns{0};
};

struct ExperimentResult {
  std::vector<UeResult> rows;
  ErrorSummary summary;
  ErrorSummary grid_summary;
  GridCardinalities cardinalities;
  std::size_t predicted_evals{0};
  std::uint64_t hash{0};
};

/// Builds the channel model named by the config.
inline ModelPtr build_model(const ExperimentConfig& c, std::shared_ptr<const Propagation> prop) {
  if (c.model == "surrogate:fit") {
    SplitOptions so;
    so.eval_count = 0;
    so.with_test = false;
    const auto sp = generate_splits(prop->scene(), prop->lambda0(), c.density, c.seeds.data, so);
    const Dataset train = build_dataset(*prop, sp.train);
    auto s = fit_kernel_surrogate(train, default_surrogate_bandwidth(train),
                                  CarrierReference{prop->scene().array, prop->band()});
    auto copy = std::make_shared<KernelSurrogate>(*s);
    copy->set_lambda0(prop->lambda0());
    return copy;
  }
  return make_model(c.model, std::move(prop), c.seeds.model);
}

inline std::vector<Vec2> eval_locations(const ExperimentConfig& c) {
  SplitOptions so;
  so.eval_count = c.eval_count;
  so.eval_region = c.eval_region;
  return detail::draw_splits(c.scene.scene, c.scene.band.lambda0(), 0, c.seeds.data, so).eval;
}

/// Eval locations with their noiseless measured channels: read from the eval
/// set file when one is configured, synthesized otherwise.
inline Dataset eval_measurements(const ExperimentConfig& c, const Propagation& prop) {
  if (c.eval_set.empty()) return build_dataset(prop, eval_locations(c));
  Dataset ds = io::load_dataset(c.eval_set);
  if (ds.antennas != prop.antennas() || ds.freqs != prop.freqs())
    throw DimensionMismatch("eval set " + c.eval_set + " does not match the scene array/band");
  if (ds.empty()) throw FormatError("eval set " + c.eval_set + " has no records");
  return ds;
}

inline void write_results_csv(std::ostream& os, const std::vector<UeResult>& rows) {
  os << "ue,ue_x,ue_y,est_x,est_y,err_m,grid_x,grid_y,grid_err_m,init_loss,grid_loss,final_ps,"
        "model_evals,descent_passes,second_descent,wall_ns\n";
  char buf[512];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::snprintf(buf, sizeof buf,
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%d,%lld\n",
                  i, r.truth.x, r.truth.y, r.loc.estimate.x, r.loc.estimate.y, r.error,
                  r.loc.stages.x_grid.x, r.loc.stages.x_grid.y, r.grid_error, r.loc.losses.init,
                  r.loc.losses.grid, r.loc.losses.final_ps, r.loc.model_evals, r.loc.descent_passes,
                  r.loc.second_descent ? 1 : 0, static_cast<long long>(r.wall_ns));
    os << buf;
  }
}

/// Localizes every eval UE. With `write` set, results.csv, summary.json and
/// manifest.json go to the output directory.
inline ExperimentResult run_experiment(const ExperimentConfig& c, bool write = true) {
  c.validate();
  auto prop = std::make_shared<const Propagation>(c.scene.scene, c.scene.band, c.scene.max_order);
  const ModelPtr model = build_model(c, prop);
  const Localizer loc(model, c.scene.scene, c.grids, c.localizer);
  const Dataset eval = eval_measurements(c, *prop);

  ExperimentResult res;
  res.cardinalities = loc.cardinalities();
  res.predicted_evals = loc.predicted_evals();
  res.hash = config_hash(c);
  res.rows.resize(eval.size());
  parallel_for(eval.size(), [&](std::size_t i) {
    ChannelMatrix h = eval.channels[i];
    if (c.snr_db) h = add_noise(h, *c.snr_db, derive_seed(c.seeds.noise, i));
    const auto t0 = std::chrono::steady_clock::now();
    UeResult r;
    r.truth = eval.locations[i];
    r.loc = loc.localize(h, derive_seed(c.localizer.seed, i));
    if (c.timing)
      r.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
                      .count();
    r.error = distance(r.loc.estimate, r.truth);
    r.grid_error = distance(r.loc.stages.x_grid, r.truth);
    res.rows[i] = std::move(r);
  });
  std::vector<double> err, gerr;
  for (const auto& r : res.rows) {
    err.push_back(r.error);
    gerr.push_back(r.grid_error);
  }
  res.summary = summarize_errors(err);
  res.grid_summary = summarize_errors(gerr);

  if (write) {
    namespace fs = std::filesystem;
    fs::create_directories(c.output_dir);
    const fs::path dir(c.output_dir);
    {
      std::ofstream os(dir / "results.csv");
      if (!os) throw FormatError("cannot write results.csv in " + c.output_dir);
      write_results_csv(os, res.rows);
    }
    nlohmann::json summary{{"final", summary_to_json(res.summary)},
                           {"on_grid", summary_to_json(res.grid_summary)},
                           {"lambda0", c.scene.band.lambda0()},
                           {"predicted_model_evals", res.predicted_evals}};
    std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(res.hash));
    nlohmann::json manifest{{"config_hash", hash},
                            {"config", config_to_json(c)},
                            {"version", kVersion},
                            {"compiler", __VERSION__},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)}};
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { Snr, Density, LocalSpacing, Epsilon, DbSize };

inline SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "snr") return SweepAxis::Snr;
  if (s == "density") return SweepAxis::Density;
  if (s == "local_spacing") return SweepAxis::LocalSpacing;
  if (s == "epsilon") return SweepAxis::Epsilon;
  if (s == "db_size") return SweepAxis::DbSize;
  throw InvalidArgument("unknown sweep axis '" + s + "'");
}

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Snr: return "snr";
    case SweepAxis::Density: return "density";
    case SweepAxis::LocalSpacing: return "local_spacing";
    case SweepAxis::Epsilon: return "epsilon";
    case SweepAxis::DbSize: return "db_size";
  }
  return "?";
}

struct SweepRow {
  double value{0.0};
  ErrorSummary summary;
  std::optional<ErrorSummary> grid_summary;  // on-grid stage of the same runs
  std::optional<double> floor;               // nu * delta for local_spacing
};

/// Config for one sweep point. local_spacing changes nu only; the local side L
/// keeps its base value.
inline ExperimentConfig sweep_point(ExperimentConfig c, SweepAxis axis, double v, std::size_t index) {
  switch (axis) {
    case SweepAxis::Snr: c.snr_db = v; break;
    case SweepAxis::Density: c.density = v; break;
    case SweepAxis::LocalSpacing: c.grids.local_spacing = v; break;
    case SweepAxis::Epsilon: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "perturbed:%.17g", v);
      c.model = buf;
      break;
    }
    case SweepAxis::DbSize: break;
  }
  c.output_dir = (std::filesystem::path(c.output_dir) / (std::string(to_string(axis)) + "_" + std::to_string(index)))
                     .string();
  return c;
}

/// db_size rows use the k-NN fingerprint baseline on a database of v uniform records.
inline SweepRow knn_sweep_row(const ExperimentConfig& c, double v) {
  const Propagation prop(c.scene.scene, c.scene.band, c.scene.max_order);
  SplitOptions so;
  so.eval_count = 0;
  so.with_test = false;
  const double density = v / c.scene.scene.feasible_area();
  const auto sp = generate_splits(c.scene.scene, prop.lambda0(), density, c.seeds.data, so);
  const FingerprintDB db(build_dataset(prop, sp.train));
  const Dataset eval = eval_measurements(c, prop);
  std::vector<double> err(eval.size());
  parallel_for(eval.size(), [&](std::size_t i) {
    ChannelMatrix h = eval.channels[i];
    if (c.snr_db) h = add_noise(h, *c.snr_db, derive_seed(c.seeds.noise, i));
    err[i] = distance(knn_localize(h, db, std::min(c.knn_k, db.size())), eval.locations[i]);
  });
  SweepRow row;
  row.value = v;
  row.summary = summarize_errors(err);
  return row;
}

inline std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis,
                                   const std::vector<double>& values, bool write = false) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (axis == SweepAxis::DbSize) {
      rows.push_back(knn_sweep_row(base, values[i]));
      continue;
    }
    const ExperimentConfig c = sweep_point(base, axis, values[i], i);
    const ExperimentResult r = run_experiment(c, write);
    SweepRow row;
    row.value = values[i];
    row.summary = r.summary;
    row.grid_summary = r.grid_summary;
    if (axis == SweepAxis::LocalSpacing) row.floor = values[i] * closed_form_delta();
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepRow>& rows) {
  os << to_string(axis) << ",count,q10,q25,median,q75,q90,mean,max,grid_median";
  if (axis == SweepAxis::LocalSpacing) os << ",grid_floor";
  os << "\n";
  char buf[512];
  for (const auto& r : rows) {
    const auto& s = r.summary;
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", r.value, s.count,
                  s.q10, s.q25, s.median, s.q75, s.q90, s.mean, s.max);
    os << buf;
    if (r.grid_summary) {
      std::snprintf(buf, sizeof buf, "%.17g", r.grid_summary->median);
      os << buf;
    }
    if (axis == SweepAxis::LocalSpacing) {
      std::snprintf(buf, sizeof buf, ",%.17g", r.floor.value_or(0.0));
      os << buf;
    }
    os << "\n";
  }
}

/// Reads one named column of a results.csv.
inline std::vector<double> read_result_column(const std::string& path, const std::string& column) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw FormatError(path + ": empty file");
  std::size_t col = 0;
  bool found = false;
  {
    std::stringstream ss(line);
    std::string name;
    for (std::size_t i = 0; std::getline(ss, name, ','); ++i)
      if (name == column) {
        col = i;
        found = true;
      }
  }
  if (!found) throw FormatError(path + ": no '" + column + "' column");
  std::vector<double> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i)
      if (!std::getline(ss, cell, ',')) throw FormatError(path + ": short row");
    out.push_back(std::stod(cell));
  }
  return out;
}

inline std::vector<double> read_result_errors(const std::string& path) { return read_result_column(path, "err_m"); }

}  // namespace wfl
