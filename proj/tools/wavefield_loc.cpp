// wavefield-loc: command-line front end for scenes, datasets, localization runs,
// sweeps, theory checks and SVG reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wfl/wfl.hpp"

using namespace wfl;
namespace fs = std::filesystem;

namespace {

void print_summary(const char* label, const ErrorSummary& s) {
  std::printf("%-8s n=%zu  q10=%.3e  q25=%.3e  median=%.3e  q75=%.3e  q90=%.3e  max=%.3e (m)\n", label, s.count,
              s.q10, s.q25, s.median, s.q75, s.q90, s.max);
}

struct SceneValidateArgs {
  std::string path;
};

int scene_validate(const SceneValidateArgs& a) {
  const SceneFile sf = load_scene(a.path);
  const Propagation prop(sf.scene, sf.band, sf.max_order);
  std::size_t sources = 0;
  for (std::size_t j = 0; j < prop.antennas(); ++j) sources += prop.candidates(j).size();
  std::printf("%s: ok\n", a.path.c_str());
  std::printf("  extent %.3g x %.3g m, feasible area %.4g m^2\n", sf.scene.extent_x, sf.scene.extent_y,
              sf.scene.feasible_area());
  std::printf("  %zu antennas, %zu walls, %zu exclusions, max order %d\n", sf.scene.array.size(),
              sf.scene.walls.size(), sf.scene.exclusions.size(), sf.max_order);
  std::printf("  %zu subcarriers, lambda0 = %.6f m\n", sf.band.size(), sf.band.lambda0());
  std::printf("  %zu virtual sources (%.1f per antenna)\n", sources,
              static_cast<double>(sources) / static_cast<double>(prop.antennas()));
  return 0;
}

struct DatasetArgs {
  std::string scene;
  double density{175};
  std::uint64_t seed{1};
  std::size_t eval_count{1000};
  bool no_test{false};
  std::string out{"data"};
};

int dataset_gen(const DatasetArgs& a) {
  const SceneFile sf = load_scene(a.scene);
  const Propagation prop(sf.scene, sf.band, sf.max_order);
  SplitOptions so;
  so.eval_count = a.eval_count;
  so.with_test = !a.no_test;
  const auto sp = generate_splits(sf.scene, prop.lambda0(), a.density, a.seed, so);
  fs::create_directories(a.out);
  const std::pair<const char*, const std::vector<Vec2>*> parts[] = {
      {"train", &sp.train}, {"test", &sp.test}, {"eval", &sp.eval}};
  for (const auto& [name, locs] : parts) {
    if (locs->empty()) continue;
    const std::string path = (fs::path(a.out) / (std::string(name) + ".bin")).string();
    write_split(path, prop, *locs);
    std::printf("%-5s %8zu records -> %s\n", name, locs->size(), path.c_str());
  }
  return 0;
}

struct LocalizeArgs {
  std::string config;
  std::string scene;
  std::string model;
  std::string variant;
  std::string grids;
  std::string eval_set;
  std::optional<std::size_t> eval_count;
  std::optional<double> snr_db;
  std::string out;
  bool figures{false};
  bool timing{false};
};

/// "off-grid-pi" style names: a localizer variant with an optional -pi/-ps init suffix.
void apply_variant(const std::string& name, LocalizerConfig& cfg) {
  std::string v = name;
  for (const auto& [suffix, kind] : {std::pair{"-pi", LossKind::PI}, std::pair{"-ps", LossKind::PS}})
    if (v.size() > 3 && v.compare(v.size() - 3, 3, suffix) == 0) {
      cfg.init_loss = kind;
      v.resize(v.size() - 3);
    }
  cfg.variant = variant_from_string(v);
}

int localize_cmd(const LocalizeArgs& a) {
  ExperimentConfig c;
  if (!a.config.empty()) {
    c = load_experiment_config(a.config);
  } else {
    if (a.scene.empty()) throw InvalidArgument("localize needs --config or --scene");
    c.output_dir = "out";
  }
  if (!a.scene.empty()) {
    c.scene_path = a.scene;
    c.scene = load_scene(a.scene);
    if (a.config.empty()) c.grids = GridSpec::defaults(c.scene.band.lambda0());
  }
  if (!a.grids.empty()) c.grids = grids_from_json(read_json_file(a.grids), c.scene.band.lambda0());
  if (!a.model.empty()) c.model = a.model;
  if (!a.variant.empty()) apply_variant(a.variant, c.localizer);
  if (!a.eval_set.empty()) c.eval_set = a.eval_set;
  if (a.eval_count) c.eval_count = *a.eval_count;
  if (a.snr_db) c.snr_db = *a.snr_db;
  c.timing = c.timing || a.timing;
  // --out results.csv names the results file; anything else is a directory.
  std::string results_name = "results.csv";
  if (!a.out.empty()) {
    const fs::path o(a.out);
    if (o.extension() == ".csv") {
      c.output_dir = o.has_parent_path() ? o.parent_path().string() : ".";
      results_name = o.filename().string();
    } else {
      c.output_dir = a.out;
    }
  }
  const ExperimentResult r = run_experiment(c);
  if (results_name != "results.csv")
    fs::rename(fs::path(c.output_dir) / "results.csv", fs::path(c.output_dir) / results_name);
  std::printf("config %016llx, %zu eval UEs, predicted model evals per UE %zu\n",
              static_cast<unsigned long long>(r.hash), r.rows.size(), r.predicted_evals);
  print_summary("on-grid", r.grid_summary);
  print_summary("final", r.summary);
  if (a.figures)
    for (const auto& f : svg::emit_figures(r, c.scene.scene.bounds(), c.scene.band.lambda0(), c.output_dir))
      std::printf("wrote %s\n", f.c_str());
  std::printf("results in %s\n", (fs::path(c.output_dir) / results_name).string().c_str());
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string axis;
  std::vector<double> values;
  std::string out;
  bool keep_runs{false};
};

int sweep_cmd(const SweepArgs& a) {
  ExperimentConfig c = load_experiment_config(a.config);
  if (!a.out.empty()) c.output_dir = a.out;
  const SweepAxis axis = sweep_axis_from_string(a.axis);
  const auto rows = sweep(c, axis, a.values, a.keep_runs);
  fs::create_directories(c.output_dir);
  const std::string path = (fs::path(c.output_dir) / ("sweep_" + a.axis + ".csv")).string();
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path);
  write_sweep_csv(os, axis, rows);
  write_sweep_csv(std::cout, axis, rows);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

struct TheoryArgs {
  std::string check;
  std::string scene;
  std::string csv;
  std::size_t samples{1'000'000};
  std::size_t eval_count{50};
  std::vector<double> eps{0.1, 0.0316227766016838, 0.01, 0.0};
  std::uint64_t seed{1};
};

std::ofstream open_csv(const std::string& path) {
  std::ofstream os;
  if (path.empty()) return os;
  os.open(path);
  if (!os) throw FormatError("cannot write " + path);
  return os;
}

SceneFile require_scene(const TheoryArgs& a) {
  if (a.scene.empty()) throw InvalidArgument("--scene is required for --check " + a.check);
  return load_scene(a.scene);
}

int verify_theory(const TheoryArgs& a) {
  auto csv = open_csv(a.csv);
  bool pass = false;
  if (a.check == "delta") {
    const auto mc = grid_error_constant_mc_estimate(a.samples, a.seed);
    const double d = closed_form_delta();
    pass = std::abs(mc.mean - d) <= 3 * mc.std_error;
    std::printf("delta: closed form %.6f, Monte Carlo %.6f +- %.1e (n=%zu)\n", d, mc.mean, mc.std_error, mc.samples);
    if (csv) csv << "samples,mc_mean,mc_std_error,closed_form\n" << mc.samples << "," << mc.mean << ","
                 << mc.std_error << "," << d << "\n";
  } else if (a.check == "spacing") {
    const SceneFile sf = require_scene(a);
    const auto model = make_exact(sf.scene, sf.band, sf.max_order);
    const double lam = sf.band.lambda0();
    const Vec2 x = sf.scene.bounds().center();
    const auto p = minima_spacing_scan(*model, x, x - sf.scene.array.centroid(), 10 * lam, lam / 200);
    pass = true;
    for (double s : p.spacings()) {
      std::printf("spacing %.6f m = %.4f lambda0\n", s, s / lam);
      pass = pass && std::abs(s / lam - 1) <= 0.02;
    }
    if (csv) {
      csv << "offset_m,ps\n";
      for (std::size_t i = 0; i < p.offsets.size(); ++i) csv << p.offsets[i] << "," << p.losses[i] << "\n";
    }
  } else if (a.check == "circles") {
    const FreqGrid band = FreqGrid::default_band();
    const VirtualSource src{{0, -30}, {1, 0}, 0, 0, {}};
    const Vec2 x{1.5, 2.0};
    const double d = distance(x, src.position);
    pass = true;
    if (csv) csv << "k,angle,phase,amplitude,bound\n";
    for (int k = 0; k <= 3; ++k)
      for (int s = 0; s < 16; ++s) {
        const double ang = s * std::numbers::pi / 8;
        const auto r = circle_condition_residual(x, src, k, band.lambda0(), ang);
        const double bound = 2 * k * band.lambda0() / (d * d);
        pass = pass && r.phase < 1e-12 && r.amplitude <= bound + 1e-15;
        if (csv) csv << k << "," << ang << "," << r.phase << "," << r.amplitude << "," << bound << "\n";
      }
    std::printf("circles: k = 0..3, 16 angles each, d = %.3f m\n", d);
  } else if (a.check == "injectivity") {
    const SceneFile sf = require_scene(a);
    const Propagation prop(sf.scene, sf.band, sf.max_order);
    const auto r = injectivity_probe(prop, a.samples, a.seed, prop.lambda0() / 100);
    pass = r.max_similarity < 1.0;
    std::printf("injectivity: %zu pairs, max similarity %.12f at (%.4f, %.4f) / (%.4f, %.4f)\n", r.pairs,
                r.max_similarity, r.worst_a.x, r.worst_a.y, r.worst_b.x, r.worst_b.y);
    if (csv) csv << "pairs,max_similarity,ax,ay,bx,by\n" << r.pairs << "," << r.max_similarity << "," << r.worst_a.x
                 << "," << r.worst_a.y << "," << r.worst_b.x << "," << r.worst_b.y << "\n";
  } else if (a.check == "epsilon") {
    const SceneFile sf = require_scene(a);
    const auto prop = std::make_shared<const Propagation>(sf.scene, sf.band, sf.max_order);
    std::mt19937_64 rng(a.seed);
    std::vector<Vec2> eval;
    for (std::size_t i = 0; i < a.eval_count; ++i) eval.push_back(sample_location(sf.scene, rng));
    const auto sw = epsilon_sweep(prop, a.eps, eval, GridSpec::defaults(prop->lambda0()), {}, a.seed);
    pass = median_inversions(sw) == 0;
    if (csv) csv << "epsilon,median_error,max_error\n";
    for (const auto& p : sw) {
      std::printf("epsilon %.4g: median %.3e m, max %.3e m\n", p.epsilon, p.median_error, p.max_error);
      if (csv) csv << p.epsilon << "," << p.median_error << "," << p.max_error << "\n";
    }
  } else {
    throw InvalidArgument("unknown check '" + a.check + "'");
  }
  std::printf("%s %s\n", pass ? "PASS" : "FAIL", a.check.c_str());
  return pass ? 0 : 1;
}

struct ReportArgs {
  std::vector<std::string> dirs;
  std::string out{"report.svg"};
  std::string title{"Localization error"};
};

int report_cmd(const ReportArgs& a) {
  std::vector<svg::BoxGroup> groups;
  std::optional<double> lambda0;
  for (const auto& d : a.dirs) {
    const fs::path dir(d);
    const auto err = read_result_column((dir / "results.csv").string(), "err_m");
    if (err.empty()) throw InvalidArgument(d + ": results.csv has no rows");
    groups.push_back({dir.filename().string(), summarize_errors(err)});
    if (fs::exists(dir / "summary.json")) lambda0 = read_json_file((dir / "summary.json").string()).at("lambda0");
  }
  svg::write_file(a.out, svg::boxplot(groups, a.title, lambda0));
  std::printf("wrote %s\n", a.out.c_str());
  return 0;
}

struct LandscapeArgs {
  std::string scene;
  double x{0}, y{0};
  double span{0.5};
  std::size_t n{101};
  std::string loss{"PS"};
  std::string out{"landscape"};
};

int landscape_cmd(const LandscapeArgs& a) {
  const SceneFile sf = load_scene(a.scene);
  const auto model = make_exact(sf.scene, sf.band, sf.max_order);
  if (a.n < 2) throw InvalidArgument("--n must be at least 2");
  const LossKind kind = a.loss == "PI" ? LossKind::PI : LossKind::PS;
  if (a.loss != "PI" && a.loss != "PS") throw InvalidArgument("--loss must be PS or PI");
  const Vec2 truth{a.x, a.y};
  const auto h = model->eval(truth);
  std::vector<double> v(a.n * a.n);
  parallel_for(a.n, [&](std::size_t iy) {
    LossEvaluator ev(h, *model);
    for (std::size_t ix = 0; ix < a.n; ++ix) {
      const Vec2 p{a.x - a.span / 2 + a.span * static_cast<double>(ix) / static_cast<double>(a.n - 1),
                   a.y - a.span / 2 + a.span * static_cast<double>(iy) / static_cast<double>(a.n - 1)};
      v[iy * a.n + ix] = ev.loss(kind, p);
    }
  });
  const Rect box{{a.x - a.span / 2, a.y - a.span / 2}, {a.x + a.span / 2, a.y + a.span / 2}};
  svg::write_file(a.out + ".svg", svg::heatmap(v, a.n, a.n, box, a.loss + " landscape"));
  std::ofstream csv(a.out + ".csv");
  csv << "x,y," << a.loss << "\n";
  for (std::size_t iy = 0; iy < a.n; ++iy)
    for (std::size_t ix = 0; ix < a.n; ++ix)
      csv << box.min.x + a.span * static_cast<double>(ix) / static_cast<double>(a.n - 1) << ","
          << box.min.y + a.span * static_cast<double>(iy) / static_cast<double>(a.n - 1) << "," << v[iy * a.n + ix]
          << "\n";
  std::printf("wrote %s.svg and %s.csv\n", a.out.c_str(), a.out.c_str());
  return 0;
}

struct SurrogateArgs {
  std::string scene;
  double density{175};
  std::uint64_t seed{1};
  double bandwidth{0};
  std::string out{"surrogate.bin"};
};

int surrogate_fit(const SurrogateArgs& a) {
  const SceneFile sf = load_scene(a.scene);
  const Propagation prop(sf.scene, sf.band, sf.max_order);
  SplitOptions so;
  so.eval_count = 0;
  so.with_test = false;
  const auto sp = generate_splits(sf.scene, prop.lambda0(), a.density, a.seed, so);
  const Dataset train = build_dataset(prop, sp.train);
  const double bw = a.bandwidth > 0 ? a.bandwidth : default_surrogate_bandwidth(train);
  const auto s = fit_kernel_surrogate(train, bw, CarrierReference{sf.scene.array, sf.band});
  io::save_surrogate(a.out, *s, train);
  std::printf("fitted %zu nodes, bandwidth %.4g m, %zu parameters -> %s\n", train.size(), bw, s->parameter_count(),
              a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based sub-wavelength localization toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  std::function<int()> action;

  auto* scene = app.add_subcommand("scene", "scene utilities");
  scene->require_subcommand(1);
  SceneValidateArgs sva;
  auto* validate = scene->add_subcommand("validate", "parse a scene file and print its statistics");
  validate->add_option("file", sva.path)->required()->check(CLI::ExistingFile);
  validate->callback([&] { action = [&] { return scene_validate(sva); }; });

  auto* dataset = app.add_subcommand("dataset", "dataset utilities");
  dataset->require_subcommand(1);
  DatasetArgs da;
  auto* gen = dataset->add_subcommand("gen", "generate train/test/eval splits with channels");
  gen->add_option("--scene", da.scene)->required()->check(CLI::ExistingFile);
  gen->add_option("--density", da.density, "training locations per m^2")->capture_default_str();
  gen->add_option("--seed", da.seed)->capture_default_str();
  gen->add_option("--eval-count", da.eval_count)->capture_default_str();
  gen->add_flag("--no-test", da.no_test, "skip the lambda0/4 test lattice");
  gen->add_option("--out", da.out, "output directory")->capture_default_str();
  gen->callback([&] { action = [&] { return dataset_gen(da); }; });

  LocalizeArgs la;
  auto* loc = app.add_subcommand("localize", "run an experiment config");
  loc->add_option("--config", la.config, "experiment config JSON")->check(CLI::ExistingFile);
  loc->add_option("--scene", la.scene, "scene JSON (overrides the config's)")->check(CLI::ExistingFile);
  loc->add_option("--model", la.model, "exact | perturbed:<eps> | surrogate:<path> | surrogate:fit");
  loc->add_option("--variant", la.variant, "on-grid | off-grid | off-grid-naive | on-grid-naive, optional -pi/-ps");
  loc->add_option("--grids", la.grids, "grid JSON")->check(CLI::ExistingFile);
  loc->add_option("--eval-set", la.eval_set, "dataset file of measured eval channels")->check(CLI::ExistingFile);
  loc->add_option("--eval-count", la.eval_count, "random eval UEs when no eval set is given");
  loc->add_option("--snr-db", la.snr_db, "add noise at this SNR");
  loc->add_option("--out", la.out, "output directory, or a .csv path for the results file");
  loc->add_flag("--figures", la.figures, "also write SVG figures");
  loc->add_flag("--timing", la.timing, "record per-UE wall time (results no longer byte-stable)");
  loc->callback([&] { action = [&] { return localize_cmd(la); }; });

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "sweep one config parameter");
  sw->add_option("--config", sa.config)->required()->check(CLI::ExistingFile);
  sw->add_option("--axis", sa.axis)->required()->check(
      CLI::IsMember({"snr", "density", "local_spacing", "epsilon", "db_size"}));
  sw->add_option("--values", sa.values, "comma-separated values")->delimiter(',');
  sw->add_option("--out", sa.out, "override the output directory");
  sw->add_flag("--keep-runs", sa.keep_runs, "write each point's results directory");
  sw->callback([&] { action = [&] { return sweep_cmd(sa); }; });

  TheoryArgs ta;
  auto* th = app.add_subcommand("verify-theory", "numerical checks of the analytic results");
  th->add_option("--check", ta.check)->required()->check(
      CLI::IsMember({"delta", "spacing", "circles", "injectivity", "epsilon"}));
  th->add_option("--scene", ta.scene, "scene file (spacing, injectivity, epsilon)");
  th->add_option("--csv", ta.csv, "write evidence CSV here");
  th->add_option("--samples", ta.samples, "Monte Carlo samples or injectivity pairs")->capture_default_str();
  th->add_option("--eval-count", ta.eval_count, "UEs for the epsilon sweep")->capture_default_str();
  th->add_option("--eps", ta.eps, "strictly decreasing epsilon list")->delimiter(',');
  th->add_option("--seed", ta.seed)->capture_default_str();
  th->callback([&] { action = [&] { return verify_theory(ta); }; });

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "boxplot SVG from one or more results directories");
  rep->add_option("dirs", ra.dirs)->required()->check(CLI::ExistingDirectory);
  rep->add_option("--out", ra.out)->capture_default_str();
  rep->add_option("--title", ra.title);
  rep->callback([&] { action = [&] { return report_cmd(ra); }; });

  LandscapeArgs lsa;
  auto* land = app.add_subcommand("landscape", "PS or PI loss map around a location");
  land->add_option("--scene", lsa.scene)->required()->check(CLI::ExistingFile);
  land->add_option("--x", lsa.x);
  land->add_option("--y", lsa.y);
  land->add_option("--span", lsa.span, "side of the square window (m)")->capture_default_str();
  land->add_option("--n", lsa.n, "samples per axis")->capture_default_str();
  land->add_option("--loss", lsa.loss)->check(CLI::IsMember({"PS", "PI"}))->capture_default_str();
  land->add_option("--out", lsa.out, "output path stem")->capture_default_str();
  land->callback([&] { action = [&] { return landscape_cmd(lsa); }; });

  auto* sur = app.add_subcommand("surrogate", "kernel surrogate utilities");
  sur->require_subcommand(1);
  SurrogateArgs sfa;
  auto* fit = sur->add_subcommand("fit", "fit and save a kernel surrogate");
  fit->add_option("--scene", sfa.scene)->required()->check(CLI::ExistingFile);
  fit->add_option("--density", sfa.density)->capture_default_str();
  fit->add_option("--seed", sfa.seed)->capture_default_str();
  fit->add_option("--bandwidth", sfa.bandwidth, "kernel bandwidth in m (default: 2x mean NN spacing)");
  fit->add_option("--out", sfa.out)->capture_default_str();
  fit->callback([&] { action = [&] { return surrogate_fit(sfa); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    return action ? action() : 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
