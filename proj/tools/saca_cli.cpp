// saca: command-line front end for spatially adaptive colocalization analysis.
//
//   saca analyze   --red a.tif --green b.tif --out results/
//   saca simulate  --theta 2,6 --reps 100 --method saca --out table.csv
//   saca tau       --csv pairs.csv [--weights]
//   saca roi-index --red a.png --green b.png --roi roi.png --index pearson

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "saca/baselines.hpp"
#include "saca/engine.hpp"
#include "saca/image.hpp"
#include "saca/inference.hpp"
#include "saca/report.hpp"
#include "saca/simulation.hpp"
#include "saca/wkendall.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AnalyzeArgs
{
  std::string red, green, out;
  double r0 = 1.0, cr = 1.15, eta = 1.0, alpha = 0.05;
  int tl = 8, tu = 15;
  std::string metric = "linf", correction = "bonferroni", tail = "one";
  std::optional<double> tx, ty;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  bool quiet = false;
};

int cmd_analyze(AnalyzeArgs const &a)
{
  saca::AnalysisOptions opts;
  try {
    opts.config.r0 = a.r0;
    opts.config.c_r = a.cr;
    opts.config.t_lower = a.tl;
    opts.config.t_upper = a.tu;
    opts.config.eta = a.eta;
    opts.config.kernels.metric = saca::parse_metric(a.metric);
    opts.config.seed = a.seed;
    opts.config.threads = a.threads;
    opts.correction = saca::parse_correction(a.correction);
    opts.tail = saca::parse_tail(a.tail);
    opts.alpha = a.alpha;
    opts.config.validate();
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw saca::ParameterError("--alpha must lie in (0, 1)");
  } catch (saca::ParameterError const &e) {
    throw UsageError(e.what());
  }

  auto const t0 = std::chrono::steady_clock::now();
  saca::DualChannelImaged const img = saca::load_image(a.red, a.green);
  double const load_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (a.tx || a.ty) {
    saca::Thresholds th = saca::otsu_thresholds(img);
    if (a.tx) th.t_x = *a.tx;
    if (a.ty) th.t_y = *a.ty;
    opts.config.thresholds = th;
  }

  saca::ProgressCallback progress;
  if (!a.quiet) {
    progress = [](saca::IterationInfo const &info) {
      std::cerr << "iteration " << info.t << "  r=" << info.radius << "  frozen=" << info.frozen_fraction << '\n';
    };
  }
  saca::AnalysisReport report = saca::analyze(img, opts, progress);
  report.timing["load"] = load_s;

  auto const t1 = std::chrono::steady_clock::now();
  saca::write_report(a.out, report, img);
  report.timing["write"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

  if (!a.quiet) {
    for (auto const &[stage, sec] : report.timing) std::cerr << stage << ": " << sec << " s\n";
    std::cerr << "significant pixels: " << report.mask.count() << " / " << report.zscores.size() << '\n';
  }
  return kExitOk;
}

struct SimulateArgs
{
  std::vector<double> thetas;
  int reps = 100;
  std::string method = "saca";
  double radius = 8.0;
  std::string out;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  double tx = 0.3, ty = 0.3, alpha = 0.05;
  int size = 150;
  std::string dump;
};

int cmd_simulate(SimulateArgs const &a)
{
  for (double theta : a.thetas)
    if (!(theta > 0.0)) throw UsageError("--theta values must be positive");
  if (a.reps < 1) throw UsageError("--reps must be at least 1");
  saca::BenchmarkMethod method;
  if (a.method == "saca")
    method = saca::BenchmarkMethod::saca();
  else if (a.method == "lca") {
    if (!(a.radius > 0.0)) throw UsageError("--radius must be positive");
    method = saca::BenchmarkMethod::lca(a.radius);
  } else
    throw UsageError("--method must be saca or lca");

  saca::BenchmarkOptions opts;
  opts.config.thresholds = saca::Thresholds{a.tx, a.ty};
  opts.level = a.alpha;
  opts.width = opts.height = a.size;
  opts.seed = a.seed;
  opts.threads = a.threads;
  if (!a.dump.empty()) opts.dump_dir = a.dump;

  auto const rows = saca::run_benchmark(a.thetas, a.reps, {method}, opts);
  saca::write_benchmark_csv(a.out, rows);
  return kExitOk;
}

struct TauArgs
{
  std::string csv;
  bool weights = false;
  std::uint64_t seed = 42;
};

int cmd_tau(TauArgs const &a)
{
  std::ifstream in(a.csv);
  if (!in) throw std::runtime_error("cannot open " + a.csv);
  std::size_t const want = a.weights ? 3 : 2;
  std::vector<double> xs, ys, ws;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && (line == "x,y" || line == "x,y,w")) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (std::exception const &) {
        used = 0;
      }
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used == 0 || used != cell.size() || !std::isfinite(v))
        throw UsageError(a.csv + ":" + std::to_string(lineno) + ": non-numeric value '" + cell + "'");
      cells.push_back(v);
    }
    if (cells.size() < want)
      throw UsageError(a.csv + ":" + std::to_string(lineno) + ": expected " + std::to_string(want) + " columns");
    xs.push_back(cells[0]);
    ys.push_back(cells[1]);
    double const w = a.weights ? cells[2] : 1.0;
    if (w < 0.0) throw UsageError(a.csv + ":" + std::to_string(lineno) + ": negative weight");
    ws.push_back(w);
  }
  auto const map = [](std::vector<double> const &v) {
    return Eigen::Map<Eigen::ArrayXd const>(v.data(), static_cast<Eigen::Index>(v.size()));
  };
  saca::TauResult const r = saca::weighted_tau(map(xs), map(ys), map(ws), a.seed);
  nlohmann::json const j = {{"tau", r.tau}, {"n_eff", r.n_eff}, {"z", r.z}, {"n", xs.size()}};
  std::cout << j.dump() << '\n';
  return kExitOk;
}

struct RoiArgs
{
  std::string red, green, roi, index = "pearson";
  int perms = 1000;
  std::uint64_t seed = 42;
  std::optional<double> tx, ty;
  unsigned threads = 0;
};

int cmd_roi_index(RoiArgs const &a)
{
  if (a.perms < 1) throw UsageError("--perms must be at least 1");
  if (a.index != "pearson" && a.index != "m1m2" && a.index != "icq")
    throw UsageError("--index must be pearson, m1m2 or icq");
  saca::DualChannelImaged const img = saca::load_image(a.red, a.green);
  saca::RoiSelection roi{a.roi.empty() ? saca::MaskX::Constant(img.height(), img.width(), true) : saca::load_mask(a.roi)};
  auto const values = saca::roi_values(img, roi);

  saca::Thresholds th = saca::otsu_thresholds(img);
  if (a.tx) th.t_x = *a.tx;
  if (a.ty) th.t_y = *a.ty;

  nlohmann::json out = {{"index", a.index}, {"n_roi", values.x.size()}, {"perms", a.perms}};
  if (a.index == "pearson") {
    saca::RoiIndex const f = [](auto const &x, auto const &y) { return saca::pearson(x, y); };
    out["value"] = f(values.x, values.y);
    out["p_value"] = saca::permutation_test(values, f, a.perms, a.seed, a.threads);
  } else if (a.index == "icq") {
    saca::RoiIndex const f = [](auto const &x, auto const &y) { return saca::icq(x, y); };
    out["value"] = f(values.x, values.y);
    out["p_value"] = saca::permutation_test(values, f, a.perms, a.seed, a.threads);
  } else {
    saca::RoiIndex const m1 = [th](auto const &x, auto const &y) { return saca::manders(x, y, th).m1; };
    saca::RoiIndex const m2 = [th](auto const &x, auto const &y) { return saca::manders(x, y, th).m2; };
    out["m1"] = m1(values.x, values.y);
    out["m2"] = m2(values.x, values.y);
    out["p_m1"] = saca::permutation_test(values, m1, a.perms, a.seed, a.threads);
    out["p_m2"] = saca::permutation_test(values, m2, a.perms, saca::derive_seed(a.seed, 1), a.threads);
    out["t_x"] = th.t_x;
    out["t_y"] = th.t_y;
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Spatially adaptive colocalization analysis"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto *analyze = app.add_subcommand("analyze", "Pixel-wise z-scores, p-values and colocalized region");
  analyze->add_option("--red", an.red, "Channel 1 image (PNG/TIFF/CSV)")->required();
  analyze->add_option("--green", an.green, "Channel 2 image (PNG/TIFF/CSV)")->required();
  analyze->add_option("--out", an.out, "Output directory")->required();
  analyze->add_option("--r0", an.r0, "Initial radius")->capture_default_str();
  analyze->add_option("--cr", an.cr, "Radius growth factor")->capture_default_str();
  analyze->add_option("--tl", an.tl, "Lower iteration bound")->capture_default_str();
  analyze->add_option("--tu", an.tu, "Upper iteration bound")->capture_default_str();
  analyze->add_option("--eta", an.eta, "Stopping threshold scale")->capture_default_str();
  analyze->add_option("--metric", an.metric, "linf or l2")->capture_default_str();
  analyze->add_option("--correction", an.correction, "bonferroni or bh")->capture_default_str();
  analyze->add_option("--alpha", an.alpha, "Significance level")->capture_default_str();
  analyze->add_option("--tail", an.tail, "one or two")->capture_default_str();
  analyze->add_option("--tx", an.tx, "Channel 1 threshold (default Otsu)");
  analyze->add_option("--ty", an.ty, "Channel 2 threshold (default Otsu)");
  analyze->add_option("--seed", an.seed, "Random seed")->capture_default_str();
  analyze->add_option("--threads", an.threads, "Worker threads (0 = all cores)")->capture_default_str();
  analyze->add_flag("--quiet", an.quiet, "Suppress progress output");

  SimulateArgs sim;
  auto *simulate = app.add_subcommand("simulate", "Clayton-copula benchmark (alpha / beta table)");
  simulate->add_option("--theta", sim.thetas, "Clayton parameters")->required()->delimiter(',');
  simulate->add_option("--reps", sim.reps, "Replicates per theta")->capture_default_str();
  simulate->add_option("--method", sim.method, "saca or lca")->capture_default_str();
  simulate->add_option("--radius", sim.radius, "LCA radius")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV")->required();
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--threads", sim.threads, "Replicate workers (0 = all cores)")->capture_default_str();
  simulate->add_option("--tx", sim.tx, "Channel 1 threshold")->capture_default_str();
  simulate->add_option("--ty", sim.ty, "Channel 2 threshold")->capture_default_str();
  simulate->add_option("--alpha", sim.alpha, "Bonferroni level")->capture_default_str();
  simulate->add_option("--size", sim.size, "Lattice side length")->capture_default_str();
  simulate->add_option("--dump-zmaps", sim.dump, "Directory for per-replicate z-maps");

  TauArgs tau;
  auto *tau_cmd = app.add_subcommand("tau", "Weighted Kendall tau of a CSV of pairs");
  tau_cmd->add_option("--csv", tau.csv, "CSV with columns x,y[,w]")->required();
  tau_cmd->add_flag("--weights", tau.weights, "Third column holds weights");
  tau_cmd->add_option("--seed", tau.seed, "Tie-breaking seed")->capture_default_str();

  RoiArgs roi;
  auto *roi_cmd = app.add_subcommand("roi-index", "Classical ROI index with permutation p-value");
  roi_cmd->add_option("--red", roi.red, "Channel 1 image")->required();
  roi_cmd->add_option("--green", roi.green, "Channel 2 image")->required();
  roi_cmd->add_option("--roi", roi.roi, "ROI mask image (nonzero = selected); whole image if omitted");
  roi_cmd->add_option("--index", roi.index, "pearson, m1m2 or icq")->capture_default_str();
  roi_cmd->add_option("--perms", roi.perms, "Permutations")->capture_default_str();
  roi_cmd->add_option("--seed", roi.seed, "Random seed")->capture_default_str();
  roi_cmd->add_option("--tx", roi.tx, "Channel 1 threshold (default Otsu)");
  roi_cmd->add_option("--ty", roi.ty, "Channel 2 threshold (default Otsu)");
  roi_cmd->add_option("--threads", roi.threads, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const &e) {
    return app.exit(e);
  } catch (CLI::CallForAllHelp const &e) {
    return app.exit(e);
  } catch (CLI::ParseError const &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*analyze) return cmd_analyze(an);
    if (*simulate) return cmd_simulate(sim);
    if (*tau_cmd) return cmd_tau(tau);
    if (*roi_cmd) return cmd_roi_index(roi);
  } catch (UsageError const &e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (std::exception const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
