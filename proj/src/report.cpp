#include "saca/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

namespace saca {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string_view to_string(LocationKernel k) noexcept
{
  return k == LocationKernel::Triangular ? "triangular" : "uniform";
}

std::string_view to_string(AdaptationKernel k) noexcept
{
  return k == AdaptationKernel::Quadratic ? "quadratic" : "none";
}

} // namespace

AnalysisReport analyze(DualChannelImaged const &img, AnalysisOptions const &opts, ProgressCallback const &progress)
{
  AnalysisReport rep;
  rep.options = opts;
  rep.params = resolve(opts.config, img);

  // Pin resolved thresholds so the run does not depend on Otsu twice.
  SacaConfig cfg = opts.config;
  cfg.thresholds = rep.params.thresholds;
  rep.options.config.thresholds = rep.params.thresholds;

  auto t0 = Clock::now();
  TauState const state = saca_iterate(img, cfg, progress);
  rep.timing["iterate"] = seconds_since(t0);

  t0 = Clock::now();
  ZMap const zmap(z_scores(state));
  rep.zscores = zmap.z;
  rep.pvalues = p_values(zmap, opts.tail);
  rep.mask = correct(zmap, opts.correction, opts.alpha, opts.tail);
  rep.summary = summary_stats(zmap, rep.mask);
  rep.iterations_run = state.iteration;
  rep.frozen_fraction_final = state.frozen_fraction();
  rep.timing["inference"] = seconds_since(t0);
  return rep;
}

nlohmann::json config_json(AnalysisOptions const &opts, ResolvedParams const &params)
{
  SacaConfig const &c = opts.config;
  return {
    {"r0", c.r0},
    {"c_r", c.c_r},
    {"t_lower", c.t_lower},
    {"t_upper", c.t_upper},
    {"eta", c.eta},
    {"d_n", params.d_n},
    {"lambda", params.lambda},
    {"t_x", params.thresholds.t_x},
    {"t_y", params.thresholds.t_y},
    {"k_l", to_string(c.kernels.k_l)},
    {"k_s", to_string(c.kernels.k_s)},
    {"metric", to_string(c.kernels.metric)},
    {"seed", c.seed},
    {"correction", to_string(opts.correction)},
    {"alpha", opts.alpha},
    {"tail", to_string(opts.tail)},
  };
}

AnalysisOptions options_from_json(nlohmann::json const &j)
{
  AnalysisOptions o;
  SacaConfig &c = o.config;
  c.r0 = j.at("r0").get<double>();
  c.c_r = j.at("c_r").get<double>();
  c.t_lower = j.at("t_lower").get<int>();
  c.t_upper = j.at("t_upper").get<int>();
  c.eta = j.at("eta").get<double>();
  c.d_n = j.at("d_n").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.thresholds = Thresholds{j.at("t_x").get<double>(), j.at("t_y").get<double>()};
  c.kernels.k_l = j.at("k_l").get<std::string>() == "uniform" ? LocationKernel::Uniform : LocationKernel::Triangular;
  c.kernels.k_s = j.at("k_s").get<std::string>() == "none" ? AdaptationKernel::None : AdaptationKernel::Quadratic;
  c.kernels.metric = parse_metric(j.at("metric").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  o.correction = parse_correction(j.at("correction").get<std::string>());
  o.alpha = j.at("alpha").get<double>();
  o.tail = parse_tail(j.at("tail").get<std::string>());
  return o;
}

nlohmann::json summary_json(AnalysisReport const &report)
{
  return {
    {"r_p", report.summary.r_p},
    {"z_mean", report.summary.z_mean},
    {"z_max", report.summary.z_max},
    {"z_mean_sig", report.summary.z_mean_sig},
    {"n_pixels", report.zscores.size()},
    {"iterations_run", report.iterations_run},
    {"frozen_fraction_final", report.frozen_fraction_final},
    {"config", config_json(report.options, report.params)},
  };
}

std::array<std::uint8_t, 3> heat_color(double z) noexcept
{
  double const t = std::clamp(z, -8.0, 8.0) / 8.0;
  auto const level = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * v)); };
  if (t < 0.0) return {level(1.0 + t), level(1.0 + t), 255};
  return {255, level(1.0 - t), level(1.0 - t)};
}

void write_heatmap(std::filesystem::path const &path, PlaneXd const &z)
{
  Plane<std::uint8_t> r(z.rows(), z.cols()), g(z.rows(), z.cols()), b(z.rows(), z.cols());
  for (Index k = 0; k < z.size(); ++k) {
    auto const rgb = heat_color(z.data()[k]);
    r.data()[k] = rgb[0];
    g.data()[k] = rgb[1];
    b.data()[k] = rgb[2];
  }
  save_png_rgb(path, r, g, b);
}

void write_mask(std::filesystem::path const &path, MaskX const &mask)
{
  save_png_gray(path, mask.select(PlaneXd::Constant(mask.rows(), mask.cols(), 255.0), 0.0), 8);
}

void write_overlay(std::filesystem::path const &path, DualChannelImaged const &img, MaskX const &mask)
{
  auto const normalised = [](PlaneXd const &c) -> PlaneXd {
    double const hi = c.maxCoeff();
    return hi > 0.0 ? PlaneXd(c / hi) : PlaneXd(PlaneXd::Zero(c.rows(), c.cols()));
  };
  PlaneXd const gray = (127.5 * (normalised(img.x()) + normalised(img.y()))).round();
  Plane<std::uint8_t> const base = gray.cast<std::uint8_t>();
  Plane<std::uint8_t> const zero = Plane<std::uint8_t>::Zero(base.rows(), base.cols());
  Plane<std::uint8_t> const full = Plane<std::uint8_t>::Constant(base.rows(), base.cols(), 255);
  save_png_rgb(path, mask.select(zero, base), mask.select(zero, base), mask.select(full, base));
}

void write_report(std::filesystem::path const &dir, AnalysisReport const &report, DualChannelImaged const &img)
{
  std::filesystem::create_directories(dir);
  save_csv(dir / "zscores.csv", report.zscores);
  save_csv(dir / "pvalues.csv", report.pvalues);
  write_mask(dir / "mask.png", report.mask.significant);
  write_heatmap(dir / "heatmap.png", report.zscores);
  write_overlay(dir / "overlay.png", img, report.mask.significant);
  std::ofstream out(dir / "summary.json");
  if (!out) throw Error("cannot write " + (dir / "summary.json").string());
  out << summary_json(report).dump(2) << '\n';
}

} // namespace saca
