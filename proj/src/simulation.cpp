#include "saca/simulation.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "saca/parallel.hpp"

namespace saca {

CopulaSample clayton_sample(double theta, Index count, std::uint64_t seed)
{
  if (!(theta > 0.0)) throw ParameterError("clayton_sample: theta must be positive");
  if (count < 1) throw ParameterError("clayton_sample: count must be positive");
  std::mt19937_64 rng(seed);
  CopulaSample s{Eigen::ArrayXd(count), Eigen::ArrayXd(count)};
  for (Index i = 0; i < count; ++i) {
    auto const [u, v] = clayton_draw(theta, rng);
    s.x[i] = std::sqrt(u);
    s.y[i] = std::sqrt(v);
  }
  return s;
}

void SimScenario::validate() const
{
  if (!(theta > 0.0)) throw ParameterError("scenario theta must be positive");
  if (width < 1 || height < 1) throw ParameterError("scenario dimensions must be positive");
  if (region_mask.rows() != height || region_mask.cols() != width)
    throw DimensionError("scenario region mask does not match its dimensions");
}

MaskX default_layout(Index height, Index width)
{
  MaskX m = MaskX::Constant(height, width, false);
  double const sy = static_cast<double>(height) / 150.0;
  double const sx = static_cast<double>(width) / 150.0;
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      double const y = (static_cast<double>(r) + 0.5) / sy;
      double const x = (static_cast<double>(c) + 0.5) / sx;
      bool const disk = std::hypot(x - 40.0, y - 40.0) <= 25.0;
      bool const rect = x >= 85.0 && x < 130.0 && y >= 20.0 && y < 60.0;
      double const ex = (x - 75.0) / 35.0, ey = (y - 110.0) / 18.0;
      bool const ellipse = ex * ex + ey * ey <= 1.0;
      m(r, c) = disk || rect || ellipse;
    }
  }
  return m;
}

SimScenario make_scenario(double theta, std::uint64_t seed, Index height, Index width)
{
  return {width, height, default_layout(height, width), theta, seed};
}

DualChannelImaged generate_image(SimScenario const &scn)
{
  scn.validate();
  std::mt19937_64 rng(scn.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PlaneXd x(scn.height, scn.width), y(scn.height, scn.width);
  for (Index r = 0; r < scn.height; ++r) {
    for (Index c = 0; c < scn.width; ++c) {
      if (scn.region_mask(r, c)) {
        auto const [u, v] = clayton_draw(scn.theta, rng);
        x(r, c) = std::sqrt(u);
        y(r, c) = std::sqrt(v);
      } else {
        x(r, c) = unif(rng);
        y(r, c) = unif(rng);
      }
    }
  }
  return DualChannelImaged(std::move(x), std::move(y));
}

EvalMetrics evaluate(MaskX const &predicted, MaskX const &truth)
{
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
    throw DimensionError("evaluate: mask shapes differ");
  auto const pred_pos = static_cast<double>(predicted.count());
  auto const cond_pos = static_cast<double>(truth.count());
  auto const true_pos = static_cast<double>((predicted && truth).count());
  EvalMetrics m;
  m.alpha = pred_pos > 0 ? (pred_pos - true_pos) / pred_pos : 0.0;
  m.beta = cond_pos > 0 ? true_pos / cond_pos : 0.0;
  return m;
}

std::string BenchmarkMethod::label() const
{
  if (kind == Kind::Saca) return "saca";
  std::ostringstream os;
  os << "lca(r=" << radius << ")";
  return os.str();
}

namespace {

SacaConfig benchmark_config(BenchmarkOptions const &opts)
{
  SacaConfig cfg = opts.config;
  if (!cfg.thresholds) cfg.thresholds = Thresholds{0.3, 0.3};
  cfg.threads = 1; // parallelism lives at the replicate level
  return cfg;
}

} // namespace

EvalMetrics run_replicate(double theta, BenchmarkMethod const &method, int rep, BenchmarkOptions const &opts,
                          PlaneXd *z_out)
{
  SacaConfig cfg = benchmark_config(opts);
  MaskX const layout = opts.layout ? *opts.layout : default_layout(opts.height, opts.width);
  std::uint64_t const rep_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(rep));
  SimScenario const scn{layout.cols(), layout.rows(), layout, theta, rep_seed};
  DualChannelImaged const img = generate_image(scn);
  cfg.seed = derive_seed(rep_seed, 1);

  TauState const state = method.kind == BenchmarkMethod::Kind::Saca
                           ? saca_iterate(img, cfg)
                           : lca_fixed(img, *cfg.thresholds, method.radius, cfg.kernels, cfg.seed, 1);
  ZMap const zmap(z_scores(state));
  if (z_out) *z_out = zmap.z;
  return evaluate(bonferroni_mask(zmap, opts.level), layout);
}

std::vector<BenchmarkRow> run_benchmark(std::vector<double> const &thetas, int reps,
                                        std::vector<BenchmarkMethod> const &methods, BenchmarkOptions const &opts)
{
  if (reps < 1) throw ParameterError("reps must be at least 1");
  for (double theta : thetas)
    if (!(theta > 0.0)) throw ParameterError("theta must be positive");
  if (opts.dump_dir) std::filesystem::create_directories(*opts.dump_dir);

  std::vector<BenchmarkRow> rows;
  for (double theta : thetas) {
    for (auto const &method : methods) {
      std::vector<EvalMetrics> per_rep(static_cast<std::size_t>(reps));
      parallel_for(per_rep.size(), opts.threads, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t rep = begin; rep < end; ++rep) {
          PlaneXd z;
          per_rep[rep] = run_replicate(theta, method, static_cast<int>(rep), opts, opts.dump_dir ? &z : nullptr);
          if (opts.dump_dir) {
            std::ostringstream name;
            name << "z_theta" << theta << "_" << method.label() << "_rep" << rep << ".csv";
            save_csv(*opts.dump_dir / name.str(), z);
          }
        }
      });
      BenchmarkRow row{theta, method.label(), 0.0, 0.0, reps};
      for (auto const &m : per_rep) {
        row.alpha += m.alpha;
        row.beta += m.beta;
      }
      row.alpha /= reps;
      row.beta /= reps;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_benchmark_csv(std::filesystem::path const &path, std::vector<BenchmarkRow> const &rows)
{
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "theta,method,alpha,beta\n";
  out.precision(6);
  for (auto const &r : rows) out << r.theta << ',' << r.method << ',' << std::fixed << r.alpha << ',' << r.beta << std::defaultfloat << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

} // namespace saca
