#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "saca/core.hpp"
#include "saca/engine.hpp"
#include "saca/image.hpp"
#include "saca/inference.hpp"

namespace saca {

/// Pairs (X, Y) with X = sqrt(U), Y = sqrt(V), (U, V) ~ Clayton(theta), so
/// both marginals have CDF t^2 and Kendall's tau is theta / (theta + 2).
struct CopulaSample
{
  Eigen::ArrayXd x;
  Eigen::ArrayXd y;
};

CopulaSample clayton_sample(double theta, Index count, std::uint64_t seed);

/// Draws one (U, V) from the Clayton copula by conditional inversion.
template <typename Rng>
std::pair<double, double> clayton_draw(double theta, Rng &rng)
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto open01 = [&] {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    return u;
  };
  double const u = open01();
  double const w = open01();
  // V = ((W^(-theta/(1+theta)) - 1) U^(-theta) + 1)^(-1/theta), factored as
  // U (W^(-theta/(1+theta)) - 1 + U^theta)^(-1/theta) to avoid overflow.
  double const a = std::pow(w, -theta / (1.0 + theta)) - 1.0;
  double const v = u * std::pow(a + std::pow(u, theta), -1.0 / theta);
  return {u, std::min(v, 1.0)};
}

/// Ground-truth layout and dependence strength for one simulated image.
struct SimScenario
{
  Index width = 150;
  Index height = 150;
  MaskX region_mask; ///< true: colocalized (Clayton) pixel
  double theta = 6.0;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Built-in multi-blob layout (disk, rectangle, ellipse) covering roughly a
/// quarter of the lattice.
MaskX default_layout(Index height, Index width);

SimScenario make_scenario(double theta, std::uint64_t seed, Index height = 150, Index width = 150);

/// Background: independent Uniform(0,1) pairs; region: Clayton-based pairs.
DualChannelImaged generate_image(SimScenario const &scn);

struct EvalMetrics
{
  double alpha = 0.0; ///< false positives / predicted positives
  double beta = 0.0;  ///< true positives / condition positives
};

EvalMetrics evaluate(MaskX const &predicted, MaskX const &truth);
inline EvalMetrics evaluate(RegionMask const &predicted, MaskX const &truth)
{
  return evaluate(predicted.significant, truth);
}

struct BenchmarkMethod
{
  enum class Kind { Saca, Lca } kind = Kind::Saca;
  double radius = 0.0; ///< LCA only

  std::string label() const;
  static BenchmarkMethod saca() { return {Kind::Saca, 0.0}; }
  static BenchmarkMethod lca(double r) { return {Kind::Lca, r}; }
};

struct BenchmarkOptions
{
  SacaConfig config;         ///< thresholds default to 0.3 / 0.3 when unset
  double level = 0.05;       ///< Bonferroni level
  Index width = 150;
  Index height = 150;
  std::optional<MaskX> layout;
  std::uint64_t seed = 42;
  unsigned threads = 0;      ///< replicate-level workers
  std::optional<std::filesystem::path> dump_dir; ///< per-replicate z-maps
};

struct BenchmarkRow
{
  double theta = 0.0;
  std::string method;
  double alpha = 0.0;
  double beta = 0.0;
  int reps = 0;
};

/// Runs one replicate: simulate, analyse, Bonferroni-correct, score.
EvalMetrics run_replicate(double theta, BenchmarkMethod const &method, int rep, BenchmarkOptions const &opts,
                          PlaneXd *z_out = nullptr);

/// Mean alpha / beta per (theta, method) over reps seeded replicates.
std::vector<BenchmarkRow> run_benchmark(std::vector<double> const &thetas, int reps,
                                        std::vector<BenchmarkMethod> const &methods, BenchmarkOptions const &opts);

void write_benchmark_csv(std::filesystem::path const &path, std::vector<BenchmarkRow> const &rows);

} // namespace saca
