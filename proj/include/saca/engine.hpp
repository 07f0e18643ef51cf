#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "saca/core.hpp"
#include "saca/image.hpp"
#include "saca/kernels.hpp"

namespace saca {

/// Tuning parameters of the multiscale adaptive iteration.
struct SacaConfig
{
  double r0 = 1.0;
  double c_r = 1.15;
  int t_lower = 8;
  int t_upper = 15;
  double eta = 1.0;
  std::optional<double> d_n;    ///< default sqrt(log n)
  std::optional<double> lambda; ///< default eta * sqrt(log n)
  std::optional<Thresholds> thresholds; ///< nullopt: per-channel Otsu
  KernelSpec kernels;
  std::uint64_t seed = 42;
  unsigned threads = 0; ///< 0: hardware concurrency

  void validate() const;
  double radius(int t) const;
};

/// Config values after filling in image-dependent defaults.
struct ResolvedParams
{
  Thresholds thresholds;
  double d_n = 0.0;
  double lambda = 0.0;
  Index n = 0;
};

ResolvedParams resolve(SacaConfig const &cfg, DualChannelImaged const &img);

/// Per-pixel estimates after some iteration.
struct TauState
{
  PlaneXd tau;
  PlaneXd n_eff;
  MaskX frozen;
  PlaneXd tau_bench;
  PlaneXd n_eff_bench;
  int iteration = 0;
  double radius = 0.0;

  Index width() const noexcept { return tau.cols(); }
  Index height() const noexcept { return tau.rows(); }
  double frozen_fraction() const { return tau.size() ? frozen.cast<double>().mean() : 0.0; }
};

struct IterationInfo
{
  int t = 0;
  double radius = 0.0;
  double frozen_fraction = 0.0;
  ResolvedParams const *params = nullptr;
  TauState const *previous = nullptr; ///< null at t = 0
  TauState const *current = nullptr;
};

using ProgressCallback = std::function<void(IterationInfo const &)>;

/// Fixed-radius local analysis with non-adaptive weights.
TauState lca_fixed(DualChannelImaged const &img, Thresholds const &th, double r, KernelSpec const &kern = {},
                   std::uint64_t seed = 42, unsigned threads = 0);

/// sqrt(n_eff[k]) * |tau[i] - tau[k]| on the previous iteration's state;
/// zero when there is no previous iteration.
double normalized_distance(Pixel const &i, Pixel const &k, TauState const *previous);

/// Full propagation-separation run; returns the final state.
TauState saca_iterate(DualChannelImaged const &img, SacaConfig const &cfg, ProgressCallback const &progress = {});

/// 1.5 sqrt(n_eff) tau per pixel; pixels with n_eff < 2 report 0.
PlaneXd z_scores(TauState const &state);

} // namespace saca
