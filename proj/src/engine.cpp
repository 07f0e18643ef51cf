#include "saca/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "saca/parallel.hpp"
#include "saca/wkendall.hpp"

namespace saca {

void SacaConfig::validate() const
{
  if (!(r0 > 0.0)) throw ParameterError("r0 must be positive");
  if (!(c_r > 1.0)) throw ParameterError("c_r must exceed 1");
  if (!(t_lower > 0 && t_lower < t_upper)) throw ParameterError("need 0 < t_lower < t_upper");
  if (!(eta > 0.0)) throw ParameterError("eta must be positive");
  if (d_n && !(*d_n > 0.0)) throw ParameterError("d_n must be positive");
  if (lambda && !(*lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
}

double SacaConfig::radius(int t) const
{
  return r0 * std::pow(c_r, t);
}

ResolvedParams resolve(SacaConfig const &cfg, DualChannelImaged const &img)
{
  cfg.validate();
  ResolvedParams p;
  p.n = img.size();
  p.thresholds = cfg.thresholds ? *cfg.thresholds : otsu_thresholds(img);
  double const root_log_n = std::sqrt(std::log(static_cast<double>(std::max<Index>(p.n, 2))));
  p.d_n = cfg.d_n.value_or(root_log_n);
  p.lambda = cfg.lambda.value_or(cfg.eta * root_log_n);
  return p;
}

double normalized_distance(Pixel const &i, Pixel const &k, TauState const *previous)
{
  if (previous == nullptr) return 0.0;
  return std::sqrt(previous->n_eff(k.row, k.col)) * std::abs(previous->tau(i.row, i.col) - previous->tau(k.row, k.col));
}

PlaneXd z_scores(TauState const &state)
{
  return (state.n_eff >= 2.0).select(1.5 * state.n_eff.sqrt() * state.tau, 0.0);
}

namespace {

struct Estimate
{
  double tau = 0.0;
  double n_eff = 0.0;
};

/// Evaluates weighted tau at single pixels. Ties are broken once for the
/// whole image, so each neighborhood works on strict global ranks.
class LocalEstimator
{
public:
  LocalEstimator(DualChannelImaged const &img, Thresholds const &th, KernelSpec const &kern, std::uint64_t seed)
    : width_(img.width())
    , height_(img.height())
    , kern_(kern)
    , signal_(signal_mask(img, th))
  {
    x_rank_ = strict_ranks(break_ties(img.x(), derive_seed(seed, 0)));
    auto const y_rank = strict_ranks(break_ties(img.y(), derive_seed(seed, 1)));
    y_key_.assign(y_rank.begin(), y_rank.end());
  }

  struct Workspace
  {
    struct Entry
    {
      std::uint32_t x_rank;
      double y;
      double w;
    };
    std::vector<Entry> entries;
    std::vector<WeightedPoint> pts;
    std::vector<WeightedPoint> scratch;
  };

  Index width() const noexcept { return width_; }
  Index height() const noexcept { return height_; }

  /// previous == nullptr disables adaptation (all K_s factors 1).
  Estimate estimate(Index row, Index col, std::vector<KernelOffset> const &offsets, TauState const *previous,
                    double d_n, Workspace &ws) const
  {
    ws.entries.clear();
    bool const adapt = previous != nullptr && kern_.k_s != AdaptationKernel::None;
    double const tau_k = adapt ? previous->tau(row, col) : 0.0;
    double const root_n_k = adapt ? std::sqrt(previous->n_eff(row, col)) : 0.0;
    double s1 = 0.0, s2 = 0.0;
    for (auto const &o : offsets) {
      Index const r = row + o.drow;
      Index const c = col + o.dcol;
      if (r < 0 || r >= height_ || c < 0 || c >= width_) continue;
      Index const i = r * width_ + c;
      if (!signal_.data()[i]) continue;
      double w = o.weight;
      if (adapt) {
        double const d = root_n_k * std::abs(previous->tau.data()[i] - tau_k);
        w *= adaptation_kernel(d / d_n, kern_.k_s);
        if (w <= 0.0) continue;
      }
      s1 += w;
      s2 += w * w;
      ws.entries.push_back({x_rank_[i], y_key_[i], w});
    }

    Estimate e;
    e.n_eff = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
    double const den = s1 * s1 - s2;
    if (ws.entries.size() < 2 || !(den > 0.0)) return e;

    std::sort(ws.entries.begin(), ws.entries.end(), [](auto const &a, auto const &b) { return a.x_rank < b.x_rank; });
    ws.pts.resize(ws.entries.size());
    ws.scratch.resize(ws.entries.size());
    for (std::size_t j = 0; j < ws.entries.size(); ++j) ws.pts[j] = {ws.entries[j].y, ws.entries[j].w};
    double const s_w = weight_merge_sort(std::span<WeightedPoint>(ws.pts), std::span<WeightedPoint>(ws.scratch));
    e.tau = std::clamp(1.0 - 4.0 * s_w / den, -1.0, 1.0);
    return e;
  }

private:
  Index width_;
  Index height_;
  KernelSpec kern_;
  MaskX signal_;
  std::vector<std::uint32_t> x_rank_;
  std::vector<double> y_key_;
};

TauState blank_state(Index height, Index width)
{
  TauState s;
  s.tau = PlaneXd::Zero(height, width);
  s.n_eff = PlaneXd::Zero(height, width);
  s.frozen = MaskX::Constant(height, width, false);
  s.tau_bench = PlaneXd::Zero(height, width);
  s.n_eff_bench = PlaneXd::Zero(height, width);
  return s;
}

/// One synchronous sweep at radius r over every non-frozen pixel.
void sweep(LocalEstimator const &est, double r, KernelSpec const &kern, TauState const *previous, double d_n,
           unsigned threads, std::vector<Estimate> &out)
{
  auto const offsets = kernel_offsets(r, kern);
  Index const width = est.width();
  std::size_t const count = static_cast<std::size_t>(est.height() * width);
  out.assign(count, Estimate{});
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end, unsigned) {
    LocalEstimator::Workspace ws;
    for (std::size_t k = begin; k < end; ++k) {
      if (previous && previous->frozen.data()[k]) continue;
      out[k] = est.estimate(static_cast<Index>(k) / width, static_cast<Index>(k) % width, offsets, previous, d_n, ws);
    }
  });
}

} // namespace

TauState lca_fixed(DualChannelImaged const &img, Thresholds const &th, double r, KernelSpec const &kern,
                   std::uint64_t seed, unsigned threads)
{
  if (!(r > 0.0)) throw ParameterError("lca_fixed: radius must be positive");
  LocalEstimator const est(img, th, kern, seed);
  std::vector<Estimate> sweep_out;
  sweep(est, r, kern, nullptr, 1.0, threads, sweep_out);

  TauState s = blank_state(img.height(), img.width());
  for (std::size_t k = 0; k < sweep_out.size(); ++k) {
    s.tau.data()[k] = sweep_out[k].tau;
    s.n_eff.data()[k] = sweep_out[k].n_eff;
  }
  s.tau_bench = s.tau;
  s.n_eff_bench = s.n_eff;
  s.radius = r;
  return s;
}

TauState saca_iterate(DualChannelImaged const &img, SacaConfig const &cfg, ProgressCallback const &progress)
{
  ResolvedParams const params = resolve(cfg, img);
  LocalEstimator const est(img, params.thresholds, cfg.kernels, cfg.seed);
  std::vector<Estimate> sweep_out;

  TauState current = blank_state(img.height(), img.width());
  sweep(est, cfg.r0, cfg.kernels, nullptr, params.d_n, cfg.threads, sweep_out);
  for (std::size_t k = 0; k < sweep_out.size(); ++k) {
    current.tau.data()[k] = sweep_out[k].tau;
    current.n_eff.data()[k] = sweep_out[k].n_eff;
  }
  current.radius = cfg.r0;
  if (progress) progress({0, cfg.r0, 0.0, &params, nullptr, &current});

  for (int t = 1; t <= cfg.t_upper; ++t) {
    double const r = cfg.radius(t);
    sweep(est, r, cfg.kernels, &current, params.d_n, cfg.threads, sweep_out);

    TauState next = current;
    for (std::size_t k = 0; k < sweep_out.size(); ++k) {
      if (current.frozen.data()[k]) continue;
      Estimate const &cand = sweep_out[k];
      if (t > cfg.t_lower) {
        double const delta = std::sqrt(current.n_eff_bench.data()[k]) * std::abs(cand.tau - current.tau_bench.data()[k]);
        if (delta > params.lambda) {
          // Reject the new estimate and stop updating this pixel.
          next.frozen.data()[k] = true;
          continue;
        }
      }
      next.tau.data()[k] = cand.tau;
      next.n_eff.data()[k] = cand.n_eff;
    }
    if (t == cfg.t_lower) {
      next.tau_bench = next.tau;
      next.n_eff_bench = next.n_eff;
    }
    next.iteration = t;
    next.radius = r;
    if (progress) progress({t, r, next.frozen_fraction(), &params, &current, &next});
    current = std::move(next);
  }
  return current;
}

} // namespace saca
