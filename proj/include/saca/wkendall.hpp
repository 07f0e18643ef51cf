#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "saca/core.hpp"

namespace saca {

/// A y-value carrying its weight through the weighted merge sort.
struct WeightedPoint
{
  double y = 0.0;
  double w = 0.0;
};

struct TauResult
{
  double tau = 0.0;
  double n_eff = 0.0;
  double z = 0.0;
};

/// (sum w)^2 / sum w^2; zero when every weight is zero.
template <typename Derived>
double effective_sample_size(Eigen::DenseBase<Derived> const &w)
{
  double const s1 = static_cast<double>(w.sum());
  double const s2 = static_cast<double>(w.derived().square().sum());
  return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

/// Standardised weighted tau, asymptotically N(0,1) under independence.
inline double z_score(double tau, double n_eff) noexcept
{
  return 1.5 * std::sqrt(n_eff) * tau;
}

/// Sum over ordered pairs i != j of w_i w_j, as (sum w)^2 - sum w^2.
template <typename Derived>
double pair_weight_total(Eigen::DenseBase<Derived> const &w)
{
  double const s1 = static_cast<double>(w.sum());
  double const s2 = static_cast<double>(w.derived().square().sum());
  return s1 * s1 - s2;
}

/// O(n^2) weighted Kendall tau straight from the pairwise definition.
template <typename DX, typename DY, typename DW>
double tau_brute(Eigen::DenseBase<DX> const &x, Eigen::DenseBase<DY> const &y, Eigen::DenseBase<DW> const &w)
{
  Index const n = x.size();
  if (y.size() != n || w.size() != n) throw DimensionError("tau_brute: length mismatch");
  auto const sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  double num = 0.0;
  double den = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      double const ww = static_cast<double>(w(i)) * static_cast<double>(w(j));
      den += ww;
      num += ww * sign(static_cast<double>(x(i) - x(j))) * sign(static_cast<double>(y(i) - y(j)));
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Weighted merge sort on points already ordered by their x key.
/// Sorts pts by y ascending in place and returns the weighted discordance
/// s_w = sum_{i>j} w_i w_j 1[y_i < y_j]. scratch must hold pts.size() points.
/// Splits at floor(n/2).
inline double weight_merge_sort(std::span<WeightedPoint> pts, std::span<WeightedPoint> scratch)
{
  std::size_t const n = pts.size();
  if (n < 2) return 0.0;
  std::size_t const half = n / 2;
  auto left = pts.first(half);
  auto right = pts.subspan(half);
  double s = weight_merge_sort(left, scratch.first(half)) + weight_merge_sort(right, scratch.subspan(half));

  // Cumulative weights of the sorted left run; a right point placed ahead of
  // left[i] is discordant with left[i..half).
  double left_total = 0.0;
  for (auto const &p : left) left_total += p.w;
  double consumed = 0.0;

  std::size_t i = 0, j = 0, k = 0;
  while (i < left.size() && j < right.size()) {
    if (right[j].y < left[i].y) {
      s += right[j].w * (left_total - consumed);
      scratch[k++] = right[j++];
    } else {
      consumed += left[i].w;
      scratch[k++] = left[i++];
    }
  }
  while (i < left.size()) scratch[k++] = left[i++];
  while (j < right.size()) scratch[k++] = right[j++];
  std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(n), pts.begin());
  return s;
}

/// Convenience overload allocating its own scratch space.
inline double weight_merge_sort(std::vector<WeightedPoint> &pts)
{
  std::vector<WeightedPoint> scratch(pts.size());
  return weight_merge_sort(std::span<WeightedPoint>(pts), std::span<WeightedPoint>(scratch));
}

/// Adds seeded uniform jitter of amplitude 0.25 x (smallest positive gap between
/// distinct values), which orders tied values randomly and leaves the order of
/// distinct values intact. Inputs without ties come back unchanged.
template <typename Derived>
Eigen::ArrayXd break_ties(Eigen::DenseBase<Derived> const &values, std::uint64_t seed)
{
  Eigen::ArrayXd out = values.derived().template cast<double>().template reshaped<Eigen::AutoOrder>();
  std::vector<double> sorted(out.begin(), out.end());
  std::sort(sorted.begin(), sorted.end());
  double gap = std::numeric_limits<double>::infinity();
  bool ties = false;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    double const d = sorted[i] - sorted[i - 1];
    if (d > 0.0)
      gap = std::min(gap, d);
    else
      ties = true;
  }
  if (!ties) return out;
  if (!std::isfinite(gap)) gap = 1.0; // every value identical
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.25 * gap, 0.25 * gap);
  for (auto &v : out) v += jitter(rng);
  return out;
}

/// Strict ranks 0..n-1 of the values; equal values (after jitter) fall back
/// to index order.
inline std::vector<std::uint32_t> strict_ranks(Eigen::ArrayXd const &values)
{
  std::vector<std::uint32_t> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  std::vector<std::uint32_t> rank(order.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

/// O(n log n) weighted Kendall tau: 1 - 4 s_w / sum_{i != j} w_i w_j.
/// Ties in x or y are broken by seeded jitter before sorting.
template <typename DX, typename DY, typename DW>
double tau_fast(Eigen::DenseBase<DX> const &x, Eigen::DenseBase<DY> const &y, Eigen::DenseBase<DW> const &w,
                std::uint64_t rng_seed = 0)
{
  Index const n = x.size();
  if (y.size() != n || w.size() != n) throw DimensionError("tau_fast: length mismatch");
  Eigen::ArrayXd const wv = w.derived().template cast<double>().template reshaped<Eigen::AutoOrder>();
  double const den = pair_weight_total(wv);
  if (n < 2 || !(den > 0.0)) return 0.0;

  Eigen::ArrayXd const xj = break_ties(x, derive_seed(rng_seed, 0));
  Eigen::ArrayXd const yj = break_ties(y, derive_seed(rng_seed, 1));

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return xj[a] < xj[b] || (xj[a] == xj[b] && a < b); });

  std::vector<WeightedPoint> pts(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) pts[i] = {yj[order[i]], wv[order[i]]};
  double const s_w = weight_merge_sort(pts);
  return std::clamp(1.0 - 4.0 * s_w / den, -1.0, 1.0);
}

/// tau, effective sample size and z-score in one call.
template <typename DX, typename DY, typename DW>
TauResult weighted_tau(Eigen::DenseBase<DX> const &x, Eigen::DenseBase<DY> const &y, Eigen::DenseBase<DW> const &w,
                       std::uint64_t rng_seed = 0)
{
  TauResult r;
  r.tau = tau_fast(x, y, w, rng_seed);
  r.n_eff = effective_sample_size(w);
  r.z = z_score(r.tau, r.n_eff);
  return r;
}

} // namespace saca
