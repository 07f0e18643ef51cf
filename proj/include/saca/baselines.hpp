#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include "saca/core.hpp"
#include "saca/image.hpp"
#include "saca/parallel.hpp"

namespace saca {

/// Pixel subset over which ROI indices are computed.
struct RoiSelection
{
  MaskX mask;

  static RoiSelection whole(Index height, Index width) { return {MaskX::Constant(height, width, true)}; }
};

/// Channel values of the selected pixels, in row-major order.
struct RoiValues
{
  Eigen::ArrayXd x;
  Eigen::ArrayXd y;
};

template <typename Scalar>
RoiValues roi_values(DualChannelImage<Scalar> const &img, RoiSelection const &roi)
{
  if (roi.mask.rows() != img.height() || roi.mask.cols() != img.width())
    throw DimensionError("ROI mask does not match the image");
  Index const n = roi.mask.count();
  RoiValues v{Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  Index j = 0;
  for (Index k = 0; k < roi.mask.size(); ++k) {
    if (!roi.mask.data()[k]) continue;
    v.x[j] = static_cast<double>(img.x().data()[k]);
    v.y[j] = static_cast<double>(img.y().data()[k]);
    ++j;
  }
  return v;
}

// ---- indices on value vectors ---------------------------------------------

inline double pearson(Eigen::ArrayXd const &x, Eigen::ArrayXd const &y)
{
  if (x.size() != y.size()) throw DimensionError("pearson: length mismatch");
  if (x.size() < 2) throw DegenerateError("pearson: need at least two pixels");
  Eigen::ArrayXd const dx = x - x.mean();
  Eigen::ArrayXd const dy = y - y.mean();
  double const sxx = dx.square().sum();
  double const syy = dy.square().sum();
  if (!(sxx > 0.0 && syy > 0.0)) throw DegenerateError("pearson: zero variance");
  return std::clamp((dx * dy).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct MandersCoefficients
{
  double m1 = 0.0;
  double m2 = 0.0;
};

/// M1 = sum X 1[Y > t_y] / sum X, M2 = sum Y 1[X > t_x] / sum Y.
inline MandersCoefficients manders(Eigen::ArrayXd const &x, Eigen::ArrayXd const &y, Thresholds const &th)
{
  if (x.size() != y.size()) throw DimensionError("manders: length mismatch");
  double const sx = x.sum();
  double const sy = y.sum();
  if (!(sx > 0.0 && sy > 0.0)) throw DegenerateError("manders: zero channel sum");
  return {(y > th.t_y).select(x, 0.0).sum() / sx, (x > th.t_x).select(y, 0.0).sum() / sy};
}

/// Intensity correlation quotient: fraction of positive mean-centred products minus 0.5.
inline double icq(Eigen::ArrayXd const &x, Eigen::ArrayXd const &y)
{
  if (x.size() != y.size()) throw DimensionError("icq: length mismatch");
  if (x.size() < 2) throw DegenerateError("icq: need at least two pixels");
  auto const positive = ((x - x.mean()) * (y - y.mean()) > 0.0).count();
  return static_cast<double>(positive) / static_cast<double>(x.size()) - 0.5;
}

/// Pearson correlation with weighted means and weighted (co)variances.
inline double weighted_pearson(Eigen::ArrayXd const &x, Eigen::ArrayXd const &y, Eigen::ArrayXd const &w)
{
  if (x.size() != y.size() || x.size() != w.size()) throw DimensionError("weighted_pearson: length mismatch");
  double const sw = w.sum();
  if (!(sw > 0.0)) throw DegenerateError("weighted_pearson: zero total weight");
  double const mx = (w * x).sum() / sw;
  double const my = (w * y).sum() / sw;
  double const sxx = (w * (x - mx).square()).sum();
  double const syy = (w * (y - my).square()).sum();
  if (!(sxx > 0.0 && syy > 0.0)) throw DegenerateError("weighted_pearson: zero weighted variance");
  return std::clamp((w * (x - mx) * (y - my)).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---- image + ROI overloads -------------------------------------------------

template <typename Scalar>
double pearson(DualChannelImage<Scalar> const &img, RoiSelection const &roi)
{
  auto const v = roi_values(img, roi);
  return pearson(v.x, v.y);
}

template <typename Scalar>
MandersCoefficients manders(DualChannelImage<Scalar> const &img, RoiSelection const &roi, Thresholds const &th)
{
  auto const v = roi_values(img, roi);
  return manders(v.x, v.y, th);
}

template <typename Scalar>
double icq(DualChannelImage<Scalar> const &img, RoiSelection const &roi)
{
  auto const v = roi_values(img, roi);
  return icq(v.x, v.y);
}

/// Index evaluated on the ROI values of (x, y).
using RoiIndex = std::function<double(Eigen::ArrayXd const &, Eigen::ArrayXd const &)>;

/// One-sided permutation p-value (1 + #{permuted >= observed}) / (reps + 1),
/// permuting the y channel within the ROI. Replicate r draws from its own
/// stream derived from seed, so the result does not depend on threads.
inline double permutation_test(RoiValues const &values, RoiIndex const &index, int reps, std::uint64_t seed,
                               unsigned threads = 1)
{
  if (reps < 1) throw ParameterError("permutation_test: reps must be at least 1");
  double const observed = index(values.x, values.y);
  std::vector<char> exceed(static_cast<std::size_t>(reps), 0);
  parallel_for(exceed.size(), threads, [&](std::size_t begin, std::size_t end, unsigned) {
    Eigen::ArrayXd y = values.y;
    for (std::size_t r = begin; r < end; ++r) {
      y = values.y;
      std::mt19937_64 rng(derive_seed(seed, r));
      std::shuffle(y.begin(), y.end(), rng);
      exceed[r] = index(values.x, y) >= observed;
    }
  });
  auto const hits = std::count(exceed.begin(), exceed.end(), 1);
  return static_cast<double>(1 + hits) / static_cast<double>(reps + 1);
}

template <typename Scalar>
double permutation_test(DualChannelImage<Scalar> const &img, RoiSelection const &roi, RoiIndex const &index, int reps,
                        std::uint64_t seed, unsigned threads = 1)
{
  return permutation_test(roi_values(img, roi), index, reps, seed, threads);
}

} // namespace saca
