#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "saca/core.hpp"

namespace saca {

/// Two co-registered intensity channels over the same pixel lattice.
template <typename Scalar>
class DualChannelImage
{
public:
  DualChannelImage() = default;

  DualChannelImage(Plane<Scalar> x, Plane<Scalar> y)
    : x_(std::move(x))
    , y_(std::move(y))
  {
    if (x_.rows() != y_.rows() || x_.cols() != y_.cols())
      throw DimensionError("channel shapes differ: " + std::to_string(x_.rows()) + "x" + std::to_string(x_.cols()) +
                           " vs " + std::to_string(y_.rows()) + "x" + std::to_string(y_.cols()));
    if (x_.size() == 0) throw DimensionError("empty image");
    auto const valid = [](Plane<Scalar> const &c) { return (c.isFinite() && c >= Scalar(0)).all(); };
    if (!valid(x_) || !valid(y_)) throw ParameterError("intensities must be finite and non-negative");
  }

  Plane<Scalar> const &x() const noexcept { return x_; }
  Plane<Scalar> const &y() const noexcept { return y_; }
  Index width() const noexcept { return x_.cols(); }
  Index height() const noexcept { return x_.rows(); }
  Index size() const noexcept { return x_.size(); }

  template <typename Other>
  DualChannelImage<Other> cast() const
  {
    return DualChannelImage<Other>(x_.template cast<Other>(), y_.template cast<Other>());
  }

private:
  Plane<Scalar> x_;
  Plane<Scalar> y_;
};

using DualChannelImaged = DualChannelImage<double>;

/// Signal-strength cutoffs; a pixel is signal when both channels exceed them.
struct Thresholds
{
  double t_x = 0.0;
  double t_y = 0.0;
};

struct OtsuResult
{
  double threshold = 0.0;
  bool degenerate = false;
};

inline constexpr int kOtsuBins = 256;

/// Global Otsu threshold over 256 equal-width bins spanning [min, max].
/// Returns the upper edge of the bin that ends the lower class.
template <typename Derived>
OtsuResult otsu_threshold(Eigen::DenseBase<Derived> const &values)
{
  if (values.size() == 0) throw ParameterError("otsu_threshold: empty input");
  double const lo = static_cast<double>(values.minCoeff());
  double const hi = static_cast<double>(values.maxCoeff());
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ParameterError("otsu_threshold: non-finite input");
  if (lo == hi) return {lo, true};

  double const width = (hi - lo) / kOtsuBins;
  std::array<double, kOtsuBins> count{};
  std::array<double, kOtsuBins> sum{};
  for (Index c = 0; c < values.cols(); ++c) {
    for (Index r = 0; r < values.rows(); ++r) {
      double const v = static_cast<double>(values.derived().coeff(r, c));
      int const b = std::min(kOtsuBins - 1, static_cast<int>((v - lo) / width));
      count[b] += 1.0;
      sum[b] += v;
    }
  }

  double const n = static_cast<double>(values.size());
  double total_sum = 0.0;
  for (double s : sum) total_sum += s;

  // Cuts through empty bins give identical scores; take the middle of the
  // first run of maximisers so a gap between modes is split evenly.
  double best = -1.0;
  int first = 0, last = 0;
  double n0 = 0.0, s0 = 0.0;
  for (int b = 0; b < kOtsuBins - 1; ++b) {
    n0 += count[b];
    s0 += sum[b];
    double const n1 = n - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    double const mu0 = s0 / n0;
    double const mu1 = (total_sum - s0) / n1;
    double const between = (n0 / n) * (n1 / n) * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      first = last = b;
    } else if (between == best && last == b - 1) {
      last = b;
    }
  }
  return {lo + ((first + last) / 2 + 1) * width, false};
}

/// Per-channel Otsu thresholds.
template <typename Scalar>
Thresholds otsu_thresholds(DualChannelImage<Scalar> const &img)
{
  return {otsu_threshold(img.x()).threshold, otsu_threshold(img.y()).threshold};
}

template <typename Scalar>
MaskX signal_mask(DualChannelImage<Scalar> const &img, Thresholds const &th)
{
  return (img.x().template cast<double>() > th.t_x) && (img.y().template cast<double>() > th.t_y);
}

// ---- file IO ---------------------------------------------------------------

/// Reads one channel from CSV (row-major, comma separated, no header),
/// 8/16-bit grayscale PNG, or uncompressed 8/16-bit grayscale TIFF.
PlaneXd load_channel(std::filesystem::path const &path);

DualChannelImaged load_image(std::filesystem::path const &path_x, std::filesystem::path const &path_y);

MaskX load_mask(std::filesystem::path const &path);

/// Writes values with round-trip precision.
void save_csv(std::filesystem::path const &path, PlaneXd const &values);

/// Gray PNG at 8 or 16 bits; values are rounded and clamped to the bit depth.
void save_png_gray(std::filesystem::path const &path, PlaneXd const &values, int bit_depth);

void save_tiff_gray(std::filesystem::path const &path, PlaneXd const &values, int bit_depth);

/// 8-bit RGB PNG; channels given as separate planes in [0, 255].
void save_png_rgb(std::filesystem::path const &path, Plane<std::uint8_t> const &r, Plane<std::uint8_t> const &g,
                  Plane<std::uint8_t> const &b);

} // namespace saca
