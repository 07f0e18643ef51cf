#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "saca/core.hpp"
#include "saca/image.hpp"

namespace saca {

enum class Metric { LInf, L2 };

/// Spatial kernel K_l.
enum class LocationKernel {
  Triangular, ///< max(1 - x, 0)
  Uniform,    ///< 1[x <= 1]
};

/// Adaptation kernel K_s applied to D / D_n.
enum class AdaptationKernel {
  Quadratic, ///< (1 - x/2)^2 on [0, 2), zero beyond
  None,      ///< constant 1: adaptation disabled
};

struct KernelSpec
{
  LocationKernel k_l = LocationKernel::Triangular;
  AdaptationKernel k_s = AdaptationKernel::Quadratic;
  Metric metric = Metric::LInf;
};

/// A lattice site (row, col).
struct Pixel
{
  Index row = 0;
  Index col = 0;
  friend bool operator==(Pixel const &, Pixel const &) = default;
};

inline double lattice_distance(Index drow, Index dcol, Metric metric) noexcept
{
  double const a = static_cast<double>(std::abs(drow));
  double const b = static_cast<double>(std::abs(dcol));
  return metric == Metric::LInf ? std::max(a, b) : std::hypot(a, b);
}

inline double lattice_distance(Pixel const &i, Pixel const &k, Metric metric) noexcept
{
  return lattice_distance(i.row - k.row, i.col - k.col, metric);
}

inline double location_kernel(double x, LocationKernel kind) noexcept
{
  switch (kind) {
  case LocationKernel::Uniform: return x <= 1.0 ? 1.0 : 0.0;
  case LocationKernel::Triangular:
  default: return std::max(1.0 - x, 0.0);
  }
}

inline double adaptation_kernel(double x, AdaptationKernel kind) noexcept
{
  if (kind == AdaptationKernel::None) return 1.0;
  if (x >= 2.0) return 0.0;
  double const a = 1.0 - 0.5 * x;
  return a * a;
}

/// Support bound A of the adaptation kernel (K_s(z) = 0 for z >= A).
inline double adaptation_support(AdaptationKernel kind) noexcept
{
  return kind == AdaptationKernel::None ? std::numeric_limits<double>::infinity() : 2.0;
}

/// All pixels with d(i, k) <= r, clipped to the lattice, in row-major order.
inline std::vector<Pixel> neighborhood(Pixel const &k, double r, Index height, Index width, Metric metric)
{
  std::vector<Pixel> out;
  if (r < 0.0) return out;
  auto const reach = static_cast<Index>(std::floor(r));
  for (Index row = std::max<Index>(0, k.row - reach); row <= std::min(height - 1, k.row + reach); ++row)
    for (Index col = std::max<Index>(0, k.col - reach); col <= std::min(width - 1, k.col + reach); ++col)
      if (lattice_distance(row - k.row, col - k.col, metric) <= r) out.push_back({row, col});
  return out;
}

/// Non-adaptive weight K_l(d(i,k)/r) * 1[X_i > t_x, Y_i > t_y].
template <typename Scalar>
double base_weight(Pixel const &i, Pixel const &k, double r, Thresholds const &th, DualChannelImage<Scalar> const &img,
                   KernelSpec const &kern)
{
  if (!(r > 0.0)) throw ParameterError("base_weight: radius must be positive");
  bool const signal = static_cast<double>(img.x()(i.row, i.col)) > th.t_x &&
                      static_cast<double>(img.y()(i.row, i.col)) > th.t_y;
  if (!signal) return 0.0;
  return location_kernel(lattice_distance(i, k, kern.metric) / r, kern.k_l);
}

/// K_s(d_stat / d_n).
inline double adaptive_factor(double d_stat, double d_n, KernelSpec const &kern)
{
  if (!(d_n > 0.0)) throw ParameterError("adaptive_factor: d_n must be positive");
  return adaptation_kernel(d_stat / d_n, kern.k_s);
}

/// Offsets within radius r carrying a nonzero spatial weight.
struct KernelOffset
{
  Index drow;
  Index dcol;
  double weight;
};

inline std::vector<KernelOffset> kernel_offsets(double r, KernelSpec const &kern)
{
  std::vector<KernelOffset> out;
  auto const reach = static_cast<Index>(std::floor(r));
  for (Index dr = -reach; dr <= reach; ++dr)
    for (Index dc = -reach; dc <= reach; ++dc) {
      double const d = lattice_distance(dr, dc, kern.metric);
      if (d > r) continue;
      double const kl = location_kernel(r > 0.0 ? d / r : (d == 0.0 ? 0.0 : 2.0), kern.k_l);
      if (kl > 0.0) out.push_back({dr, dc, kl});
    }
  return out;
}

inline Metric parse_metric(std::string_view s)
{
  if (s == "linf") return Metric::LInf;
  if (s == "l2") return Metric::L2;
  throw ParameterError("unknown metric '" + std::string(s) + "' (expected linf or l2)");
}

inline std::string_view to_string(Metric m) noexcept
{
  return m == Metric::LInf ? "linf" : "l2";
}

} // namespace saca
