#pragma once

#include <string_view>

#include "saca/core.hpp"

namespace saca {

enum class Tail { One, Two };
enum class Correction { Bonferroni, BenjaminiHochberg };

/// Per-pixel z-scores; n is the number of tests (all pixels).
struct ZMap
{
  PlaneXd z;

  explicit ZMap(PlaneXd values);
  Index n() const noexcept { return z.size(); }
};

struct RegionMask
{
  MaskX significant;
  Correction method = Correction::Bonferroni;
  double level = 0.05;

  Index count() const { return significant.count(); }
};

/// 1 - Phi(z), from erfc so the far tail keeps full relative precision.
double normal_upper_tail(double z) noexcept;

/// z such that 1 - Phi(z) = p.
double normal_upper_quantile(double p);

/// One-sided upper-tail p-value by default; two-sided uses |z|.
double z_to_p(double z, Tail tail = Tail::One) noexcept;

PlaneXd p_values(ZMap const &zmap, Tail tail = Tail::One);

/// z above which a pixel is Bonferroni-significant at the given level.
double bonferroni_z_threshold(Index n, double level, Tail tail = Tail::One);

RegionMask bonferroni_mask(ZMap const &zmap, double level, Tail tail = Tail::One);

/// Benjamini-Hochberg step-up on the pixel p-values.
RegionMask bh_mask(ZMap const &zmap, double level, Tail tail = Tail::One);

RegionMask correct(ZMap const &zmap, Correction method, double level, Tail tail = Tail::One);

struct SummaryStats
{
  double r_p = 0.0;
  double z_mean = 0.0;
  double z_max = 0.0;
  double z_mean_sig = 0.0;
};

SummaryStats summary_stats(ZMap const &zmap, RegionMask const &mask);

Correction parse_correction(std::string_view s);
Tail parse_tail(std::string_view s);
std::string_view to_string(Correction c) noexcept;
std::string_view to_string(Tail t) noexcept;

} // namespace saca
