#include "saca/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace saca {

ZMap::ZMap(PlaneXd values)
  : z(std::move(values))
{
  if (!z.isFinite().all()) throw ParameterError("z-map contains non-finite values");
}

double normal_upper_tail(double z) noexcept
{
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double normal_upper_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal_upper_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation for the lower quantile of 1 - p, then
  // Newton steps on the erfc tail.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  double const q_lo = 1.0 - p; // lower-tail probability
  double z;
  if (p > 0.97575) {
    double const q = std::sqrt(-2.0 * std::log(q_lo));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p < 0.02425) {
    double const q = std::sqrt(-2.0 * std::log(p));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    double const q = q_lo - 0.5;
    double const r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int iter = 0; iter < 3; ++iter) {
    double const density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    if (density <= 0.0) break;
    z += (normal_upper_tail(z) - p) / density;
  }
  return z;
}

double z_to_p(double z, Tail tail) noexcept
{
  return tail == Tail::One ? normal_upper_tail(z) : std::erfc(std::abs(z) / std::numbers::sqrt2);
}

PlaneXd p_values(ZMap const &zmap, Tail tail)
{
  return zmap.z.unaryExpr([tail](double z) { return z_to_p(z, tail); });
}

double bonferroni_z_threshold(Index n, double level, Tail tail)
{
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("level must lie in (0, 1)");
  if (n < 1) throw ParameterError("n must be positive");
  double const p = level / static_cast<double>(n);
  return normal_upper_quantile(tail == Tail::One ? p : 0.5 * p);
}

RegionMask bonferroni_mask(ZMap const &zmap, double level, Tail tail)
{
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("level must lie in (0, 1)");
  double const cutoff = level / static_cast<double>(zmap.n());
  return {p_values(zmap, tail) < cutoff, Correction::Bonferroni, level};
}

RegionMask bh_mask(ZMap const &zmap, double level, Tail tail)
{
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("level must lie in (0, 1)");
  PlaneXd const p = p_values(zmap, tail);
  std::vector<double> sorted(p.data(), p.data() + p.size());
  std::sort(sorted.begin(), sorted.end());
  double const n = static_cast<double>(sorted.size());
  double cutoff = -1.0;
  for (std::size_t k = sorted.size(); k-- > 0;) {
    if (sorted[k] <= static_cast<double>(k + 1) * level / n) {
      cutoff = sorted[k];
      break;
    }
  }
  return {p <= cutoff, Correction::BenjaminiHochberg, level};
}

RegionMask correct(ZMap const &zmap, Correction method, double level, Tail tail)
{
  return method == Correction::Bonferroni ? bonferroni_mask(zmap, level, tail) : bh_mask(zmap, level, tail);
}

SummaryStats summary_stats(ZMap const &zmap, RegionMask const &mask)
{
  if (mask.significant.rows() != zmap.z.rows() || mask.significant.cols() != zmap.z.cols())
    throw DimensionError("summary_stats: mask and z-map differ in shape");
  SummaryStats s;
  if (zmap.n() == 0) return s;
  Index const hits = mask.count();
  s.r_p = static_cast<double>(hits) / static_cast<double>(zmap.n());
  s.z_mean = zmap.z.mean();
  s.z_max = zmap.z.maxCoeff();
  s.z_mean_sig = hits ? mask.significant.select(zmap.z, 0.0).sum() / static_cast<double>(hits) : 0.0;
  return s;
}

Correction parse_correction(std::string_view s)
{
  if (s == "bonferroni") return Correction::Bonferroni;
  if (s == "bh") return Correction::BenjaminiHochberg;
  throw ParameterError("unknown correction '" + std::string(s) + "' (expected bonferroni or bh)");
}

Tail parse_tail(std::string_view s)
{
  if (s == "one") return Tail::One;
  if (s == "two") return Tail::Two;
  throw ParameterError("unknown tail '" + std::string(s) + "' (expected one or two)");
}

std::string_view to_string(Correction c) noexcept
{
  return c == Correction::Bonferroni ? "bonferroni" : "bh";
}

std::string_view to_string(Tail t) noexcept
{
  return t == Tail::One ? "one" : "two";
}

} // namespace saca
