#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "saca/inference.hpp"

using namespace saca;

namespace {

// erfc(x) for x > 0: Taylor series of erf below 2, continued fraction above.
double erfc_cf(double x)
{
  if (x < 2.0) {
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
      term *= -static_cast<long double>(x) * x / n;
      sum += term / (2 * n + 1);
    }
    return static_cast<double>(1.0L - 2.0L / std::sqrt(static_cast<long double>(M_PI)) * sum);
  }
  double f = x;
  for (int k = 2000; k >= 1; --k) f = x + (k / 2.0) / f;
  return std::exp(-x * x) / std::sqrt(M_PI) / f;
}

double upper_tail_oracle(double z)
{
  return z > 0 ? 0.5 * erfc_cf(z / std::sqrt(2.0)) : 1.0 - 0.5 * erfc_cf(-z / std::sqrt(2.0));
}

ZMap zmap_from_p(std::initializer_list<double> ps)
{
  PlaneXd z(1, static_cast<Index>(ps.size()));
  Index i = 0;
  for (double p : ps) z(0, i++) = normal_upper_quantile(p);
  return ZMap(z);
}

} // namespace

TEST_CASE("z to p examples")
{
  CHECK(z_to_p(0.0) == 0.5);
  CHECK(z_to_p(0.0, Tail::Two) == 1.0);
  CHECK(z_to_p(1.6449) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(std::abs(z_to_p(1.6449) - 0.05) < 1e-4);
  CHECK(z_to_p(-1.96, Tail::Two) == doctest::Approx(2.0 * z_to_p(1.96)));
  double const n = 1024.0 * 1024.0;
  CHECK(z_to_p(5.335) == doctest::Approx(0.05 / n).epsilon(2e-3));
}

TEST_CASE("upper tail agrees with continued fraction oracle")
{
  for (double z : {0.3, 1.0, 1.6449, 2.2414, 3.0, 4.59, 5.335, 7.0, 10.0}) {
    CAPTURE(z);
    double const want = upper_tail_oracle(z);
    CHECK(std::abs(normal_upper_tail(z) - want) <= 1e-12);
    CHECK(normal_upper_tail(z) == doctest::Approx(want).epsilon(1e-10));
    CHECK(std::abs(normal_upper_tail(-z) - (1.0 - want)) <= 1e-12);
  }
}

TEST_CASE("quantile inverts the tail")
{
  for (double p : {0.5, 0.2, 0.05, 1e-3, 1e-6, 1e-9, 1e-13, 0.97}) {
    CAPTURE(p);
    CHECK(normal_upper_tail(normal_upper_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK_THROWS_AS(normal_upper_quantile(0.0), ParameterError);
  CHECK_THROWS_AS(normal_upper_quantile(1.0), ParameterError);
}

TEST_CASE("bonferroni thresholds")
{
  CHECK(bonferroni_z_threshold(1024 * 1024, 0.05) == doctest::Approx(5.335).epsilon(0.001 / 5.335));
  CHECK(std::abs(bonferroni_z_threshold(4, 0.05) - 2.2414) <= 1e-3);
  CHECK(bonferroni_z_threshold(22500, 0.05) == doctest::Approx(4.59).epsilon(1e-3));
  CHECK(bonferroni_z_threshold(4, 0.05, Tail::Two) > bonferroni_z_threshold(4, 0.05));
}

TEST_CASE("bonferroni mask")
{
  PlaneXd z(2, 2);
  z << 2.0, 2.3, -3.0, 2.25;
  auto const m = bonferroni_mask(ZMap(z), 0.05);
  CHECK(!m.significant(0, 0));
  CHECK(m.significant(0, 1));
  CHECK(!m.significant(1, 0));
  CHECK(m.significant(1, 1));
  CHECK(m.count() == 2);
  CHECK(bonferroni_mask(ZMap(z), 0.05, Tail::Two).significant(1, 0));

  // level / n >= 0.5: any positive z is significant
  for (double zp : {1e-6, 0.5, 3.0})
    CHECK(bonferroni_mask(ZMap(PlaneXd::Constant(1, 1, zp)), 0.6).count() == 1);

  CHECK(bonferroni_mask(ZMap(PlaneXd::Zero(1024, 1024)), 0.05).count() == 0);
  CHECK_THROWS_AS(bonferroni_mask(ZMap(z), 1.5), ParameterError);
  CHECK_THROWS_AS(bonferroni_mask(ZMap(z), 0.0), ParameterError);
}

TEST_CASE("zmap rejects non-finite values")
{
  PlaneXd z = PlaneXd::Zero(2, 2);
  z(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(ZMap{z}, ParameterError);
}

TEST_CASE("benjamini hochberg step up")
{
  auto const all_null = bh_mask(ZMap(PlaneXd::Constant(3, 3, -40.0)), 0.05);
  CHECK(all_null.count() == 0);

  // thresholds k * 0.01: 0.001 <= .01, 0.008 <= .02, 0.039 > .03, 0.041 > .04, 0.9 > .05
  auto const m = bh_mask(zmap_from_p({0.001, 0.008, 0.039, 0.041, 0.9}), 0.05);
  CHECK(m.significant(0, 0));
  CHECK(m.significant(0, 1));
  CHECK(!m.significant(0, 2));
  CHECK(!m.significant(0, 3));
  CHECK(!m.significant(0, 4));

  // step-up: a later p can rescue earlier ones
  auto const up = bh_mask(zmap_from_p({0.001, 0.035, 0.039, 0.04, 0.9}), 0.05);
  CHECK(up.count() == 4);
  CHECK(!up.significant(0, 4));

  CHECK(bh_mask(zmap_from_p({0.04}), 0.05).count() == 1);
  CHECK(bh_mask(zmap_from_p({0.06}), 0.05).count() == 0);
}

TEST_CASE("summary statistics")
{
  PlaneXd z(2, 2);
  z << 1, 2, 3, 4;
  RegionMask mask{MaskX::Constant(2, 2, false)};
  auto s = summary_stats(ZMap(z), mask);
  CHECK(s.r_p == 0.0);
  CHECK(s.z_mean_sig == 0.0);
  mask.significant(1, 0) = mask.significant(1, 1) = true;
  s = summary_stats(ZMap(z), mask);
  CHECK(s.r_p == 0.5);
  CHECK(s.z_mean == 2.5);
  CHECK(s.z_max == 4.0);
  CHECK(s.z_mean_sig == 3.5);

  auto const c = summary_stats(ZMap(PlaneXd::Constant(3, 3, 3.0)), {MaskX::Constant(3, 3, true)});
  CHECK(c.r_p == 1.0);
  CHECK(c.z_mean == 3.0);
  CHECK(c.z_max == 3.0);
  CHECK(c.z_mean_sig == 3.0);
  CHECK_THROWS_AS(summary_stats(ZMap(z), {MaskX::Constant(3, 3, true)}), DimensionError);
}

TEST_CASE("p value properties")
{
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 3.0);
  double prev = 1.0;
  for (double z = -8.0; z <= 8.0; z += 0.05) {
    double const p = z_to_p(z);
    CHECK(p < prev);
    CHECK(p + z_to_p(-z) == doctest::Approx(1.0).epsilon(1e-14));
    prev = p;
  }
  for (int trial = 0; trial < 30; ++trial) {
    PlaneXd z(15, 15);
    for (Index k = 0; k < z.size(); ++k) z.data()[k] = g(rng);
    ZMap const zm(z);
    for (Tail t : {Tail::One, Tail::Two}) {
      PlaneXd const p = p_values(zm, t);
      CHECK((p >= 0.0).all());
      CHECK((p <= 1.0).all());
      for (double level : {0.01, 0.05, 0.2}) {
        auto const bon = bonferroni_mask(zm, level, t);
        auto const bh = bh_mask(zm, level, t);
        CHECK(!(bon.significant && !bh.significant).any());
      }
    }
  }
}

TEST_CASE("correction and tail names")
{
  CHECK(parse_correction("bh") == Correction::BenjaminiHochberg);
  CHECK(parse_correction("bonferroni") == Correction::Bonferroni);
  CHECK(to_string(Correction::BenjaminiHochberg) == "bh");
  CHECK(parse_tail("two") == Tail::Two);
  CHECK(to_string(Tail::One) == "one");
  CHECK_THROWS_AS(parse_correction("holm"), ParameterError);
  CHECK_THROWS_AS(parse_tail("left"), ParameterError);
  PlaneXd z = PlaneXd::Constant(2, 2, 6.0);
  CHECK(correct(ZMap(z), Correction::BenjaminiHochberg, 0.05).method == Correction::BenjaminiHochberg);
  CHECK(correct(ZMap(z), Correction::Bonferroni, 0.05).count() == 4);
}
