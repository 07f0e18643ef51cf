#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>
#include <algorithm>

#include "saca/image.hpp"
#include "support.hpp"

using namespace saca;

namespace {

// Exhaustive cut search straight from the class definitions.
double otsu_oracle(Eigen::ArrayXd const &v)
{
  double const lo = v.minCoeff(), hi = v.maxCoeff();
  double const width = (hi - lo) / 256.0;
  Eigen::ArrayXi bin(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) bin[i] = std::min(255, static_cast<int>((v[i] - lo) / width));
  std::vector<double> score(255, -1.0);
  for (int cut = 0; cut < 255; ++cut) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (bin[i] <= cut) { n0 += 1; s0 += v[i]; }
      else { n1 += 1; s1 += v[i]; }
    }
    if (n0 == 0 || n1 == 0) continue;
    double const n = n0 + n1;
    double const d = s0 / n0 - s1 / n1;
    score[static_cast<std::size_t>(cut)] = n0 * n1 / (n * n) * d * d;
  }
  double const top = *std::max_element(score.begin(), score.end());
  auto const near = [&](int c) { return score[static_cast<std::size_t>(c)] >= top * (1.0 - 1e-12); };
  int first = 0;
  while (!near(first)) ++first;
  int last = first;
  while (last + 1 < 255 && near(last + 1)) ++last;
  int const best_cut = (first + last) / 2;
  return lo + (best_cut + 1) * width;
}

DualChannelImaged random_image(Index h, Index w, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  PlaneXd x(h, w), y(h, w);
  for (Index k = 0; k < x.size(); ++k) {
    x.data()[k] = u(rng);
    y.data()[k] = u(rng);
  }
  return {x, y};
}

} // namespace

TEST_CASE("image construction checks shape and values")
{
  CHECK_THROWS_AS(DualChannelImaged(PlaneXd::Zero(3, 3), PlaneXd::Zero(4, 4)), DimensionError);
  CHECK_THROWS_AS(DualChannelImaged(PlaneXd(0, 0), PlaneXd(0, 0)), DimensionError);
  PlaneXd bad = PlaneXd::Zero(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(DualChannelImaged(bad, PlaneXd::Zero(2, 2)), ParameterError);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DualChannelImaged(PlaneXd::Zero(2, 2), bad), ParameterError);

  DualChannelImaged img(PlaneXd::Zero(2, 3), PlaneXd::Ones(2, 3));
  CHECK(img.width() == 3);
  CHECK(img.height() == 2);
  CHECK(img.size() == 6);
  auto f = img.cast<float>();
  CHECK(f.y()(1, 2) == 1.0f);
}

TEST_CASE("csv loading")
{
  test::TempDir dir;
  std::string zeros;
  for (int r = 0; r < 4; ++r) zeros += "0,0,0,0\n";
  test::spit(dir / "a.csv", zeros);
  test::spit(dir / "b.csv", zeros);
  auto img = load_image(dir / "a.csv", dir / "b.csv");
  CHECK(img.width() == 4);
  CHECK(img.height() == 4);
  CHECK(img.x().isZero());
  CHECK(img.y().isZero());

  test::spit(dir / "c.csv", "0,0,0\r\n0,0,0\r\n0,0,0\r\n");
  CHECK_THROWS_AS(load_image(dir / "a.csv", dir / "c.csv"), DimensionError);

  test::spit(dir / "d.csv", "1,2\n3,x\n");
  CHECK_THROWS_AS(load_channel(dir / "d.csv"), FormatError);
  test::spit(dir / "e.csv", "1,2\n3\n");
  CHECK_THROWS_AS(load_channel(dir / "e.csv"), FormatError);
  CHECK_THROWS_AS(load_channel(dir / "missing.csv"), FormatError);

  test::spit(dir / "f.csv", " 1.5 , 2e3\n0.25,7\n");
  auto f = load_channel(dir / "f.csv");
  CHECK(f(0, 1) == 2000.0);
  CHECK(f(1, 0) == 0.25);
}

TEST_CASE("csv round trip is exact")
{
  test::TempDir dir;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  PlaneXd m(7, 5);
  for (Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  m(0, 0) = 1.0 / 3.0;
  save_csv(dir / "m.csv", m);
  CHECK((load_channel(dir / "m.csv") == m).all());
}

TEST_CASE("integer rasters round trip exactly")
{
  test::TempDir dir;
  PlaneXd m16(5, 6), m8(5, 6);
  for (Index k = 0; k < m16.size(); ++k) {
    m16.data()[k] = static_cast<double>((k * 2731) % 65536);
    m8.data()[k] = static_cast<double>((k * 37) % 256);
  }
  m16(4, 5) = 65535.0;
  m8(4, 5) = 255.0;

  for (auto const *ext : {".png", ".tif", ".tiff"}) {
    CAPTURE(ext);
    auto const p16 = dir / (std::string("w16") + ext);
    auto const p8 = dir / (std::string("w8") + ext);
    if (std::string(ext) == ".png") {
      save_png_gray(p16, m16, 16);
      save_png_gray(p8, m8, 8);
    } else {
      save_tiff_gray(p16, m16, 16);
      save_tiff_gray(p8, m8, 8);
    }
    auto const r16 = load_channel(p16);
    CHECK((r16 == m16).all());
    CHECK(r16.maxCoeff() == 65535.0);
    CHECK(r16.minCoeff() >= 0.0);
    CHECK((load_channel(p8) == m8).all());
  }
}

TEST_CASE("odd-sized tiff with 8-bit data")
{
  test::TempDir dir;
  PlaneXd m(3, 3);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  save_tiff_gray(dir / "o.tif", m, 8);
  CHECK((load_channel(dir / "o.tif") == m).all());
}

TEST_CASE("garbage raster is a format error")
{
  test::TempDir dir;
  test::spit(dir / "g.png", "definitely not a png");
  test::spit(dir / "g.tif", "II*\0garbage");
  CHECK_THROWS_AS(load_channel(dir / "g.png"), FormatError);
  CHECK_THROWS_AS(load_channel(dir / "g.tif"), FormatError);
  test::spit(dir / "g.bmp", "x");
  CHECK_THROWS_AS(load_channel(dir / "g.bmp"), FormatError);
}

TEST_CASE("mask loading")
{
  test::TempDir dir;
  PlaneXd m(2, 2);
  m << 0, 255, 3, 0;
  save_png_gray(dir / "m.png", m, 8);
  MaskX const mask = load_mask(dir / "m.png");
  CHECK(!mask(0, 0));
  CHECK(mask(0, 1));
  CHECK(mask(1, 0));
  CHECK(!mask(1, 1));
}

TEST_CASE("otsu bimodal 50/200")
{
  Eigen::ArrayXd v(100);
  v.head(50).setConstant(50.0);
  v.tail(50).setConstant(200.0);
  auto const res = otsu_threshold(v);
  CHECK(!res.degenerate);
  CHECK(res.threshold > 50.0);
  CHECK(res.threshold < 200.0);
  CHECK(res.threshold == doctest::Approx(otsu_oracle(v)).epsilon(1e-12));
}

TEST_CASE("otsu constant input")
{
  auto const res = otsu_threshold(Eigen::ArrayXd::Constant(20, 7.0));
  CHECK(res.degenerate);
  CHECK(res.threshold == 7.0);
  CHECK_THROWS_AS(otsu_threshold(Eigen::ArrayXd(0)), ParameterError);
}

TEST_CASE("otsu gaussian mixture")
{
  std::mt19937_64 rng(11);
  std::normal_distribution<double> a(30.0, 10.0), b(220.0, 10.0);
  Eigen::ArrayXd v(10000);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = i % 2 ? a(rng) : b(rng);
  double const t = otsu_threshold(v).threshold;
  CHECK(t >= 80.0);
  CHECK(t <= 170.0);
  CHECK(t == doctest::Approx(otsu_oracle(v)).epsilon(1e-12));
}

TEST_CASE("otsu matches exhaustive search on random data")
{
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::gamma_distribution<double> g(1.0 + trial % 5, 10.0);
    Eigen::ArrayXd v(500);
    for (auto &e : v) e = g(rng);
    CHECK(otsu_threshold(v).threshold == doctest::Approx(otsu_oracle(v)).epsilon(1e-12));
  }
}

TEST_CASE("otsu on 2d planes and expressions")
{
  auto img = random_image(20, 30, 9);
  Eigen::ArrayXd flat = Eigen::Map<Eigen::ArrayXd const>(img.x().data(), img.x().size());
  CHECK(otsu_threshold(img.x()).threshold == doctest::Approx(otsu_oracle(flat)));
  CHECK(otsu_threshold(img.x() * 2.0).threshold == doctest::Approx(2.0 * otsu_oracle(flat)));
  auto th = otsu_thresholds(img);
  CHECK(th.t_y == otsu_threshold(img.y()).threshold);
}

TEST_CASE("otsu affine equivariance within one bin")
{
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    auto v = test::uniform_vector(400, rng, 0.0, 50.0);
    v.head(150) += 80.0;
    double const scale = 0.5 + trial, shift = 3.0 * trial;
    double const t0 = otsu_threshold(v).threshold;
    Eigen::ArrayXd const w = scale * v + shift;
    double const t1 = otsu_threshold(w).threshold;
    double const bin = (w.maxCoeff() - w.minCoeff()) / 256.0;
    CHECK(std::abs(t1 - (scale * t0 + shift)) <= bin * (1.0 + 1e-9));
  }
}

TEST_CASE("signal mask examples")
{
  auto img = random_image(6, 6, 1);
  CHECK(signal_mask(img, {-1.0, -1.0}).all());
  double const inf = std::numeric_limits<double>::infinity();
  CHECK(!signal_mask(img, {inf, 0.0}).any());

  PlaneXd x(2, 2), y(2, 2);
  x << 1, 5, 5, 1;
  y << 5, 5, 1, 1;
  MaskX const m = signal_mask(DualChannelImaged(x, y), {2.0, 2.0});
  CHECK(!m(0, 0));
  CHECK(m(0, 1));
  CHECK(!m(1, 0));
  CHECK(!m(1, 1));
}

TEST_CASE("signal mask is monotone in thresholds")
{
  auto img = random_image(25, 25, 2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    Thresholds lo{u(rng), u(rng)};
    Thresholds hi{lo.t_x + u(rng) / 4, lo.t_y + u(rng) / 4};
    MaskX const a = signal_mask(img, lo);
    MaskX const b = signal_mask(img, hi);
    CHECK(!(b && !a).any());
  }
}
