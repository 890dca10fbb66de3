#include <gtest/gtest.h>

#include <cmath>

#include "diracwalk/experiment.hpp"

using namespace dqw;

namespace {

std::vector<XY> law(const std::vector<double>& ns, double (*f)(double)) {
  std::vector<XY> out;
  for (double n : ns) out.push_back({n, f(n)});
  return out;
}

}  // namespace

TEST(FitPowerLaw, ExactSquareRoot) {
  const auto r = fit_power_law(law({100, 400, 1600}, [](double n) { return 2.0 * std::sqrt(n); }));
  EXPECT_NEAR(r.a, 2.0, 1e-12);
  EXPECT_NEAR(r.gamma, 0.5, 1e-12);
  EXPECT_NEAR(r.residual, 0.0, 1e-12);
}

TEST(FitPowerLaw, Constant) {
  const auto r = fit_power_law(law({10, 20, 40, 80}, [](double) { return 7.0; }));
  EXPECT_NEAR(r.gamma, 0.0, 1e-12);
  EXPECT_NEAR(r.a, 7.0, 1e-12);
}

TEST(FitPowerLaw, RecoversSyntheticParameters) {
  for (double a : {0.3, 1.7, 12.0})
    for (double g : {-0.4, 0.5, 1.3}) {
      std::vector<XY> pts;
      for (double n : {50.0, 120.0, 999.0, 4000.0, 7777.0}) pts.push_back({n, a * std::pow(n, g)});
      const auto r = fit_power_law(pts);
      EXPECT_NEAR(r.a / a, 1.0, 1e-10);
      EXPECT_NEAR(r.gamma, g, 1e-10);
    }
}

TEST(FitPowerLaw, StandardErrorsMatchTextbook) {
  // Noisy line in log space; compare with the closed-form OLS errors.
  const std::vector<XY> pts{{100, 21}, {200, 27}, {400, 41}, {800, 55}, {1600, 83}};
  const auto r = fit_power_law(pts);
  double mx = 0;
  for (const auto& p : pts) mx += std::log(p.x) / 5.0;
  double sxx = 0, ssr = 0;
  for (const auto& p : pts) sxx += std::pow(std::log(p.x) - mx, 2);
  for (const auto& p : pts) ssr += std::pow(std::log(p.y) - std::log(r.a) - r.gamma * std::log(p.x), 2);
  EXPECT_NEAR(r.se_gamma, std::sqrt(ssr / 3.0 / sxx), 1e-12);
  EXPECT_NEAR(r.residual, std::sqrt(ssr / 5.0), 1e-12);
}

TEST(FitPowerLaw, Errors) {
  EXPECT_THROW(fit_power_law({{1, 1}, {2, 2}}), ValidationError);
  EXPECT_THROW(fit_power_law({{1, 1}, {2, -2}, {3, 3}}), ValidationError);
  EXPECT_THROW(fit_power_law({{5, 1}, {5, 2}, {5, 3}}), ValidationError);
}

TEST(FitLogInverse, ExactLaw) {
  const auto r = fit_log_inverse(law({100, 400, 1600, 6400}, [](double n) { return 3.0 / std::log(n); }));
  EXPECT_NEAR(r.b, 3.0, 1e-12);
  EXPECT_NEAR(r.residual, 0.0, 1e-12);
  EXPECT_FALSE(r.crossover_flag);
  EXPECT_FALSE(r.tail);
}

TEST(FitLogInverse, OneOverNFlagsCrossover) {
  const auto r = fit_log_inverse(law({100, 200, 400, 800, 1600, 3200}, [](double n) { return 1.0 / n; }));
  EXPECT_TRUE(r.crossover_flag);
  EXPECT_LT(r.residual_c * 100.0, r.residual);
  EXPECT_NEAR(r.c, 1.0, 1e-12);
  ASSERT_TRUE(r.tail);
}

TEST(FitLogInverse, TailUsesLargestHalfDecade) {
  // 1/N at small N, 2/ln N at large N: the tail refit recovers b = 2.
  std::vector<XY> pts;
  for (double n : {10.0, 20.0, 40.0, 1e5, 2e5, 3e5})
    pts.push_back({n, n < 100 ? 1.0 / n : 2.0 / std::log(n)});
  const auto r = fit_log_inverse(pts);
  EXPECT_TRUE(r.crossover_flag);
  ASSERT_TRUE(r.tail);
  EXPECT_NEAR(r.tail->coef, 2.0, 1e-12);
}

TEST(FitLogInverse, Errors) {
  EXPECT_THROW(fit_log_inverse({{4, 0.1}, {16, 0.1}, {64, 0.1}}), ValidationError);
  EXPECT_THROW(fit_log_inverse({{10, 0.1}, {16, 0.1}}), ValidationError);
}

TEST(Stats, CoefficientOfVariation) {
  EXPECT_NEAR(coefficient_of_variation({2.0, 2.0, 2.0}), 0.0, 1e-15);
  EXPECT_NEAR(coefficient_of_variation({1.0, 3.0}), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(Sizes, GeometricEven) {
  const auto s = geometric_sizes(20, 80, 7);
  EXPECT_EQ(s, (std::vector<int>{20, 26, 32, 40, 50, 64, 80}));
  for (int n : geometric_sizes(5, 37, 9)) EXPECT_EQ(n % 2, 0);
  EXPECT_THROW(geometric_sizes(2, 10, 3), ValidationError);
}

TEST(Placement, EvenlySpacedKeepsDefectsApart) {
  const Torus t{40.0, 40.0};
  for (int k = 1; k <= 6; ++k) {
    const auto c = place_defects(t, k, Placement::EvenlySpaced);
    ASSERT_EQ(c.size(), static_cast<std::size_t>(k));
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b) EXPECT_GE(t.distance(c[a], c[b]), 40.0 / k * 0.99);
  }
  EXPECT_EQ(place_defects(t, 1, Placement::EvenlySpaced)[0], (Vec2{20.0, 20.0}));
  // 4 defects: best stride gives spacing W/2, not the diagonal W/(2 sqrt2)
  const auto four = place_defects(t, 4, Placement::EvenlySpaced);
  double dmin = 1e9;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) dmin = std::min(dmin, t.distance(four[a], four[b]));
  EXPECT_NEAR(dmin, 20.0, 1e-12);
}

TEST(Placement, CentredRowAtMinimumSpacing) {
  const auto c = place_defects(Torus{30.0, 30.0}, 3, Placement::Centred);
  EXPECT_EQ(c[1], (Vec2{15.0, 15.0}));
  EXPECT_NEAR(c[2].x - c[0].x, 2 * kMinDefectSeparation, 1e-12);
}

TEST(Sweep, DeterministicAndIndependentOfJobs) {
  SweepConfig cfg;
  cfg.sizes = {12, 16, 20, 24};
  cfg.masses = {0.0, 0.2};
  cfg.defect_counts = {1, 2};
  const auto a = run_sweep(cfg, 1);
  const auto b = run_sweep(cfg, 3);
  ASSERT_EQ(a.points.size(), 16u);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].n_tiles, b.points[i].n_tiles);
    EXPECT_EQ(a.points[i].peak.t_peak, b.points[i].peak.t_peak);
    EXPECT_EQ(a.points[i].peak.p_peak, b.points[i].peak.p_peak);
  }
  ASSERT_EQ(a.groups.size(), 4u);
  for (std::size_t g = 0; g < a.groups.size(); ++g) {
    ASSERT_EQ(a.groups[g].time_fit.has_value(), b.groups[g].time_fit.has_value());
    if (a.groups[g].time_fit) {
      EXPECT_EQ(a.groups[g].time_fit->gamma, b.groups[g].time_fit->gamma);
    }
  }
}

TEST(Sweep, InvalidPointNamed) {
  SweepConfig cfg;
  cfg.sizes = {8, 12};
  cfg.defect_counts = {3};  // three defects do not fit on an 8x8 torus
  try {
    run_sweep(cfg, 1);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("n=8"), std::string::npos) << e.what();
  }
  cfg.sizes = {12, 8};
  EXPECT_THROW(run_sweep(cfg, 1), ValidationError);
}

TEST(Sweep, FitsReproducibleFromTriples) {
  SweepConfig cfg;
  cfg.sizes = {16, 20, 26, 32};
  const auto r = run_sweep(cfg, 2);
  std::vector<XY> t;
  for (const auto& p : r.points) t.push_back({double(p.n_tiles), double(p.peak.t_peak)});
  ASSERT_TRUE(r.groups[0].time_fit);
  EXPECT_EQ(fit_power_law(t).gamma, r.groups[0].time_fit->gamma);
}
