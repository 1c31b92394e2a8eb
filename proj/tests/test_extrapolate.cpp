#include <cmath>
#include <algorithm>
#include <random>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "renewal_count/compute.hpp"
#include "renewal_count/extrapolate.hpp"

using namespace renewal_count;

TEST(Richardson, FixedPoint) { EXPECT_EQ(richardson_step(0.3, 0.3, 1.7), 0.3); }

TEST(Richardson, ExactForPureSquareError) { EXPECT_NEAR(richardson_step(1.04, 1.01, 2.0), 1.0, 1e-15); }

TEST(Richardson, SyntheticFractionalPower) {
  const double s = 0.42, a = 0.8, h = 0.1, d = 1.6;
  EXPECT_NEAR(richardson_step(s + a * std::pow(h, d), s + a * std::pow(h / 2, d), d), s, 1e-12);
}

TEST(Richardson, RejectsNonPositiveOrder) { EXPECT_THROW(richardson_step(1.0, 1.0, 0.0), DomainError); }

TEST(Richardson, LargerExponentStillReducesError) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ug(0.5, 3.0), ua(-2.0, 2.0), uh(0.01, 0.3);
  for (int i = 0; i < 500; ++i) {
    const double g1 = ug(rng), g2 = g1 + 3.0 * std::abs(ua(rng)), a = ua(rng), h = uh(rng);
    const double coarse = 1.0 + a * std::pow(h, g1), fine = 1.0 + a * std::pow(h / 2, g1);
    EXPECT_LE(std::abs(richardson_step(coarse, fine, g2) - 1.0), std::abs(fine - 1.0) + 1e-15);
  }
}

TEST(Scheme, WeibullExponents) {
  const auto s = ExtrapolationScheme::weibull(0.6);
  EXPECT_EQ(s.first, 1.6);
  EXPECT_EQ(s.second, 2.0);
  EXPECT_EQ(s.third, 2.6);
  EXPECT_EQ(ExtrapolationScheme::for_distribution(DistributionSpec::weibull(1.0, 1.2)), ExtrapolationScheme::weibull(1.2));
  EXPECT_EQ(ExtrapolationScheme::for_distribution(DistributionSpec::gengamma(0.0, 1.0, 0.0)),
            ExtrapolationScheme::classical());
  EXPECT_EQ(ExtrapolationScheme::for_distributions(DistributionSpec::weibull(1.0, 1.2), DistributionSpec::weibull(1.0, 0.7)),
            ExtrapolationScheme::weibull(0.7));
}

TEST(TwoStage, IdenticalInputsUnchanged) {
  ProbabilityVector a{{0.1, 0.2, 0.3}, 1.0, 8, Stage::Raw};
  ProbabilityVector b = a, c = a;
  b.grid_steps = 16;
  c.grid_steps = 32;
  const auto r = weibull_two_stage(a, b, c, 0.8);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.probs[i], a.probs[i], 1e-15);
  EXPECT_EQ(r.stage, Stage::Stage2);
}

TEST(TwoStage, ExactOnTwoTermErrorModel) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ub(0.3, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double beta = ub(rng), s = u(rng), a = u(rng), b = u(rng), h = 0.1;
    auto value = [&](double hh) { return s + a * std::pow(hh, beta + 1) + b * hh * hh; };
    ProbabilityVector v1{{value(h)}, 1.0, 10, Stage::Raw}, v2{{value(h / 2)}, 1.0, 20, Stage::Raw},
        v3{{value(h / 4)}, 1.0, 40, Stage::Raw};
    EXPECT_NEAR(weibull_two_stage(v1, v2, v3, beta).probs[0], s, 1e-13);
  }
}

TEST(TwoStage, ContractErrors) {
  ProbabilityVector a{{0.1, 0.2}, 1.0, 8, Stage::Raw}, b{{0.1, 0.2}, 1.0, 16, Stage::Raw},
      c{{0.1, 0.2}, 1.0, 32, Stage::Raw};
  ProbabilityVector short_c{{0.1}, 1.0, 32, Stage::Raw}, other_t{{0.1, 0.2}, 2.0, 32, Stage::Raw},
      bad_n{{0.1, 0.2}, 1.0, 24, Stage::Raw};
  EXPECT_THROW(weibull_two_stage(a, b, short_c, 1.0), ContractError);
  EXPECT_THROW(weibull_two_stage(a, b, other_t, 1.0), ContractError);
  EXPECT_THROW(weibull_two_stage(a, b, bad_n, 1.0), ContractError);
  EXPECT_NO_THROW(weibull_two_stage(a, b, c, 1.0));
}

TEST(ThirdStage, IdenticalInputsUnchanged) {
  std::vector<ProbabilityVector> v;
  for (std::size_t n = 8; n <= 128; n *= 2) v.push_back({{0.25, 0.5}, 1.0, n, Stage::Raw});
  const auto r = third_stage(v, 1.3);
  EXPECT_NEAR(r.probs[0], 0.25, 1e-15);
  EXPECT_NEAR(r.probs[1], 0.5, 1e-15);
}

TEST(ThirdStage, ExactOnThreeTermErrorModel) {
  const double beta = 0.6, s = 0.3, a = 0.7, b = -0.4, c = 0.9;
  std::vector<ProbabilityVector> v;
  for (std::size_t n = 8; n <= 128; n *= 2) {
    const double h = 1.0 / static_cast<double>(n);
    v.push_back({{s + a * std::pow(h, beta + 1) + b * h * h + c * std::pow(h, beta + 2)}, 1.0, n, Stage::Raw});
  }
  EXPECT_NEAR(third_stage(v, beta).probs[0], s, 1e-14);
}

TEST(Order, SyntheticSquareError) {
  auto f = [](double h) { return 0.7 + 0.3 * h * h; };
  const auto o = estimate_order(f(0.1), f(0.05), f(0.025));
  ASSERT_TRUE(o.ok());
  EXPECT_NEAR(o.order, 2.0, 1e-10);
}

TEST(Order, GuardAndIndeterminate) {
  EXPECT_EQ(estimate_order(0.5, 0.5, 0.5).status, OrderStatus::Converged);
  EXPECT_EQ(estimate_order(0.5, 0.6, 0.5).status, OrderStatus::Indeterminate);
}

TEST(Order, RawWeibullOrders) {
  // median over mid-range m of the raw direct-convolution orders
  for (auto [beta, lo, hi] : {std::tuple{1.2, 1.7, 2.3}, std::tuple{0.6, 1.3, 1.9}}) {
    const auto spec = DistributionSpec::weibull(1.0, beta);
    std::vector<std::vector<double>> runs;
    for (std::size_t n : {24u, 48u, 96u}) runs.push_back(direct::all_probs(spec, 1.0, 10, n).probs);
    std::vector<double> orders;
    for (std::size_t m = 2; m <= 8; ++m) {
      const auto o = estimate_order(runs[0][m], runs[1][m], runs[2][m]);
      if (o.ok()) orders.push_back(o.order);
    }
    ASSERT_GE(orders.size(), 5u);
    std::sort(orders.begin(), orders.end());
    const double median = orders[orders.size() / 2];
    EXPECT_GE(median, lo) << beta;
    EXPECT_LE(median, hi) << beta;
  }
}

TEST(Aitken, GeometricSeries) {
  const auto r = aitken(1.0, 1.5, 1.75);
  EXPECT_FALSE(r.degenerate);
  EXPECT_EQ(r.value, 2.0);
}

TEST(Aitken, Degenerate) {
  const auto r = aitken(0.4, 0.4, 0.4);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.value, 0.4);
}

TEST(Aitken, ComparedWithTwoStage) {
  // Both estimates improve on the finest raw value for P_3 at beta = 0.6.
  const auto spec = DistributionSpec::weibull(1.0, 0.6);
  const double ref = compute_probs(spec, 1.0, 3, {Engine::Direct, Stage::Stage2, 1024}).probs[3];
  std::vector<double> raw;
  for (std::size_t n : {24u, 48u, 96u}) raw.push_back(direct::all_probs(spec, 1.0, 3, n).probs[3]);
  const double stage2 = compute_probs(spec, 1.0, 3, {Engine::Direct, Stage::Stage2, 24}).probs[3];
  const auto a = aitken(raw[0], raw[1], raw[2]);
  ASSERT_FALSE(a.degenerate);
  const double raw_err = std::abs(raw[2] - ref);
  EXPECT_LT(std::abs(a.value - ref), raw_err);
  EXPECT_LT(std::abs(stage2 - ref), raw_err);
  RecordProperty("aitken_error", std::to_string(std::abs(a.value - ref)));
  RecordProperty("two_stage_error", std::to_string(std::abs(stage2 - ref)));
}

TEST(Report, CollectsStagesAndOrders) {
  const auto spec = DistributionSpec::weibull(1.0, 1.1);
  std::vector<ProbabilityVector> raw;
  for (std::size_t n : {24u, 48u, 96u}) raw.push_back(direct::all_probs(spec, 1.0, 6, n));
  const auto r = make_report(raw, ExtrapolationScheme::weibull(1.1));
  EXPECT_EQ(r.scheme.first, 2.1);
  EXPECT_EQ(r.scheme.second, 2.0);
  EXPECT_EQ(r.estimated_orders.size(), 7u);
  EXPECT_EQ(r.stage2.stage, Stage::Stage2);
  const auto direct2 = compute_probs(spec, 1.0, 6, {Engine::Direct, Stage::Stage2, 24});
  for (std::size_t m = 0; m <= 6; ++m) EXPECT_NEAR(r.stage2.probs[m], direct2.probs[m], 1e-15);
}

TEST(Extrapolation, ReducesErrorForLowShape) {
  const auto spec = DistributionSpec::weibull(1.0, 0.3);
  const auto ref = compute_probs(spec, 1.0, 10, {Engine::Direct, Stage::Stage2, 1024});
  const auto raw = direct::all_probs(spec, 1.0, 10, 24);
  const auto ex = compute_probs(spec, 1.0, 10, {Engine::Direct, Stage::Stage2, 24});
  double raw_max = 0, ex_max = 0;
  for (std::size_t m = 0; m <= 10; ++m) {
    raw_max = std::max(raw_max, std::abs(raw.probs[m] / ref.probs[m] - 1));
    ex_max = std::max(ex_max, std::abs(ex.probs[m] / ref.probs[m] - 1));
  }
  EXPECT_LT(ex_max, raw_max);
}
