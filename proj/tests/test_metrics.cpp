#include <cmath>
#include <numeric>

#include <doctest.h>

#include "oranver/errors.hpp"
#include "oranver/metrics.hpp"
#include "oranver/rng.hpp"

using namespace oranver;

namespace {

RequestRecord rec(std::size_t model, double total, double accuracy, double stability) {
  RequestRecord r;
  r.model = model;
  r.total = total;
  r.accuracy = accuracy;
  r.stability = stability;
  return r;
}

// Box-Muller over the library stream; only used to make synthetic samples.
double normal(Rng &rng) {
  const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace

TEST_CASE("objective means") {
  const std::vector<AppClass> classes{AppClass::dApp};
  const std::vector<RequestRecord> trace{rec(0, 10.0, 0.7, 1.0), rec(0, 20.0, 0.7, 1.0)};
  const auto s = objectives(trace, classes);
  CHECK(s.overall.mean_delay_ms == 15.0);
  CHECK(s.overall.mean_accuracy == 0.7);
  CHECK(s.overall.mean_stability == 1.0);
  CHECK(s.overall.requests == 2);
  CHECK(s.per_app_class[0].requests == 2);
  CHECK(s.per_app_class[1].requests == 0);
  CHECK_THROWS_AS(objectives(std::vector<RequestRecord>{}, classes), EmptyTrace);
}

TEST_CASE("request-weighted and model-averaged means differ on unequal counts") {
  const std::vector<AppClass> classes{AppClass::dApp, AppClass::rApp, AppClass::xApp};
  std::vector<RequestRecord> trace;
  for (int i = 0; i < 3; ++i)
    trace.push_back(rec(0, 2.0, 0.8, 0.9));
  trace.push_back(rec(1, 10.0, 0.6, 0.7));
  const auto s = objectives(trace, classes);
  CHECK(s.overall.mean_delay_ms == 16.0 / 4.0);
  CHECK(s.model_averaged.mean_delay_ms == (2.0 + 10.0) / 2.0);
  CHECK(s.model_averaged.mean_accuracy == doctest::Approx((0.8 + 0.6) / 2.0));
  CHECK(s.per_model[2].requests == 0);
  CHECK(s.per_app_class[static_cast<int>(AppClass::rApp)].mean_stability == 0.7);
}

TEST_CASE("accumulator matches the batch computation bit for bit") {
  Rng rng(12);
  const std::vector<AppClass> classes{AppClass::dApp, AppClass::xApp, AppClass::rApp, AppClass::dApp};
  std::vector<RequestRecord> trace;
  for (int i = 0; i < 10000; ++i)
    trace.push_back(rec(static_cast<std::size_t>(rng.uniform_int(0, 3)), rng.exponential(30.0), rng.uniform(),
                        rng.uniform()));
  ObjectiveAccumulator acc(classes);
  for (const auto &r : trace)
    acc.add(r);
  const auto a = acc.finish(), b = objectives(trace, classes);
  CHECK(a.overall.mean_delay_ms == b.overall.mean_delay_ms);
  CHECK(a.model_averaged.mean_stability == b.model_averaged.mean_stability);

  double sum = 0.0;
  for (const auto &r : trace)
    sum += r.total;
  CHECK(a.overall.mean_delay_ms == sum / 10000.0);
}

TEST_CASE("quartiles") {
  const auto s = boxplot({5, 3, 1, 4, 2});
  CHECK(s.median == 3.0);
  CHECK(s.q1 == 2.0);
  CHECK(s.q3 == 4.0);
  CHECK(s.min == 1.0);
  CHECK(s.max == 5.0);
  CHECK(s.whisker_low == 1.0);
  CHECK(s.whisker_high == 5.0);
  CHECK(s.outliers == 0);
  CHECK(s.mean == 3.0);
  CHECK(s.stddev == doctest::Approx(std::sqrt(2.5)));

  const auto one = boxplot({7});
  for (double v : {one.min, one.max, one.q1, one.median, one.q3, one.whisker_low, one.whisker_high, one.mean})
    CHECK(v == 7.0);
  CHECK(one.stddev == 0.0);

  const auto tail = boxplot({1, 2, 3, 4, 100});
  CHECK(tail.whisker_high == 4.0);
  CHECK(tail.outliers == 1);
  CHECK(quantile_sorted(std::vector<double>{0.0, 10.0}, 0.25) == 2.5);
  CHECK_THROWS_AS(boxplot({}), EmptyGroup);
}

TEST_CASE("quartiles are ordered for any sample") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(rng.uniform_int(1, 60)));
    for (auto &x : v)
      x = rng.exponential(5.0);
    const auto s = boxplot(v);
    REQUIRE(s.min <= s.whisker_low);
    REQUIRE(s.whisker_low <= s.q1);
    REQUIRE(s.q1 <= s.median);
    REQUIRE(s.median <= s.q3);
    REQUIRE(s.q3 <= s.whisker_high);
    REQUIRE(s.whisker_high <= s.max);
  }
}

TEST_CASE("Student-t critical values") {
  // Reference values from an independent statistics package.
  CHECK(student_t_critical(0.98, 1) == doctest::Approx(31.82051595375758).epsilon(1e-10));
  CHECK(student_t_critical(0.98, 9) == doctest::Approx(2.821437925025808).epsilon(1e-10));
  CHECK(student_t_critical(0.95, 4) == doctest::Approx(2.7764451051977987).epsilon(1e-10));
}

TEST_CASE("confidence intervals") {
  const std::vector<double> two{10.0, 14.0};
  const auto ci = confidence_interval(two);
  CHECK(ci.mean == 12.0);
  // s = 2*sqrt(2), n = 2: half width = t * s / sqrt(2) = 2 t
  CHECK(ci.half_width == doctest::Approx(2.0 * 31.82051595375758).epsilon(1e-10));
  CHECK(ci.n == 2);
  CHECK(ci.level == 0.98);
  CHECK(ci.lower() == doctest::Approx(12.0 - 63.64103190751516));

  const std::vector<double> same(5, 0.42);
  CHECK(confidence_interval(same).half_width == 0.0);
  CHECK_THROWS_AS(confidence_interval(std::vector<double>{1.0}), TooFewReplications);
  CHECK_THROWS_AS(confidence_interval(std::vector<double>{}), TooFewReplications);
}

TEST_CASE("half width shrinks like one over root n") {
  Rng rng(99);
  std::vector<double> samples(1600);
  for (auto &x : samples)
    x = 5.0 + 2.0 * normal(rng);
  const auto hw = [&](std::size_t n) {
    return confidence_interval(std::span<const double>(samples.data(), n)).half_width;
  };
  const double h100 = hw(100), h400 = hw(400), h1600 = hw(1600);
  CHECK(h400 / h100 == doctest::Approx(0.5).epsilon(0.15));
  CHECK(h1600 / h400 == doctest::Approx(0.5).epsilon(0.15));
  CHECK(h1600 * std::sqrt(1600.0) / student_t_critical(0.98, 1599) == doctest::Approx(2.0).epsilon(0.1));
}
