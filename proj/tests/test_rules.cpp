#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "prophet/rules.hpp"

using prophet::Distribution;
using prophet::Rng;
using prophet::Schedule;
using prophet::TaggedValue;
using prophet::ThresholdPolicy;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("single sample threshold takes the tagged maximum") {
  const std::vector<TaggedValue> samples{{1.0, 0.3}, {4.0, 0.5}, {2.0, 0.9}};
  const ThresholdPolicy policy = prophet::single_sample_threshold(samples);
  REQUIRE(policy.size() == 3);
  for (const auto& t : policy.thresholds) CHECK(t == TaggedValue{4.0, 0.5});

  const std::vector<TaggedValue> one{{2.0, 0.7}};
  CHECK(prophet::single_sample_threshold(one).thresholds[0] == TaggedValue{2.0, 0.7});

  const std::vector<TaggedValue> tied{{3.0, 0.1}, {3.0, 0.8}};
  CHECK(prophet::single_sample_threshold(tied).thresholds[0] == TaggedValue{3.0, 0.8});

  CHECK_THROWS_AS(prophet::single_sample_threshold(std::vector<TaggedValue>{}),
                  std::invalid_argument);
}

TEST_CASE("run_policy accepts the first strict exceedance") {
  const ThresholdPolicy constant{{{4.0, 0.5}, {4.0, 0.5}, {4.0, 0.5}}};
  const std::vector<TaggedValue> realized{{3.0, 0.1}, {5.0, 0.1}, {6.0, 0.1}};
  const auto out = prophet::run_policy(constant, realized);
  CHECK(out.reward == 5.0);
  REQUIRE(out.stop_index.has_value());
  CHECK(*out.stop_index == 1);

  const ThresholdPolicy high{{{9.0, 0.5}, {9.0, 0.5}, {9.0, 0.5}}};
  const auto none = prophet::run_policy(high, realized);
  CHECK(none.reward == 0.0);
  CHECK_FALSE(none.stop_index.has_value());

  const ThresholdPolicy clipped{{TaggedValue::never(), {1.0, 0.0}}};
  const std::vector<TaggedValue> seq{{9.0, 0.2}, {2.0, 0.2}};
  const auto skip = prophet::run_policy(clipped, seq);
  CHECK(skip.reward == 2.0);
  CHECK(*skip.stop_index == 1);

  CHECK_THROWS_AS(prophet::run_policy(high, seq), std::invalid_argument);
}

TEST_CASE("schedule construction and clipping") {
  const Schedule s = prophet::make_constant_schedule(4, 1.0, 0.5);
  CHECK(s.p == std::vector<double>{0.25, 0.25, 0.25, 0.25});

  CHECK(prophet::make_constant_schedule(2, 1.0, 0.5).delta == 0.125);

  CHECK_THROWS_AS(prophet::make_schedule({0.5, 0.2}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(prophet::make_schedule({0.5, 1.2}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(prophet::make_schedule({0.5}, 1.5), std::invalid_argument);

  // delta = 0.2^2 / 2 = 0.02
  const Schedule raw = prophet::make_schedule({0.01, 0.3}, 0.2);
  CHECK(prophet::clip_schedule(raw).p == std::vector<double>{0.0, 0.3});

  const Schedule untouched = prophet::make_schedule({0.3, 0.4}, 0.2);
  CHECK(prophet::clip_schedule(untouched).p == untouched.p);

  // Boundary p_i = delta is clipped.
  const Schedule boundary = prophet::make_schedule({0.02, 0.02}, 0.2);
  CHECK(prophet::clip_schedule(boundary).p == std::vector<double>{0.0, 0.0});
}

TEST_CASE("schedule files load ascending probabilities") {
  const auto good = write_temp("sched_good.txt", "0.1\n0.2\n# comment\n0.9\n");
  const Schedule s = prophet::load_schedule_file(good.string(), 0.5);
  CHECK(s.p == std::vector<double>{0.1, 0.2, 0.9});

  const auto bad = write_temp("sched_bad.txt", "0.5\n0.2\n");
  CHECK_THROWS_AS(prophet::load_schedule_file(bad.string(), 0.5), std::invalid_argument);

  const auto wrong_n = write_temp("sched_n.txt", "0.1\n0.2\n");
  CHECK_THROWS_AS(prophet::load_schedule_file(wrong_n.string(), 0.5, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(prophet::load_schedule_file("/nonexistent/sched.txt", 0.5),
                  std::runtime_error);
}

TEST_CASE("explicit policy takes upper quantiles, NEVER on clipped steps") {
  const auto uniform = Distribution::uniform(0.0, 1.0);
  const auto p1 = prophet::explicit_cfhov_policy(uniform, prophet::make_schedule({0.5, 1.0}, 0.5));
  CHECK(p1.thresholds[0].value == Catch::Approx(0.5).margin(1e-15));
  CHECK(p1.thresholds[1].value == Catch::Approx(0.0).margin(1e-15));

  Schedule clipped = prophet::make_schedule({0.0, 0.5}, 0.5);
  const auto p2 = prophet::explicit_cfhov_policy(uniform, clipped);
  CHECK(p2.thresholds[0].is_never());
  CHECK(p2.thresholds[1].value == Catch::Approx(0.5).margin(1e-15));

  const auto coin = Distribution::finite_discrete({0.0, 1.0}, {0.5, 0.5});
  const auto p3 = prophet::explicit_cfhov_policy(coin, prophet::make_schedule({0.25}, 0.5));
  CHECK(p3.thresholds[0] == TaggedValue{1.0, 0.5});
}

TEST_CASE("monotone schedules give non-increasing tagged thresholds") {
  Rng rng(4242);
  const std::vector<Distribution> families{
      Distribution::uniform(0.0, 1.0), Distribution::exponential(0.7),
      Distribution::finite_discrete({0.0, 1.0, 2.0}, {0.2, 0.5, 0.3})};
  for (const auto& d : families) {
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> p(8);
      for (auto& x : p) x = rng.uniform01();
      std::sort(p.begin(), p.end());
      const auto policy = prophet::explicit_cfhov_policy(d, prophet::make_schedule(p, 0.3));
      for (std::size_t i = 0; i + 1 < policy.size(); ++i)
        CHECK(policy.thresholds[i] >= policy.thresholds[i + 1]);
    }
  }
}

TEST_CASE("baseline thresholds: median of max and half expected max") {
  const auto u = Distribution::uniform(0.0, 1.0);
  const auto med1 = prophet::baseline_policy(prophet::BaselineKind::median_of_max,
                                             prophet::make_iid(u, 1));
  CHECK(med1.thresholds[0].value == Catch::Approx(0.5).margin(1e-9));

  const auto med2 = prophet::baseline_policy(prophet::BaselineKind::median_of_max,
                                             prophet::make_iid(u, 2));
  CHECK(med2.thresholds[0].value == Catch::Approx(std::sqrt(0.5)).margin(1e-9));

  const auto half = prophet::baseline_policy(
      prophet::BaselineKind::half_expected_max,
      prophet::make_iid(Distribution::point_mass(1.0), 1));
  CHECK(half.thresholds[0].value == 0.5);
}

TEST_CASE("explicit policy acceptance frequencies match p_i") {
  // Fresh draws per step; 4 standard errors at 1e6 draws per step.
  const std::uint64_t trials = 1000000;
  const std::vector<Distribution> families{
      Distribution::uniform(0.0, 1.0),
      Distribution::finite_discrete({0.0, 1.0, 2.0}, {0.2, 0.5, 0.3})};
  const Schedule s = prophet::make_schedule({0.1, 0.4, 0.9}, 0.3);
  for (const auto& d : families) {
    const auto policy = prophet::explicit_cfhov_policy(d, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      Rng rng(1000 + i);
      std::uint64_t hits = 0;
      for (std::uint64_t k = 0; k < trials; ++k)
        if (d.draw(rng) > policy.thresholds[i]) ++hits;
      const double freq = static_cast<double>(hits) / static_cast<double>(trials);
      const double se = std::sqrt(s.p[i] * (1.0 - s.p[i]) / static_cast<double>(trials));
      CHECK(std::abs(freq - s.p[i]) <= 4.0 * se);
    }
  }
}
