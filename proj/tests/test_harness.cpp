#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mecrelay/harness.hpp"

using namespace mecrelay;
using namespace mecrelay::harness;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExperimentConfig small(std::size_t drops, std::vector<SchemeId> schemes, std::vector<double> grid) {
  ExperimentConfig c;
  c.seed = 17;
  c.drops = drops;
  c.schemes = std::move(schemes);
  c.tmax_grid = std::move(grid);
  c.workers = 1;
  return c;
}

std::string csv_of(const MetricsTable& t) {
  std::ostringstream os;
  write_metrics_csv(os, t);
  return os.str();
}

DropRecord record(std::vector<std::vector<double>> e) {
  DropRecord r;
  r.energy = std::move(e);
  return r;
}

}  // namespace

TEST_CASE("a guaranteed local success gives probability one") {
  ExperimentConfig c = small(1, {SchemeId::Local}, {1.0});
  c.drop.ranges.ue_speed = {2e9, 2e9};
  c.drop.ranges.data_bits = {0.5e6, 0.5e6};
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.metrics.rows.size() == 1);
  CHECK(r.metrics.rows[0].success_probability == 1.0);
  CHECK(r.metrics.rows[0].success_count == 1);
  CHECK(std::isnan(r.metrics.rows[0].mean_energy_success));
}

TEST_CASE("a deadline below every compute delay fails everything") {
  const ExperimentResult r = run_experiment(small(50, {std::begin(kAllSchemes), std::end(kAllSchemes)}, {0.01}));
  for (const auto& row : r.metrics.rows) {
    CHECK(row.success_count == 0);
    CHECK(row.success_probability == 0.0);
    CHECK(std::isnan(row.mean_energy_success));
    CHECK(std::isnan(row.mean_energy_common));
  }
  CHECK(r.audit_failures == 0);
}

TEST_CASE("common_success_set") {
  const std::vector<std::vector<bool>> flags = {{true, true, false, true, false}, {true, false, false, true, true}};
  CHECK(common_success_set(flags) == std::vector<std::size_t>{0, 3});
  const std::vector<std::vector<bool>> none = {{false, true}, {true, false}};
  CHECK(common_success_set(none).empty());
  const std::vector<std::vector<bool>> one = {{true}};
  CHECK_THROWS_AS(common_success_set(one), std::invalid_argument);
  const std::vector<std::vector<bool>> ragged = {{true}, {true, false}};
  CHECK_THROWS_AS(common_success_set(ragged), std::invalid_argument);
}

TEST_CASE("aggregation over hand-made records") {
  ExperimentConfig c = small(3, {SchemeId::Direct, SchemeId::HDHD, SchemeId::HDFDS}, {0.5});
  const std::vector<DropRecord> recs = {
      record({{1.0, 2.0, 3.0}}),
      record({{kInf, 4.0, 5.0}}),
      record({{6.0, kInf, 7.0}}),
  };
  SUBCASE("common set over the relaying schemes") {
    const MetricsTable t = aggregate(recs, c);
    const MetricsRow& direct = t.find(0.5, SchemeId::Direct);
    CHECK(direct.success_count == 2);
    CHECK(direct.mean_energy_success == doctest::Approx(3.5));
    CHECK(std::isnan(direct.mean_energy_common));  // not a defining scheme
    const MetricsRow& hdfds = t.find(0.5, SchemeId::HDFDS);
    CHECK(hdfds.success_probability == 1.0);
    CHECK(hdfds.common_count == 2);
    CHECK(hdfds.mean_energy_common == doctest::Approx(4.0));
    CHECK(t.find(0.5, SchemeId::HDHD).mean_energy_common == doctest::Approx(3.0));
  }
  SUBCASE("common set that includes direct") {
    c.common_set = CommonSetPolicy::Direct;
    const MetricsTable t = aggregate(recs, c);
    CHECK(t.find(0.5, SchemeId::HDFDS).common_count == 1);
    CHECK(t.find(0.5, SchemeId::HDFDS).mean_energy_common == doctest::Approx(3.0));
    CHECK(t.find(0.5, SchemeId::Direct).mean_energy_common == doctest::Approx(1.0));
  }
  SUBCASE("empty common set leaves NaN") {
    const std::vector<DropRecord> disjoint = {record({{1.0, kInf, 3.0}}), record({{1.0, 2.0, kInf}})};
    const MetricsTable t = aggregate(disjoint, c);
    CHECK(std::isnan(t.find(0.5, SchemeId::HDHD).mean_energy_common));
    CHECK(t.find(0.5, SchemeId::HDHD).common_count == 0);
  }
  CHECK_THROWS_AS(aggregate(recs, c).find(0.7, SchemeId::HDHD), std::out_of_range);
}

TEST_CASE("doubling the drop count keeps the first drops unchanged") {
  const auto schemes = std::vector<SchemeId>{SchemeId::Direct, SchemeId::HDHD, SchemeId::HDFDS};
  const ExperimentResult a = run_experiment(small(40, schemes, {0.3, 0.6}));
  const ExperimentResult b = run_experiment(small(80, schemes, {0.3, 0.6}));
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(a.records[i].index == i);
    CHECK(a.records[i].energy == b.records[i].energy);
  }
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentConfig c = small(60, {std::begin(kAllSchemes), std::end(kAllSchemes)}, {0.2, 0.5, 1.0});
  const std::string one = csv_of(run_experiment(c).metrics);
  c.workers = 4;
  CHECK(csv_of(run_experiment(c).metrics) == one);
  c.workers = 13;
  CHECK(csv_of(run_experiment(c).metrics) == one);
}

TEST_CASE("metrics CSV schema") {
  const ExperimentResult r = run_experiment(small(5, {SchemeId::Local, SchemeId::HDHD}, {0.3, 0.9}));
  std::istringstream in(csv_of(r.metrics));
  std::string line;
  std::getline(in, line);
  CHECK(line == kMetricsSchemaTag);
  std::getline(in, line);
  CHECK(line ==
        "tmax_s,scheme,drop_count,success_count,success_probability,mean_energy_success_j,"
        "mean_energy_common_j,common_count");
  int rows = 0;
  while (std::getline(in, line)) {
    if (rows++ == 0) CHECK(line.rfind("0.29999999999999999,local,5,", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
  }
  CHECK(rows == 4);
}

TEST_CASE("a longer deadline never turns a success into a failure") {
  const std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const ExperimentResult r = run_experiment(small(150, {std::begin(kAllSchemes), std::end(kAllSchemes)}, grid));
  CHECK(r.audit_failures == 0);
  for (const DropRecord& rec : r.records) {
    for (std::size_t s = 0; s < std::size(kAllSchemes); ++s) {
      for (std::size_t t = 1; t < grid.size(); ++t) {
        if (rec.success(t - 1, s)) {
          CHECK(rec.success(t, s));
          CHECK(rec.energy[t][s] <= rec.energy[t - 1][s] * (1 + 1e-9));
        }
      }
    }
  }
}

TEST_CASE("experiment checks") {
  CHECK_THROWS_AS(check(small(0, {SchemeId::HDHD}, {0.5})), std::invalid_argument);
  CHECK_THROWS_AS(check(small(1, {}, {0.5})), std::invalid_argument);
  CHECK_THROWS_AS(check(small(1, {SchemeId::HDHD}, {})), std::invalid_argument);
  CHECK_THROWS_AS(check(small(1, {SchemeId::HDHD}, {0.5, 0.2})), std::invalid_argument);
  CHECK_THROWS_AS(check(small(1, {SchemeId::HDHD}, {-0.5})), std::invalid_argument);
  CHECK(parse_common_set(common_set_token(CommonSetPolicy::Direct)) == CommonSetPolicy::Direct);
  CHECK(parse_common_set("all") == CommonSetPolicy::AllRelaying);
  CHECK_THROWS_AS(parse_common_set("some"), std::invalid_argument);
}
