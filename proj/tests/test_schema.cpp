#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "cascade/dataset.hpp"
#include "cascade/errors.hpp"
#include "cascade/schema.hpp"
#include "test_support.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("schema domain size is the product of cardinalities") {
  const auto s = testing::make_schema({{"a", 7}, {"b", 4}, {"c", 6}, {"d", 3}});
  CHECK(s->domain_size() == 504);
}

TEST_CASE("single 100-category feature is a valid schema") {
  const auto s = testing::make_schema({{"x", 100}});
  CHECK(s->domain_size() == 100);
  CHECK(s->cardinality(0) == 100);
}

TEST_CASE("schema rejects degenerate and duplicate features") {
  CHECK_THROWS_AS(Schema({{"a", {"only"}, false}}), DataError);
  CHECK_THROWS_AS(Schema({{"a", {"1", "2"}, false}, {"a", {"1", "2"}, false}}), DataError);
  CHECK_THROWS_AS(Schema({{"a", {"1", "1"}, false}}), DataError);
}

TEST_CASE("schema rejects domain-size overflow") {
  std::vector<FeatureSpec> feats;
  for (int i = 0; i < 11; ++i) {
    FeatureSpec f;
    f.name = "f" + std::to_string(i);
    for (int v = 0; v < 64; ++v) f.categories.push_back(std::to_string(v));
    feats.push_back(std::move(f));
  }
  // 64^11 = 2^66 does not fit.
  CHECK_THROWS_AS(Schema(std::move(feats)), DataError);
}

TEST_CASE("schema JSON round trip") {
  const auto p = write_temp("schema_rt.json", R"({"features":[
    {"name":"color","categories":["red","green","blue"],"ordinal":false},
    {"name":"size","categories":["s","m","l"],"ordinal":true}]})");
  const auto s = Schema::load(p);
  CHECK(s->feature_count() == 2);
  CHECK(s->feature(1).ordinal);
  CHECK(Schema::from_json(s->to_json()) == *s);
  CHECK_THROWS_AS(Schema::load(write_temp("bad.json", "{nope")), DataError);
}

TEST_CASE("csv ingestion maps labels to indices") {
  const auto s = testing::make_schema({{"a", 2}, {"b", 3}});
  const auto p = write_temp("ok.csv", "b,a\n1,2\n3,1\n");
  const Dataset d = Dataset::ingest_csv(p, s);
  REQUIRE(d.size() == 2);
  CHECK(d.row(0) == Point{1, 0});  // a=2, b=1
  CHECK(d.row(1) == Point{0, 2});
}

TEST_CASE("csv errors: unknown value names the row, empty file rejected") {
  const auto s = testing::make_schema({{"a", 2}});
  CHECK_THROWS_WITH_AS(Dataset::ingest_csv(write_temp("badval.csv", "a\n9\n"), s),
                       doctest::Contains("row 1"), DataError);
  CHECK_THROWS_WITH_AS(Dataset::ingest_csv(write_temp("hdr.csv", "a\n"), s),
                       doctest::Contains("empty dataset"), DataError);
  CHECK_THROWS_AS(Dataset::ingest_csv(write_temp("col.csv", "zzz\n1\n"), s), DataError);
}

TEST_CASE("csv round trip preserves indices") {
  const auto s = testing::make_schema({{"a", 3}, {"b", 4}});
  const Dataset d = testing::random_dataset(s, 50, 7);
  const auto p = fs::temp_directory_path() / "roundtrip.csv";
  d.write_csv(p);
  const Dataset back = Dataset::ingest_csv(p, s);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(back.row(i) == d.row(i));
}

TEST_CASE("split sizes follow the floor rule") {
  const auto s = testing::make_schema({{"a", 4}});
  {
    const Dataset d = testing::random_dataset(s, 1000, 1);
    const auto [tr, te] = d.split(0.5, 3);
    CHECK(tr.size() == 500);
    CHECK(te.size() == 500);
  }
  {
    const Dataset d = testing::random_dataset(s, 2201, 1);
    const auto [tr, te] = d.split(0.5, 3);
    CHECK(tr.size() == 1100);
    CHECK(te.size() == 1101);
  }
}

TEST_CASE("split is deterministic in the seed") {
  const auto s = testing::make_schema({{"a", 5}, {"b", 2}});
  const Dataset d = testing::random_dataset(s, 101, 2);
  const auto [a1, b1] = d.split(0.3, 42);
  const auto [a2, b2] = d.split(0.3, 42);
  CHECK(a1.rows() == a2.rows());
  CHECK(b1.rows() == b2.rows());
  const auto [a3, b3] = d.split(0.3, 43);
  CHECK(a1.rows() != a3.rows());
}

TEST_CASE("split parts are disjoint and exhaustive for many seeds") {
  const auto s = testing::make_schema({{"a", 6}});
  const Dataset d = testing::random_dataset(s, 97, 5);
  auto key = [](const std::vector<Point>& rows) {
    std::multiset<Point> ms(rows.begin(), rows.end());
    return ms;
  };
  const auto whole = key(d.rows());
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto [a, b] = d.split(0.37, seed);
    auto merged = a.rows();
    merged.insert(merged.end(), b.rows().begin(), b.rows().end());
    CHECK(key(merged) == whole);
    CHECK(a.size() + b.size() == d.size());
  }
}

TEST_CASE("split rejects singleton datasets") {
  const auto s = testing::make_schema({{"a", 2}});
  const Dataset d(s, {{0}});
  CHECK_THROWS_AS(d.split(0.5, 0), DataError);
}
