#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>

#include "sylblend/error.hpp"
#include "sylblend/matrix.hpp"
#include "sylblend/rng.hpp"

using namespace sylblend;

TEST_CASE("rng is reproducible and in range") {
  Rng a(5), b(5), c(6);
  std::size_t same = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    same += x == c.next();
  }
  CHECK(same == 0);

  Rng r(1);
  std::array<std::size_t, 7> counts{};
  double sum = 0, sq = 0;
  for (int i = 0; i < 70000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double w = r.uniform_closed();
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
    ++counts[r.index(7)];
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  for (auto n : counts) CHECK(std::abs(static_cast<double>(n) - 10000.0) < 500);
  CHECK(std::abs(sum / 70000) < 0.02);
  CHECK(std::abs(sq / 70000 - 1.0) < 0.03);
}

TEST_CASE("derived seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(s, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(3, 4) == derive_seed(3, 4));
}

TEST_CASE("shuffle is a permutation") {
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  Rng r(9);
  r.shuffle(v.begin(), v.end());
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) CHECK(sorted[i] == i);
  std::vector<int> id(100);
  std::iota(id.begin(), id.end(), 0);
  CHECK(v != id);
}

TEST_CASE("feature matrix basics") {
  FeatureMatrix m{{1, 2}, {3, 4}, {5, 6}};
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m(2, 1) == 6);
  const std::size_t pick[2] = {2, 0};
  const auto s = m.select_rows(pick);
  CHECK(s == FeatureMatrix{{5, 6}, {1, 2}});
  auto e = FeatureMatrix::with_columns(2);
  e.push_row(std::vector<double>{7, 8});
  CHECK(e.rows() == 1);
  CHECK_THROWS_AS(e.push_row(std::vector<double>{1}), Error);
  CHECK(select_labels({1, 0, 1}, pick) == Labels{1, 1});
}

TEST_CASE("partition_rows") {
  Labels y;
  for (int i = 0; i < 70; ++i) y.push_back(1);
  for (int i = 0; i < 30; ++i) y.push_back(0);
  const auto p = partition_rows(y, 0.25, true, 3);
  std::vector<std::size_t> all = p.kept;
  all.insert(all.end(), p.held_out.begin(), p.held_out.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);
  std::size_t held1 = 0;
  for (auto i : p.held_out) held1 += y[i];
  CHECK(held1 == 18);
  CHECK(p.held_out.size() - held1 == 8);

  // at least one row per class stays on each side
  const auto tiny = partition_rows({0, 0, 1, 1, 1, 1, 1, 1, 1, 1}, 0.05, true, 1);
  std::size_t held0 = 0;
  for (auto i : tiny.held_out) held0 += i < 2;
  CHECK(held0 == 1);

  CHECK_THROWS_AS(partition_rows(y, 0.0, true, 1), Error);
  CHECK_THROWS_AS(partition_rows({0, 1, 1}, 0.5, true, 1), Error);
  CHECK(partition_rows(y, 0.3, true, 8).held_out == partition_rows(y, 0.3, true, 8).held_out);
}

TEST_CASE("error formatting") {
  const Error e(ErrorCode::ParseError, "bad number", 4);
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(e.line() == 4u);
  CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  CHECK(to_string(ErrorCode::BandTooNarrow) == "BandTooNarrow");
}
