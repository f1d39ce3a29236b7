#include "doctest.h"

#include "selfish_lb/core.hpp"
#include "selfish_lb/rat.hpp"

using namespace slb;

namespace {
std::vector<Rat> rats(std::initializer_list<long> v) { return {v.begin(), v.end()}; }
}  // namespace

TEST_CASE("rat parsing and normal form") {
  CHECK(Rat::parse("6/4") == Rat(3, 2));
  CHECK(Rat::parse("-7").str() == "-7");
  CHECK(Rat::parse("10/5").is_integer());
  CHECK(Rat::from_parts("2", "6").str() == "1/3");
  CHECK_THROWS_AS(Rat::parse("1/0"), InputError);
  CHECK_THROWS_AS(Rat::parse("abc"), InputError);
  CHECK_THROWS_AS(Rat::parse(""), InputError);
  CHECK(Rat::from_double(0.375) == Rat(3, 8));
}

TEST_CASE("rat powers of two") {
  CHECK(Rat::pow2(-3) == Rat(1, 8));
  CHECK(Rat::pow2(10) == Rat(1024));
  CHECK(Rat(17).floor_log2() == 4);
  CHECK(Rat(16).floor_log2() == 4);
  CHECK(Rat(3, 5).floor_log2() == -1);
  CHECK(Rat(1, 8).floor_log2() == -3);
  CHECK(Rat(1, 8).is_pow2());
  CHECK_FALSE(Rat(3).is_pow2());
  // exponent far outside the double range stays exact
  CHECK((Rat::pow2(2000) * Rat::pow2(-2000)) == Rat(1));
}

TEST_CASE("round_speed keeps the largest power of two below") {
  CHECK(round_speed(Rat(17)) == Rat(16));
  CHECK(round_speed(Rat(16)) == Rat(16));
  CHECK(round_speed(Rat(3, 5)) == Rat(1, 2));
  CHECK(round_speed(Rat(7)) == Rat(4));
  CHECK(round_speed(Rat(1, 3)) == Rat(1, 4));
  CHECK_THROWS_AS(round_speed(Rat(0)), InputError);
}

TEST_CASE("level_count is floor(log2 m) + 1") {
  for (std::size_t m = 1; m <= 200; ++m) {
    int expected = 0;
    while ((std::size_t{1} << expected) <= m) ++expected;
    CHECK(level_count(m) == expected);
  }
}

TEST_CASE("levels of the worked example") {
  const LevelStructure lv = build_levels(rats({17, 7, 2, 1, 1, 1, 1, 1}));
  CHECK(lv.K == 4);
  REQUIRE(lv.groups.size() == 4);
  CHECK(lv.group(1) == std::vector<int>{0});
  CHECK(lv.group(2).empty());
  CHECK(lv.group(3) == std::vector<int>{1});
  CHECK(lv.group(4) == std::vector<int>{2});
  CHECK(lv.r(1) == Rat(16));
  CHECK(lv.r(2) == Rat(8));
  CHECK(lv.r(3) == Rat(4));
  CHECK(lv.r(4) == Rat(2));
  // speed-1 machines fail s_bar * m >= s_bar_1 (8 < 16)
  for (int i = 3; i < 8; ++i) {
    CHECK_FALSE(lv.machines[i].active);
    CHECK_FALSE(lv.machines[i].group.has_value());
  }
  CHECK(lv.active_count() == 3);
  CHECK(lv.prefix(3) == std::vector<int>{0, 1});
  CHECK(lv.speed_sum(3) == Rat(20));
  CHECK(lv.speed_sum(4) == Rat(22));
  CHECK(lv.lead() == 0);
}

TEST_CASE("machine exactly at the activity threshold stays active") {
  // s_bar_1 = 8, m = 4: a machine with s_bar = 2 has 2 * 4 = 8 >= 8
  const LevelStructure lv = build_levels(rats({8, 2, 1, 1}));
  CHECK(lv.machines[1].active);
  CHECK_FALSE(lv.machines[2].active);
  CHECK(lv.K == 3);
  CHECK(lv.group(3) == std::vector<int>{1});
}

TEST_CASE("fastest machine need not be first") {
  const LevelStructure lv = build_levels(rats({1, 4, 4}));
  CHECK(lv.group(1) == std::vector<int>{1, 2});
  CHECK(lv.lead() == 1);
  CHECK(lv.top_exponent == 2);
}

TEST_CASE("instance validation") {
  Instance ok{rats({1}), rats({1})};
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS((Instance{{}, rats({1})}.validate()), InputError);
  CHECK_THROWS_AS((Instance{rats({1}), {}}.validate()), InputError);
  CHECK_THROWS_AS((Instance{rats({1, 0}), rats({1})}.validate()), InputError);
  CHECK_THROWS_AS((Instance{rats({1}), rats({-1})}.validate()), InputError);
}
