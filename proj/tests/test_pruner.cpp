#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "robusched/pruner.hpp"

using namespace robusched;

TEST_CASE("oversubscription level update") {
  PrunerState s;
  s.lambda = 1.0;
  s.level = 7.5;
  CHECK(update_oversubscription(s, 3).level == 3.0);

  s.lambda = 0.9;
  s.level = 2.0;
  CHECK(update_oversubscription(s, 0).level == doctest::Approx(0.2));
}

TEST_CASE("Schmitt trigger trace") {
  PrunerState s;  // on 1.0, off 0.8
  s.lambda = 1.0;
  s = update_oversubscription(s, 0);
  CHECK_FALSE(s.dropping_engaged);
  s = update_oversubscription(s, 1);  // reaches on exactly
  CHECK(s.dropping_engaged);
  s.level = 0.95;
  s.lambda = 0.5;
  s = update_oversubscription(s, 1);  // 0.975, inside the band
  CHECK(s.dropping_engaged);
  s.level = 1.8;
  s = update_oversubscription(s, 0);  // 0.9
  CHECK(s.level == doctest::Approx(0.9));
  CHECK(s.dropping_engaged);
  s = update_oversubscription(s, 0);  // 0.45 <= off
  CHECK_FALSE(s.dropping_engaged);
  s.level = 0.8;
  s.lambda = 1e-9;
  s = update_oversubscription(s, 1);  // just above 0.8, still inside
  CHECK_FALSE(s.dropping_engaged);
}

TEST_CASE("level confined to the band never toggles") {
  for (bool start_engaged : {false, true}) {
    PrunerState s;
    s.lambda = 0.1;
    s.level = 0.9;
    s.dropping_engaged = start_engaged;
    int toggles = 0;
    for (int k = 0; k < 10000; ++k) {
      const int mu = s.level < 0.9 ? 1 : 0;
      const bool before = s.dropping_engaged;
      s = update_oversubscription(s, mu);
      REQUIRE(s.level > s.trigger_off);
      REQUIRE(s.level < s.trigger_on);
      toggles += s.dropping_engaged != before;
    }
    CHECK(toggles == 0);
  }
}

TEST_CASE("pruner validation") {
  PrunerState s;
  CHECK_NOTHROW(s.validate());
  s.trigger_off = s.trigger_on;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.base_drop_threshold = 0.95;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.lambda = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("adjusted drop threshold") {
  PrunerState s;
  CHECK(adjusted_drop_threshold(s, 0.0, 0) == 0.5);
  CHECK(adjusted_drop_threshold(s, 0.0, 4) == 0.5);
  CHECK(adjusted_drop_threshold(s, -1.0, 0) == doctest::Approx(0.6));
  CHECK(adjusted_drop_threshold(s, 1.0, 1) == doctest::Approx(0.45));
  s.base_drop_threshold = 0.98;
  CHECK(adjusted_drop_threshold(s, -1.0, 0) == 1.0);

  s = {};
  for (double skew = -1.0; skew <= 1.0; skew += 0.25) {
    for (int k = 0; k < 6; ++k) {
      const double here = adjusted_drop_threshold(s, skew, k);
      const double next = adjusted_drop_threshold(s, skew, k + 1);
      if (skew < 0) CHECK(next <= here);
      if (skew > 0) CHECK(next >= here);
      CHECK(std::abs(here - 0.5) >= std::abs(next - 0.5));
    }
  }
  s.rho = 0.0;
  for (double skew : {-1.0, -0.3, 0.7, 1.0}) CHECK(adjusted_drop_threshold(s, skew, 2) == 0.5);
}

TEST_CASE("defer boundary") {
  CHECK_FALSE(should_defer(0.95, 0.90));
  CHECK_FALSE(should_defer(0.90, 0.90));
  CHECK(should_defer(0.10, 0.90));
}

namespace {

const PetMatrix& two_type_pet() {
  static const PetMatrix pet = fixture::pet_of({
      {Pmf::from_impulses({{1, 0.5}, {9, 0.5}})},
      {Pmf::from_impulses({{2, 0.5}, {4, 0.5}})},
  });
  return pet;
}

}  // namespace

TEST_CASE("drop pass boundary and trivial cases") {
  const PrunerState s;
  SUBCASE("robustness equal to the threshold drops") {
    std::vector<MachineQueue> qs{{0, std::nullopt, {{1, 0, 5}}}};
    const auto d = drop_pass(qs, two_type_pet(), s, 0);
    REQUIRE(d.size() == 1);
    CHECK(d[0].robustness == 0.5);
    CHECK(d[0].threshold == 0.5);
    CHECK(qs[0].tasks.empty());
  }
  SUBCASE("certain tasks stay") {
    std::vector<MachineQueue> qs{{0, std::nullopt, {{1, 1, 100}, {2, 1, 200}, {3, 0, 300}}}};
    CHECK(drop_pass(qs, two_type_pet(), s, 0).empty());
    CHECK(qs[0].tasks.size() == 3);
  }
  SUBCASE("hopeless executing head is dropped and its successor gains") {
    // The head can only finish at 9, past its deadline of 5.
    MachineQueue q{0, Time{0}, {{1, 0, 5}, {2, 1, 7}}};
    const auto before = queue_pcts(q, two_type_pet(), DropScenario::evict, 2);
    CHECK(robustness(before[0], 5) == 0.0);
    std::vector<MachineQueue> qs{q};
    const auto d = drop_pass(qs, two_type_pet(), s, 2);
    REQUIRE(d.size() == 1);
    CHECK(d[0].id == 1);
    CHECK(d[0].was_executing);
    CHECK_FALSE(qs[0].exec_start.has_value());
    REQUIRE(qs[0].tasks.size() == 1);
    const auto after = queue_pcts(qs[0], two_type_pet(), DropScenario::evict, 2);
    CHECK(robustness(after[0], 7) > robustness(before[1], 7));
  }
}

TEST_CASE("drop pass leaves only tasks above their threshold") {
  std::mt19937_64 rng(8);
  std::vector<std::vector<Pmf>> cells(3);
  for (auto& row : cells)
    for (int j = 0; j < 2; ++j) row.push_back(oracle::random_pmf(rng, 8, 1, 30));
  const PetMatrix pet = fixture::pet_of(cells);
  for (int k = 0; k < 300; ++k) {
    std::vector<MachineQueue> qs;
    for (int j = 0; j < 2; ++j) {
      MachineQueue q{j, std::nullopt, {}};
      if (rng() % 2) q.exec_start = static_cast<Time>(rng() % 10);
      const int n = static_cast<int>(rng() % 6);
      for (int i = 0; i < n; ++i)
        q.tasks.push_back({j * 10 + i, static_cast<int>(rng() % 3), 10 + static_cast<Time>(rng() % 80)});
      if (q.tasks.empty()) q.exec_start.reset();
      qs.push_back(q);
    }
    PrunerState s;
    s.base_drop_threshold = 0.1 * static_cast<double>(rng() % 8);
    const Time now = 10;
    const auto original = qs;
    const auto dropped = drop_pass(qs, pet, s, now);
    std::size_t total = 0;
    for (std::size_t j = 0; j < qs.size(); ++j) {
      total += original[j].tasks.size();
      const auto pcts = queue_pcts(qs[j], pet, DropScenario::evict, now);
      for (std::size_t i = 0; i < pcts.size(); ++i) {
        const double thr = adjusted_drop_threshold(s, skewness(pcts[i].release_view()), static_cast<int>(i));
        CHECK(robustness(pcts[i], qs[j].tasks[i].deadline) > thr);
      }
      if (!original[j].tasks.empty() && !qs[j].tasks.empty() && qs[j].tasks[0] == original[j].tasks[0])
        CHECK(qs[j].exec_start == original[j].exec_start);
    }
    std::size_t left = 0;
    for (const auto& q : qs) left += q.tasks.size();
    CHECK(left + dropped.size() == total);
  }
}

TEST_CASE("removing a task never hurts the tasks behind it") {
  std::mt19937_64 rng(12);
  for (auto scenario : {DropScenario::no_drop, DropScenario::evict}) {
    for (int k = 0; k < 300; ++k) {
      std::vector<std::vector<Pmf>> cells(4);
      for (auto& row : cells) row.push_back(oracle::random_pmf(rng, 8, 1, 25));
      const PetMatrix pet = fixture::pet_of(cells);
      MachineQueue q{0, std::nullopt, {}};
      const int n = 2 + static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) q.tasks.push_back({i, i % 4, 5 + static_cast<Time>(rng() % 90)});
      const auto full = queue_pcts(q, pet, scenario, 0);
      const auto gone = static_cast<std::size_t>(rng() % static_cast<unsigned>(n));
      MachineQueue shorter = q;
      shorter.tasks.erase(shorter.tasks.begin() + static_cast<long>(gone));
      const auto cut = queue_pcts(shorter, pet, scenario, 0);
      for (std::size_t i = gone; i < cut.size(); ++i) {
        const Time d = shorter.tasks[i].deadline;
        CHECK(robustness(cut[i], d) >= robustness(full[i + 1], d) - 1e-12);
      }
    }
  }
}
