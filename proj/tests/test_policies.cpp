#include <doctest.h>

#include <cmath>
#include <vector>

#include "cacsim/policies.hpp"

using namespace cacsim;

namespace {

const std::vector<TrafficClass> kClasses = canonical_classes(1.0, 1.0);

NetworkSnapshot snapshot_with_available(int total, int available) {
  // Fill the pool with Type1 calls (one channel each) to reach the target.
  return make_snapshot(total, {total - available, 0, 0}, kClasses);
}

}  // namespace

TEST_CASE("snapshot availability identity is enforced") {
  CHECK_NOTHROW(make_snapshot(10, {1, 2, 1}, kClasses));  // 10 - (1+4+3) = 2
  NetworkSnapshot bad;
  bad.total_channels = 10;
  bad.per_class_active = {1, 2, 1};
  bad.available_channels = 3;
  CHECK_THROWS_AS(bad.validate(kClasses), InvalidParameter);

  NetworkSnapshot overfull;
  overfull.total_channels = 4;
  overfull.per_class_active = {0, 1, 1};
  overfull.available_channels = -1;
  CHECK_THROWS_AS(overfull.validate(kClasses), InvalidParameter);
}

TEST_CASE("threshold tiers admit exactly their class sets") {
  ThresholdPolicy policy({2, 4, 6});

  SUBCASE("below every tier nothing is admitted") {
    const auto snap = snapshot_with_available(12, 0);
    CHECK(policy.probe(snap, kClasses[0]).verdict == Verdict::Reject);
    CHECK(policy.probe(snap, kClasses[1]).verdict == Verdict::Reject);
    CHECK(policy.probe(snap, kClasses[2]).verdict == Verdict::Reject);
  }
  SUBCASE("voice-only tier") {
    const auto snap = snapshot_with_available(12, 3);
    CHECK(policy.probe(snap, kClasses[0]).verdict == Verdict::Admit);
    CHECK(policy.probe(snap, kClasses[1]).verdict == Verdict::Reject);
  }
  SUBCASE("voice-and-web tier") {
    const auto snap = snapshot_with_available(12, 5);
    CHECK(policy.probe(snap, kClasses[0]).verdict == Verdict::Admit);
    CHECK(policy.probe(snap, kClasses[1]).verdict == Verdict::Admit);
    CHECK(policy.probe(snap, kClasses[2]).verdict == Verdict::Reject);
  }
  SUBCASE("open tier admits any class") {
    const auto snap = snapshot_with_available(12, 10);
    CHECK(policy.probe(snap, kClasses[2]).verdict == Verdict::Admit);
  }
}

TEST_CASE("threshold admits carry score one and rejects zero") {
  ThresholdPolicy policy({2, 4, 6});
  const auto snap = snapshot_with_available(12, 10);
  CHECK(policy.probe(snap, kClasses[0]).score == 1.0);
  const auto tight = snapshot_with_available(12, 0);
  CHECK(policy.probe(tight, kClasses[0]).score == 0.0);
}

TEST_CASE("threshold never admits a call that does not fit") {
  // t1 == 0 makes the first tier admit Type1 even at zero availability
  // unless the feasibility clause kicks in.
  ThresholdPolicy policy({0, 1, 2});
  const auto snap = snapshot_with_available(12, 0);
  CHECK(policy.probe(snap, kClasses[0]).verdict == Verdict::Reject);

  ThresholdPolicy spec_policy({2, 4, 6});
  for (int total = 3; total <= 15; ++total)
    for (int available = 0; available <= total; ++available)
      for (const auto& cls : kClasses) {
        const auto decision =
            spec_policy.probe(snapshot_with_available(total, available), cls);
        if (decision.verdict == Verdict::Admit)
          CHECK(available >= cls.channels_required);
      }
}

TEST_CASE("threshold admissible set grows with availability") {
  ThresholdPolicy policy({2, 4, 6});
  for (int available = 0; available < 12; ++available) {
    const auto now = snapshot_with_available(12, available);
    const auto next = snapshot_with_available(12, available + 1);
    for (const auto& cls : kClasses) {
      if (policy.probe(now, cls).verdict == Verdict::Admit)
        CHECK(policy.probe(next, cls).verdict == Verdict::Admit);
    }
  }
}

TEST_CASE("admit_if_fits and reject_all are the two extremes") {
  AdmitIfFitsPolicy greedy;
  RejectAllPolicy never;
  const auto snap = snapshot_with_available(6, 2);
  CHECK(greedy.probe(snap, kClasses[0]).verdict == Verdict::Admit);
  CHECK(greedy.probe(snap, kClasses[1]).verdict == Verdict::Admit);
  CHECK(greedy.probe(snap, kClasses[2]).verdict == Verdict::Reject);  // needs 3
  for (const auto& cls : kClasses)
    CHECK(never.probe(snap, cls).verdict == Verdict::Reject);
}

TEST_CASE("triangular membership with shoulders") {
  const TriangularSet low{0.0, 0.0, 0.5};
  CHECK(low.membership(0.0) == doctest::Approx(1.0));
  CHECK(low.membership(0.25) == doctest::Approx(0.5));
  CHECK(low.membership(0.5) == doctest::Approx(0.0));
  CHECK(low.membership(0.7) == 0.0);

  const TriangularSet high{0.5, 1.0, 1.0};
  CHECK(high.membership(1.0) == doctest::Approx(1.0));
  CHECK(high.membership(0.75) == doctest::Approx(0.5));
  CHECK(high.membership(0.4) == 0.0);

  const TriangularSet mid{0.25, 0.5, 0.75};
  CHECK(mid.membership(0.5) == doctest::Approx(1.0));
  CHECK(mid.membership(0.375) == doctest::Approx(0.5));
}

TEST_CASE("default controller covers the unit interval") {
  FuzzyController controller;
  CHECK_NOTHROW(controller.validate());
  for (int k = 0; k <= 100; ++k) {
    const double x = k / 100.0;
    double cap = 0.0;
    for (const auto& set : controller.capacity_sets)
      cap = std::max(cap, set.membership(x));
    CHECK(cap > 0.0);
  }
}

TEST_CASE("uncovered membership family is rejected") {
  FuzzyController controller;
  controller.capacity_sets[1] = {0.45, 0.5, 0.55};
  controller.capacity_sets[0] = {0.0, 0.0, 0.2};  // leaves (0.2, 0.45) uncovered
  CHECK_THROWS_AS(controller.validate(), InvalidParameter);
}

TEST_CASE("full capacity with small demand is a strong accept") {
  FuzzyPolicy policy;
  const auto snap = snapshot_with_available(12, 12);
  const auto decision = policy.probe(snap, kClasses[0]);  // u = 1, d = 1/3
  CHECK(decision.verdict == Verdict::Admit);
  CHECK(decision.score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero capacity is always rejected with score zero") {
  FuzzyPolicy policy;
  const auto snap = snapshot_with_available(12, 0);
  for (const auto& cls : kClasses) {
    const auto decision = policy.probe(snap, cls);
    CHECK(decision.verdict == Verdict::Reject);
    CHECK(decision.score == doctest::Approx(0.0));
  }
}

TEST_CASE("fuzzy score is non-decreasing in free capacity") {
  FuzzyPolicy policy;
  for (const auto& cls : kClasses) {
    double previous = -1.0;
    for (int staffed = 0; staffed <= 10; ++staffed) {
      // u sweeps 0, 0.1, ..., 1 on a ten-channel pool.
      const auto snap = snapshot_with_available(10, staffed);
      const double score = policy.probe(snap, cls).score;
      CHECK(score >= previous - 1e-12);
      previous = score;
    }
  }
}

TEST_CASE("fuzzy verdict depends only on the normalized pair") {
  FuzzyPolicy policy;
  // Same u = 0.5 at different absolute pool sizes.
  const auto small = snapshot_with_available(6, 3);
  const auto large = snapshot_with_available(30, 15);
  for (const auto& cls : kClasses) {
    const auto a = policy.probe(small, cls);
    const auto b = policy.probe(large, cls);
    CHECK(a.score == doctest::Approx(b.score).epsilon(1e-12));
    // Feasibility can differ only when the demand no longer fits.
    if (cls.channels_required <= 3)
      CHECK((a.verdict == b.verdict));
  }
}

TEST_CASE("fuzzy never admits an infeasible call") {
  FuzzyPolicy policy;
  for (int total = 3; total <= 12; ++total)
    for (int available = 0; available <= total; ++available)
      for (const auto& cls : kClasses) {
        const auto decision =
            policy.probe(snapshot_with_available(total, available), cls);
        if (decision.verdict == Verdict::Admit)
          CHECK(available >= cls.channels_required);
      }
}

TEST_CASE("policy decisions are pure functions of their inputs") {
  ThresholdPolicy threshold({2, 4, 6});
  FuzzyPolicy fuzzy;
  const auto snap = snapshot_with_available(12, 5);
  for (int repeat = 0; repeat < 5; ++repeat) {
    CHECK(threshold.probe(snap, kClasses[1]).verdict ==
          threshold.probe(snap, kClasses[1]).verdict);
    CHECK(fuzzy.probe(snap, kClasses[1]).score ==
          fuzzy.probe(snap, kClasses[1]).score);
  }
}

TEST_CASE("default multi-RAT decision places on the first admitting pool") {
  ThresholdPolicy policy({2, 4, 6});
  const std::vector<NetworkSnapshot> pools{
      snapshot_with_available(6, 0),  // rejects everything
      snapshot_with_available(6, 5),  // admits type1/type2
  };
  const auto outcome = policy.decide_multi(pools, kClasses[1]);
  CHECK(outcome.decision.verdict == Verdict::Admit);
  CHECK(outcome.rat == 1);

  const auto blocked = policy.decide_multi(pools, kClasses[2]);
  CHECK(blocked.decision.verdict == Verdict::Reject);
  CHECK(blocked.rat == -1);
}
