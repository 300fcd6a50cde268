#include "cacsim/policies.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace cacsim {

void NetworkSnapshot::validate(const std::vector<TrafficClass>& classes) const {
  if (total_channels < 1)
    throw InvalidParameter("NetworkSnapshot: total_channels must be positive");
  if (per_class_active.size() != classes.size())
    throw InvalidParameter("NetworkSnapshot: per-class count mismatch");
  int occupied = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (per_class_active[i] < 0)
      throw InvalidParameter("NetworkSnapshot: negative active-call count");
    occupied += per_class_active[i] * classes[i].channels_required;
  }
  if (available_channels != total_channels - occupied)
    throw InvalidParameter(
        "NetworkSnapshot: available != total - sum(active * demand)");
  if (available_channels < 0)
    throw InvalidParameter("NetworkSnapshot: occupancy exceeds capacity");
}

NetworkSnapshot make_snapshot(int total_channels, std::vector<int> per_class_active,
                              const std::vector<TrafficClass>& classes) {
  NetworkSnapshot snap;
  snap.total_channels = total_channels;
  snap.per_class_active = std::move(per_class_active);
  int occupied = 0;
  for (std::size_t i = 0; i < classes.size(); ++i)
    occupied += snap.per_class_active[i] * classes[i].channels_required;
  snap.available_channels = total_channels - occupied;
  snap.validate(classes);
  return snap;
}

MultiRatDecision AdmissionPolicy::decide_multi(std::span<const NetworkSnapshot> pools,
                                               const TrafficClass& cls) {
  if (pools.empty())
    throw InvalidParameter("decide_multi: at least one pool snapshot required");
  for (std::size_t r = 0; r < pools.size(); ++r) {
    const AdmissionDecision d = decide(pools[r], cls);
    if (d.verdict == Verdict::Admit) return {d, static_cast<int>(r)};
  }
  return {{Verdict::Reject, 0.0}, -1};
}

AdmissionDecision ThresholdPolicy::probe(const NetworkSnapshot& snapshot,
                                         const TrafficClass& cls) const {
  const int available = snapshot.available_channels;
  bool tier_admits = false;
  if (available < thresholds_.t1) {
    tier_admits = false;
  } else if (available < thresholds_.t2) {
    tier_admits = cls.id == ClassId::Type1Conversational;
  } else if (available < thresholds_.t3) {
    tier_admits = cls.id != ClassId::Type3Background;
  } else {
    tier_admits = true;
  }
  if (tier_admits && available >= cls.channels_required)
    return {Verdict::Admit, 1.0};
  return {Verdict::Reject, 0.0};
}

AdmissionDecision AdmitIfFitsPolicy::probe(const NetworkSnapshot& snapshot,
                                           const TrafficClass& cls) const {
  if (snapshot.available_channels >= cls.channels_required)
    return {Verdict::Admit, 1.0};
  return {Verdict::Reject, 0.0};
}

double TriangularSet::membership(double x) const {
  if (x < a || x > c) return 0.0;
  if (x == b) return 1.0;
  if (x < b) return (x - a) / (b - a);
  return (c - x) / (c - b);
}

void TriangularSet::validate(std::string_view label) const {
  if (!(a <= b && b <= c))
    throw InvalidParameter("fuzzy set " + std::string(label) + ": require a <= b <= c");
  if (a < 0.0 || c > 1.0)
    throw InvalidParameter("fuzzy set " + std::string(label) +
                           ": support must lie within [0,1]");
}

double rule_singleton(RuleOutcome r) {
  switch (r) {
    case RuleOutcome::Reject: return 0.0;
    case RuleOutcome::WeakAccept: return 0.5;
    case RuleOutcome::StrongAccept: return 1.0;
  }
  return 0.0;
}

void FuzzyController::validate() const {
  static constexpr std::array<std::string_view, 3> cap_names{
      "capacity.low", "capacity.medium", "capacity.high"};
  static constexpr std::array<std::string_view, 3> dem_names{
      "demand.small", "demand.medium", "demand.large"};
  for (int i = 0; i < 3; ++i) {
    capacity_sets[i].validate(cap_names[i]);
    demand_sets[i].validate(dem_names[i]);
  }
  if (accept_threshold < 0.0 || accept_threshold > 1.0)
    throw InvalidParameter("fuzzy: accept_threshold must lie in [0,1]");
  // Coverage: every point of [0,1] must fire at least one set per family.
  for (int k = 0; k <= 100; ++k) {
    const double x = k / 100.0;
    double cap = 0.0, dem = 0.0;
    for (int i = 0; i < 3; ++i) {
      cap = std::max(cap, capacity_sets[i].membership(x));
      dem = std::max(dem, demand_sets[i].membership(x));
    }
    if (cap <= 0.0)
      throw InvalidParameter("fuzzy: capacity sets leave [0,1] uncovered");
    if (dem <= 0.0)
      throw InvalidParameter("fuzzy: demand sets leave [0,1] uncovered");
  }
}

double FuzzyController::evaluate(double u, double d) const {
  double weighted = 0.0;
  double strength_sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double cap = capacity_sets[i].membership(u);
    if (cap <= 0.0) continue;
    for (int j = 0; j < 3; ++j) {
      const double strength = std::min(cap, demand_sets[j].membership(d));
      if (strength <= 0.0) continue;
      weighted += strength * rule_singleton(rule_table[i][j]);
      strength_sum += strength;
    }
  }
  // The coverage invariant makes an all-zero firing impossible.
  assert(strength_sum > 0.0);
  if (strength_sum <= 0.0)
    throw NumericalError("fuzzy: no rule fired; controller violates coverage");
  return weighted / strength_sum;
}

FuzzyPolicy::FuzzyPolicy(FuzzyController controller) : controller_(controller) {
  controller_.validate();
}

AdmissionDecision FuzzyPolicy::probe(const NetworkSnapshot& snapshot,
                                     const TrafficClass& cls) const {
  const double u = static_cast<double>(snapshot.available_channels) /
                   static_cast<double>(snapshot.total_channels);
  const double d = cls.channels_required / 3.0;
  const double score = controller_.evaluate(u, d);
  if (score >= controller_.accept_threshold &&
      snapshot.available_channels >= cls.channels_required)
    return {Verdict::Admit, score};
  return {Verdict::Reject, score};
}

}  // namespace cacsim
