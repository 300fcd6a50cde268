#pragma once

#include <array>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "cacsim/traffic.hpp"

namespace cacsim {

enum class Verdict { Admit, Reject };

/// Outcome of one admission query. score is the policy's confidence in
/// admitting: rule-based policies emit exactly 1.0 / 0.0, the fuzzy and
/// neural policies emit their aggregated value in [0,1].
struct AdmissionDecision {
  Verdict verdict = Verdict::Reject;
  double score = 0.0;
};

/// Instantaneous view of one channel pool at an arrival:
/// available = total - sum_i active_i * channels_required_i.
struct NetworkSnapshot {
  int available_channels = 0;
  int total_channels = 0;
  std::vector<int> per_class_active;

  /// Checks the availability identity against the class demands.
  void validate(const std::vector<TrafficClass>& classes) const;
};

NetworkSnapshot make_snapshot(int total_channels, std::vector<int> per_class_active,
                              const std::vector<TrafficClass>& classes);

/// Multi-RAT admission outcome: the verdict plus the index of the sub-pool
/// that takes the call when admitted (-1 on reject).
struct MultiRatDecision {
  AdmissionDecision decision;
  int rat = -1;
};

/// Admission-decision abstraction shared by the analytical oracle and the
/// simulator. probe() is a pure function of the snapshot (stateful policies
/// answer from a cleared memory); decide() is the simulation-order call and
/// may update internal state.
class AdmissionPolicy {
public:
  virtual ~AdmissionPolicy() = default;

  virtual std::string_view name() const = 0;

  /// Memoryless decision; safe to call concurrently. Used by the CTMC.
  virtual AdmissionDecision probe(const NetworkSnapshot& snapshot,
                                  const TrafficClass& cls) const = 0;

  /// In-sequence decision; stateful policies update their memory here.
  virtual AdmissionDecision decide(const NetworkSnapshot& snapshot,
                                   const TrafficClass& cls) {
    return probe(snapshot, cls);
  }

  /// Multi-RAT decision over per-pool snapshots. Default: the first pool
  /// this policy admits takes the call.
  virtual MultiRatDecision decide_multi(std::span<const NetworkSnapshot> pools,
                                        const TrafficClass& cls);

  /// Clears any per-run memory; called once before each simulation run.
  virtual void reset() {}
};

/// Conventional threshold CAC. Tiers by free channels: below t1 reject all;
/// below t2 admit only Type1; below t3 admit Type1/Type2; otherwise admit
/// any class. Every admit additionally requires the demand to fit.
class ThresholdPolicy final : public AdmissionPolicy {
public:
  explicit ThresholdPolicy(ThresholdSet thresholds) : thresholds_(thresholds) {}

  std::string_view name() const override { return "conventional"; }
  AdmissionDecision probe(const NetworkSnapshot& snapshot,
                          const TrafficClass& cls) const override;

  const ThresholdSet& thresholds() const { return thresholds_; }

private:
  ThresholdSet thresholds_;
};

/// Admits whenever the demand fits the free capacity. The pure capacity
/// rule; also the default training teacher for the neural policy.
class AdmitIfFitsPolicy final : public AdmissionPolicy {
public:
  std::string_view name() const override { return "admit_if_fits"; }
  AdmissionDecision probe(const NetworkSnapshot& snapshot,
                          const TrafficClass& cls) const override;
};

/// Rejects every call. Degenerate baseline for tests and teachers.
class RejectAllPolicy final : public AdmissionPolicy {
public:
  std::string_view name() const override { return "reject_all"; }
  AdmissionDecision probe(const NetworkSnapshot&, const TrafficClass&) const override {
    return {Verdict::Reject, 0.0};
  }
};

/// Triangle (a,b,c) on [0,1]; a==b or b==c give shoulder behaviour.
struct TriangularSet {
  double a = 0.0;
  double b = 0.5;
  double c = 1.0;

  double membership(double x) const;
  void validate(std::string_view label) const;
  bool operator==(const TriangularSet&) const = default;
};

enum class RuleOutcome { Reject, WeakAccept, StrongAccept };

double rule_singleton(RuleOutcome r);

/// Mamdani-style controller over normalized free capacity u and normalized
/// demand d with singleton consequents. 3x3 rule table indexed
/// [capacity Low/Medium/High][demand Small/Medium/Large].
struct FuzzyController {
  std::array<TriangularSet, 3> capacity_sets{TriangularSet{0.0, 0.0, 0.5},
                                             TriangularSet{0.25, 0.5, 0.75},
                                             TriangularSet{0.5, 1.0, 1.0}};
  std::array<TriangularSet, 3> demand_sets{TriangularSet{0.0, 0.0, 0.5},
                                           TriangularSet{0.25, 0.5, 0.75},
                                           TriangularSet{0.5, 1.0, 1.0}};
  std::array<std::array<RuleOutcome, 3>, 3> rule_table{{
      {RuleOutcome::Reject, RuleOutcome::Reject, RuleOutcome::Reject},
      {RuleOutcome::WeakAccept, RuleOutcome::WeakAccept, RuleOutcome::Reject},
      {RuleOutcome::StrongAccept, RuleOutcome::StrongAccept, RuleOutcome::StrongAccept},
  }};
  double accept_threshold = 0.5;

  /// Coverage (every x in [0,1] fires at least one set per family) and
  /// range checks. Throws InvalidParameter on violation.
  void validate() const;

  /// Weighted-average defuzzification of all nine rules at (u, d).
  double evaluate(double u, double d) const;

  bool operator==(const FuzzyController&) const = default;
};

/// Fuzzy CAC: fuzzifies u = available/total and d = demand/3, fires the
/// rule table with min-conjunction, admits iff the defuzzified score
/// reaches accept_threshold and the demand fits.
class FuzzyPolicy final : public AdmissionPolicy {
public:
  FuzzyPolicy() = default;
  explicit FuzzyPolicy(FuzzyController controller);

  std::string_view name() const override { return "fuzzy"; }
  AdmissionDecision probe(const NetworkSnapshot& snapshot,
                          const TrafficClass& cls) const override;

  const FuzzyController& controller() const { return controller_; }

private:
  FuzzyController controller_;
};

}  // namespace cacsim
