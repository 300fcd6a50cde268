#pragma once

#include <cstdint>
#include <vector>

#include "cacsim/policies.hpp"
#include "cacsim/traffic.hpp"

namespace cacsim {

enum class EventKind { Arrival, Departure };

/// One scheduled simulation event. The queue orders by (time, seq); seq is
/// the insertion sequence number and breaks ties deterministically.
struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Arrival;
  int class_index = 0;        // arrivals
  std::uint64_t call_id = 0;  // departures
};

/// Empirical outcome of one simulation run. Offered/blocked counts cover
/// arrivals inside the measured window [warmup, horizon]; half widths are
/// 95% normal-approximation confidence intervals on the blocking ratios.
struct SimReport {
  std::vector<std::uint64_t> offered_per_class;
  std::vector<std::uint64_t> blocked_per_class;
  std::vector<double> empirical_blocking_per_class;
  std::vector<double> half_width_95;
  double aggregate_blocking = 0.0;
  double aggregate_half_width = 0.0;
  int peak_occupancy = 0;
  std::uint64_t seed = 0;

  std::uint64_t offered_total() const;
  std::uint64_t blocked_total() const;
  bool operator==(const SimReport&) const = default;
};

/// Runs the loss-system simulation: per-class Poisson arrivals, policy
/// admission at each arrival, exponential holding times, blocked calls
/// vanish. Statistics are collected from warmup onward; the run is fully
/// deterministic given the seed.
///
/// With rats == 1 the pool is shared; with rats > 1 it is partitioned into
/// near-equal sub-pools and an admitted call is placed first-fit among the
/// RATs the policy admits.
SimReport run(const SystemConfig& config, AdmissionPolicy& policy, double warmup,
              double horizon, std::uint64_t seed, int rats = 1);

}  // namespace cacsim
