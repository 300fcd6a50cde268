#include "cacsim/simengine.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace cacsim {

std::uint64_t SimReport::offered_total() const {
  std::uint64_t total = 0;
  for (auto v : offered_per_class) total += v;
  return total;
}

std::uint64_t SimReport::blocked_total() const {
  std::uint64_t total = 0;
  for (auto v : blocked_per_class) total += v;
  return total;
}

namespace {

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct ActiveCall {
  int class_index = 0;
  int rat = 0;
};

double proportion_half_width(std::uint64_t blocked, std::uint64_t offered) {
  if (offered == 0) return 0.0;
  const double p = static_cast<double>(blocked) / static_cast<double>(offered);
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(offered));
}

}  // namespace

SimReport run(const SystemConfig& config, AdmissionPolicy& policy, double warmup,
              double horizon, std::uint64_t seed, int rats) {
  config.validate();
  if (!(warmup >= 0.0) || !(horizon > warmup))
    throw InvalidParameter("run: require horizon > warmup >= 0");

  const std::size_t k = config.classes.size();
  const std::vector<int> pool_sizes = partition_channels(config.total_channels, rats);
  const std::size_t pools = pool_sizes.size();

  // active[r][c]: calls of class c currently held by sub-pool r.
  std::vector<std::vector<int>> active(pools, std::vector<int>(k, 0));
  std::vector<int> occupied(pools, 0);

  RandomStream rng(seed);
  policy.reset();

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
  std::uint64_t next_seq = 0;
  std::uint64_t next_call_id = 0;
  std::unordered_map<std::uint64_t, ActiveCall> calls;

  auto push = [&](double time, EventKind kind, int class_index, std::uint64_t call_id) {
    queue.push(Event{time, next_seq++, kind, class_index, call_id});
  };

  for (std::size_t c = 0; c < k; ++c)
    if (config.classes[c].arrival_rate > 0.0)
      push(sample_interarrival(rng, config.classes[c].arrival_rate), EventKind::Arrival,
           static_cast<int>(c), 0);

  SimReport report;
  report.seed = seed;
  report.offered_per_class.assign(k, 0);
  report.blocked_per_class.assign(k, 0);

  std::vector<NetworkSnapshot> snapshots(pools);
  while (!queue.empty() && queue.top().time <= horizon) {
    const Event ev = queue.top();
    queue.pop();

    if (ev.kind == EventKind::Departure) {
      const auto it = calls.find(ev.call_id);
      if (it == calls.end()) throw std::logic_error("simengine: unknown call departed");
      const ActiveCall call = it->second;
      calls.erase(it);
      const int demand = config.classes[static_cast<std::size_t>(call.class_index)]
                             .channels_required;
      active[static_cast<std::size_t>(call.rat)][static_cast<std::size_t>(call.class_index)]--;
      occupied[static_cast<std::size_t>(call.rat)] -= demand;
      if (occupied[static_cast<std::size_t>(call.rat)] < 0 ||
          active[static_cast<std::size_t>(call.rat)][static_cast<std::size_t>(
              call.class_index)] < 0)
        throw std::logic_error("simengine: channel release underflow");
      continue;
    }

    const auto c = static_cast<std::size_t>(ev.class_index);
    const TrafficClass& cls = config.classes[c];

    // Schedule the next arrival of this class before deciding the current one.
    push(ev.time + sample_interarrival(rng, cls.arrival_rate), EventKind::Arrival,
         ev.class_index, 0);

    // Consistent snapshot of every sub-pool; validate() re-derives the
    // availability identity and throws if the incremental bookkeeping drifted.
    for (std::size_t r = 0; r < pools; ++r) {
      snapshots[r].total_channels = pool_sizes[r];
      snapshots[r].per_class_active = active[r];
      snapshots[r].available_channels = pool_sizes[r] - occupied[r];
      snapshots[r].validate(config.classes);
    }

    const bool measured = ev.time >= warmup;
    if (measured) report.offered_per_class[c]++;

    MultiRatDecision outcome;
    if (pools == 1) {
      outcome.decision = policy.decide(snapshots[0], cls);
      outcome.rat = 0;
    } else {
      outcome = policy.decide_multi(snapshots, cls);
    }

    if (outcome.decision.verdict == Verdict::Admit) {
      const auto r = static_cast<std::size_t>(outcome.rat);
      if (outcome.rat < 0 || r >= pools ||
          pool_sizes[r] - occupied[r] < cls.channels_required)
        throw std::logic_error("simengine: policy admitted an infeasible call");
      active[r][c]++;
      occupied[r] += cls.channels_required;
      int total_occupied = 0;
      for (std::size_t p = 0; p < pools; ++p) total_occupied += occupied[p];
      report.peak_occupancy = std::max(report.peak_occupancy, total_occupied);
      const std::uint64_t id = ++next_call_id;
      calls.emplace(id, ActiveCall{ev.class_index, static_cast<int>(r)});
      push(ev.time + sample_service_time(rng, cls.service_rate), EventKind::Departure, 0,
           id);
    } else if (measured) {
      report.blocked_per_class[c]++;
    }
  }

  report.empirical_blocking_per_class.assign(k, 0.0);
  report.half_width_95.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (report.offered_per_class[i] > 0)
      report.empirical_blocking_per_class[i] =
          static_cast<double>(report.blocked_per_class[i]) /
          static_cast<double>(report.offered_per_class[i]);
    report.half_width_95[i] =
        proportion_half_width(report.blocked_per_class[i], report.offered_per_class[i]);
  }
  const std::uint64_t offered = report.offered_total();
  const std::uint64_t blocked = report.blocked_total();
  if (offered > 0)
    report.aggregate_blocking =
        static_cast<double>(blocked) / static_cast<double>(offered);
  report.aggregate_half_width = proportion_half_width(blocked, offered);
  return report;
}

}  // namespace cacsim
