#include "cacsim/markov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace cacsim {

RecurrenceSolution solve_recurrence(UtilizationRate a, int n) {
  if (a.value < 0.0 || !std::isfinite(a.value))
    throw InvalidParameter("solve_recurrence: utilization must be finite and >= 0");
  if (n < 3)
    throw InvalidParameter(
        "solve_recurrence: n must be >= 3 (recurrence depth needs three predecessors)");

  RecurrenceSolution sol;
  sol.utilization = a;
  sol.unnormalized.assign(static_cast<std::size_t>(n) + 1, 0.0);
  sol.unnormalized[0] = 1.0;
  const double coeff = a.value / 3.0;
  for (int k = 1; k <= n; ++k) {
    double acc = 0.0;
    for (int back = 1; back <= 3; ++back)
      if (k - back >= 0) acc += sol.unnormalized[static_cast<std::size_t>(k - back)];
    sol.unnormalized[static_cast<std::size_t>(k)] = coeff * acc;
  }
  const double total =
      std::accumulate(sol.unnormalized.begin(), sol.unnormalized.end(), 0.0);
  sol.probabilities = sol.unnormalized;
  for (double& p : sol.probabilities) p /= total;
  return sol;
}

BlockingReport blocking_from_recurrence(const RecurrenceSolution& sol, int n) {
  if (sol.probabilities.size() != static_cast<std::size_t>(n) + 1)
    throw InvalidParameter("blocking_from_recurrence: solution was computed for another n");
  const auto& p = sol.probabilities;
  BlockingReport report;
  report.type1_blocking = p[static_cast<std::size_t>(n)];
  report.type2_blocking = p[static_cast<std::size_t>(n - 1)];
  report.type3_blocking = p[static_cast<std::size_t>(n - 2)];
  report.aggregate_blocking = sol.utilization.value / 3.0 *
                              (report.type1_blocking + report.type2_blocking +
                               report.type3_blocking);
  return report;
}

double erlang_b(int n, UtilizationRate a) {
  if (n < 0) throw InvalidParameter("erlang_b: n must be >= 0");
  if (a.value < 0.0) throw InvalidParameter("erlang_b: a must be >= 0");
  double b = 1.0;
  for (int k = 1; k <= n; ++k) b = a.value * b / (k + a.value * b);
  return b;
}

namespace {

NetworkSnapshot snapshot_of(const SystemConfig& config, const std::vector<int>& state) {
  NetworkSnapshot snap;
  snap.total_channels = config.total_channels;
  snap.per_class_active = state;
  int occupied = 0;
  for (std::size_t i = 0; i < state.size(); ++i)
    occupied += state[i] * config.classes[i].channels_required;
  snap.available_channels = config.total_channels - occupied;
  return snap;
}

bool admits(const AdmissionPolicy& policy, const NetworkSnapshot& snap,
            const TrafficClass& cls) {
  if (snap.available_channels < cls.channels_required) return false;
  return policy.probe(snap, cls).verdict == Verdict::Admit;
}

}  // namespace

CtmcModel build_ctmc(const SystemConfig& config, const AdmissionPolicy& policy,
                     std::size_t state_cap) {
  config.validate();
  const std::size_t k = config.classes.size();

  CtmcModel model;
  model.config = config;

  // Breadth-first enumeration from the empty pool. Arrival edges exist only
  // for classes that actually offer traffic (lambda > 0); departure edges
  // cannot leave the reachable set.
  std::map<std::vector<int>, std::size_t> index_of;
  std::vector<int> empty_state(k, 0);
  model.states.push_back(empty_state);
  index_of.emplace(empty_state, 0);
  for (std::size_t head = 0; head < model.states.size(); ++head) {
    const std::vector<int> state = model.states[head];
    const NetworkSnapshot snap = snapshot_of(config, state);
    for (std::size_t i = 0; i < k; ++i) {
      if (config.classes[i].arrival_rate <= 0.0) continue;
      if (!admits(policy, snap, config.classes[i])) continue;
      std::vector<int> next = state;
      ++next[i];
      if (index_of.emplace(next, model.states.size()).second) {
        model.states.push_back(std::move(next));
        if (model.states.size() > state_cap)
          throw ResourceLimitError("build_ctmc: state space exceeds cap of " +
                                   std::to_string(state_cap) + " states");
      }
    }
  }

  const std::size_t n = model.states.size();
  model.generator.assign(n * n, 0.0);
  auto q = [&](std::size_t r, std::size_t c) -> double& {
    return model.generator[r * n + c];
  };
  for (std::size_t s = 0; s < n; ++s) {
    const std::vector<int>& state = model.states[s];
    const NetworkSnapshot snap = snapshot_of(config, state);
    double out = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const TrafficClass& cls = config.classes[i];
      if (cls.arrival_rate > 0.0 && admits(policy, snap, cls)) {
        std::vector<int> next = state;
        ++next[i];
        q(s, index_of.at(next)) += cls.arrival_rate;
        out += cls.arrival_rate;
      }
      if (state[i] > 0) {
        std::vector<int> prev = state;
        --prev[i];
        const double rate = state[i] * cls.service_rate;
        q(s, index_of.at(prev)) += rate;
        out += rate;
      }
    }
    q(s, s) = -out;
  }
  return model;
}

std::vector<double> ctmc_steady_state(const CtmcModel& model) {
  const std::size_t n = model.state_count();
  if (n == 0) throw InvalidParameter("ctmc_steady_state: empty model");
  if (n > kDenseSolveStateCap)
    throw ResourceLimitError("ctmc_steady_state: " + std::to_string(n) +
                             " states exceeds the dense-solve cap of " +
                             std::to_string(kDenseSolveStateCap));

  // Solve Q^T x = 0 with the last balance equation replaced by sum(x) = 1.
  std::vector<double> a(n * (n + 1), 0.0);
  const std::size_t stride = n + 1;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r * stride + c] = model.rate(c, r);
    a[r * stride + n] = 0.0;
  }
  for (std::size_t c = 0; c < n; ++c) a[(n - 1) * stride + c] = 1.0;
  a[(n - 1) * stride + n] = 1.0;

  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(a[col * stride + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double cand = std::fabs(a[r * stride + col]);
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (best == 0.0)
      throw NumericalError("ctmc_steady_state: singular system (column " +
                           std::to_string(col) + ")");
    if (pivot != col)
      for (std::size_t c = col; c <= n; ++c)
        std::swap(a[pivot * stride + c], a[col * stride + c]);
    const double diag = a[col * stride + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * stride + col] / diag;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) a[r * stride + c] -= factor * a[col * stride + c];
    }
  }
  std::vector<double> pi(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double acc = a[r * stride + n];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r * stride + c] * pi[c];
    pi[r] = acc / a[r * stride + r];
  }

  // Residual check against the original generator.
  double residual = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) acc += pi[r] * model.rate(r, c);
    residual = std::max(residual, std::fabs(acc));
  }
  if (!(residual < 1e-8))
    throw NumericalError("ctmc_steady_state: stationarity residual " +
                         std::to_string(residual) + " exceeds 1e-8");

  double min_entry = 0.0;
  for (double v : pi) min_entry = std::min(min_entry, v);
  if (min_entry < -1e-10)
    throw NumericalError("ctmc_steady_state: stationary vector has entry " +
                         std::to_string(min_entry) + " below -1e-10");
  // Clip roundoff negatives and renormalize.
  double total = 0.0;
  for (double& v : pi) {
    if (v < 0.0) v = 0.0;
    total += v;
  }
  for (double& v : pi) v /= total;
  return pi;
}

BlockingReport ctmc_blocking(const CtmcModel& model, const AdmissionPolicy& policy,
                             const std::vector<double>& stationary) {
  const std::size_t n = model.state_count();
  if (stationary.size() != n)
    throw InvalidParameter("ctmc_blocking: stationary vector length mismatch");
  const std::size_t k = model.config.classes.size();

  std::vector<double> per_class(k, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const NetworkSnapshot snap = snapshot_of(model.config, model.states[s]);
    for (std::size_t i = 0; i < k; ++i)
      if (!admits(policy, snap, model.config.classes[i])) per_class[i] += stationary[s];
  }

  double lambda_total = 0.0;
  double aggregate = 0.0;
  for (std::size_t i = 0; i < k; ++i) lambda_total += model.config.classes[i].arrival_rate;
  if (lambda_total > 0.0)
    for (std::size_t i = 0; i < k; ++i)
      aggregate += model.config.classes[i].arrival_rate / lambda_total * per_class[i];

  BlockingReport report;
  report.aggregate_blocking = aggregate;
  for (std::size_t i = 0; i < k; ++i) {
    switch (model.config.classes[i].id) {
      case ClassId::Type1Conversational: report.type1_blocking = per_class[i]; break;
      case ClassId::Type2Interactive: report.type2_blocking = per_class[i]; break;
      case ClassId::Type3Background: report.type3_blocking = per_class[i]; break;
    }
  }
  return report;
}

}  // namespace cacsim
