#pragma once

#include <cstddef>
#include <vector>

#include "cacsim/policies.hpp"
#include "cacsim/traffic.hpp"

namespace cacsim {

/// Occupancy distribution from the third-order blocking recurrence.
/// unnormalized holds the raw forward-recurrence values (seed 1, zero for
/// negative indices); probabilities is the same vector scaled to sum to 1.
struct RecurrenceSolution {
  std::vector<double> unnormalized;   // ~P_0 .. ~P_n
  std::vector<double> probabilities;  // P_0 .. P_n, sums to 1
  UtilizationRate utilization;
};

/// Per-class and aggregate blocking probabilities, produced by either the
/// recurrence, the CTMC oracle, or the simulator.
struct BlockingReport {
  double type1_blocking = 0.0;
  double type2_blocking = 0.0;
  double type3_blocking = 0.0;
  double aggregate_blocking = 0.0;
};

/// Forward recurrence P_k = (a/3)(P_{k-1} + P_{k-2} + P_{k-3}), seeded with
/// P_0 = 1, then normalized. Requires n >= 3.
RecurrenceSolution solve_recurrence(UtilizationRate a, int n);

/// Reads the blocking tiers out of a recurrence solution for pool size n:
/// type1 = P_n, type2 = P_{n-1}, type3 = P_{n-2},
/// aggregate = (a/3)(P_n + P_{n-1} + P_{n-2}).
BlockingReport blocking_from_recurrence(const RecurrenceSolution& sol, int n);

/// Erlang-B blocking of the M/M/n/n loss system, by the overflow-free
/// iteration B(k) = a B(k-1) / (k + a B(k-1)), B(0) = 1.
double erlang_b(int n, UtilizationRate a);

/// Exact occupancy chain of the cell pool under an admission policy.
/// States are per-class active-call vectors reachable from the empty pool;
/// the generator holds arrival rates lambda_i into admitting states and
/// departure rates n_i * mu_i.
struct CtmcModel {
  SystemConfig config;
  std::vector<std::vector<int>> states;   // per-class occupancy vectors
  std::vector<double> generator;          // dense row-major, states^2
  std::size_t state_count() const { return states.size(); }
  double rate(std::size_t from, std::size_t to) const {
    return generator[from * states.size() + to];
  }
};

inline constexpr std::size_t kDefaultCtmcStateCap = 200000;

/// Enumerates the reachable state space (breadth-first from the empty pool,
/// arrivals only for classes with lambda > 0) and fills the generator.
/// Throws ResourceLimitError when the state count exceeds state_cap.
CtmcModel build_ctmc(const SystemConfig& config, const AdmissionPolicy& policy,
                     std::size_t state_cap = kDefaultCtmcStateCap);

/// Dense-solve limit; above this the stationary solve refuses to run.
inline constexpr std::size_t kDenseSolveStateCap = 5000;

/// Stationary distribution of the chain: solves pi Q = 0 with sum(pi) = 1
/// by Gaussian elimination with partial pivoting, then verifies the
/// residual max|pi Q| < 1e-8. Throws NumericalError on failure.
std::vector<double> ctmc_steady_state(const CtmcModel& model);

/// Blocking probabilities by PASTA: class-i blocking is the stationary mass
/// of states in which the policy rejects a class-i arrival (capacity
/// shortfall included); aggregate is the arrival-rate-weighted mixture.
BlockingReport ctmc_blocking(const CtmcModel& model, const AdmissionPolicy& policy,
                             const std::vector<double>& stationary);

}  // namespace cacsim
