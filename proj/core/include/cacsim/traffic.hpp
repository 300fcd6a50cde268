#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "cacsim/errors.hpp"
#include "cacsim/random.hpp"

namespace cacsim {

/// The three QoS classes of the canonical cell pool. Type1 carries
/// conversational (voice) calls on one virtual channel, Type2 interactive
/// (web) calls on two, Type3 background calls on three.
enum class ClassId { Type1Conversational, Type2Interactive, Type3Background };

std::string_view class_name(ClassId id);

/// Channels demanded by a class in canonical mode: 1, 2 or 3.
int canonical_channels(ClassId id);

/// One QoS traffic class: channel demand plus Poisson arrival and
/// exponential service rates. arrival_rate may be zero (class offered no
/// traffic); service_rate must be positive.
struct TrafficClass {
  ClassId id = ClassId::Type1Conversational;
  int channels_required = 1;
  double arrival_rate = 1.0;  // lambda
  double service_rate = 1.0;  // mu

  void validate() const;
};

/// Admission tiers in whole channels, strictly ordered 0 <= t1 < t2 < t3 <= N.
/// Below t1 free channels nothing is admitted; below t2 only Type1; below t3
/// Type1 and Type2; at or above t3 every class.
struct ThresholdSet {
  int t1 = 0;
  int t2 = 1;
  int t3 = 2;

  void validate_order() const;
  void validate(int total_channels) const;
  bool operator==(const ThresholdSet&) const = default;
};

/// Offered load per class, a = lambda / mu. Dimensionless; a < 1 is the
/// stable regime.
struct UtilizationRate {
  double value = 0.0;

  bool stable() const { return value < 1.0; }
};

/// Cell-pool description shared by the analytical and simulation paths.
struct SystemConfig {
  int total_channels = 30;  // N
  std::vector<TrafficClass> classes;
  ThresholdSet thresholds;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// a = lambda / mu. Throws InvalidParameter when service_rate <= 0.
UtilizationRate utilization_rate(double arrival_rate, double service_rate);

/// Exponential interarrival gap with mean 1/arrival_rate. Strictly positive.
double sample_interarrival(RandomStream& rng, double arrival_rate);

/// Exponential call holding time with mean 1/service_rate. Strictly positive.
double sample_service_time(RandomStream& rng, double service_rate);

/// Three symmetric classes (lambda_i = lambda, mu_i = mu) with the canonical
/// 1/2/3 channel demands.
std::vector<TrafficClass> canonical_classes(double lambda, double mu);

/// Splits a shared pool into per-RAT sub-pools of near-equal size; the
/// remainder goes to the first pools. Sizes sum to total_channels.
std::vector<int> partition_channels(int total_channels, int rats);

}  // namespace cacsim
