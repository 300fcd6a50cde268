#include "cacsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cacsim {

std::string_view class_name(ClassId id) {
  switch (id) {
    case ClassId::Type1Conversational: return "type1";
    case ClassId::Type2Interactive: return "type2";
    case ClassId::Type3Background: return "type3";
  }
  return "unknown";
}

int canonical_channels(ClassId id) {
  switch (id) {
    case ClassId::Type1Conversational: return 1;
    case ClassId::Type2Interactive: return 2;
    case ClassId::Type3Background: return 3;
  }
  return 1;
}

void TrafficClass::validate() const {
  if (channels_required < 1 || channels_required > 3)
    throw InvalidParameter("TrafficClass: channels_required must be in {1,2,3}");
  if (channels_required != canonical_channels(id))
    throw InvalidParameter("TrafficClass: channel demand does not match class identity");
  if (arrival_rate < 0.0 || !std::isfinite(arrival_rate))
    throw InvalidParameter("TrafficClass: arrival_rate must be finite and >= 0");
  if (service_rate <= 0.0 || !std::isfinite(service_rate))
    throw InvalidParameter("TrafficClass: service_rate must be finite and > 0");
}

void ThresholdSet::validate_order() const {
  if (t1 < 0 || !(t1 < t2 && t2 < t3))
    throw InvalidParameter("ThresholdSet: require 0 <= t1 < t2 < t3");
}

void ThresholdSet::validate(int total_channels) const {
  validate_order();
  if (t3 > total_channels)
    throw InvalidParameter("ThresholdSet: t3 exceeds total channels");
}

void SystemConfig::validate() const {
  if (total_channels < 1)
    throw InvalidParameter("SystemConfig: total_channels must be positive");
  if (classes.empty())
    throw InvalidParameter("SystemConfig: at least one traffic class required");
  int max_demand = 0;
  for (const auto& c : classes) {
    c.validate();
    max_demand = std::max(max_demand, c.channels_required);
  }
  if (total_channels < max_demand)
    throw InvalidParameter("SystemConfig: total_channels below the largest class demand");
  // Tier ordering is a structural invariant; the t3 <= N bound is checked
  // where thresholds actually drive admission (the experiment config layer).
  thresholds.validate_order();
}

UtilizationRate utilization_rate(double arrival_rate, double service_rate) {
  if (service_rate <= 0.0 || !std::isfinite(service_rate))
    throw InvalidParameter("utilization_rate: service_rate must be > 0");
  if (arrival_rate < 0.0 || !std::isfinite(arrival_rate))
    throw InvalidParameter("utilization_rate: arrival_rate must be >= 0");
  return UtilizationRate{arrival_rate / service_rate};
}

namespace {

double sample_exponential(RandomStream& rng, double rate, const char* who) {
  if (rate <= 0.0 || !std::isfinite(rate))
    throw InvalidParameter(std::string(who) + ": rate must be > 0");
  // u in (0,1) keeps the sample finite and strictly positive.
  const double u = rng.uniform01_open();
  return -std::log1p(-u) / rate;
}

}  // namespace

double sample_interarrival(RandomStream& rng, double arrival_rate) {
  return sample_exponential(rng, arrival_rate, "sample_interarrival");
}

double sample_service_time(RandomStream& rng, double service_rate) {
  return sample_exponential(rng, service_rate, "sample_service_time");
}

std::vector<TrafficClass> canonical_classes(double lambda, double mu) {
  return {
      {ClassId::Type1Conversational, 1, lambda, mu},
      {ClassId::Type2Interactive, 2, lambda, mu},
      {ClassId::Type3Background, 3, lambda, mu},
  };
}

std::vector<int> partition_channels(int total_channels, int rats) {
  if (rats < 1) throw InvalidParameter("partition_channels: rats must be >= 1");
  if (total_channels < rats)
    throw InvalidParameter("partition_channels: fewer channels than RATs");
  std::vector<int> sizes(static_cast<std::size_t>(rats), total_channels / rats);
  for (int r = 0; r < total_channels % rats; ++r) ++sizes[static_cast<std::size_t>(r)];
  return sizes;
}

}  // namespace cacsim
