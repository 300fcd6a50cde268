#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cacsim/policies.hpp"
#include "cacsim/traffic.hpp"

namespace cacsim {

enum class PolicyKind { Conventional, Fuzzy, Fncac };

std::string_view policy_kind_name(PolicyKind kind);

/// Utilization grid of the experiment sweeps: a = start, start+step, ..., stop.
struct SweepGrid {
  double start = 0.1;
  double stop = 1.0;
  double step = 0.1;

  std::vector<double> points() const;
  bool operator==(const SweepGrid&) const = default;
};

/// RRBFN sizing, training hyperparameters and teacher selection.
struct RrbfnConfig {
  int input_width = 8;
  int hidden_width = 32;
  int epochs = 300;
  double learning_rate = 0.05;
  int batch_size = 32;
  int training_size = 1000;
  std::string teacher = "admit_if_fits";  // admit_if_fits | conventional | reject_all
  double cost_bias = 1.0;
  std::string params_file = "rrbfn_params.txt";

  bool operator==(const RrbfnConfig&) const = default;
};

/// Full experiment description; every field has a documented default so a
/// minimal config file works.
struct ExperimentConfig {
  // [system]
  int total_channels = 30;
  int rats = 1;
  ThresholdSet thresholds{20, 24, 27};
  std::array<double, 3> lambda{1.0, 1.0, 1.0};
  std::array<double, 3> mu{1.0, 1.0, 1.0};
  std::uint64_t seed = 1729;

  // [policies]
  std::vector<PolicyKind> policies{PolicyKind::Conventional, PolicyKind::Fuzzy,
                                   PolicyKind::Fncac};

  // [sweep]
  SweepGrid sweep_grid;
  int replications = 5;

  // [simulation]
  std::uint64_t events = 100000;  // offered events per replication
  double warmup_fraction = 0.1;

  // [fuzzy]
  FuzzyController fuzzy;

  // [rrbfn]
  RrbfnConfig rrbfn;

  // [output]
  std::string output_dir = "out";

  /// Builds the SystemConfig for the configured rates.
  SystemConfig system() const;

  /// Cross-field constraint checks; throws ParseError naming the key.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parse result: the semantic configuration plus which keys fell back to
/// their defaults (provenance for emitted metadata).
struct ParsedConfig {
  ExperimentConfig config;
  std::vector<std::string> defaulted_keys;
};

/// Default admission tiers for a pool of the given size: reserve roughly
/// the top third of the capacity ladder, (2N/3, 4N/5, 9N/10); small pools
/// fall back to the (N-3, N-2, N-1) ladder. Yields (20, 24, 27) at N = 30.
ThresholdSet default_thresholds(int total_channels);

/// Reads a sectioned key=value file ('#' comments). Unknown sections or
/// keys, duplicate keys, malformed values and constraint violations raise
/// ParseError naming the key and line.
ParsedConfig parse_config(const std::filesystem::path& path);
ParsedConfig parse_config_text(std::string_view text, std::string_view origin);

/// Canonical effective-config text: every key explicit, shortest
/// round-trip numeric formatting. parse_config_text(config_text(c)) == c.
std::string config_text(const ExperimentConfig& config);

/// FNV-1a 64 over the canonical text.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double value);

}  // namespace cacsim
