#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cacsim/config.hpp"
#include "cacsim/markov.hpp"
#include "cacsim/rrbfn.hpp"
#include "cacsim/simengine.hpp"

namespace cacsim {

enum class ClassScope { Aggregate, Type1, Type2, Type3 };

std::string_view class_scope_name(ClassScope scope);

/// One record of the experiment output: blocking of one policy for one
/// class scope at one utilization grid point. Absent oracle or empirical
/// columns stay disengaged and serialize as empty CSV fields.
struct SweepRow {
  double utilization = 0.0;
  std::string policy;
  ClassScope scope = ClassScope::Aggregate;
  std::optional<double> analytical;  // Eq-recurrence value
  std::optional<double> ctmc;        // exact-chain oracle, when within caps
  std::optional<double> empirical;   // pooled simulation estimate
  std::optional<double> half_width;  // 95% CI half width of empirical
  std::uint64_t seed = 0;
};

/// Comment block embedded at the top of every emitted file so a rerun is
/// reconstructible from the output alone.
struct CsvMetadata {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::string> defaulted_keys;
};

CsvMetadata make_metadata(const ParsedConfig& parsed, std::string_view command);

/// Writes the metadata block, a header line, then one comma-separated
/// record per row (10 significant digits). Throws on empty rows before
/// touching the filesystem.
void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path,
              const CsvMetadata& metadata);

/// Instantiates one admission policy. Fncac requires trained parameters.
std::unique_ptr<AdmissionPolicy> make_policy(PolicyKind kind,
                                             const ExperimentConfig& config,
                                             const RrbfnParams* fncac_params);

std::unique_ptr<AdmissionPolicy> make_teacher(const ExperimentConfig& config);

struct TrainSummary {
  std::filesystem::path params_path;
  double holdout_accuracy = 0.0;
  double holdout_loss = 0.0;
  double final_train_loss = 0.0;
  int training_size = 0;
};

/// Generates the labeled training set from the configured teacher, trains
/// the RRBFN and writes the parameter file. Deterministic given the seed.
TrainSummary train_command(const ParsedConfig& parsed);

/// Loads the trained parameters, training first when the file is missing.
RrbfnParams ensure_fncac_params(const ParsedConfig& parsed);

/// Full utilization sweep: at each grid point the offered classes get
/// lambda_i = a * mu_i, the recurrence and (for single-RAT systems) CTMC
/// columns are computed, and `replications` seeded simulation runs are
/// pooled per policy. Rows come back sorted by (policy, scope, utilization).
std::vector<SweepRow> sweep(const ParsedConfig& parsed);

/// Analytical columns only (recurrence + CTMC oracle), no simulation.
std::vector<SweepRow> analyze_rows(const ParsedConfig& parsed);

/// One simulation run per policy at the configured rates.
std::vector<SweepRow> simulate_rows(const ParsedConfig& parsed);

/// The five figure bundles: fig4 aggregate blocking of all policies,
/// fig5 per-class blocking under FNCAC, fig6/7/8 single-class systems.
/// Returns the emitted paths.
std::vector<std::filesystem::path> figures_command(const ParsedConfig& parsed);

/// Simulation horizon that offers approximately `events` arrivals.
double horizon_for_events(const SystemConfig& system, std::uint64_t events);

}  // namespace cacsim
