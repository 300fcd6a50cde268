#include "cacsim/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include "cacsim/version.hpp"

namespace cacsim {

namespace {

// Salt indices for deriving independent seed streams from the base seed.
constexpr std::uint64_t kTrainSetSalt = 0x7261696e01ull;
constexpr std::uint64_t kTrainInitSalt = 0x7261696e02ull;
constexpr std::uint64_t kTrainLoopSalt = 0x7261696e03ull;
constexpr std::uint64_t kSimSalt = 0x73696d00ull;

std::string format_10sig(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

int scope_rank(ClassScope scope) { return static_cast<int>(scope); }

double mean_offered_utilization(const SystemConfig& system) {
  double lambda_sum = 0.0, mu_sum = 0.0;
  for (const auto& cls : system.classes) {
    if (cls.arrival_rate <= 0.0) continue;
    lambda_sum += cls.arrival_rate;
    mu_sum += cls.service_rate;
  }
  return mu_sum > 0.0 ? lambda_sum / mu_sum : 0.0;
}

double blocking_of_scope(const BlockingReport& report, ClassScope scope) {
  switch (scope) {
    case ClassScope::Aggregate: return report.aggregate_blocking;
    case ClassScope::Type1: return report.type1_blocking;
    case ClassScope::Type2: return report.type2_blocking;
    case ClassScope::Type3: return report.type3_blocking;
  }
  return 0.0;
}

/// Pooled empirical blocking over replications.
struct PooledCounts {
  std::vector<std::uint64_t> offered;
  std::vector<std::uint64_t> blocked;
  std::uint64_t first_seed = 0;

  void add(const SimReport& report) {
    if (offered.empty()) {
      offered.assign(report.offered_per_class.size(), 0);
      blocked.assign(report.blocked_per_class.size(), 0);
    }
    for (std::size_t i = 0; i < offered.size(); ++i) {
      offered[i] += report.offered_per_class[i];
      blocked[i] += report.blocked_per_class[i];
    }
  }

  std::pair<double, double> estimate(ClassScope scope) const {
    std::uint64_t off = 0, blk = 0;
    if (scope == ClassScope::Aggregate) {
      for (std::size_t i = 0; i < offered.size(); ++i) {
        off += offered[i];
        blk += blocked[i];
      }
    } else {
      const auto idx = static_cast<std::size_t>(scope_rank(scope) - 1);
      off = offered[idx];
      blk = blocked[idx];
    }
    if (off == 0) return {0.0, 0.0};
    const double p = static_cast<double>(blk) / static_cast<double>(off);
    return {p, 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(off))};
  }
};

std::optional<BlockingReport> try_ctmc(const SystemConfig& system,
                                       const AdmissionPolicy& policy, int rats) {
  if (rats != 1) return std::nullopt;
  try {
    const CtmcModel model = build_ctmc(system, policy);
    const std::vector<double> pi = ctmc_steady_state(model);
    return ctmc_blocking(model, policy, pi);
  } catch (const ResourceLimitError&) {
    return std::nullopt;
  }
}

void sort_rows(std::vector<SweepRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::make_tuple(a.policy, scope_rank(a.scope), a.utilization) <
           std::make_tuple(b.policy, scope_rank(b.scope), b.utilization);
  });
}

}  // namespace

std::string_view class_scope_name(ClassScope scope) {
  switch (scope) {
    case ClassScope::Aggregate: return "aggregate";
    case ClassScope::Type1: return "type1";
    case ClassScope::Type2: return "type2";
    case ClassScope::Type3: return "type3";
  }
  return "unknown";
}

CsvMetadata make_metadata(const ParsedConfig& parsed, std::string_view command) {
  CsvMetadata meta;
  meta.command = std::string(command);
  meta.config_hash = config_hash(parsed.config);
  meta.base_seed = parsed.config.seed;
  meta.defaulted_keys = parsed.defaulted_keys;
  return meta;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path,
              const CsvMetadata& metadata) {
  if (rows.empty()) throw InvalidParameter("emit_csv: no rows to write");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("emit_csv: cannot open " + path.string() + " for writing");

  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(metadata.config_hash));
  out << "# cacsim " << kVersion << ' ' << metadata.command << '\n';
  out << "# config_hash: " << hash_buf << '\n';
  out << "# base_seed: " << metadata.base_seed << '\n';
  out << "# defaults:";
  if (metadata.defaulted_keys.empty()) out << " (none)";
  for (const auto& key : metadata.defaulted_keys) out << ' ' << key;
  out << '\n';

  out << "utilization,policy,class_scope,analytical,ctmc,empirical,half_width,seed\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? format_10sig(*v) : std::string();
  };
  for (const SweepRow& row : rows) {
    out << format_10sig(row.utilization) << ',' << row.policy << ','
        << class_scope_name(row.scope) << ',' << cell(row.analytical) << ','
        << cell(row.ctmc) << ',' << cell(row.empirical) << ',' << cell(row.half_width)
        << ',' << row.seed << '\n';
  }
  if (!out) throw IoError("emit_csv: write failed for " + path.string());
}

std::unique_ptr<AdmissionPolicy> make_policy(PolicyKind kind,
                                             const ExperimentConfig& config,
                                             const RrbfnParams* fncac_params) {
  switch (kind) {
    case PolicyKind::Conventional:
      return std::make_unique<ThresholdPolicy>(config.thresholds);
    case PolicyKind::Fuzzy:
      return std::make_unique<FuzzyPolicy>(config.fuzzy);
    case PolicyKind::Fncac:
      if (fncac_params == nullptr)
        throw InvalidParameter("make_policy: fncac requires trained parameters");
      return std::make_unique<FncacPolicy>(*fncac_params, config.rrbfn.cost_bias);
  }
  throw InvalidParameter("make_policy: unknown policy kind");
}

std::unique_ptr<AdmissionPolicy> make_teacher(const ExperimentConfig& config) {
  if (config.rrbfn.teacher == "admit_if_fits")
    return std::make_unique<AdmitIfFitsPolicy>();
  if (config.rrbfn.teacher == "conventional")
    return std::make_unique<ThresholdPolicy>(config.thresholds);
  if (config.rrbfn.teacher == "reject_all") return std::make_unique<RejectAllPolicy>();
  throw InvalidParameter("make_teacher: unknown teacher '" + config.rrbfn.teacher + "'");
}

double horizon_for_events(const SystemConfig& system, std::uint64_t events) {
  double lambda_total = 0.0;
  for (const auto& cls : system.classes) lambda_total += cls.arrival_rate;
  if (lambda_total <= 0.0)
    throw InvalidParameter("horizon_for_events: no offered traffic");
  return static_cast<double>(events) / lambda_total;
}

TrainSummary train_command(const ParsedConfig& parsed) {
  const ExperimentConfig& cfg = parsed.config;
  const SystemConfig system = cfg.system();
  const std::unique_ptr<AdmissionPolicy> teacher = make_teacher(cfg);

  const TrainingSet data = generate_training_set(
      system, *teacher, cfg.rrbfn.training_size, mix_seed(cfg.seed, kTrainSetSalt),
      cfg.rats, cfg.rrbfn.cost_bias, cfg.rrbfn.input_width);

  RandomStream init_rng(mix_seed(cfg.seed, kTrainInitSalt));
  const RrbfnParams initial =
      init_from_data(cfg.rrbfn.input_width, cfg.rrbfn.hidden_width, data, init_rng);
  const TrainResult result =
      train(initial, data, cfg.rrbfn.epochs, cfg.rrbfn.learning_rate,
            mix_seed(cfg.seed, kTrainLoopSalt), cfg.rrbfn.batch_size);

  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);
  TrainSummary summary;
  summary.params_path = out_dir / cfg.rrbfn.params_file;
  save_params(result.params, summary.params_path);
  summary.holdout_accuracy = result.holdout_accuracy;
  summary.holdout_loss = result.holdout_loss;
  summary.final_train_loss = result.final_train_loss;
  summary.training_size = cfg.rrbfn.training_size;
  return summary;
}

RrbfnParams ensure_fncac_params(const ParsedConfig& parsed) {
  const std::filesystem::path path =
      std::filesystem::path(parsed.config.output_dir) / parsed.config.rrbfn.params_file;
  if (std::filesystem::exists(path)) return load_params(path);
  return load_params(train_command(parsed).params_path);
}

namespace {

struct PolicySet {
  std::vector<PolicyKind> kinds;
  std::optional<RrbfnParams> fncac_params;
};

PolicySet prepare_policies(const ParsedConfig& parsed) {
  PolicySet set;
  set.kinds = parsed.config.policies;
  if (std::find(set.kinds.begin(), set.kinds.end(), PolicyKind::Fncac) != set.kinds.end())
    set.fncac_params = ensure_fncac_params(parsed);
  return set;
}

std::vector<SweepRow> rows_for_point(const ParsedConfig& parsed, const PolicySet& set,
                                     const SystemConfig& system, double utilization,
                                     std::uint64_t point_index, bool simulate) {
  const ExperimentConfig& cfg = parsed.config;
  const RecurrenceSolution recurrence =
      solve_recurrence(UtilizationRate{utilization}, system.total_channels);
  const BlockingReport analytical =
      blocking_from_recurrence(recurrence, system.total_channels);

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < set.kinds.size(); ++p) {
    const PolicyKind kind = set.kinds[p];
    const RrbfnParams* params =
        set.fncac_params.has_value() ? &*set.fncac_params : nullptr;
    std::unique_ptr<AdmissionPolicy> policy = make_policy(kind, cfg, params);

    const std::optional<BlockingReport> oracle = try_ctmc(system, *policy, cfg.rats);

    PooledCounts pooled;
    bool have_sim = false;
    if (simulate) {
      const double horizon = horizon_for_events(system, cfg.events);
      const double warmup = cfg.warmup_fraction * horizon;
      for (int rep = 0; rep < cfg.replications; ++rep) {
        // Collision-free run index over (grid point, policy, replication).
        const std::uint64_t run_index =
            (point_index * set.kinds.size() + p) *
                static_cast<std::uint64_t>(cfg.replications) +
            static_cast<std::uint64_t>(rep);
        const std::uint64_t run_seed = mix_seed(cfg.seed, kSimSalt + run_index);
        if (rep == 0) pooled.first_seed = run_seed;
        const SimReport report =
            run(system, *policy, warmup, warmup + horizon, run_seed, cfg.rats);
        pooled.add(report);
      }
      have_sim = true;
    }

    for (const ClassScope scope : {ClassScope::Aggregate, ClassScope::Type1,
                                   ClassScope::Type2, ClassScope::Type3}) {
      SweepRow row;
      row.utilization = utilization;
      row.policy = std::string(policy_kind_name(kind));
      row.scope = scope;
      row.analytical = blocking_of_scope(analytical, scope);
      if (oracle) row.ctmc = blocking_of_scope(*oracle, scope);
      if (have_sim) {
        const auto [estimate, half_width] = pooled.estimate(scope);
        row.empirical = estimate;
        row.half_width = half_width;
        row.seed = pooled.first_seed;
      } else {
        row.seed = cfg.seed;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> sweep(const ParsedConfig& parsed) {
  const ExperimentConfig& cfg = parsed.config;
  cfg.validate();
  const PolicySet set = prepare_policies(parsed);

  std::vector<SweepRow> rows;
  const std::vector<double> grid = cfg.sweep_grid.points();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    SystemConfig system = cfg.system();
    // Symmetric sweep mode: every offered class is driven at lambda = a * mu.
    for (auto& cls : system.classes)
      if (cls.arrival_rate > 0.0) cls.arrival_rate = grid[g] * cls.service_rate;
    auto point_rows = rows_for_point(parsed, set, system, grid[g], g, true);
    rows.insert(rows.end(), std::make_move_iterator(point_rows.begin()),
                std::make_move_iterator(point_rows.end()));
  }
  sort_rows(rows);
  return rows;
}

std::vector<SweepRow> analyze_rows(const ParsedConfig& parsed) {
  const ExperimentConfig& cfg = parsed.config;
  cfg.validate();
  const PolicySet set = prepare_policies(parsed);
  const SystemConfig system = cfg.system();
  auto rows =
      rows_for_point(parsed, set, system, mean_offered_utilization(system), 0, false);
  sort_rows(rows);
  return rows;
}

std::vector<SweepRow> simulate_rows(const ParsedConfig& parsed) {
  const ExperimentConfig& cfg = parsed.config;
  cfg.validate();
  const PolicySet set = prepare_policies(parsed);
  const SystemConfig system = cfg.system();
  auto rows =
      rows_for_point(parsed, set, system, mean_offered_utilization(system), 0, true);
  sort_rows(rows);
  return rows;
}

std::vector<std::filesystem::path> figures_command(const ParsedConfig& parsed) {
  parsed.config.validate();
  const std::filesystem::path out_dir(parsed.config.output_dir);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> emitted;

  // Figure bundles always compare all three policies.
  ParsedConfig base = parsed;
  base.config.policies = {PolicyKind::Conventional, PolicyKind::Fuzzy, PolicyKind::Fncac};

  // fig4/fig5 come from the canonical three-class sweep.
  {
    ParsedConfig canonical = base;
    for (auto& l : canonical.config.lambda)
      if (l <= 0.0) l = 1.0;
    const std::vector<SweepRow> rows = sweep(canonical);

    std::vector<SweepRow> fig4;
    for (const auto& row : rows)
      if (row.scope == ClassScope::Aggregate) fig4.push_back(row);
    const std::filesystem::path fig4_path = out_dir / "fig4_aggregate.csv";
    emit_csv(fig4, fig4_path, make_metadata(canonical, "figures:fig4"));
    emitted.push_back(fig4_path);

    std::vector<SweepRow> fig5;
    for (const auto& row : rows)
      if (row.policy == "fncac" && row.scope != ClassScope::Aggregate)
        fig5.push_back(row);
    const std::filesystem::path fig5_path = out_dir / "fig5_fncac_per_class.csv";
    emit_csv(fig5, fig5_path, make_metadata(canonical, "figures:fig5"));
    emitted.push_back(fig5_path);
  }

  // fig6/7/8: systems offering a single class each.
  struct SingleFigure {
    const char* file;
    const char* command;
    ClassScope scope;
  };
  const std::array<SingleFigure, 3> singles{
      SingleFigure{"fig6_type1.csv", "figures:fig6", ClassScope::Type1},
      SingleFigure{"fig7_type2.csv", "figures:fig7", ClassScope::Type2},
      SingleFigure{"fig8_type3.csv", "figures:fig8", ClassScope::Type3}};
  for (std::size_t k = 0; k < singles.size(); ++k) {
    ParsedConfig single = base;
    for (std::size_t i = 0; i < 3; ++i)
      single.config.lambda[i] = (i == k) ? std::max(base.config.lambda[i], 1.0) : 0.0;
    const std::vector<SweepRow> rows = sweep(single);
    std::vector<SweepRow> fig;
    for (const auto& row : rows)
      if (row.scope == singles[k].scope) fig.push_back(row);
    const std::filesystem::path path = out_dir / singles[k].file;
    emit_csv(fig, path, make_metadata(single, singles[k].command));
    emitted.push_back(path);
  }
  return emitted;
}

}  // namespace cacsim
