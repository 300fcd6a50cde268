// cacsim: call-admission-control laboratory for a heterogeneous cell pool.
//
// Verbs: analyze (recurrence + CTMC), simulate (one run per policy),
// train (RRBFN), sweep (full utilization grid), figures (figure bundle).

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cacsim/experiment.hpp"
#include "cacsim/version.hpp"

using namespace cacsim;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string policies;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Experiment configuration file");
  cmd->add_option("--out", opts.out_dir, "Output directory (overrides output.dir)");
  cmd->add_option("--policies", opts.policies,
                  "Comma-separated policy list (conventional,fuzzy,fncac)");
  cmd->add_option("--seed", opts.seed, "Base seed (overrides system.seed)")
      ->each([&](const std::string&) { opts.seed_set = true; });
}

ParsedConfig load_config(const CommonOptions& opts) {
  ParsedConfig parsed;
  if (!opts.config_path.empty()) {
    parsed = parse_config(opts.config_path);
  } else {
    // Stock defaults; every key is a default by definition.
    parsed.defaulted_keys = {"(all keys at stock defaults)"};
  }
  if (opts.seed_set) parsed.config.seed = opts.seed;
  if (!opts.out_dir.empty()) parsed.config.output_dir = opts.out_dir;
  if (!opts.policies.empty()) {
    std::vector<PolicyKind> kinds;
    std::string token;
    for (char c : opts.policies + ",") {
      if (c == ',' || c == ' ') {
        if (token == "conventional") kinds.push_back(PolicyKind::Conventional);
        else if (token == "fuzzy") kinds.push_back(PolicyKind::Fuzzy);
        else if (token == "fncac") kinds.push_back(PolicyKind::Fncac);
        else if (!token.empty())
          throw ParseError("--policies: '" + token +
                           "' is not conventional|fuzzy|fncac");
        token.clear();
      } else {
        token += c;
      }
    }
    if (kinds.empty()) throw ParseError("--policies: empty policy list");
    parsed.config.policies = kinds;
  }
  parsed.config.validate();
  return parsed;
}

void emit_rows(const ParsedConfig& parsed, const std::vector<SweepRow>& rows,
               const char* command, const char* filename) {
  const std::filesystem::path path =
      std::filesystem::path(parsed.config.output_dir) / filename;
  emit_csv(rows, path, make_metadata(parsed, command));
  std::printf("wrote %s (%zu rows)\n", path.string().c_str(), rows.size());
}

int dispatch(const std::string& verb, const CommonOptions& opts) {
  const ParsedConfig parsed = load_config(opts);
  if (verb == "analyze") {
    emit_rows(parsed, analyze_rows(parsed), "analyze", "analyze.csv");
  } else if (verb == "simulate") {
    emit_rows(parsed, simulate_rows(parsed), "simulate", "simulate.csv");
  } else if (verb == "train") {
    const TrainSummary summary = train_command(parsed);
    std::printf("trained on %d samples (teacher: %s)\n", summary.training_size,
                parsed.config.rrbfn.teacher.c_str());
    std::printf("held-out accuracy: %.4f\n", summary.holdout_accuracy);
    std::printf("held-out loss: %.6f, final training loss: %.6f\n",
                summary.holdout_loss, summary.final_train_loss);
    std::printf("wrote %s\n", summary.params_path.string().c_str());
  } else if (verb == "sweep") {
    emit_rows(parsed, sweep(parsed), "sweep", "sweep.csv");
  } else if (verb == "figures") {
    for (const auto& path : figures_command(parsed))
      std::printf("wrote %s\n", path.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Call-admission-control laboratory: analytical blocking, "
               "discrete-event simulation and learned admission policies"};
  app.set_version_flag("--version", std::string("cacsim ") + kVersion);
  app.require_subcommand(1);

  std::map<std::string, CommonOptions> options;
  for (const auto& [verb, help] :
       std::vector<std::pair<std::string, std::string>>{
           {"analyze", "Analytical blocking only: recurrence and CTMC oracle"},
           {"simulate", "One simulation run per selected policy"},
           {"train", "Train the RRBFN admission policy and write its parameters"},
           {"sweep", "Full utilization sweep over the configured grid"},
           {"figures", "Emit the five figure CSV bundles"}}) {
    CLI::App* cmd = app.add_subcommand(verb, help);
    add_common(cmd, options[verb]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);  // prints the message or help text
    return code == 0 ? 0 : 1;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    return dispatch(verb, options[verb]);
  } catch (const ParseError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 1;
  } catch (const InvalidParameter& err) {
    std::fprintf(stderr, "invalid parameter: %s\n", err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
}
