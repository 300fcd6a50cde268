#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cacsim/policies.hpp"
#include "cacsim/random.hpp"
#include "cacsim/traffic.hpp"

namespace cacsim {

/// Recurrent radial-basis-function network parameters.
///
/// The input layer has input_width sigmoid neurons, each with a
/// self-connection weight in [-1, 1] feeding back its previous activation.
/// The hidden layer has hidden_width Gaussian units with prototype vectors
/// (centers, row-major hidden x input) and per-unit influence fields
/// (widths); the output is bias + sum_i w_i exp(-||act - center_i||^2 / width_i).
struct RrbfnParams {
  int input_width = 0;
  int hidden_width = 0;
  std::vector<double> recurrent_weights;  // input_width, in [-1, 1]
  std::vector<double> centers;            // hidden_width * input_width
  std::vector<double> widths;             // hidden_width, > 0
  std::vector<double> output_weights;     // hidden_width
  double bias = 0.0;

  double center(int i, int j) const {
    return centers[static_cast<std::size_t>(i) * input_width + j];
  }
  void validate() const;
  bool operator==(const RrbfnParams&) const = default;
};

/// Persisted input-layer activations; the network's short-term memory.
struct RrbfnState {
  std::vector<double> previous_activations;

  bool operator==(const RrbfnState&) const = default;
};

RrbfnState zero_state(const RrbfnParams& params);

/// Minimum width enforced at initialization and after every training step.
inline constexpr double kMinWidth = 1e-6;

/// Admission-request encoding fed to the network: one normalized free
/// capacity per RAT, normalized demand, class one-hot, and the fixed cost
/// bias input. Padded with zeros up to the configured input width.
struct FncacFeatures {
  std::vector<double> per_rat_available;  // each in [0, 1]
  double demand = 0.0;                    // channels_required / 3
  std::array<double, 3> qos_onehot{0.0, 0.0, 0.0};
  double cost_bias = 0.0;

  static FncacFeatures build(std::span<const NetworkSnapshot> pools,
                             const TrafficClass& cls, double cost_bias);
  /// Flattens to [avail..., demand, onehot, cost, 0...]; throws when the
  /// natural width exceeds input_width.
  std::vector<double> to_vector(int input_width) const;
};

struct TrainingSample {
  std::vector<double> features;
  double label = 0.0;  // 0 or 1
};

struct TrainingSet {
  std::vector<TrainingSample> samples;

  void validate() const;  // labels restricted to {0, 1}, widths consistent
  bool has_both_labels() const;
};

/// Input-layer pass: activation_j = sigmoid(feature_j + r_j * prev_j).
/// Returns the activations and the state that stores them.
std::pair<std::vector<double>, RrbfnState> recurrent_input(
    std::span<const double> features, const RrbfnState& state,
    const RrbfnParams& params);

/// Hidden + output pass over already-computed input activations; returns
/// the raw linear output.
double rbf_forward(std::span<const double> activations, const RrbfnParams& params);

/// Full pass: recurrent input layer, Gaussian hidden layer, then a final
/// sigmoid squashing the output into [0, 1] for decision use.
std::pair<double, RrbfnState> forward(std::span<const double> features,
                                      const RrbfnState& state,
                                      const RrbfnParams& params);

/// Mean squared error over the batch, each sample evaluated from a cleared
/// recurrent state.
double loss(const RrbfnParams& params, std::span<const TrainingSample> batch);

/// Analytic partials of loss() for the trained parameter groups. Recurrent
/// weights are frozen and carry no gradient.
struct RrbfnGradient {
  std::vector<double> centers;         // hidden * input
  std::vector<double> widths;          // hidden
  std::vector<double> output_weights;  // hidden
  double bias = 0.0;

  double max_abs() const;
};

RrbfnGradient gradient(const RrbfnParams& params, std::span<const TrainingSample> batch);

struct TrainResult {
  RrbfnParams params;          // best held-out loss seen
  double holdout_loss = 0.0;   // of the returned params
  double holdout_accuracy = 0.0;
  double final_train_loss = 0.0;
  int epochs_run = 0;
};

/// Mini-batch gradient descent with an 80/20 seeded train/holdout split.
/// Keeps the parameters with the best held-out loss; widths stay floored at
/// kMinWidth; throws TrainingError when the training loss turns non-finite.
TrainResult train(const RrbfnParams& params, const TrainingSet& data, int epochs,
                  double learning_rate, std::uint64_t seed, int batch_size = 32);

/// Random initialization: uniform centers in [0,1], widths in [0.5, 1.5],
/// output weights N(0, 0.5), recurrent weights normal truncated to [-1, 1].
RrbfnParams random_params(int input_width, int hidden_width, RandomStream& rng);

/// Data-driven initialization: centers are input-layer activations of
/// randomly drawn training samples; every width starts at the mean pairwise
/// center distance.
RrbfnParams init_from_data(int input_width, int hidden_width, const TrainingSet& data,
                           RandomStream& rng);

/// Uniform random snapshots (per-RAT occupancies consistent with capacity)
/// and call classes, labeled 1 iff the teacher admits. Features are built
/// exactly as FncacPolicy builds them. size must be >= 10.
TrainingSet generate_training_set(const SystemConfig& config,
                                  const AdmissionPolicy& teacher, int size,
                                  std::uint64_t seed, int rats, double cost_bias,
                                  int input_width);

/// Text persistence: a versioned header with the layer sizes, then one
/// decimal record per parameter group. Platform independent.
void save_params(const RrbfnParams& params, const std::filesystem::path& path);
RrbfnParams load_params(const std::filesystem::path& path);

/// FNCAC: scores each admission request with the RRBFN. Admits iff the
/// squashed output reaches 0.5 (ties admit) and at least one RAT can hold
/// the call; the feasibility guard overrides the network.
class FncacPolicy final : public AdmissionPolicy {
public:
  FncacPolicy(RrbfnParams params, double cost_bias);

  std::string_view name() const override { return "fncac"; }
  AdmissionDecision probe(const NetworkSnapshot& snapshot,
                          const TrafficClass& cls) const override;
  AdmissionDecision decide(const NetworkSnapshot& snapshot,
                           const TrafficClass& cls) override;
  MultiRatDecision decide_multi(std::span<const NetworkSnapshot> pools,
                                const TrafficClass& cls) override;
  void reset() override;

  const RrbfnParams& params() const { return params_; }
  const RrbfnState& state() const { return state_; }

private:
  AdmissionDecision scored(std::span<const NetworkSnapshot> pools,
                           const TrafficClass& cls, RrbfnState& state) const;

  RrbfnParams params_;
  double cost_bias_;
  RrbfnState state_;
};

}  // namespace cacsim
