#include "cacsim/rrbfn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>

namespace cacsim {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void RrbfnParams::validate() const {
  if (input_width < 1 || hidden_width < 1)
    throw InvalidParameter("RrbfnParams: layer widths must be positive");
  const auto m = static_cast<std::size_t>(input_width);
  const auto h = static_cast<std::size_t>(hidden_width);
  if (recurrent_weights.size() != m)
    throw InvalidParameter("RrbfnParams: recurrent weight count != input width");
  if (centers.size() != h * m)
    throw InvalidParameter("RrbfnParams: center matrix is not hidden x input");
  if (widths.size() != h || output_weights.size() != h)
    throw InvalidParameter("RrbfnParams: width/weight count != hidden width");
  for (double r : recurrent_weights)
    if (r < -1.0 || r > 1.0)
      throw InvalidParameter("RrbfnParams: recurrent weight outside [-1, 1]");
  for (double s : widths)
    if (!(s > 0.0))
      throw InvalidParameter("RrbfnParams: widths must be positive");
}

RrbfnState zero_state(const RrbfnParams& params) {
  return RrbfnState{std::vector<double>(static_cast<std::size_t>(params.input_width), 0.0)};
}

FncacFeatures FncacFeatures::build(std::span<const NetworkSnapshot> pools,
                                   const TrafficClass& cls, double cost_bias) {
  if (pools.empty())
    throw InvalidParameter("FncacFeatures: at least one RAT snapshot required");
  FncacFeatures f;
  f.per_rat_available.reserve(pools.size());
  for (const auto& pool : pools)
    f.per_rat_available.push_back(static_cast<double>(pool.available_channels) /
                                  static_cast<double>(pool.total_channels));
  f.demand = cls.channels_required / 3.0;
  switch (cls.id) {
    case ClassId::Type1Conversational: f.qos_onehot = {1.0, 0.0, 0.0}; break;
    case ClassId::Type2Interactive: f.qos_onehot = {0.0, 1.0, 0.0}; break;
    case ClassId::Type3Background: f.qos_onehot = {0.0, 0.0, 1.0}; break;
  }
  f.cost_bias = cost_bias;
  return f;
}

std::vector<double> FncacFeatures::to_vector(int input_width) const {
  const std::size_t natural = per_rat_available.size() + 1 + 3 + 1;
  if (natural > static_cast<std::size_t>(input_width))
    throw InvalidParameter("FncacFeatures: " + std::to_string(natural) +
                           " features exceed the configured input width of " +
                           std::to_string(input_width));
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(input_width));
  v.insert(v.end(), per_rat_available.begin(), per_rat_available.end());
  v.push_back(demand);
  v.insert(v.end(), qos_onehot.begin(), qos_onehot.end());
  v.push_back(cost_bias);
  v.resize(static_cast<std::size_t>(input_width), 0.0);
  return v;
}

void TrainingSet::validate() const {
  std::size_t width = samples.empty() ? 0 : samples.front().features.size();
  for (const auto& s : samples) {
    if (s.label != 0.0 && s.label != 1.0)
      throw InvalidParameter("TrainingSet: labels must be 0 or 1");
    if (s.features.size() != width)
      throw InvalidParameter("TrainingSet: inconsistent feature widths");
  }
}

bool TrainingSet::has_both_labels() const {
  bool zero = false, one = false;
  for (const auto& s : samples) (s.label == 0.0 ? zero : one) = true;
  return zero && one;
}

std::pair<std::vector<double>, RrbfnState> recurrent_input(
    std::span<const double> features, const RrbfnState& state,
    const RrbfnParams& params) {
  const auto m = static_cast<std::size_t>(params.input_width);
  if (features.size() != m)
    throw InvalidParameter("recurrent_input: feature length != input width");
  if (state.previous_activations.size() != m)
    throw InvalidParameter("recurrent_input: state length != input width");
  std::vector<double> activations(m);
  for (std::size_t j = 0; j < m; ++j)
    activations[j] =
        sigmoid(features[j] + params.recurrent_weights[j] * state.previous_activations[j]);
  RrbfnState next{activations};
  return {std::move(activations), std::move(next)};
}

double rbf_forward(std::span<const double> activations, const RrbfnParams& params) {
  const auto m = static_cast<std::size_t>(params.input_width);
  if (activations.size() != m)
    throw InvalidParameter("rbf_forward: activation length != input width");
  double out = params.bias;
  for (int i = 0; i < params.hidden_width; ++i) {
    double dist2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = activations[j] - params.center(i, static_cast<int>(j));
      dist2 += d * d;
    }
    out += params.output_weights[static_cast<std::size_t>(i)] *
           std::exp(-dist2 / params.widths[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::pair<double, RrbfnState> forward(std::span<const double> features,
                                      const RrbfnState& state,
                                      const RrbfnParams& params) {
  auto [activations, next] = recurrent_input(features, state, params);
  const double linear = rbf_forward(activations, params);
  return {sigmoid(linear), std::move(next)};
}

double loss(const RrbfnParams& params, std::span<const TrainingSample> batch) {
  if (batch.empty()) throw InvalidParameter("loss: empty batch");
  double acc = 0.0;
  for (const auto& sample : batch) {
    const auto [out, next] = forward(sample.features, zero_state(params), params);
    const double e = out - sample.label;
    acc += e * e;
  }
  return acc / static_cast<double>(batch.size());
}

double RrbfnGradient::max_abs() const {
  double m = std::fabs(bias);
  for (double g : centers) m = std::max(m, std::fabs(g));
  for (double g : widths) m = std::max(m, std::fabs(g));
  for (double g : output_weights) m = std::max(m, std::fabs(g));
  return m;
}

RrbfnGradient gradient(const RrbfnParams& params, std::span<const TrainingSample> batch) {
  if (batch.empty()) throw InvalidParameter("gradient: empty batch");
  const auto m = static_cast<std::size_t>(params.input_width);
  const auto h = static_cast<std::size_t>(params.hidden_width);

  RrbfnGradient grad;
  grad.centers.assign(h * m, 0.0);
  grad.widths.assign(h, 0.0);
  grad.output_weights.assign(h, 0.0);
  grad.bias = 0.0;

  std::vector<double> phi(h), dist2(h);
  for (const auto& sample : batch) {
    const auto [act, next] = recurrent_input(sample.features, zero_state(params), params);
    double z = params.bias;
    for (std::size_t i = 0; i < h; ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double d = act[j] - params.centers[i * m + j];
        d2 += d * d;
      }
      dist2[i] = d2;
      phi[i] = std::exp(-d2 / params.widths[i]);
      z += params.output_weights[i] * phi[i];
    }
    const double out = sigmoid(z);
    const double dz = 2.0 * (out - sample.label) * out * (1.0 - out);

    grad.bias += dz;
    for (std::size_t i = 0; i < h; ++i) {
      const double w_phi_dz = dz * params.output_weights[i] * phi[i];
      grad.output_weights[i] += dz * phi[i];
      grad.widths[i] += w_phi_dz * dist2[i] / (params.widths[i] * params.widths[i]);
      for (std::size_t j = 0; j < m; ++j)
        grad.centers[i * m + j] +=
            w_phi_dz * 2.0 * (act[j] - params.centers[i * m + j]) / params.widths[i];
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  grad.bias *= inv_n;
  for (double& g : grad.centers) g *= inv_n;
  for (double& g : grad.widths) g *= inv_n;
  for (double& g : grad.output_weights) g *= inv_n;
  return grad;
}

namespace {

void apply_step(RrbfnParams& params, const RrbfnGradient& grad, double lr) {
  params.bias -= lr * grad.bias;
  for (std::size_t i = 0; i < params.output_weights.size(); ++i)
    params.output_weights[i] -= lr * grad.output_weights[i];
  for (std::size_t i = 0; i < params.centers.size(); ++i)
    params.centers[i] -= lr * grad.centers[i];
  for (std::size_t i = 0; i < params.widths.size(); ++i)
    params.widths[i] = std::max(kMinWidth, params.widths[i] - lr * grad.widths[i]);
}

double accuracy(const RrbfnParams& params, std::span<const TrainingSample> set) {
  if (set.empty()) return 0.0;
  int agree = 0;
  for (const auto& sample : set) {
    const auto [out, next] = forward(sample.features, zero_state(params), params);
    const bool admit = out >= 0.5;
    if (admit == (sample.label >= 0.5)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(set.size());
}

}  // namespace

TrainResult train(const RrbfnParams& initial, const TrainingSet& data, int epochs,
                  double learning_rate, std::uint64_t seed, int batch_size) {
  initial.validate();
  data.validate();
  if (learning_rate <= 0.0) throw InvalidParameter("train: learning_rate must be > 0");
  if (epochs < 0) throw InvalidParameter("train: epochs must be >= 0");
  if (batch_size < 1) throw InvalidParameter("train: batch_size must be >= 1");
  if (data.samples.empty()) throw InvalidParameter("train: empty training set");

  RandomStream rng(seed);
  std::vector<std::size_t> order(data.samples.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  const std::size_t train_count =
      std::max<std::size_t>(1, order.size() * 8 / 10);
  std::vector<TrainingSample> train_set, holdout;
  train_set.reserve(train_count);
  holdout.reserve(order.size() - train_count);
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < train_count ? train_set : holdout).push_back(data.samples[order[k]]);
  if (holdout.empty()) holdout = train_set;  // degenerate tiny sets

  TrainResult result;
  result.params = initial;
  RrbfnParams current = initial;
  double best_holdout = loss(current, holdout);
  result.holdout_loss = best_holdout;

  if (epochs == 0) {
    result.holdout_accuracy = accuracy(result.params, holdout);
    result.final_train_loss = loss(current, train_set);
    return result;
  }

  std::vector<std::size_t> train_order(train_set.size());
  std::iota(train_order.begin(), train_order.end(), 0);
  std::vector<TrainingSample> batch;
  batch.reserve(static_cast<std::size_t>(batch_size));

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(train_order);
    for (std::size_t start = 0; start < train_order.size();
         start += static_cast<std::size_t>(batch_size)) {
      batch.clear();
      const std::size_t stop =
          std::min(train_order.size(), start + static_cast<std::size_t>(batch_size));
      for (std::size_t k = start; k < stop; ++k)
        batch.push_back(train_set[train_order[k]]);
      apply_step(current, gradient(current, batch), learning_rate);
    }
    const double train_loss = loss(current, train_set);
    if (!std::isfinite(train_loss))
      throw TrainingError("train: loss became non-finite at epoch " +
                              std::to_string(epoch),
                          epoch);
    const double holdout_loss = loss(current, holdout);
    if (holdout_loss < best_holdout) {
      best_holdout = holdout_loss;
      result.params = current;
    }
    result.final_train_loss = train_loss;
    result.epochs_run = epoch + 1;
  }
  result.holdout_loss = best_holdout;
  result.holdout_accuracy = accuracy(result.params, holdout);
  return result;
}

RrbfnParams random_params(int input_width, int hidden_width, RandomStream& rng) {
  if (input_width < 1 || hidden_width < 1)
    throw InvalidParameter("random_params: layer widths must be positive");
  RrbfnParams p;
  p.input_width = input_width;
  p.hidden_width = hidden_width;
  const auto m = static_cast<std::size_t>(input_width);
  const auto h = static_cast<std::size_t>(hidden_width);
  p.recurrent_weights.resize(m);
  for (double& r : p.recurrent_weights) {
    do {
      r = 0.5 * rng.normal();
    } while (r < -1.0 || r > 1.0);
  }
  p.centers.resize(h * m);
  for (double& c : p.centers) c = rng.uniform01();
  p.widths.resize(h);
  for (double& s : p.widths) s = 0.5 + rng.uniform01();
  p.output_weights.resize(h);
  for (double& w : p.output_weights) w = 0.5 * rng.normal();
  p.bias = 0.0;
  return p;
}

RrbfnParams init_from_data(int input_width, int hidden_width, const TrainingSet& data,
                           RandomStream& rng) {
  if (data.samples.empty())
    throw InvalidParameter("init_from_data: empty training set");
  RrbfnParams p = random_params(input_width, hidden_width, rng);
  const auto m = static_cast<std::size_t>(input_width);
  const auto h = static_cast<std::size_t>(hidden_width);

  // Centers: input-layer activations of randomly drawn samples.
  for (std::size_t i = 0; i < h; ++i) {
    const auto& sample =
        data.samples[static_cast<std::size_t>(rng.bounded(data.samples.size()))];
    if (sample.features.size() != m)
      throw InvalidParameter("init_from_data: sample width != input width");
    const auto [act, next] = recurrent_input(sample.features, zero_state(p), p);
    std::copy(act.begin(), act.end(), p.centers.begin() + static_cast<std::ptrdiff_t>(i * m));
  }

  // Widths: mean pairwise center distance, shared by every unit.
  double dist_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = i + 1; j < h; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const double d = p.centers[i * m + c] - p.centers[j * m + c];
        d2 += d * d;
      }
      dist_sum += std::sqrt(d2);
      ++pairs;
    }
  }
  const double mean_dist = pairs > 0 ? dist_sum / static_cast<double>(pairs) : 1.0;
  std::fill(p.widths.begin(), p.widths.end(), std::max(kMinWidth, mean_dist));
  return p;
}

namespace {

/// All per-class occupancy vectors whose channel demand fits the pool.
std::vector<std::vector<int>> feasible_states(int total,
                                              const std::vector<TrafficClass>& classes) {
  std::vector<std::vector<int>> states;
  std::vector<int> current(classes.size(), 0);
  const std::size_t k = classes.size();
  std::function<void(std::size_t, int)> recurse = [&](std::size_t idx, int used) {
    if (idx == k) {
      states.push_back(current);
      return;
    }
    const int demand = classes[idx].channels_required;
    for (int count = 0; used + count * demand <= total; ++count) {
      current[idx] = count;
      recurse(idx + 1, used + count * demand);
    }
    current[idx] = 0;
  };
  recurse(0, 0);
  return states;
}

}  // namespace

TrainingSet generate_training_set(const SystemConfig& config,
                                  const AdmissionPolicy& teacher, int size,
                                  std::uint64_t seed, int rats, double cost_bias,
                                  int input_width) {
  config.validate();
  if (size < 10) throw InvalidParameter("generate_training_set: size must be >= 10");
  if (rats < 1) throw InvalidParameter("generate_training_set: rats must be >= 1");

  const std::vector<int> pool_sizes = partition_channels(config.total_channels, rats);
  std::vector<std::vector<std::vector<int>>> pool_states;
  pool_states.reserve(pool_sizes.size());
  for (int pool : pool_sizes) pool_states.push_back(feasible_states(pool, config.classes));

  RandomStream rng(seed);
  TrainingSet set;
  set.samples.reserve(static_cast<std::size_t>(size));
  for (int s = 0; s < size; ++s) {
    std::vector<NetworkSnapshot> pools;
    pools.reserve(pool_sizes.size());
    for (std::size_t r = 0; r < pool_sizes.size(); ++r) {
      const auto& states = pool_states[r];
      const auto& occupancy =
          states[static_cast<std::size_t>(rng.bounded(states.size()))];
      pools.push_back(make_snapshot(pool_sizes[r], occupancy, config.classes));
    }
    const TrafficClass& cls =
        config.classes[static_cast<std::size_t>(rng.bounded(config.classes.size()))];

    bool admitted = false;
    for (const auto& pool : pools) {
      if (pool.available_channels < cls.channels_required) continue;
      if (teacher.probe(pool, cls).verdict == Verdict::Admit) {
        admitted = true;
        break;
      }
    }
    const FncacFeatures features = FncacFeatures::build(pools, cls, cost_bias);
    set.samples.push_back({features.to_vector(input_width), admitted ? 1.0 : 0.0});
  }
  return set;
}

void save_params(const RrbfnParams& params, const std::filesystem::path& path) {
  params.validate();
  std::ofstream out(path);
  if (!out) throw IoError("save_params: cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  out << "cacsim-rrbfn-v1 " << params.input_width << ' ' << params.hidden_width << '\n';
  out << "recurrent";
  for (double r : params.recurrent_weights) out << ' ' << r;
  out << '\n';
  out << "bias " << params.bias << '\n';
  out << "output_weights";
  for (double w : params.output_weights) out << ' ' << w;
  out << '\n';
  out << "widths";
  for (double s : params.widths) out << ' ' << s;
  out << '\n';
  out << "centers";
  for (double c : params.centers) out << ' ' << c;
  out << '\n';
  if (!out) throw IoError("save_params: write failed for " + path.string());
}

namespace {

std::vector<double> read_record(std::istream& in, const std::string& expected,
                                std::size_t count, const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path + ": missing '" + expected + "' record");
  std::istringstream fields(line);
  std::string label;
  fields >> label;
  if (label != expected)
    throw ParseError(path + ": expected record '" + expected + "', found '" + label + "'");
  std::vector<double> values;
  values.reserve(count);
  double v = 0.0;
  while (fields >> v) values.push_back(v);
  if (values.size() != count)
    throw ParseError(path + ": record '" + expected + "' holds " +
                     std::to_string(values.size()) + " values, expected " +
                     std::to_string(count));
  return values;
}

}  // namespace

RrbfnParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_params: cannot open " + path.string());
  std::string magic;
  RrbfnParams p;
  in >> magic >> p.input_width >> p.hidden_width;
  if (!in || magic != "cacsim-rrbfn-v1")
    throw ParseError(path.string() + ": not a cacsim-rrbfn-v1 parameter file");
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  const auto m = static_cast<std::size_t>(p.input_width);
  const auto h = static_cast<std::size_t>(p.hidden_width);
  p.recurrent_weights = read_record(in, "recurrent", m, path.string());
  p.bias = read_record(in, "bias", 1, path.string())[0];
  p.output_weights = read_record(in, "output_weights", h, path.string());
  p.widths = read_record(in, "widths", h, path.string());
  p.centers = read_record(in, "centers", h * m, path.string());
  p.validate();
  return p;
}

FncacPolicy::FncacPolicy(RrbfnParams params, double cost_bias)
    : params_(std::move(params)), cost_bias_(cost_bias), state_(zero_state(params_)) {
  params_.validate();
}

AdmissionDecision FncacPolicy::scored(std::span<const NetworkSnapshot> pools,
                                      const TrafficClass& cls, RrbfnState& state) const {
  const FncacFeatures features = FncacFeatures::build(pools, cls, cost_bias_);
  const auto [output, next] =
      forward(features.to_vector(params_.input_width), state, params_);
  state = next;
  bool feasible = false;
  for (const auto& pool : pools)
    if (pool.available_channels >= cls.channels_required) {
      feasible = true;
      break;
    }
  if (output >= 0.5 && feasible) return {Verdict::Admit, output};
  return {Verdict::Reject, output};
}

AdmissionDecision FncacPolicy::probe(const NetworkSnapshot& snapshot,
                                     const TrafficClass& cls) const {
  RrbfnState discard = zero_state(params_);
  return scored({&snapshot, 1}, cls, discard);
}

AdmissionDecision FncacPolicy::decide(const NetworkSnapshot& snapshot,
                                      const TrafficClass& cls) {
  return scored({&snapshot, 1}, cls, state_);
}

MultiRatDecision FncacPolicy::decide_multi(std::span<const NetworkSnapshot> pools,
                                           const TrafficClass& cls) {
  const AdmissionDecision d = scored(pools, cls, state_);
  int rat = -1;
  if (d.verdict == Verdict::Admit)
    for (std::size_t r = 0; r < pools.size(); ++r)
      if (pools[r].available_channels >= cls.channels_required) {
        rat = static_cast<int>(r);
        break;
      }
  return {d, rat};
}

void FncacPolicy::reset() { state_ = zero_state(params_); }

}  // namespace cacsim
