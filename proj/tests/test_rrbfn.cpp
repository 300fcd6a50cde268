#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cacsim/rrbfn.hpp"

using namespace cacsim;

namespace {

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

RrbfnParams tiny_net(int input, int hidden, std::uint64_t seed) {
  RandomStream rng(seed);
  return random_params(input, hidden, rng);
}

TrainingSet random_batch(const RrbfnParams& params, int count, std::uint64_t seed) {
  RandomStream rng(seed);
  TrainingSet set;
  for (int s = 0; s < count; ++s) {
    TrainingSample sample;
    sample.features.resize(static_cast<std::size_t>(params.input_width));
    for (double& f : sample.features) f = rng.uniform01();
    sample.label = rng.uniform01() < 0.5 ? 0.0 : 1.0;
    set.samples.push_back(std::move(sample));
  }
  return set;
}

// Central finite differences over every trainable parameter.
RrbfnGradient fd_gradient(RrbfnParams params, std::span<const TrainingSample> batch,
                          double step) {
  RrbfnGradient g;
  g.centers.assign(params.centers.size(), 0.0);
  g.widths.assign(params.widths.size(), 0.0);
  g.output_weights.assign(params.output_weights.size(), 0.0);
  const auto probe = [&](double& slot) {
    const double saved = slot;
    slot = saved + step;
    const double up = loss(params, batch);
    slot = saved - step;
    const double down = loss(params, batch);
    slot = saved;
    return (up - down) / (2.0 * step);
  };
  g.bias = probe(params.bias);
  for (std::size_t i = 0; i < params.output_weights.size(); ++i)
    g.output_weights[i] = probe(params.output_weights[i]);
  for (std::size_t i = 0; i < params.widths.size(); ++i)
    g.widths[i] = probe(params.widths[i]);
  for (std::size_t i = 0; i < params.centers.size(); ++i)
    g.centers[i] = probe(params.centers[i]);
  return g;
}

double relative_error(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-6});
  return std::fabs(a - b) / scale;
}

double max_relative_error(const RrbfnGradient& a, const RrbfnGradient& b) {
  double worst = relative_error(a.bias, b.bias);
  for (std::size_t i = 0; i < a.output_weights.size(); ++i)
    worst = std::max(worst, relative_error(a.output_weights[i], b.output_weights[i]));
  for (std::size_t i = 0; i < a.widths.size(); ++i)
    worst = std::max(worst, relative_error(a.widths[i], b.widths[i]));
  for (std::size_t i = 0; i < a.centers.size(); ++i)
    worst = std::max(worst, relative_error(a.centers[i], b.centers[i]));
  return worst;
}

}  // namespace

TEST_CASE("input layer with severed recurrence is a plain sigmoid") {
  RrbfnParams params = tiny_net(3, 2, 1);
  std::fill(params.recurrent_weights.begin(), params.recurrent_weights.end(), 0.0);

  const std::vector<double> zeros{0.0, 0.0, 0.0};
  const auto [act0, state0] = recurrent_input(zeros, zero_state(params), params);
  for (const double a : act0) CHECK(a == doctest::Approx(0.5));

  // Any state: same output when r = 0.
  RrbfnState loaded{{0.9, -0.4, 0.2}};
  const std::vector<double> features{0.3, -1.0, 2.0};
  const auto [act1, s1] = recurrent_input(features, loaded, params);
  const auto [act2, s2] = recurrent_input(features, zero_state(params), params);
  for (std::size_t j = 0; j < act1.size(); ++j) {
    CHECK(act1[j] == doctest::Approx(act2[j]));
    CHECK(act1[j] == doctest::Approx(sigmoid_ref(features[j])));
  }
}

TEST_CASE("self-connection feeds the previous activation back") {
  RrbfnParams params = tiny_net(1, 1, 2);
  params.recurrent_weights = {1.0};
  RrbfnState state{{0.5}};
  const std::vector<double> feature{0.0};
  const auto [act, next] = recurrent_input(feature, state, params);
  CHECK(act[0] == doctest::Approx(sigmoid_ref(0.5)).epsilon(1e-12));
  CHECK(next.previous_activations[0] == doctest::Approx(act[0]));
}

TEST_CASE("recurrent_input rejects mismatched feature length") {
  RrbfnParams params = tiny_net(3, 2, 3);
  const std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(recurrent_input(wrong, zero_state(params), params), InvalidParameter);
}

TEST_CASE("rbf output at a center is the unit response times the weight") {
  RrbfnParams params;
  params.input_width = 4;
  params.hidden_width = 1;
  params.recurrent_weights.assign(4, 0.0);
  params.centers = {0.2, 0.4, 0.6, 0.8};
  params.widths = {0.7};
  params.output_weights = {2.0};
  params.bias = 0.0;
  CHECK(rbf_forward(params.centers, params) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("weightless network returns its bias") {
  RrbfnParams params = tiny_net(5, 3, 4);
  std::fill(params.output_weights.begin(), params.output_weights.end(), 0.0);
  params.bias = 0.7;
  const std::vector<double> anywhere{0.1, 0.9, 0.4, 0.2, 0.6};
  CHECK(rbf_forward(anywhere, params) == doctest::Approx(0.7));
}

TEST_CASE("unit gaussian at distance one responds with exp(-1)") {
  RrbfnParams params;
  params.input_width = 3;
  params.hidden_width = 1;
  params.recurrent_weights.assign(3, 0.0);
  params.centers = {0.0, 0.0, 0.0};
  params.widths = {1.0};
  params.output_weights = {1.0};
  params.bias = 0.0;
  const std::vector<double> input{1.0, 0.0, 0.0};
  CHECK(rbf_forward(input, params) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("forward is deterministic and squashes into the unit interval") {
  const RrbfnParams params = tiny_net(4, 6, 5);
  RandomStream rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> features(4);
    for (double& f : features) f = rng.uniform01();
    const auto [out1, s1] = forward(features, zero_state(params), params);
    const auto [out2, s2] = forward(features, zero_state(params), params);
    CHECK(out1 == out2);
    CHECK(s1 == s2);
    CHECK(out1 >= 0.0);
    CHECK(out1 <= 1.0);
  }
}

TEST_CASE("zero recurrent weights make sequences order-free") {
  RrbfnParams params = tiny_net(3, 4, 6);
  std::fill(params.recurrent_weights.begin(), params.recurrent_weights.end(), 0.0);
  const std::vector<double> first{0.9, 0.1, 0.5};
  const std::vector<double> second{0.2, 0.8, 0.3};

  auto [o1, state_after_first] = forward(first, zero_state(params), params);
  const auto [chained, s2] = forward(second, state_after_first, params);
  const auto [isolated, s3] = forward(second, zero_state(params), params);
  CHECK(chained == doctest::Approx(isolated).epsilon(1e-15));
}

TEST_CASE("recurrence carries first-step information into the second step") {
  RrbfnParams params = tiny_net(2, 3, 7);
  std::fill(params.recurrent_weights.begin(), params.recurrent_weights.end(), 1.0);
  const std::vector<double> shared{0.5, 0.5};
  const std::vector<double> first_a{0.0, 0.0};
  const std::vector<double> first_b{3.0, -3.0};

  auto [oa, state_a] = forward(first_a, zero_state(params), params);
  auto [ob, state_b] = forward(first_b, zero_state(params), params);
  const auto [out_a, sa] = forward(shared, state_a, params);
  const auto [out_b, sb] = forward(shared, state_b, params);
  CHECK(out_a != out_b);
}

TEST_CASE("loss of a perfect fit is zero and of a coin flip is a quarter") {
  RrbfnParams params = tiny_net(2, 2, 8);
  std::fill(params.output_weights.begin(), params.output_weights.end(), 0.0);
  params.bias = 0.0;  // output sigmoid(0) = 0.5 everywhere

  TrainingSet balanced;
  balanced.samples = {{{0.1, 0.2}, 0.0}, {{0.8, 0.9}, 1.0},
                      {{0.4, 0.6}, 0.0}, {{0.3, 0.7}, 1.0}};
  CHECK(loss(params, balanced.samples) == doctest::Approx(0.25).epsilon(1e-12));

  // Perfect fit: label every sample with the network's own output.
  const RrbfnParams net = tiny_net(2, 3, 9);
  TrainingSet echoed = random_batch(net, 6, 10);
  for (auto& sample : echoed.samples) {
    const auto [out, s] = forward(sample.features, zero_state(net), net);
    sample.label = out;
  }
  CHECK(loss(net, echoed.samples) == doctest::Approx(0.0));
  const RrbfnGradient grad = gradient(net, echoed.samples);
  CHECK(grad.max_abs() < 1e-8);
}

TEST_CASE("loss is non-negative and rejects empty batches") {
  const RrbfnParams params = tiny_net(3, 3, 11);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const TrainingSet set = random_batch(params, 5, 100 + s);
    CHECK(loss(params, set.samples) >= 0.0);
  }
  CHECK_THROWS_AS(loss(params, {}), InvalidParameter);
  CHECK_THROWS_AS(gradient(params, {}), InvalidParameter);
}

// The module's gate-keeping oracle: every analytic partial must match
// central differences (step 1e-5) within relative error 1e-4.
TEST_CASE("analytic gradient matches finite differences on random nets") {
  for (std::uint64_t restart = 0; restart < 20; ++restart) {
    const RrbfnParams params = tiny_net(4, 3, 1000 + restart);
    const TrainingSet batch = random_batch(params, 8, 2000 + restart);
    const RrbfnGradient analytic = gradient(params, batch.samples);
    const RrbfnGradient numeric = fd_gradient(params, batch.samples, 1e-5);
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("batch gradient is the mean of per-sample gradients") {
  const RrbfnParams params = tiny_net(3, 4, 31);
  const TrainingSet batch = random_batch(params, 10, 32);
  const RrbfnGradient whole = gradient(params, batch.samples);

  RrbfnGradient mean;
  mean.centers.assign(params.centers.size(), 0.0);
  mean.widths.assign(params.widths.size(), 0.0);
  mean.output_weights.assign(params.output_weights.size(), 0.0);
  for (const auto& sample : batch.samples) {
    const RrbfnGradient g = gradient(params, {&sample, 1});
    mean.bias += g.bias;
    for (std::size_t i = 0; i < g.centers.size(); ++i) mean.centers[i] += g.centers[i];
    for (std::size_t i = 0; i < g.widths.size(); ++i) mean.widths[i] += g.widths[i];
    for (std::size_t i = 0; i < g.output_weights.size(); ++i)
      mean.output_weights[i] += g.output_weights[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.samples.size());
  CHECK(std::fabs(whole.bias - mean.bias * inv) < 1e-12);
  for (std::size_t i = 0; i < whole.centers.size(); ++i)
    CHECK(std::fabs(whole.centers[i] - mean.centers[i] * inv) < 1e-12);
  for (std::size_t i = 0; i < whole.widths.size(); ++i)
    CHECK(std::fabs(whole.widths[i] - mean.widths[i] * inv) < 1e-12);
  for (std::size_t i = 0; i < whole.output_weights.size(); ++i)
    CHECK(std::fabs(whole.output_weights[i] - mean.output_weights[i] * inv) < 1e-12);
}

TEST_CASE("zero epochs returns the initial parameters unchanged") {
  const RrbfnParams params = tiny_net(2, 3, 41);
  const TrainingSet data = random_batch(params, 40, 42);
  const TrainResult result = train(params, data, 0, 0.05, 7);
  CHECK(result.params == params);
}

TEST_CASE("training is reproducible given the seed") {
  const RrbfnParams params = tiny_net(2, 4, 51);
  const TrainingSet data = random_batch(params, 60, 52);
  const TrainResult a = train(params, data, 30, 0.05, 1234);
  const TrainResult b = train(params, data, 30, 0.05, 1234);
  CHECK(a.params == b.params);
  CHECK(a.holdout_loss == b.holdout_loss);
}

TEST_CASE("returned parameters never lose to the starting point on held-out loss") {
  const RrbfnParams params = tiny_net(3, 6, 55);
  const TrainingSet data = random_batch(params, 80, 56);
  // Same seed means the same 80/20 split, so the losses are comparable.
  const TrainResult baseline = train(params, data, 0, 0.1, 777);
  const TrainResult trained = train(params, data, 60, 0.1, 777);
  CHECK(trained.holdout_loss <= baseline.holdout_loss);
}

TEST_CASE("training keeps widths floored and recurrent weights frozen") {
  const RrbfnParams params = tiny_net(2, 4, 61);
  const TrainingSet data = random_batch(params, 50, 62);
  const TrainResult result = train(params, data, 50, 0.5, 63);
  CHECK(result.params.recurrent_weights == params.recurrent_weights);
  for (const double w : result.params.widths) CHECK(w >= kMinWidth);
}

TEST_CASE("linearly separable data trains to high held-out accuracy") {
  // Labels split by x + y > 0 with a wide margin; the feature range keeps
  // the input-layer sigmoids away from their flat center.
  RandomStream rng(71);
  TrainingSet data;
  while (data.samples.size() < 200) {
    const double x = 6.0 * rng.uniform01() - 3.0;
    const double y = 6.0 * rng.uniform01() - 3.0;
    if (std::fabs(x + y) < 0.6) continue;  // margin
    data.samples.push_back({{x, y}, x + y > 0.0 ? 1.0 : 0.0});
  }
  RandomStream init_rng(72);
  const RrbfnParams initial = init_from_data(2, 8, data, init_rng);
  const TrainResult result = train(initial, data, 500, 0.05, 73, 16);
  CHECK(result.holdout_accuracy >= 0.95);
}

TEST_CASE("poisoned parameters raise a training error naming the epoch") {
  RrbfnParams params = tiny_net(2, 2, 81);
  params.bias = std::nan("");
  const TrainingSet data = random_batch(params, 40, 82);
  try {
    train(params, data, 3, 0.05, 83);
    FAIL("expected TrainingError");
  } catch (const TrainingError& err) {
    CHECK(err.epoch() == 0);
  }
}

TEST_CASE("parameter files round-trip exactly") {
  const RrbfnParams params = tiny_net(5, 7, 91);
  const auto path = std::filesystem::temp_directory_path() / "cacsim_params_test.txt";
  save_params(params, path);
  const RrbfnParams loaded = load_params(path);
  CHECK(loaded == params);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt parameter files are rejected") {
  const auto path = std::filesystem::temp_directory_path() / "cacsim_params_bad.txt";
  {
    std::ofstream out(path);
    out << "not-a-params-file 3 2\n";
  }
  CHECK_THROWS_AS(load_params(path), ParseError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_params(path), ParseError);  // missing file
}

TEST_CASE("feature vectors are padded and validated") {
  const std::vector<TrafficClass> classes = canonical_classes(1.0, 1.0);
  const NetworkSnapshot pool = make_snapshot(10, {2, 1, 0}, classes);
  const FncacFeatures features = FncacFeatures::build({&pool, 1}, classes[2], 0.5);
  CHECK(features.per_rat_available.size() == 1);
  CHECK(features.per_rat_available[0] == doctest::Approx(0.6));
  CHECK(features.demand == doctest::Approx(1.0));
  CHECK(features.qos_onehot[2] == 1.0);

  const std::vector<double> v = features.to_vector(8);
  REQUIRE(v.size() == 8);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(1.0));
  CHECK(v[4] == 1.0);
  CHECK(v[5] == 0.5);
  CHECK(v[6] == 0.0);
  CHECK(v[7] == 0.0);
  CHECK_THROWS_AS(features.to_vector(5), InvalidParameter);
}

TEST_CASE("fncac rejects infeasible calls regardless of the network") {
  RrbfnParams params = tiny_net(8, 4, 101);
  std::fill(params.output_weights.begin(), params.output_weights.end(), 0.0);
  params.bias = 5.0;  // network says admit loudly
  FncacPolicy policy(params, 1.0);
  const std::vector<TrafficClass> classes = canonical_classes(1.0, 1.0);
  const NetworkSnapshot full = make_snapshot(6, {6, 0, 0}, classes);
  for (const auto& cls : classes)
    CHECK(policy.probe(full, cls).verdict == Verdict::Reject);
}

TEST_CASE("an indifferent network admits on the tie when feasible") {
  RrbfnParams params = tiny_net(8, 4, 111);
  std::fill(params.output_weights.begin(), params.output_weights.end(), 0.0);
  params.bias = 0.0;  // sigmoid(0) = 0.5, exactly the threshold
  FncacPolicy policy(params, 1.0);
  const std::vector<TrafficClass> classes = canonical_classes(1.0, 1.0);
  const NetworkSnapshot open = make_snapshot(6, {0, 0, 0}, classes);
  const auto decision = policy.probe(open, classes[0]);
  CHECK(decision.score == doctest::Approx(0.5));
  CHECK(decision.verdict == Verdict::Admit);
}

TEST_CASE("fncac decide_multi places first-fit and keeps state across calls") {
  RrbfnParams params = tiny_net(8, 4, 121);
  std::fill(params.output_weights.begin(), params.output_weights.end(), 0.0);
  params.bias = 5.0;
  FncacPolicy policy(params, 1.0);
  const std::vector<TrafficClass> classes = canonical_classes(1.0, 1.0);
  const std::vector<NetworkSnapshot> pools{
      make_snapshot(3, {3, 0, 0}, classes),  // full
      make_snapshot(3, {0, 0, 0}, classes),  // open
  };
  const auto outcome = policy.decide_multi(pools, classes[2]);
  CHECK(outcome.decision.verdict == Verdict::Admit);
  CHECK(outcome.rat == 1);

  // Memory: the recurrent state moved away from zero.
  CHECK(policy.state().previous_activations != zero_state(params).previous_activations);
  policy.reset();
  CHECK(policy.state().previous_activations == zero_state(params).previous_activations);
}

TEST_CASE("training snapshots are generated uniformly and labeled by the teacher") {
  SystemConfig sys;
  sys.total_channels = 30;
  sys.classes = canonical_classes(1.0, 1.0);
  sys.thresholds = {20, 24, 27};
  sys.rng_seed = 0;

  SUBCASE("reject-all teacher labels everything zero") {
    RejectAllPolicy teacher;
    const TrainingSet set = generate_training_set(sys, teacher, 100, 5, 1, 1.0, 8);
    CHECK(set.samples.size() == 100);
    for (const auto& sample : set.samples) CHECK(sample.label == 0.0);
  }
  SUBCASE("threshold teacher produces both labels at the default scale") {
    ThresholdPolicy teacher(sys.thresholds);
    const TrainingSet set = generate_training_set(sys, teacher, 1000, 6, 1, 1.0, 8);
    CHECK(set.samples.size() == 1000);
    set.validate();
    CHECK(set.has_both_labels());
  }
  SUBCASE("generation is deterministic and respects the minimum size") {
    AdmitIfFitsPolicy teacher;
    const TrainingSet a = generate_training_set(sys, teacher, 50, 7, 1, 1.0, 8);
    const TrainingSet b = generate_training_set(sys, teacher, 50, 7, 1, 1.0, 8);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].features == b.samples[i].features);
      CHECK(a.samples[i].label == b.samples[i].label);
    }
    CHECK_THROWS_AS(generate_training_set(sys, teacher, 5, 7, 1, 1.0, 8),
                    InvalidParameter);
  }
}
