#include "cacsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cacsim {

std::string_view policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Conventional: return "conventional";
    case PolicyKind::Fuzzy: return "fuzzy";
    case PolicyKind::Fncac: return "fncac";
  }
  return "unknown";
}

std::vector<double> SweepGrid::points() const {
  std::vector<double> pts;
  const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  for (int i = 0; i <= count; ++i) pts.push_back(start + i * step);
  return pts;
}

SystemConfig ExperimentConfig::system() const {
  SystemConfig sys;
  sys.total_channels = total_channels;
  sys.thresholds = thresholds;
  sys.rng_seed = seed;
  sys.classes = canonical_classes(1.0, 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    sys.classes[i].arrival_rate = lambda[i];
    sys.classes[i].service_rate = mu[i];
  }
  return sys;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> tokens_of(std::string_view value) {
  std::vector<std::string> tokens;
  std::istringstream stream{std::string(value)};
  std::string tok;
  while (stream >> tok) tokens.push_back(tok);
  return tokens;
}

[[noreturn]] void fail(std::string_view origin, int line, const std::string& message) {
  throw ParseError(std::string(origin) + ":" + std::to_string(line) + ": " + message);
}

struct RawEntry {
  std::string value;
  int line = 0;
};

/// section.key -> entry, with duplicate detection.
class RawConfig {
public:
  RawConfig(std::string_view text, std::string_view origin) : origin_(origin) {
    std::istringstream stream{std::string(text)};
    std::string raw_line;
    int line_no = 0;
    std::string section;
    while (std::getline(stream, raw_line)) {
      ++line_no;
      std::string_view line = raw_line;
      if (const auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          fail(origin_, line_no, "malformed section header '" + std::string(line) + "'");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (section.empty()) fail(origin_, line_no, "empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        fail(origin_, line_no, "expected key = value, got '" + std::string(line) + "'");
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) fail(origin_, line_no, "empty key");
      if (section.empty()) fail(origin_, line_no, "key '" + key + "' outside any section");
      const std::string full = section + "." + key;
      if (entries_.contains(full))
        fail(origin_, line_no, "duplicate key '" + full + "'");
      entries_[full] = RawEntry{value, line_no};
    }
  }

  const std::map<std::string, RawEntry>& entries() const { return entries_; }
  std::string_view origin() const { return origin_; }

  /// Marks a key as recognized; returns its entry when present.
  const RawEntry* take(const std::string& full_key) {
    recognized_.insert(full_key);
    const auto it = entries_.find(full_key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void reject_unknown() const {
    for (const auto& [key, entry] : entries_)
      if (!recognized_.contains(key))
        fail(origin_, entry.line, "unknown key '" + key + "'");
  }

private:
  std::string origin_;
  std::map<std::string, RawEntry> entries_;
  std::set<std::string> recognized_;
};

class Reader {
public:
  Reader(RawConfig& raw, std::vector<std::string>& defaulted)
      : raw_(raw), defaulted_(defaulted) {}

  template <typename T, typename ParseFn>
  void apply(const std::string& key, T& slot, ParseFn&& parse) {
    const RawEntry* entry = raw_.take(key);
    if (entry == nullptr) {
      defaulted_.push_back(key);
      return;
    }
    slot = parse(entry->value, entry->line);
  }

  double parse_double(const std::string& key, const std::string& value, int line) {
    const std::string_view v = value;
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
      fail(raw_.origin(), line, "key '" + key + "': expected a number, got '" + value + "'");
    return out;
  }

  long long parse_int(const std::string& key, const std::string& value, int line) {
    const std::string_view v = value;
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
      fail(raw_.origin(), line,
           "key '" + key + "': expected an integer, got '" + value + "'");
    return out;
  }

  std::uint64_t parse_u64(const std::string& key, const std::string& value, int line) {
    const std::string_view v = value;
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
      fail(raw_.origin(), line,
           "key '" + key + "': expected an unsigned integer, got '" + value + "'");
    return out;
  }

  TriangularSet parse_triangle(const std::string& key, const std::string& value,
                               int line) {
    const auto toks = tokens_of(value);
    if (toks.size() != 3)
      fail(raw_.origin(), line, "key '" + key + "': expected three numbers a b c");
    TriangularSet t;
    t.a = parse_double(key, toks[0], line);
    t.b = parse_double(key, toks[1], line);
    t.c = parse_double(key, toks[2], line);
    return t;
  }

  RawConfig& raw() { return raw_; }

private:
  RawConfig& raw_;
  std::vector<std::string>& defaulted_;
};

RuleOutcome parse_rule_token(const std::string& token, std::string_view origin, int line) {
  if (token == "reject") return RuleOutcome::Reject;
  if (token == "weak") return RuleOutcome::WeakAccept;
  if (token == "strong") return RuleOutcome::StrongAccept;
  fail(origin, line, "rule token '" + token + "' is not reject|weak|strong");
}

std::string_view rule_token(RuleOutcome r) {
  switch (r) {
    case RuleOutcome::Reject: return "reject";
    case RuleOutcome::WeakAccept: return "weak";
    case RuleOutcome::StrongAccept: return "strong";
  }
  return "reject";
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto constraint = [](bool ok, const std::string& message) {
    if (!ok) throw ParseError("config constraint: " + message);
  };
  constraint(total_channels >= 3, "system.total_channels must be >= 3");
  constraint(rats >= 1 && rats <= total_channels,
             "system.rats must be in [1, total_channels]");
  constraint(thresholds.t1 >= 0 && thresholds.t1 < thresholds.t2 &&
                 thresholds.t2 < thresholds.t3,
             "system.t1/t2/t3 must satisfy 0 <= t1 < t2 < t3");
  constraint(thresholds.t3 <= total_channels,
             "system.t3 must not exceed system.total_channels");
  for (std::size_t i = 0; i < 3; ++i) {
    constraint(lambda[i] >= 0.0 && std::isfinite(lambda[i]),
               "system.lambda" + std::to_string(i + 1) + " must be finite and >= 0");
    constraint(mu[i] > 0.0 && std::isfinite(mu[i]),
               "system.mu" + std::to_string(i + 1) + " must be finite and > 0");
  }
  constraint(!policies.empty(), "policies.enabled must select at least one policy");
  for (std::size_t i = 0; i < policies.size(); ++i)
    for (std::size_t j = i + 1; j < policies.size(); ++j)
      constraint(policies[i] != policies[j],
                 "policies.enabled lists a policy more than once");
  constraint(sweep_grid.start >= 0.0, "sweep.start must be >= 0");
  constraint(sweep_grid.step > 0.0, "sweep.step must be > 0");
  constraint(sweep_grid.stop >= sweep_grid.start, "sweep.stop must be >= sweep.start");
  constraint(replications >= 1, "sweep.replications must be >= 1");
  constraint(events >= 1, "simulation.events must be >= 1");
  constraint(warmup_fraction >= 0.0 && warmup_fraction < 1.0,
             "simulation.warmup_fraction must lie in [0, 1)");
  constraint(rrbfn.input_width >= 1, "rrbfn.input_width must be >= 1");
  constraint(rrbfn.input_width >= rats + 5,
             "rrbfn.input_width must be >= rats + 5 natural features");
  constraint(rrbfn.hidden_width >= 1, "rrbfn.hidden_width must be >= 1");
  constraint(rrbfn.epochs >= 0, "rrbfn.epochs must be >= 0");
  constraint(rrbfn.learning_rate > 0.0, "rrbfn.learning_rate must be > 0");
  constraint(rrbfn.batch_size >= 1, "rrbfn.batch_size must be >= 1");
  constraint(rrbfn.training_size >= 10, "rrbfn.training_size must be >= 10");
  constraint(rrbfn.teacher == "admit_if_fits" || rrbfn.teacher == "conventional" ||
                 rrbfn.teacher == "reject_all",
             "rrbfn.teacher must be admit_if_fits|conventional|reject_all");
  constraint(!rrbfn.params_file.empty(), "rrbfn.params_file must not be empty");
  constraint(!output_dir.empty(), "output.dir must not be empty");
  try {
    fuzzy.validate();
  } catch (const InvalidParameter& err) {
    throw ParseError(std::string("config constraint: [fuzzy] ") + err.what());
  }
  try {
    system().validate();
  } catch (const InvalidParameter& err) {
    throw ParseError(std::string("config constraint: [system] ") + err.what());
  }
}

ThresholdSet default_thresholds(int total_channels) {
  ThresholdSet t{2 * total_channels / 3, 4 * total_channels / 5,
                 9 * total_channels / 10};
  if (!(t.t1 >= 0 && t.t1 < t.t2 && t.t2 < t.t3))
    t = ThresholdSet{std::max(0, total_channels - 3), total_channels - 2,
                     total_channels - 1};
  return t;
}

ParsedConfig parse_config_text(std::string_view text, std::string_view origin) {
  RawConfig raw(text, origin);
  ParsedConfig parsed;
  ExperimentConfig& cfg = parsed.config;
  Reader reader(raw, parsed.defaulted_keys);

  const auto read_int = [&](const std::string& key, int& slot, long long lo,
                            long long hi) {
    reader.apply(key, slot, [&](const std::string& v, int line) {
      const long long parsed_value = reader.parse_int(key, v, line);
      if (parsed_value < lo || parsed_value > hi)
        fail(origin, line, "key '" + key + "': value out of range");
      return static_cast<int>(parsed_value);
    });
  };
  const auto read_double = [&](const std::string& key, double& slot) {
    reader.apply(key, slot, [&](const std::string& v, int line) {
      return reader.parse_double(key, v, line);
    });
  };
  const auto read_u64 = [&](const std::string& key, std::uint64_t& slot) {
    reader.apply(key, slot, [&](const std::string& v, int line) {
      return reader.parse_u64(key, v, line);
    });
  };
  const auto read_string = [&](const std::string& key, std::string& slot) {
    reader.apply(key, slot, [&](const std::string& v, int line) {
      if (v.empty()) fail(origin, line, "key '" + key + "': empty value");
      return v;
    });
  };
  const auto read_triangle = [&](const std::string& key, TriangularSet& slot) {
    reader.apply(key, slot, [&](const std::string& v, int line) {
      return reader.parse_triangle(key, v, line);
    });
  };

  read_int("system.total_channels", cfg.total_channels, 1, 1000000);
  read_int("system.rats", cfg.rats, 1, 1000000);
  // Threshold defaults track the configured pool size.
  cfg.thresholds = default_thresholds(cfg.total_channels);
  read_int("system.t1", cfg.thresholds.t1, 0, 1000000);
  read_int("system.t2", cfg.thresholds.t2, 0, 1000000);
  read_int("system.t3", cfg.thresholds.t3, 0, 1000000);
  read_double("system.lambda1", cfg.lambda[0]);
  read_double("system.lambda2", cfg.lambda[1]);
  read_double("system.lambda3", cfg.lambda[2]);
  read_double("system.mu1", cfg.mu[0]);
  read_double("system.mu2", cfg.mu[1]);
  read_double("system.mu3", cfg.mu[2]);
  read_u64("system.seed", cfg.seed);

  reader.apply("policies.enabled", cfg.policies, [&](const std::string& v, int line) {
    std::vector<PolicyKind> kinds;
    for (const auto& tok : tokens_of(v)) {
      if (tok == "conventional") kinds.push_back(PolicyKind::Conventional);
      else if (tok == "fuzzy") kinds.push_back(PolicyKind::Fuzzy);
      else if (tok == "fncac") kinds.push_back(PolicyKind::Fncac);
      else fail(origin, line, "policy '" + tok + "' is not conventional|fuzzy|fncac");
    }
    return kinds;
  });

  read_double("sweep.start", cfg.sweep_grid.start);
  read_double("sweep.stop", cfg.sweep_grid.stop);
  read_double("sweep.step", cfg.sweep_grid.step);
  read_int("sweep.replications", cfg.replications, 1, 1000000);

  read_u64("simulation.events", cfg.events);
  read_double("simulation.warmup_fraction", cfg.warmup_fraction);

  read_double("fuzzy.accept_threshold", cfg.fuzzy.accept_threshold);
  read_triangle("fuzzy.capacity_low", cfg.fuzzy.capacity_sets[0]);
  read_triangle("fuzzy.capacity_medium", cfg.fuzzy.capacity_sets[1]);
  read_triangle("fuzzy.capacity_high", cfg.fuzzy.capacity_sets[2]);
  read_triangle("fuzzy.demand_small", cfg.fuzzy.demand_sets[0]);
  read_triangle("fuzzy.demand_medium", cfg.fuzzy.demand_sets[1]);
  read_triangle("fuzzy.demand_large", cfg.fuzzy.demand_sets[2]);
  reader.apply("fuzzy.rules", cfg.fuzzy.rule_table, [&](const std::string& v, int line) {
    const auto toks = tokens_of(v);
    if (toks.size() != 9)
      fail(origin, line, "key 'fuzzy.rules': expected 9 tokens (capacity-major)");
    std::array<std::array<RuleOutcome, 3>, 3> table;
    for (std::size_t i = 0; i < 9; ++i)
      table[i / 3][i % 3] = parse_rule_token(toks[i], origin, line);
    return table;
  });

  read_int("rrbfn.input_width", cfg.rrbfn.input_width, 1, 100000);
  read_int("rrbfn.hidden_width", cfg.rrbfn.hidden_width, 1, 100000);
  read_int("rrbfn.epochs", cfg.rrbfn.epochs, 0, 100000000);
  read_double("rrbfn.learning_rate", cfg.rrbfn.learning_rate);
  read_int("rrbfn.batch_size", cfg.rrbfn.batch_size, 1, 100000000);
  read_int("rrbfn.training_size", cfg.rrbfn.training_size, 1, 100000000);
  read_string("rrbfn.teacher", cfg.rrbfn.teacher);
  read_double("rrbfn.cost_bias", cfg.rrbfn.cost_bias);
  read_string("rrbfn.params_file", cfg.rrbfn.params_file);

  read_string("output.dir", cfg.output_dir);

  raw.reject_unknown();
  cfg.validate();
  return parsed;
}

ParsedConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config file not found: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

std::string config_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[system]\n";
  out << "total_channels = " << cfg.total_channels << '\n';
  out << "rats = " << cfg.rats << '\n';
  out << "t1 = " << cfg.thresholds.t1 << '\n';
  out << "t2 = " << cfg.thresholds.t2 << '\n';
  out << "t3 = " << cfg.thresholds.t3 << '\n';
  for (int i = 0; i < 3; ++i)
    out << "lambda" << i + 1 << " = " << format_double(cfg.lambda[static_cast<std::size_t>(i)])
        << '\n';
  for (int i = 0; i < 3; ++i)
    out << "mu" << i + 1 << " = " << format_double(cfg.mu[static_cast<std::size_t>(i)])
        << '\n';
  out << "seed = " << cfg.seed << '\n';

  out << "\n[policies]\n";
  out << "enabled =";
  for (const PolicyKind kind : cfg.policies) out << ' ' << policy_kind_name(kind);
  out << '\n';

  out << "\n[sweep]\n";
  out << "start = " << format_double(cfg.sweep_grid.start) << '\n';
  out << "stop = " << format_double(cfg.sweep_grid.stop) << '\n';
  out << "step = " << format_double(cfg.sweep_grid.step) << '\n';
  out << "replications = " << cfg.replications << '\n';

  out << "\n[simulation]\n";
  out << "events = " << cfg.events << '\n';
  out << "warmup_fraction = " << format_double(cfg.warmup_fraction) << '\n';

  out << "\n[fuzzy]\n";
  out << "accept_threshold = " << format_double(cfg.fuzzy.accept_threshold) << '\n';
  const auto emit_triangle = [&](const char* key, const TriangularSet& t) {
    out << key << " = " << format_double(t.a) << ' ' << format_double(t.b) << ' '
        << format_double(t.c) << '\n';
  };
  emit_triangle("capacity_low", cfg.fuzzy.capacity_sets[0]);
  emit_triangle("capacity_medium", cfg.fuzzy.capacity_sets[1]);
  emit_triangle("capacity_high", cfg.fuzzy.capacity_sets[2]);
  emit_triangle("demand_small", cfg.fuzzy.demand_sets[0]);
  emit_triangle("demand_medium", cfg.fuzzy.demand_sets[1]);
  emit_triangle("demand_large", cfg.fuzzy.demand_sets[2]);
  out << "rules =";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out << ' '
          << rule_token(cfg.fuzzy.rule_table[static_cast<std::size_t>(i)]
                                            [static_cast<std::size_t>(j)]);
  out << '\n';

  out << "\n[rrbfn]\n";
  out << "input_width = " << cfg.rrbfn.input_width << '\n';
  out << "hidden_width = " << cfg.rrbfn.hidden_width << '\n';
  out << "epochs = " << cfg.rrbfn.epochs << '\n';
  out << "learning_rate = " << format_double(cfg.rrbfn.learning_rate) << '\n';
  out << "batch_size = " << cfg.rrbfn.batch_size << '\n';
  out << "training_size = " << cfg.rrbfn.training_size << '\n';
  out << "teacher = " << cfg.rrbfn.teacher << '\n';
  out << "cost_bias = " << format_double(cfg.rrbfn.cost_bias) << '\n';
  out << "params_file = " << cfg.rrbfn.params_file << '\n';

  out << "\n[output]\n";
  out << "dir = " << cfg.output_dir << '\n';
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string text = config_text(config);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const unsigned char byte : text) {
    hash ^= byte;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace cacsim
