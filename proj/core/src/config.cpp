#include "hbdn/error.hpp"
#include "hbdn/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <string_view>

namespace hbdn {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ConfigInvalid, field + ": " + what);
}

double as_double(const std::string& field, const std::string& value) {
  if (value == "inf" || value == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  invalid(field, "expected a number, got '" + value + "'");
}

long long as_integer(const std::string& field, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  invalid(field, "expected an integer, got '" + value + "'");
}

int as_int(const std::string& field, const std::string& value) {
  const long long v = as_integer(field, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    invalid(field, "out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t as_seed(const std::string& field, const std::string& value) {
  const long long v = as_integer(field, value);
  if (v < 0) invalid(field, "seed must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

bool as_bool(const std::string& field, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  invalid(field, "expected true or false, got '" + value + "'");
}

struct PendingAlgorithm {
  std::string name;
  std::optional<std::string> variant;
  std::optional<double> alpha;
  double beta = 0.0;
};

void assign(ExperimentConfig& cfg, std::vector<PendingAlgorithm>& algos, const std::string& key,
            const std::string& value) {
  if (key.starts_with("algorithm.")) {
    const auto rest = key.substr(10);
    const auto dot = rest.rfind('.');
    if (dot == std::string::npos || dot == 0) invalid(key, "expected algorithm.<name>.<field>");
    const auto name = rest.substr(0, dot);
    const auto field = rest.substr(dot + 1);
    auto it = std::find_if(algos.begin(), algos.end(),
                           [&](const PendingAlgorithm& a) { return a.name == name; });
    if (it == algos.end()) {
      algos.push_back({name, std::nullopt, std::nullopt, 0.0});
      it = algos.end() - 1;
    }
    if (field == "variant") {
      it->variant = value;
    } else if (field == "alpha") {
      it->alpha = as_double(key, value);
    } else if (field == "beta") {
      it->beta = as_double(key, value);
    } else {
      invalid(key, "unknown algorithm field");
    }
    return;
  }

  auto& g = cfg.graph;
  auto& d = cfg.data;
  if (key == "graph.kind") g.kind = value;
  else if (key == "graph.n") g.n = as_int(key, value);
  else if (key == "graph.degree" || key == "graph.d") g.degree = as_int(key, value);
  else if (key == "graph.p") g.p = as_double(key, value);
  else if (key == "graph.seed") g.seed = as_seed(key, value);
  else if (key == "data.source") d.source = value;
  else if (key == "data.m") d.m = as_int(key, value);
  else if (key == "data.p") d.p = as_int(key, value);
  else if (key == "data.separation") d.separation = as_double(key, value);
  else if (key == "data.path") d.path = value;
  else if (key == "data.label_column") d.label_column = as_int(key, value);
  else if (key == "data.positive_label") d.positive_label = value;
  else if (key == "data.k_pca") d.k_pca = as_int(key, value);
  else if (key == "data.standardize") d.standardize = as_bool(key, value);
  else if (key == "data.seed") d.seed = as_seed(key, value);
  else if (key == "objective.lambda") cfg.lambda = as_double(key, value);
  else if (key == "stopping.grad_tol") cfg.stopping.grad_tol = as_double(key, value);
  else if (key == "stopping.max_rounds") cfg.stopping.max_rounds = as_int(key, value);
  else if (key == "stopping.f_gap_tol") cfg.stopping.f_gap_tol = as_double(key, value);
  else if (key == "reference.newton_tol") cfg.newton_tol = as_double(key, value);
  else if (key == "init.kind") cfg.init.kind = value;
  else if (key == "init.scale") cfg.init.scale = as_double(key, value);
  else if (key == "init.seed") cfg.init.seed = as_seed(key, value);
  else if (key == "output_dir") cfg.output_dir = value;
  else invalid(key, "unknown field");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (graph.kind != "regular" && graph.kind != "erdos_renyi") {
    invalid("graph.kind", "expected regular or erdos_renyi");
  }
  if (graph.n < 2) invalid("graph.n", "need at least two agents");
  if (graph.kind == "regular" && (graph.degree < 1 || graph.degree >= graph.n)) {
    invalid("graph.degree", "need 1 <= degree < n");
  }
  if (graph.kind == "erdos_renyi" && !(graph.p > 0.0 && graph.p <= 1.0)) {
    invalid("graph.p", "need 0 < p <= 1");
  }
  if (data.source == "synthetic") {
    if (data.m < graph.n) invalid("data.m", "need at least one sample per agent");
    if (data.p < 1) invalid("data.p", "need at least one feature");
    if (!(data.separation > 0.0)) invalid("data.separation", "must be positive");
  } else if (data.source == "file") {
    if (data.path.empty()) invalid("data.path", "required when data.source = file");
  } else {
    invalid("data.source", "expected synthetic or file");
  }
  if (data.k_pca < 0) invalid("data.k_pca", "must be nonnegative");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) invalid("objective.lambda", "must be positive");
  if (!(stopping.grad_tol > 0.0)) invalid("stopping.grad_tol", "must be positive");
  if (stopping.max_rounds < 0) invalid("stopping.max_rounds", "must be nonnegative");
  if (stopping.f_gap_tol && !(*stopping.f_gap_tol > 0.0)) {
    invalid("stopping.f_gap_tol", "must be positive");
  }
  if (!(newton_tol > 0.0)) invalid("reference.newton_tol", "must be positive");
  if (init.kind != "zeros" && init.kind != "gaussian") {
    invalid("init.kind", "expected zeros or gaussian");
  }
  if (algorithms.empty()) invalid("algorithm", "at least one algorithm entry is required");
  for (const auto& a : algorithms) {
    const std::string base = "algorithm." + a.name;
    const bool safe = std::all_of(a.name.begin(), a.name.end(), [](char ch) {
      return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
    });
    if (!safe) invalid(base, "names may use letters, digits, '_' and '-' only");
    if (!(a.alpha > 0.0) || !std::isfinite(a.alpha)) invalid(base + ".alpha", "must be positive");
    if (!(a.beta >= 0.0) || !std::isfinite(a.beta)) invalid(base + ".beta", "must be >= 0");
  }
  if (output_dir.empty()) invalid("output_dir", "must not be empty");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::vector<PendingAlgorithm> algos;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigInvalid,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(line_no) + ": empty key");
    }
    assign(cfg, algos, key, value);
  }
  for (const auto& a : algos) {
    const std::string base = "algorithm." + a.name;
    if (!a.variant) invalid(base + ".variant", "missing");
    if (!a.alpha) invalid(base + ".alpha", "missing");
    AlgorithmSpec spec;
    spec.name = a.name;
    try {
      spec.variant = parse_variant(*a.variant);
    } catch (const Error&) {
      invalid(base + ".variant", "unknown variant '" + *a.variant + "'");
    }
    spec.alpha = *a.alpha;
    spec.beta = a.beta;
    cfg.algorithms.push_back(spec);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  return parse_config(in);
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output_dir;
}

}  // namespace hbdn
