#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "gclab/error.hpp"
#include "gclab/procgen.hpp"

namespace gclab::lab {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

enum class Task { kGenerate, kMixingProfile, kCovcheckSweep, kGcipScan, kKsStudy, kEntropy, kGcVerdict };

inline constexpr std::pair<Task, const char*> kTaskNames[] = {
    {Task::kGenerate, "GENERATE"},     {Task::kMixingProfile, "MIXING_PROFILE"},
    {Task::kCovcheckSweep, "COVCHECK_SWEEP"}, {Task::kGcipScan, "GCIP_SCAN"},
    {Task::kKsStudy, "KS_STUDY"},      {Task::kEntropy, "ENTROPY"},
    {Task::kGcVerdict, "GC_VERDICT"},
};

inline const char* to_string(Task t) {
  for (const auto& [task, name] : kTaskNames)
    if (task == t) return name;
  return "?";
}

inline Task task_from_string(const std::string& s) {
  for (const auto& [task, name] : kTaskNames)
    if (s == name) return task;
  throw ValidationError("unknown task '" + s + "'");
}

/// gamma(0) = gamma0, gamma(h) = scale * h^-exponent.
struct InjectedCovariance {
  double gamma0 = 0.25;
  double scale = 0.2;
  double exponent = 0.2;
  friend bool operator==(const InjectedCovariance&, const InjectedCovariance&) = default;
};

struct TaskParams {
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> stream;
  std::optional<double> delta;
  std::optional<std::size_t> q_max;
  std::optional<std::vector<double>> x_grid;
  std::optional<std::vector<std::size_t>> n_grid;
  std::optional<std::size_t> reps;
  std::optional<std::vector<double>> epsilons;
  std::optional<std::vector<std::size_t>> lags;
  std::optional<std::vector<std::string>> coefficients;  // ALPHA, BETA
  std::optional<std::string> mode;                       // EXACT, MONTE_CARLO
  std::optional<unsigned> threads;
  std::optional<std::size_t> cases;
  std::optional<std::size_t> k_min;
  std::optional<std::size_t> k_max;
  std::optional<std::size_t> max_lag;
  std::optional<std::string> metric;     // L2_P, ABS
  std::optional<std::string> set_class;  // half-lines, intervals
  std::optional<std::vector<double>> vc_universe;
  std::optional<std::size_t> vc_max_n;
  std::optional<double> slope_tol;
  std::optional<double> growth_tol;
  std::optional<InjectedCovariance> injected_covariance;

  friend bool operator==(const TaskParams&, const TaskParams&) = default;

  template <class P, class F>
  static void for_each_field(P& p, F&& f) {
    f("n", p.n);
    f("stream", p.stream);
    f("delta", p.delta);
    f("q_max", p.q_max);
    f("x_grid", p.x_grid);
    f("n_grid", p.n_grid);
    f("reps", p.reps);
    f("epsilons", p.epsilons);
    f("lags", p.lags);
    f("coefficients", p.coefficients);
    f("mode", p.mode);
    f("threads", p.threads);
    f("cases", p.cases);
    f("k_min", p.k_min);
    f("k_max", p.k_max);
    f("max_lag", p.max_lag);
    f("metric", p.metric);
    f("set_class", p.set_class);
    f("vc_universe", p.vc_universe);
    f("vc_max_n", p.vc_max_n);
    f("slope_tol", p.slope_tol);
    f("growth_tol", p.growth_tol);
    f("injected_covariance", p.injected_covariance);
  }
};

struct ExperimentConfig {
  std::string experiment_id;
  ProcessSpec spec;
  Task task = Task::kGenerate;
  TaskParams params;
  std::uint64_t seed = 0;
  std::string output_dir;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ValidationError(where + ": unknown field '" + key + "'");
  }
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T> struct is_vector : std::false_type {};
template <class T> struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
T read(const json& j, const std::string& where);

inline InjectedCovariance read_injection(const json& j, const std::string& where) {
  check_keys(j, {"gamma0", "scale", "exponent"}, where);
  InjectedCovariance c;
  c.gamma0 = read<double>(field(j, "gamma0", where), where + ".gamma0");
  c.scale = read<double>(field(j, "scale", where), where + ".scale");
  c.exponent = read<double>(field(j, "exponent", where), where + ".exponent");
  return c;
}

template <class T>
T read(const json& j, const std::string& where) {
  if constexpr (std::is_same_v<T, double>) {
    if (!j.is_number()) throw ValidationError(where + ": expected a number");
    return j.get<double>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw ValidationError(where + ": expected a string");
    return j.get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_unsigned()) throw ValidationError(where + ": expected a non-negative integer");
    const auto v = j.get<std::uint64_t>();
    if (v > std::numeric_limits<T>::max()) throw ValidationError(where + ": integer out of range");
    return static_cast<T>(v);
  } else if constexpr (is_vector<T>::value) {
    if (!j.is_array()) throw ValidationError(where + ": expected an array");
    T out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(read<typename T::value_type>(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
  } else {
    static_assert(std::is_same_v<T, InjectedCovariance>);
    return read_injection(j, where);
  }
}

inline Marginal read_marginal(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  const auto type = read<std::string>(field(j, "type", where), where + ".type");
  Marginal m;
  if (type == "UNIFORM") {
    check_keys(j, {"type", "lower", "upper"}, where);
    UniformMarginal u;
    if (j.contains("lower")) u.lower = read<double>(j["lower"], where + ".lower");
    if (j.contains("upper")) u.upper = read<double>(j["upper"], where + ".upper");
    m = u;
  } else if (type == "NORMAL") {
    check_keys(j, {"type", "mean", "sd"}, where);
    NormalMarginal nm;
    if (j.contains("mean")) nm.mean = read<double>(j["mean"], where + ".mean");
    if (j.contains("sd")) nm.sd = read<double>(j["sd"], where + ".sd");
    m = nm;
  } else if (type == "DISCRETE") {
    check_keys(j, {"type", "values", "probs"}, where);
    DiscreteMarginal d;
    d.values = read<std::vector<double>>(field(j, "values", where), where + ".values");
    d.probs = read<std::vector<double>>(field(j, "probs", where), where + ".probs");
    m = d;
  } else {
    throw ValidationError(where + ": unknown marginal type '" + type + "'");
  }
  validate(m);
  return m;
}

inline Matrix read_matrix(const json& j, const std::string& where) {
  const auto rows = read<std::vector<std::vector<double>>>(j, where);
  const std::size_t k = rows.size();
  if (k == 0) throw ValidationError(where + ": transition matrix is empty");
  Matrix p(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (rows[i].size() != k) throw ValidationError(where + ": transition matrix must be square");
    for (std::size_t c = 0; c < k; ++c) p(i, c) = rows[i][c];
  }
  return p;
}

inline ProcessSpec read_spec(const json& j) {
  const std::string where = "spec";
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  const auto kind = read<std::string>(field(j, "kind", where), where + ".kind");
  ProcessSpec spec;
  if (kind == "IID") {
    check_keys(j, {"kind", "label", "marginal"}, where);
    spec.kind = IidProcess{read_marginal(field(j, "marginal", where), where + ".marginal")};
  } else if (kind == "AR1") {
    check_keys(j, {"kind", "label", "rho", "innovation_sd"}, where);
    Ar1Process a;
    a.rho = read<double>(field(j, "rho", where), where + ".rho");
    if (j.contains("innovation_sd"))
      a.innovation_sd = read<double>(j["innovation_sd"], where + ".innovation_sd");
    spec.kind = a;
  } else if (kind == "MARKOV") {
    check_keys(j, {"kind", "label", "states", "transition", "stationary"}, where);
    auto states = read<std::vector<double>>(field(j, "states", where), where + ".states");
    auto p = read_matrix(field(j, "transition", where), where + ".transition");
    if (j.contains("stationary")) {
      auto pi = read<std::vector<double>>(j["stationary"], where + ".stationary");
      spec.kind = MarkovProcess{TransitionModel(std::move(states), std::move(p), std::move(pi))};
    } else {
      spec.kind = MarkovProcess{TransitionModel::from_matrix(std::move(states), std::move(p))};
    }
  } else if (kind == "M_DEPENDENT") {
    check_keys(j, {"kind", "label", "m", "base"}, where);
    MDependentProcess md;
    md.m = read<std::size_t>(field(j, "m", where), where + ".m");
    md.base = read_marginal(field(j, "base", where), where + ".base");
    spec.kind = md;
  } else {
    throw ValidationError(where + ": unknown process kind '" + kind + "'");
  }
  spec.label = j.contains("label") ? read<std::string>(j["label"], where + ".label") : kind;
  validate(spec);
  return spec;
}

inline TaskParams read_params(const json& j) {
  if (!j.is_object()) throw ValidationError("params: expected an object");
  TaskParams p;
  std::size_t matched = 0;
  TaskParams::for_each_field(p, [&](const char* key, auto& slot) {
    if (!j.contains(key)) return;
    ++matched;
    using T = typename std::decay_t<decltype(slot)>::value_type;
    slot = read<T>(j.at(key), std::string("params.") + key);
  });
  if (matched != j.size()) {
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      TaskParams::for_each_field(p, [&](const char* k, auto&) { known = known || key == k; });
      if (!known) throw ValidationError("params: unknown field '" + key + "'");
    }
  }
  return p;
}

}  // namespace detail

/// Builds a config from a parsed document. Schema problems are validation errors.
inline ExperimentConfig config_from_json(const json& j) {
  detail::check_keys(j, {"experiment_id", "spec", "task", "params", "seed", "output_dir"}, "config");
  ExperimentConfig c;
  c.experiment_id = detail::read<std::string>(detail::field(j, "experiment_id", "config"), "experiment_id");
  gclab::detail::require(!c.experiment_id.empty(), "experiment_id must not be empty");
  c.task = task_from_string(detail::read<std::string>(detail::field(j, "task", "config"), "task"));
  c.spec = detail::read_spec(detail::field(j, "spec", "config"));
  if (j.contains("params")) c.params = detail::read_params(j["params"]);
  if (j.contains("seed")) c.seed = detail::read<std::uint64_t>(j["seed"], "seed");
  c.output_dir = j.contains("output_dir") ? detail::read<std::string>(j["output_dir"], "output_dir")
                                          : c.experiment_id;
  return c;
}

/// Parses config text; malformed JSON is a parse error.
inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

inline json marginal_to_json(const Marginal& m) {
  return std::visit(
      [](const auto& law) -> json {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, UniformMarginal>)
          return {{"type", "UNIFORM"}, {"lower", law.lower}, {"upper", law.upper}};
        else if constexpr (std::is_same_v<T, NormalMarginal>)
          return {{"type", "NORMAL"}, {"mean", law.mean}, {"sd", law.sd}};
        else
          return {{"type", "DISCRETE"}, {"values", law.values}, {"probs", law.probs}};
      },
      m);
}

inline json spec_to_json(const ProcessSpec& spec) {
  json j = std::visit(
      [](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IidProcess>) {
          return {{"kind", "IID"}, {"marginal", marginal_to_json(k.marginal)}};
        } else if constexpr (std::is_same_v<T, Ar1Process>) {
          return {{"kind", "AR1"}, {"rho", k.rho}, {"innovation_sd", k.innovation_sd}};
        } else if constexpr (std::is_same_v<T, MarkovProcess>) {
          json rows = json::array();
          for (std::size_t i = 0; i < k.model.size(); ++i) {
            const auto r = k.model.transition().row(i);
            rows.push_back(std::vector<double>(r.begin(), r.end()));
          }
          return {{"kind", "MARKOV"},
                  {"states", k.model.states()},
                  {"transition", rows},
                  {"stationary", k.model.stationary()}};
        } else {
          return {{"kind", "M_DEPENDENT"}, {"m", k.m}, {"base", marginal_to_json(k.base)}};
        }
      },
      spec.kind);
  j["label"] = spec.label;
  return j;
}

inline json params_to_json(const TaskParams& p) {
  json j = json::object();
  TaskParams::for_each_field(p, [&](const char* key, const auto& slot) {
    if (!slot) return;
    using T = typename std::decay_t<decltype(slot)>::value_type;
    if constexpr (std::is_same_v<T, InjectedCovariance>)
      j[key] = {{"gamma0", slot->gamma0}, {"scale", slot->scale}, {"exponent", slot->exponent}};
    else
      j[key] = *slot;
  });
  return j;
}

inline json config_to_json(const ExperimentConfig& c) {
  return {{"experiment_id", c.experiment_id}, {"spec", spec_to_json(c.spec)},
          {"task", to_string(c.task)},        {"params", params_to_json(c.params)},
          {"seed", c.seed},                   {"output_dir", c.output_dir}};
}

inline std::string serialize_config(const ExperimentConfig& c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace gclab::lab
