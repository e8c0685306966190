#pragma once

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "gclab/lab/config.hpp"
#include "gclab/lab/io.hpp"
#include "gclab/parallel.hpp"

namespace gclab::lab {

namespace fs = std::filesystem;

inline constexpr const char* kOutputRootEnv = "GCLAB_OUTPUT_ROOT";
inline constexpr const char* kRunRecordName = "run_record.json";

struct Artifact {
  std::string name;
  std::string content;
};

struct TaskOutput {
  std::vector<Artifact> files;
  json summary = json::object();
};

struct ManifestEntry {
  std::string file;
  std::size_t bytes = 0;
  std::string digest;
};

struct RunRecord {
  std::string experiment_id;
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::string started_at;
  std::string finished_at;
  std::string task;
  json summary;
  std::vector<ManifestEntry> manifest;
  fs::path output_dir;
};

inline json to_json(const RunRecord& r) {
  json manifest = json::array();
  for (const auto& m : r.manifest)
    manifest.push_back({{"file", m.file}, {"bytes", m.bytes}, {"digest", m.digest}});
  return {{"experiment_id", r.experiment_id},
          {"config_digest", r.config_digest},
          {"tool_version", r.tool_version},
          {"started_at", r.started_at},
          {"finished_at", r.finished_at},
          {"task", r.task},
          {"summary", r.summary},
          {"digest_algorithm", "fnv1a-64"},
          {"manifest", manifest}};
}

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline unsigned threads_of(const TaskParams& p) { return p.threads.value_or(default_threads()); }

inline std::vector<std::size_t> default_lags() {
  std::vector<std::size_t> v;
  for (std::size_t i = 1; i <= 10; ++i) v.push_back(i);
  return v;
}

/// Distinct marginal deciles.
inline std::vector<double> default_x_grid(const ProcessSpec& spec) {
  const MarginalLaw law = marginal_law(spec);
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) {
    const double x = law.quantile(i / 10.0);
    if (grid.empty() || x > grid.back()) grid.push_back(x);
  }
  return grid;
}

inline std::vector<double> default_universe(const ProcessSpec& spec) {
  const auto [lo, hi] = marginal_law(spec).bracket_support();
  std::vector<double> u;
  for (int i = 0; i < 20; ++i) u.push_back(lo + (hi - lo) * i / 19.0);
  return u;
}

inline MixingKind mixing_kind(const std::string& s) {
  if (s == "ALPHA") return MixingKind::kAlpha;
  if (s == "BETA") return MixingKind::kBeta;
  throw ValidationError("params.coefficients: unknown coefficient '" + s + "'");
}

inline BracketMetric bracket_metric(const std::optional<std::string>& s) {
  if (!s || *s == "L2_P") return BracketMetric::kL2P;
  if (*s == "ABS") return BracketMetric::kAbs;
  throw ValidationError("params.metric: unknown metric '" + *s + "'");
}

inline GcipSource gcip_source(const ExperimentConfig& c) {
  const auto& p = c.params;
  if (p.injected_covariance) {
    const auto& ic = *p.injected_covariance;
    gclab::detail::require(!p.mode, "params.mode does not apply to an injected covariance sequence");
    return power_law_covariance(ic.gamma0, ic.scale, ic.exponent);
  }
  const bool closed_form = c.spec.is_iid() || c.spec.markov_model() != nullptr;
  const std::string mode = p.mode.value_or(closed_form ? "EXACT" : "MONTE_CARLO");
  if (mode == "EXACT") return ExactSource{c.spec};
  if (mode == "MONTE_CARLO")
    return MonteCarloSource{c.spec, p.reps.value_or(10000), c.seed, threads_of(p)};
  throw ValidationError("params.mode: unknown mode '" + mode + "'");
}

inline GcipParams gcip_params(const ExperimentConfig& c) {
  GcipParams g;
  const auto& p = c.params;
  g.delta = p.delta.value_or(1.0);
  g.q_max = p.q_max.value_or(128);
  g.x_grid = p.x_grid.value_or(default_x_grid(c.spec));
  if (p.slope_tol) g.slope_tol = *p.slope_tol;
  if (p.growth_tol) g.growth_tol = *p.growth_tol;
  g.validate();
  return g;
}

inline std::vector<BracketCover> covers_of(const ExperimentConfig& c,
                                           std::vector<double> default_eps) {
  const MarginalLaw law = marginal_law(c.spec);
  const auto eps = c.params.epsilons.value_or(std::move(default_eps));
  gclab::detail::require(!eps.empty(), "params.epsilons must not be empty");
  const auto metric = bracket_metric(c.params.metric);
  std::vector<BracketCover> covers;
  for (double e : eps) covers.push_back(bracket_halflines(law, e, metric));
  return covers;
}

inline json covers_json(const std::vector<BracketCover>& covers) {
  json a = json::array();
  for (const auto& c : covers) a.push_back(to_json(c));
  return a;
}

inline std::string pretty(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

inline TaskOutput task_generate(const ExperimentConfig& c) {
  gclab::detail::require(c.params.n.has_value(), "GENERATE requires params.n");
  const auto path = generate(c.spec, *c.params.n, c.seed, c.params.stream.value_or(0));
  double mean = 0.0;
  for (double v : path.values) mean += v / static_cast<double>(path.n);
  TaskOutput out;
  out.files.push_back({"path.csv", path_csv(path)});
  out.summary = {{"n", path.n}, {"stream", path.stream}, {"sample_mean", num(mean)}};
  return out;
}

inline MixingProfile estimated_alpha_profile(const ExperimentConfig& c,
                                             const std::vector<std::size_t>& lags) {
  const std::size_t n = c.params.n.value_or(200000);
  const auto path = generate(c.spec, n, c.seed, c.params.stream.value_or(0));
  const auto grid = c.params.x_grid.value_or(default_x_grid(c.spec));
  MixingProfile prof;
  prof.kind = MixingKind::kAlpha;
  prof.provenance = Provenance::estimated(1, n);
  prof.note = "estimated as max over x_grid of the lag-n indicator autocovariance on one path";
  for (std::size_t lag : lags) {
    double v = 0.0;
    for (double x : grid) v = std::max(v, alpha_modulus_estimate(path, x, lag));
    prof.values.push_back(v);
  }
  prof.lags = lags;
  return prof;
}

inline TaskOutput task_mixing(const ExperimentConfig& c) {
  const auto lags = c.params.lags.value_or(default_lags());
  const auto kinds = c.params.coefficients.value_or(std::vector<std::string>{"ALPHA", "BETA"});
  gclab::detail::require(!kinds.empty(), "params.coefficients must not be empty");
  const TransitionModel* model = c.spec.markov_model();
  TaskOutput out;
  json profiles = json::array(), thresholds = json::array();
  for (const auto& name : kinds) {
    const MixingKind kind = mixing_kind(name);
    MixingProfile prof;
    if (model) {
      prof = exact_profile(*model, kind, lags);
    } else {
      gclab::detail::require(kind == MixingKind::kAlpha,
                      "BETA profiles need a MARKOV spec; only ALPHA can be estimated from a path");
      prof = estimated_alpha_profile(c, lags);
    }
    prof.validate();
    try {
      prof.fit = fit_decay(prof);
    } catch (const FitUndefinedError& e) {
      prof.note += prof.note.empty() ? "" : "; ";
      prof.note += e.what();
    }
    json pj = to_json(prof);
    if (kind == MixingKind::kBeta && model)
      pj["event_sup_form"] = {
          {"values", nums(exact_profile(*model, MixingKind::kAlpha, lags).values)},
          {"note", "sup over events |P(A and B) - P(A)P(B)|; numerically equal to alpha"}};
    profiles.push_back(pj);
    if (c.params.delta) {
      json tj = to_json(threshold_check(prof, *c.params.delta), *c.params.delta);
      tj["kind"] = name;
      thresholds.push_back(tj);
    }
    std::string lower = name;
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    out.files.push_back({"profile_" + lower + ".csv", profile_csv(prof)});
  }
  out.summary = {{"profiles", profiles}, {"thresholds", thresholds}};
  out.files.push_back({"mixing_summary.json", pretty(out.summary)});
  return out;
}

inline TaskOutput task_covcheck(const ExperimentConfig& c) {
  const auto& p = c.params;
  const auto sweep = covariance_sweep(c.seed, p.cases.value_or(1000), p.k_min.value_or(2),
                                      p.k_max.value_or(6), p.max_lag.value_or(5), true);
  TaskOutput out;
  out.summary = to_json(sweep);
  out.files.push_back({"certificates.jsonl", certificates_jsonl(sweep.certificates)});
  out.files.push_back({"sweep_summary.json", pretty(out.summary)});
  return out;
}

inline TaskOutput task_gcip(const ExperimentConfig& c) {
  const auto rep = gcip_scan(gcip_source(c), gcip_params(c));
  TaskOutput out;
  out.summary = gcip_summary(rep);
  out.files.push_back({"gcip.csv", gcip_csv(rep)});
  out.files.push_back({"gcip_summary.json", pretty(out.summary)});
  return out;
}

inline TaskOutput task_ks(const ExperimentConfig& c) {
  const auto& p = c.params;
  const auto study = convergence_study(
      c.spec, p.n_grid.value_or(std::vector<std::size_t>{100, 316, 1000, 3162, 10000}),
      p.reps.value_or(200), c.seed, threads_of(p));
  TaskOutput out;
  out.summary = study_summary(study);
  if (study.iid)
    out.summary["dkw"] = to_json(p.epsilons ? dkw_tail_check(study, *p.epsilons) : dkw_tail_check(study));
  out.files.push_back({"study.csv", study_csv(study)});
  out.files.push_back({"study_plot.csv", study_plot_csv(study)});
  out.files.push_back({"study_summary.json", pretty(out.summary)});
  return out;
}

inline VcReport vc_report(const ExperimentConfig& c) {
  const auto universe = c.params.vc_universe.value_or(default_universe(c.spec));
  const std::size_t max_n = c.params.vc_max_n.value_or(6);
  const std::string cls = c.params.set_class.value_or(kHalfLineClassId);
  if (cls == kHalfLineClassId) return vc_index(HalfLines::over(universe), universe, max_n);
  if (cls == "intervals") return vc_index(ClosedIntervals::over(universe), universe, max_n);
  throw ValidationError("params.set_class: unknown class '" + cls + "'");
}

inline TaskOutput task_entropy(const ExperimentConfig& c) {
  const auto covers = covers_of(c, {0.5});
  const auto vc = vc_report(c);
  TaskOutput out;
  json counts = json::array();
  for (const auto& cv : covers)
    counts.push_back({{"epsilon", num(cv.epsilon)}, {"metric", to_string(cv.metric)}, {"count", cv.count}});
  out.summary = {{"covers", counts},
                 {"vc_class", vc.class_id},
                 {"vc_index", vc.index ? json(*vc.index)
                                       : json("NOT_FOUND(" + std::to_string(vc.searched_up_to) + ")")}};
  out.files.push_back({"covers.json", pretty(covers_json(covers))});
  out.files.push_back({"vc_report.json", pretty(to_json(vc))});
  return out;
}

inline TaskOutput task_verdict(const ExperimentConfig& c) {
  const auto covers = covers_of(c, {0.5, 0.1});
  const auto rep = gcip_scan(gcip_source(c), gcip_params(c));
  const auto verdict = gc_verdict(covers, rep);
  TaskOutput out;
  out.summary = to_json(verdict);
  out.summary["gcip"] = gcip_summary(rep);
  out.files.push_back({"covers.json", pretty(covers_json(covers))});
  out.files.push_back({"gcip.csv", gcip_csv(rep)});
  out.files.push_back({"gcip_summary.json", pretty(gcip_summary(rep))});
  out.files.push_back({"verdict.json", pretty(to_json(verdict))});
  return out;
}

}  // namespace detail

/// Cheap pre-flight checks of task parameters; the owning modules re-check on execution.
inline void validate_config(const ExperimentConfig& c) {
  validate(c.spec);
  const auto& p = c.params;
  switch (c.task) {
    case Task::kGenerate:
      gclab::detail::require(p.n.has_value() && *p.n >= 1, "GENERATE requires params.n >= 1");
      break;
    case Task::kMixingProfile: {
      const auto kinds = p.coefficients.value_or(std::vector<std::string>{"ALPHA", "BETA"});
      gclab::detail::require(!kinds.empty(), "params.coefficients must not be empty");
      for (const auto& k : kinds)
        if (detail::mixing_kind(k) == MixingKind::kBeta)
          gclab::detail::require(c.spec.markov_model() != nullptr, "BETA profiles need a MARKOV spec");
      if (p.delta) RateThreshold{*p.delta};
      const auto lags = p.lags.value_or(detail::default_lags());
      gclab::detail::require(!lags.empty(), "params.lags must not be empty");
      for (std::size_t i = 0; i < lags.size(); ++i)
        gclab::detail::require(lags[i] >= 1 && (i == 0 || lags[i - 1] < lags[i]),
                        "params.lags must be positive and strictly ascending");
      break;
    }
    case Task::kCovcheckSweep:
      gclab::detail::require(p.k_min.value_or(2) >= 2 && p.k_min.value_or(2) <= p.k_max.value_or(6),
                      "COVCHECK_SWEEP needs 2 <= k_min <= k_max");
      if (p.k_max.value_or(6) > kMaxExactAlphaStates)
        throw FeasibilityError("COVCHECK_SWEEP: k_max exceeds the exact alpha enumeration cap");
      break;
    case Task::kGcipScan:
      detail::gcip_params(c);
      detail::gcip_source(c);
      break;
    case Task::kKsStudy:
      gclab::detail::require(p.reps.value_or(200) >= 1, "params.reps must be >= 1");
      break;
    case Task::kEntropy:
    case Task::kGcVerdict:
      detail::bracket_metric(p.metric);
      for (double e : p.epsilons.value_or(std::vector<double>{0.5}))
        gclab::detail::require(e > 0.0 && std::isfinite(e), "params.epsilons must be positive");
      if (p.vc_max_n.value_or(6) > kMaxVcCardinality)
        throw FeasibilityError("params.vc_max_n exceeds " + std::to_string(kMaxVcCardinality));
      if (c.task == Task::kGcVerdict) {
        detail::gcip_params(c);
        detail::gcip_source(c);
      }
      break;
  }
}

/// Runs the task in memory. No filesystem access.
inline TaskOutput execute(const ExperimentConfig& c) {
  validate_config(c);
  switch (c.task) {
    case Task::kGenerate: return detail::task_generate(c);
    case Task::kMixingProfile: return detail::task_mixing(c);
    case Task::kCovcheckSweep: return detail::task_covcheck(c);
    case Task::kGcipScan: return detail::task_gcip(c);
    case Task::kKsStudy: return detail::task_ks(c);
    case Task::kEntropy: return detail::task_entropy(c);
    case Task::kGcVerdict: return detail::task_verdict(c);
  }
  throw ValidationError("unhandled task");
}

inline fs::path resolve_output_dir(const ExperimentConfig& c) {
  fs::path dir(c.output_dir);
  if (dir.is_relative())
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) dir = fs::path(root) / dir;
  return dir;
}

inline std::string config_digest(const ExperimentConfig& c) { return fnv1a_hex(config_to_json(c).dump()); }

/// Executes the config and writes its artifacts plus the run record. Nothing
/// is written unless the task completes.
inline RunRecord run(const ExperimentConfig& c) {
  RunRecord rec;
  rec.experiment_id = c.experiment_id;
  rec.config_digest = config_digest(c);
  rec.task = to_string(c.task);
  rec.started_at = detail::utc_now();
  TaskOutput out = execute(c);
  rec.summary = std::move(out.summary);
  rec.output_dir = resolve_output_dir(c);
  fs::create_directories(rec.output_dir);
  out.files.push_back({"config.json", serialize_config(c)});
  for (const auto& f : out.files) {
    std::ofstream os(rec.output_dir / f.name, std::ios::binary);
    os << f.content;
    if (!os) throw std::runtime_error("cannot write " + (rec.output_dir / f.name).string());
    rec.manifest.push_back({f.name, f.content.size(), fnv1a_hex(f.content)});
  }
  rec.finished_at = detail::utc_now();
  std::ofstream os(rec.output_dir / kRunRecordName, std::ios::binary);
  os << detail::pretty(to_json(rec));
  if (!os) throw std::runtime_error("cannot write run record");
  return rec;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw ValidationError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline ExperimentConfig load_config(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw ParseError("cannot open config " + p.string());
  return parse_config(std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()));
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

namespace detail {

inline std::string str(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

inline void report_mixing(const json& s, std::ostream& os) {
  for (const auto& p : s.at("profiles")) {
    os << p.at("kind").get<std::string>() << " profile (" << p.at("provenance").get<std::string>()
       << "), lags " << p.at("lags").front() << ".." << p.at("lags").back() << "\n";
    if (p.contains("fit")) {
      const auto& f = p["fit"];
      if (f.at("super_polynomial").get<bool>())
        os << "  fitted decay a=inf (geometric, rate " << str(f.at("geometric_rate")) << ")\n";
      else
        os << "  fitted decay a=" << str(f.at("a")) << " (rms " << str(f.at("rms_residual")) << ")\n";
    }
  }
  for (const auto& t : s.at("thresholds")) {
    const std::string verdict = t.at("verdict").get<std::string>();
    std::string a = "n/a";
    if (t.contains("fit"))
      a = t["fit"].at("super_polynomial").get<bool>() ? "inf (geometric)" : str(t["fit"].at("a"));
    os << "  " << t.at("kind").get<std::string>() << "-decay a=" << a
       << (verdict == "SATISFIED" ? " >= " : " vs ") << "required " << str(t.at("required_exponent"))
       << " for delta=" << str(t.at("delta")) << " -> " << verdict
       << (verdict == "SATISFIED" ? ": rate hypothesis satisfied at scan scale" : "") << "\n";
  }
}

inline void report_gcip(const json& s, std::ostream& os) {
  os << "source " << s.at("source").get<std::string>() << ", delta=" << str(s.at("delta"))
     << ", q_max=" << s.at("q_max") << "\n"
     << "  s1: " << s.at("s1_verdict").get<std::string>() << " (slope " << str(s.at("s1_slope"))
     << ", c1_hat " << str(s.at("c1_hat")) << ")\n"
     << "  s2: " << s.at("s2_verdict").get<std::string>() << " (slope " << str(s.at("s2_slope"))
     << ", c2_hat " << str(s.at("c2_hat")) << ")\n"
     << "  s1 bounded => s2 bounded on this table: "
     << (s.at("implication_holds").get<bool>() ? "holds" : "FAILS") << "\n";
}

inline void report_ks(const json& s, std::ostream& os) {
  os << "spec " << s.at("spec_label").get<std::string>() << ", " << s.at("reps") << " reps\n";
  for (const auto& r : s.at("summary"))
    os << "  n=" << r.at("n") << "  mean deviation " << str(r.at("mean")) << "  median "
       << str(r.at("median")) << "\n";
  if (s.contains("fit")) os << "  fitted b=" << str(s["fit"].at("b")) << " (mean ~ c n^-b)\n";
  if (s.contains("dkw"))
    os << "  DKW tail check: " << (s["dkw"].at("pass").get<bool>() ? "PASS" : "FAIL") << "\n";
}

inline void report_verdict(const json& s, std::ostream& os) {
  os << "verdict " << s.at("status").get<std::string>() << "\n";
  for (const auto& c : s.at("checklist"))
    os << "  (" << c.at("id").get<std::string>() << ") " << (c.at("pass").get<bool>() ? "pass" : "FAIL")
       << "  " << c.at("description").get<std::string>() << "\n";
  if (s.contains("gcip")) report_gcip(s["gcip"], os);
}

}  // namespace detail

/// Prints a digest of a finished run. Missing or corrupt records are validation errors.
inline void report(const fs::path& dir, std::ostream& os) {
  const fs::path rec_path = dir / kRunRecordName;
  if (!fs::exists(rec_path)) throw ValidationError("no run record in " + dir.string());
  json rec;
  try {
    rec = json::parse(read_file(rec_path));
    for (const auto& m : rec.at("manifest")) {
      const auto name = m.at("file").get<std::string>();
      const std::string content = read_file(dir / name);
      if (fnv1a_hex(content) != m.at("digest").get<std::string>())
        throw ValidationError("digest mismatch for " + name);
    }
    const std::string task = rec.at("task").get<std::string>();
    const json& s = rec.at("summary");
    os << "experiment " << rec.at("experiment_id").get<std::string>() << " [" << task << "] "
       << rec.at("finished_at").get<std::string>() << ", tool " << rec.at("tool_version").get<std::string>()
       << "\n";
    switch (task_from_string(task)) {
      case Task::kGenerate:
        os << "path of n=" << s.at("n") << " (stream " << s.at("stream") << "), sample mean "
           << detail::str(s.at("sample_mean")) << "\n";
        break;
      case Task::kMixingProfile: detail::report_mixing(s, os); break;
      case Task::kCovcheckSweep:
        os << s.at("cases") << " models, " << s.at("checks") << " checks, " << s.at("violations")
           << " violations, min slack " << detail::str(s.at("min_slack")) << "\n";
        break;
      case Task::kGcipScan: detail::report_gcip(s, os); break;
      case Task::kKsStudy: detail::report_ks(s, os); break;
      case Task::kEntropy:
        for (const auto& cv : s.at("covers"))
          os << "bracket cover " << cv.at("metric").get<std::string>() << " eps=" << detail::str(cv.at("epsilon"))
             << ": " << cv.at("count") << " brackets (constructive upper bound)\n";
        os << "VC index of " << s.at("vc_class").get<std::string>() << ": " << detail::str(s.at("vc_index"))
           << "\n";
        break;
      case Task::kGcVerdict: detail::report_verdict(s, os); break;
    }
  } catch (const json::exception& e) {
    throw ValidationError("corrupt run record: " + std::string(e.what()));
  }
}

}  // namespace gclab::lab
