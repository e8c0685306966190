#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gclab/covcheck.hpp"
#include "gclab/empirical.hpp"
#include "gclab/entropy.hpp"
#include "gclab/gcip.hpp"
#include "gclab/mixing.hpp"
#include "gclab/numeric.hpp"

namespace gclab::lab {

using nlohmann::json;

/// JSON has no infinities or NaN; those are written as strings.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

/// Minimal CSV builder with shortest round-trip numbers.
class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) text_ += ',';
      text_ += h;
      first = false;
    }
    text_ += '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((append(cells, first)), ...);
    text_ += '\n';
  }

  const std::string& str() const { return text_; }

 private:
  void append(double v, bool& first) { append(format_double(v), first); }
  void append(std::size_t v, bool& first) { append(std::to_string(v), first); }
  void append(const char* v, bool& first) { append(std::string(v), first); }
  void append(const std::string& v, bool& first) {
    if (!first) text_ += ',';
    text_ += v;
    first = false;
  }

  std::string text_;
};

// ---------------------------------------------------------------------------
// procgen
// ---------------------------------------------------------------------------

inline std::string path_csv(const SamplePath& path) {
  Csv csv({"t", "value"});
  for (std::size_t t = 0; t < path.values.size(); ++t) csv.row(t + 1, path.values[t]);
  return csv.str();
}

// ---------------------------------------------------------------------------
// mixing
// ---------------------------------------------------------------------------

inline std::string profile_csv(const MixingProfile& p) {
  Csv csv({"lag", "value", "provenance"});
  const auto prov = p.provenance.label();
  for (std::size_t i = 0; i < p.lags.size(); ++i) csv.row(p.lags[i], p.values[i], prov);
  return csv.str();
}

inline json to_json(const DecayFit& f) {
  json j = {{"c", num(f.c)},
            {"a", num(f.a)},
            {"rms_residual", num(f.rms_residual)},
            {"used_points", f.used_points},
            {"dropped_zeros", f.dropped_zeros},
            {"super_polynomial", f.super_polynomial},
            {"note", f.note}};
  if (f.super_polynomial) j["geometric_rate"] = num(f.geometric_rate);
  return j;
}

inline json to_json(const MixingProfile& p) {
  json j = {{"kind", to_string(p.kind)},
            {"lags", p.lags},
            {"values", nums(p.values)},
            {"provenance", p.provenance.label()},
            {"note", p.note}};
  if (!p.provenance.exact) {
    j["reps"] = p.provenance.reps;
    j["path_length"] = p.provenance.path_length;
  }
  if (p.fit) j["fit"] = to_json(*p.fit);
  return j;
}

inline json to_json(const ThresholdResult& t, double delta) {
  json j = {{"delta", num(delta)},
            {"verdict", to_string(t.verdict)},
            {"required_exponent", num(t.required_exponent)},
            {"reason", t.reason}};
  if (t.fit) j["fit"] = to_json(*t.fit);
  return j;
}

// ---------------------------------------------------------------------------
// covcheck
// ---------------------------------------------------------------------------

inline json to_json(const BoundCertificate& c) {
  return {{"inequality_id", to_string(c.inequality_id)},
          {"lhs", num(c.lhs)},
          {"rhs", num(c.rhs)},
          {"slack", num(c.slack)},
          {"pass", c.pass()},
          {"inputs_digest", c.inputs_digest}};
}

inline std::string certificates_jsonl(const std::vector<BoundCertificate>& certs) {
  std::string out;
  for (const auto& c : certs) out += to_json(c).dump() + "\n";
  return out;
}

inline json to_json(const SweepSummary& s) {
  return {{"cases", s.cases},
          {"checks", s.checks},
          {"violations", s.violations},
          {"min_slack", num(s.min_slack)},
          {"slack_tolerance", num(kSlackTolerance)}};
}

// ---------------------------------------------------------------------------
// gcip
// ---------------------------------------------------------------------------

inline std::string gcip_csv(const GcipReport& r) {
  std::string out;
  if (r.estimated) {
    Csv csv({"x", "q", "s1", "s2", "s1_se", "s2_se"});
    for (std::size_t row = 0; row < r.rows.size(); ++row)
      for (std::size_t q = 1; q <= r.q_max; ++q)
        csv.row(r.row_x[row], q, r.s1[row][q - 1], r.s2[row][q - 1], r.s1_se[row][q - 1],
                r.s2_se[row][q - 1]);
    return csv.str();
  }
  Csv csv({"x", "q", "s1", "s2"});
  for (std::size_t row = 0; row < r.rows.size(); ++row) {
    // Synthetic rows carry no x; the row label stands in.
    const std::string x = std::isnan(r.row_x[row]) ? r.rows[row] : format_double(r.row_x[row]);
    for (std::size_t q = 1; q <= r.q_max; ++q) csv.row(x, q, r.s1[row][q - 1], r.s2[row][q - 1]);
  }
  return csv.str();
}

inline json gcip_summary(const GcipReport& r) {
  return {{"class_id", r.class_id},
          {"source", r.source_label},
          {"synthetic", r.synthetic},
          {"estimated", r.estimated},
          {"delta", num(r.delta)},
          {"q_max", r.q_max},
          {"rows", r.rows.size()},
          {"c1_hat", num(r.c1_hat)},
          {"c2_hat", num(r.c2_hat)},
          {"s1_verdict", to_string(r.bounded_verdict)},
          {"s1_slope", num(r.s1_slope)},
          {"s2_verdict", to_string(r.s2_verdict)},
          {"s2_slope", num(r.s2_slope)},
          {"slope_tol", num(r.slope_tol)},
          {"growth_tol", num(r.growth_tol)},
          {"implication_holds", implication_check(r)},
          {"note", r.note}};
}

// ---------------------------------------------------------------------------
// empirical
// ---------------------------------------------------------------------------

inline std::string study_csv(const ConvergenceStudy& s) {
  Csv csv({"n", "rep", "deviation"});
  for (std::size_t j = 0; j < s.n_grid.size(); ++j)
    for (std::size_t r = 0; r < s.reps; ++r) csv.row(s.n_grid[j], r, s.deviations[j][r]);
  return csv.str();
}

inline std::string study_plot_csv(const ConvergenceStudy& s) {
  Csv csv({"n", "mean", "q10", "q90"});
  for (const auto& row : s.summary) csv.row(row.n, row.mean, row.q10, row.q90);
  return csv.str();
}

inline json to_json(const DkwReport& d) {
  json rows = json::array();
  for (const auto& r : d.rows)
    rows.push_back({{"n", r.n},
                    {"epsilon", num(r.epsilon)},
                    {"bound", num(r.bound)},
                    {"observed", num(r.observed)},
                    {"allowance", num(r.allowance)},
                    {"pass", r.pass}});
  return {{"pass", d.pass}, {"rows", rows}};
}

inline json study_summary(const ConvergenceStudy& s) {
  json rows = json::array();
  for (const auto& r : s.summary)
    rows.push_back({{"n", r.n},
                    {"mean", num(r.mean)},
                    {"median", num(r.median)},
                    {"max", num(r.max)},
                    {"q10", num(r.q10)},
                    {"q90", num(r.q90)}});
  json j = {{"spec_label", s.spec_label},
            {"iid", s.iid},
            {"seed", s.seed},
            {"reps", s.reps},
            {"n_grid", s.n_grid},
            {"summary", rows},
            {"note", s.note}};
  if (s.fit) j["fit"] = {{"c", num(s.fit->c)}, {"b", num(s.fit->b)}, {"rms_residual", num(s.fit->rms_residual)}};
  return j;
}

// ---------------------------------------------------------------------------
// entropy
// ---------------------------------------------------------------------------

inline json to_json(const Cut& c) { return {{"t", num(c.t)}, {"closed", c.closed}}; }

inline json to_json(const BracketCover& c) {
  json brackets = json::array();
  for (const auto& b : c.brackets)
    brackets.push_back({{"lower", to_json(b.lower)}, {"upper", to_json(b.upper)}, {"size", num(b.size)}});
  return {{"class_id", c.class_id},
          {"epsilon", num(c.epsilon)},
          {"metric", to_string(c.metric)},
          {"count", c.count},
          {"bound_kind", c.bound_kind},
          {"brackets", brackets}};
}

inline json to_json(const VcReport& r) {
  json witnesses = json::array();
  for (const auto& w : r.shattering_witnesses)
    witnesses.push_back({{"points", nums(w.points)}, {"pickers", w.pickers}});
  json j = {{"class_id", r.class_id},
            {"universe", nums(r.universe)},
            {"searched_up_to", r.searched_up_to},
            {"shattering_witnesses", witnesses},
            {"note", "shattering is decided over the declared finite universe"}};
  if (r.index) j["index"] = *r.index;
  else j["index"] = "NOT_FOUND(" + std::to_string(r.searched_up_to) + ")";
  return j;
}

inline json to_json(const GcVerdict& v) {
  json items = json::array();
  for (const auto& c : v.checklist)
    items.push_back({{"id", c.id}, {"description", c.description}, {"pass", c.pass}});
  return {{"status", v.label()}, {"checklist", items}, {"note", v.note}};
}

}  // namespace gclab::lab
