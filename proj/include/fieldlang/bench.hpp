#pragma once

// Four-task scoring of analysis reports against ground truth, driven by a
// JSON-lines manifest, with JSON / CSV / markdown report output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fieldlang/features.hpp"
#include "fieldlang/field_io.hpp"

namespace fieldlang {

inline constexpr double kRelativeTolerance = 0.10;
inline constexpr double kVortexPositionFraction = 0.25;
inline constexpr double kLocationFraction = 0.10;

// ---------------------------------------------------------------------------
// Evaluators

inline bool eval_categorize(FlowLabel pred, FlowLabel truth) { return pred == truth; }

/// |pred - truth| <= 10% of truth; a zero truth needs an exact zero.
inline bool within_relative(double pred, double truth, double tol = kRelativeTolerance) {
  if (!std::isfinite(pred)) return false;
  if (truth == 0.0) return pred == 0.0;
  return std::abs(pred - truth) <= tol * std::abs(truth);
}

inline bool eval_reynolds(double pred, double truth) { return within_relative(pred, truth); }

inline bool eval_field_analysis(const ValueAt& pred, const ValueAt& truth, const GridSpec& domain) {
  return within_relative(pred.value, truth.value) &&
         distance(pred.location, truth.location) <= kLocationFraction * domain.domain_size();
}

struct VortexMatch {
  std::size_t truth_index = 0;
  std::optional<std::size_t> pred_index;
  double distance = 0.0;
  bool position_ok = false;
  bool direction_ok = false;
  bool circulation_ok = false;  // |Γ_pred - Γ_truth| <= 10% |Γ_truth|
  bool pass = false;
};

struct VortexEvaluation {
  std::vector<VortexMatch> matches;  // in matching order (|Γ| descending)
  std::size_t passes = 0;
  std::size_t false_positives = 0;
  bool count_match = false;

  std::size_t truth_count() const { return matches.size(); }
};

/// Greedy matching: truth vortices by descending |Γ| (ties by index) each take
/// the nearest unclaimed prediction (ties by lower index).
inline VortexEvaluation eval_vortices(const std::vector<VortexDescriptor>& pred,
                                      const std::vector<VortexDescriptor>& truth, const GridSpec& domain) {
  std::vector<std::size_t> order(truth.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(truth[a].circulation) > std::abs(truth[b].circulation);
  });
  const double limit = kVortexPositionFraction * domain.domain_size();
  std::vector<bool> claimed(pred.size(), false);
  VortexEvaluation ev;
  for (std::size_t t : order) {
    VortexMatch m;
    m.truth_index = t;
    double best = 0.0;
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (claimed[p]) continue;
      const double d = distance(pred[p].center, truth[t].center);
      if (!m.pred_index || d < best) {
        m.pred_index = p;
        best = d;
      }
    }
    if (m.pred_index) {
      claimed[*m.pred_index] = true;
      const auto& pv = pred[*m.pred_index];
      m.distance = best;
      m.position_ok = best <= limit;
      m.direction_ok = pv.direction == truth[t].direction;
      m.circulation_ok = within_relative(pv.circulation, truth[t].circulation);
      m.pass = m.position_ok && m.direction_ok;
    }
    if (m.pass) ++ev.passes;
    ev.matches.push_back(m);
  }
  ev.false_positives = static_cast<std::size_t>(std::count(claimed.begin(), claimed.end(), false));
  ev.count_match = pred.size() == truth.size();
  return ev;
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::string id;
  std::filesystem::path field;
  std::filesystem::path sidecar;
  GroundTruth truth;
  GridSpec domain = GridSpec::unit(2);  // physical bounds; only extents are used
  std::optional<AnalysisReport> prediction;
};

/// One JSON object per line: {"id", "field", "sidecar"?, "truth"?}. Relative
/// paths resolve against the manifest's directory; a missing "truth" is taken
/// from the sidecar.
inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  const std::string text = detail::read_text(path);
  const auto base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.id = detail::required<std::string>(j, "id");
      e.field = base / detail::required<std::string>(j, "field");
      e.sidecar = j.contains("sidecar") ? base / j.at("sidecar").get<std::string>() : sidecar_path_for(e.field);
      if (!std::filesystem::exists(e.field)) throw Error(ErrorKind::Io, "missing field file " + e.field.string());
      const Sidecar sc = load_sidecar(e.sidecar);
      if (sc.domain) e.domain = *sc.domain;
      if (j.contains("truth"))
        e.truth = j.at("truth").get<GroundTruth>();
      else if (sc.truth)
        e.truth = *sc.truth;
      else
        throw Error(ErrorKind::Parse, "entry '" + e.id + "' has no ground truth");
      if (j.contains("prediction")) e.prediction = j.at("prediction").get<AnalysisReport>();
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::Parse, where + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ex.kind(), where + ": " + ex.what());
    }
  }
  return entries;
}

inline json manifest_line(const std::string& id, const std::string& field, const std::string& sidecar,
                          const GroundTruth& truth) {
  return json{{"id", id}, {"field", field}, {"sidecar", sidecar}, {"truth", truth}};
}

// ---------------------------------------------------------------------------
// Predictions

struct Prediction {
  std::optional<AnalysisReport> report;
  bool not_available = false;  // present but unparseable
  std::string reason;
};

/// JSON-lines of AnalysisReport objects carrying an "id". Lines whose report
/// fails to parse are kept as NA under their id when the id is readable.
struct PredictionSet {
  std::map<std::string, Prediction> by_id;
  std::size_t unreadable_lines = 0;
};

inline PredictionSet parse_predictions(const std::string& text) {
  PredictionSet set;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      ++set.unreadable_lines;
      continue;
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      ++set.unreadable_lines;
      continue;
    }
    Prediction p;
    try {
      p.report = j.get<AnalysisReport>();
    } catch (const std::exception& e) {
      p.not_available = true;
      p.reason = std::string("unparseable prediction: ") + e.what();
    }
    set.by_id[j["id"].get<std::string>()] = std::move(p);
  }
  return set;
}

inline PredictionSet load_predictions(const std::filesystem::path& path) {
  return parse_predictions(detail::read_text(path));
}

inline std::string prediction_line(const std::string& id, const AnalysisReport& report) {
  json j = report;
  j["id"] = id;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Report

struct TaskScore {
  std::size_t samples = 0;
  std::size_t passes = 0;
  std::size_t not_available = 0;

  /// 100·passes/samples; nullopt when there are no samples.
  std::optional<double> accuracy() const {
    if (samples == 0) return std::nullopt;
    return 100.0 * static_cast<double>(passes) / static_cast<double>(samples);
  }
  void add(bool pass, bool na = false) {
    ++samples;
    passes += pass ? 1 : 0;
    not_available += na ? 1 : 0;
  }
};

struct VortexMetrics {
  std::size_t samples_with_truth = 0;
  std::size_t count_match_samples = 0;  // over all scored samples
  std::size_t scored_samples = 0;
  std::size_t matched = 0;
  std::size_t position_pass = 0;
  std::size_t direction_pass = 0;
  std::size_t circulation_pass = 0;
  std::size_t false_positives = 0;
  double position_error_sum = 0.0;  // matched pairs, as a fraction of domain size
  double per_sample_accuracy_sum = 0.0;

  std::optional<double> per_sample_accuracy() const {
    if (samples_with_truth == 0) return std::nullopt;
    return 100.0 * per_sample_accuracy_sum / static_cast<double>(samples_with_truth);
  }
  std::optional<double> mean_position_error() const {
    if (matched == 0) return std::nullopt;
    return 100.0 * position_error_sum / static_cast<double>(matched);
  }
};

struct SampleResult {
  std::string id;
  bool categorize = false;
  bool reynolds = false;
  bool field_analysis = false;
  std::size_t vortex_passes = 0;
  std::size_t vortex_truths = 0;
  std::size_t false_positives = 0;
  std::string failure;
};

struct BenchReport {
  std::string mode;
  TaskScore categorize;
  TaskScore reynolds;
  TaskScore vortex;  // per truth vortex
  TaskScore field_analysis;
  VortexMetrics vortex_detail;
  std::vector<SampleResult> samples;
  std::size_t unreadable_prediction_lines = 0;

  std::size_t sample_count() const { return samples.size(); }
};

/// Scores one sample; `pred` may be missing or NA.
inline SampleResult score_sample(BenchReport& report, const ManifestEntry& entry, const Prediction& pred) {
  SampleResult r;
  r.id = entry.id;
  const auto& truth = entry.truth;
  const bool na = pred.not_available;
  if (!pred.report) {
    r.failure = pred.reason.empty() ? "missing prediction" : pred.reason;
    report.categorize.add(false, na);
    report.reynolds.add(false, na);
    report.field_analysis.add(false, na);
    for (std::size_t i = 0; i < truth.vortices.size(); ++i) report.vortex.add(false, na);
    r.vortex_truths = truth.vortices.size();
    auto& vm = report.vortex_detail;
    ++vm.scored_samples;
    if (!truth.vortices.empty()) ++vm.samples_with_truth;
    return r;
  }
  const AnalysisReport& p = *pred.report;
  r.categorize = eval_categorize(p.flow.label, truth.flow_class);
  r.reynolds = eval_reynolds(p.reynolds, truth.reynolds);
  r.field_analysis = eval_field_analysis(p.u_max, {truth.u_max_value, truth.u_max_location}, entry.domain);
  report.categorize.add(r.categorize);
  report.reynolds.add(r.reynolds);
  report.field_analysis.add(r.field_analysis);

  const VortexEvaluation ev = eval_vortices(p.vortices, truth.vortices, entry.domain);
  auto& vm = report.vortex_detail;
  ++vm.scored_samples;
  vm.count_match_samples += ev.count_match ? 1 : 0;
  vm.false_positives += ev.false_positives;
  for (const auto& m : ev.matches) {
    report.vortex.add(m.pass);
    if (!m.pred_index) continue;
    ++vm.matched;
    vm.position_pass += m.position_ok ? 1 : 0;
    vm.direction_pass += m.direction_ok ? 1 : 0;
    vm.circulation_pass += m.circulation_ok ? 1 : 0;
    vm.position_error_sum += m.distance / entry.domain.domain_size();
  }
  if (!truth.vortices.empty()) {
    ++vm.samples_with_truth;
    vm.per_sample_accuracy_sum += static_cast<double>(ev.passes) / static_cast<double>(truth.vortices.size());
  }
  r.vortex_passes = ev.passes;
  r.vortex_truths = truth.vortices.size();
  r.false_positives = ev.false_positives;
  return r;
}

using PredictionSource = std::function<Prediction(const ManifestEntry&)>;

inline BenchReport run_benchmark(const std::vector<ManifestEntry>& entries, const PredictionSource& source,
                                 std::string mode) {
  BenchReport report;
  report.mode = std::move(mode);
  for (const auto& e : entries) report.samples.push_back(score_sample(report, e, source(e)));
  return report;
}

/// Runs the analysis pipeline on each entry's field file.
inline BenchReport run_benchmark_builtin(const std::vector<ManifestEntry>& entries,
                                         const DetectionParams& params = {}) {
  return run_benchmark(
      entries,
      [&](const ManifestEntry& e) {
        const LoadedCase c = load_case(e.field, e.sidecar);
        return Prediction{analyze(c.snapshot, c.sidecar.props, params), false, {}};
      },
      "builtin-pipeline");
}

/// Scores external predictions; manifest-embedded predictions are used when
/// the set lacks an id.
inline BenchReport run_benchmark_predictions(const std::vector<ManifestEntry>& entries, const PredictionSet& set) {
  BenchReport report = run_benchmark(
      entries,
      [&](const ManifestEntry& e) {
        if (auto it = set.by_id.find(e.id); it != set.by_id.end()) return it->second;
        if (e.prediction) return Prediction{e.prediction, false, {}};
        return Prediction{std::nullopt, false, "missing prediction for '" + e.id + "'"};
      },
      "predictions");
  report.unreadable_prediction_lines = set.unreadable_lines;
  return report;
}

inline BenchReport run_benchmark(const std::filesystem::path& manifest,
                                 const std::optional<std::filesystem::path>& predictions,
                                 const DetectionParams& params = {}) {
  const auto entries = load_manifest(manifest);
  if (predictions) return run_benchmark_predictions(entries, load_predictions(*predictions));
  return run_benchmark_builtin(entries, params);
}

// ---------------------------------------------------------------------------
// Output

inline json accuracy_json(const std::optional<double>& a) { return a ? json(*a) : json(nullptr); }

inline json task_json(const TaskScore& t) {
  return json{{"samples", t.samples},
              {"passes", t.passes},
              {"accuracy", accuracy_json(t.accuracy())},
              {"not_available", t.not_available}};
}

inline json report_to_json(const BenchReport& r) {
  const auto& vm = r.vortex_detail;
  json vortex = task_json(r.vortex);
  vortex["per_sample_accuracy"] = accuracy_json(vm.per_sample_accuracy());
  vortex["samples_with_truth"] = vm.samples_with_truth;
  vortex["count_match_samples"] = vm.count_match_samples;
  vortex["scored_samples"] = vm.scored_samples;
  vortex["matched"] = vm.matched;
  vortex["position_pass"] = vm.position_pass;
  vortex["direction_pass"] = vm.direction_pass;
  vortex["circulation_pass"] = vm.circulation_pass;
  vortex["false_positives"] = vm.false_positives;
  vortex["mean_position_error_percent"] = accuracy_json(vm.mean_position_error());
  json samples = json::array();
  for (const auto& s : r.samples) {
    json j{{"id", s.id},
           {"categorize", s.categorize},
           {"reynolds", s.reynolds},
           {"vortex_passes", s.vortex_passes},
           {"vortex_truths", s.vortex_truths},
           {"false_positives", s.false_positives},
           {"field_analysis", s.field_analysis}};
    if (!s.failure.empty()) j["failure"] = s.failure;
    samples.push_back(std::move(j));
  }
  // nlohmann::json objects are key-sorted, so the output order is stable.
  return json{{"mode", r.mode},
              {"sample_count", r.sample_count()},
              {"categorize", task_json(r.categorize)},
              {"reynolds", task_json(r.reynolds)},
              {"vortex", std::move(vortex)},
              {"field_analysis", task_json(r.field_analysis)},
              {"unreadable_prediction_lines", r.unreadable_prediction_lines},
              {"samples", std::move(samples)}};
}

namespace detail {

inline std::string percent(const std::optional<double>& a) {
  if (!a) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *a);
  return buf;
}

inline std::string task_cell(const TaskScore& t) {
  if (t.samples > 0 && t.not_available == t.samples) return "NA";
  return percent(t.accuracy());
}

inline std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

inline std::string report_to_csv(const BenchReport& r) {
  std::string out = "task,samples,passes,accuracy,not_available\n";
  const std::pair<const char*, const TaskScore*> rows[] = {{"categorize", &r.categorize},
                                                           {"reynolds", &r.reynolds},
                                                           {"vortex", &r.vortex},
                                                           {"field_analysis", &r.field_analysis}};
  for (const auto& [name, t] : rows) {
    out += std::string(name) + "," + std::to_string(t->samples) + "," + std::to_string(t->passes) + "," +
           detail::percent(t->accuracy()) + "," + std::to_string(t->not_available) + "\n";
  }
  return out;
}

inline const char* kCapabilityRows[] = {"Vortex detection count", "Core position error", "Circulation quantification",
                                        "Rotation direction accuracy"};

inline std::string report_to_markdown(const BenchReport& r) {
  const auto& vm = r.vortex_detail;
  std::string out = "# Benchmark report (" + r.mode + ", " + std::to_string(r.sample_count()) + " samples)\n\n";
  out += "| Categorize | Reynolds Number | Vortex Identification | Field Data Analysis |\n";
  out += "|---|---|---|---|\n";
  out += "| " + detail::task_cell(r.categorize) + " | " + detail::task_cell(r.reynolds) + " | " +
         detail::task_cell(r.vortex) + " | " + detail::task_cell(r.field_analysis) + " |\n\n";
  out += "| Metric | Value |\n|---|---|\n";
  out += std::string("| ") + kCapabilityRows[0] + " | " +
         detail::percent(detail::ratio(vm.count_match_samples, vm.scored_samples)) + "% of samples exact, " +
         std::to_string(vm.false_positives) + " false positives |\n";
  out += std::string("| ") + kCapabilityRows[1] + " | " + detail::percent(vm.mean_position_error()) +
         "% of domain (mean over matched) |\n";
  out += std::string("| ") + kCapabilityRows[2] + " | " +
         detail::percent(detail::ratio(vm.circulation_pass, vm.matched)) + "% within 10% |\n";
  out += std::string("| ") + kCapabilityRows[3] + " | " +
         detail::percent(detail::ratio(vm.direction_pass, vm.matched)) + "% of matched |\n";
  return out;
}

enum class ReportFormat { Json, Csv, Markdown };

inline std::string render_report(const BenchReport& r, ReportFormat f) {
  switch (f) {
    case ReportFormat::Json: return report_to_json(r).dump(2) + "\n";
    case ReportFormat::Csv: return report_to_csv(r);
    case ReportFormat::Markdown: return report_to_markdown(r);
  }
  return {};
}

inline void emit_report(const BenchReport& r, ReportFormat f, const std::filesystem::path& path) {
  detail::write_text(path, render_report(r, f));
}

}  // namespace fieldlang
