// fieldlang: generate, analyze, compress, describe and evaluate 2D flow fields.
//
// Exit codes: 0 success, 1 data error, 2 usage error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fieldlang/fieldlang.hpp"
#include "fieldlang/polisher.hpp"

namespace fs = std::filesystem;
using namespace fieldlang;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // shared
  std::size_t n = 256;
  double alpha = 0.2;
  std::size_t min_area = 16;
  std::size_t k = 512;
  std::size_t patch = 16;
  std::uint64_t seed = 42;
  std::string out;
  std::string sidecar;
  std::string codebook;

  // synth
  std::string synth_case;
  double amplitude = 1.0;
  double u_max = 1.0;
  double reynolds = 100.0;
  double u0 = 1.0, v0 = 0.0;
  double gamma = 1.0, core_radius = 0.05, cx = 0.5, cy = 0.5;

  // single field inputs
  std::string field;
  std::vector<std::string> fields;
  std::size_t max_iter = 100;

  // describe / dataset
  std::string task = "vortex";
  std::size_t question = 1;
  std::string polisher;
  int polisher_timeout_ms = 5000;
  bool record = false;

  // eval
  std::string manifest;
  std::string predictions;
};

DetectionParams detection_params(const Options& o) {
  DetectionParams p;
  p.alpha = o.alpha;
  p.min_area = o.min_area;
  p.check();
  return p;
}

void write_case(const SynthCase& c, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path field = dir / (c.name + ".fld");
  save_field(c.snapshot, field);
  Sidecar sc;
  sc.props = c.props;
  sc.truth = c.truth;
  if (c.snapshot.grid.x_min != 0.0 || c.snapshot.grid.x_max != 1.0 || c.snapshot.grid.y_min != 0.0 ||
      c.snapshot.grid.y_max != 1.0)
    sc.domain = c.snapshot.grid;
  save_sidecar(sc, sidecar_path_for(field));
  for (const auto& w : c.warnings) std::cerr << "warning: " << c.name << ": " << w << "\n";
}

int cmd_synth(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  const std::string& name = o.synth_case;
  if (name == "suite") {
    const auto suite = build_suite(o.n, o.seed);
    fs::create_directories(dir);
    std::string manifest;
    for (const auto& c : suite) {
      write_case(c, dir);
      manifest += manifest_line(c.name, c.name + ".fld", c.name + ".props.json", c.truth).dump() + "\n";
    }
    detail::write_text(dir / "manifest.jsonl", manifest);
    std::cout << "wrote " << suite.size() << " cases and " << (dir / "manifest.jsonl").string() << "\n";
    return kExitOk;
  }
  SynthCase c;
  if (name == "uniform")
    c = gen_uniform(o.n, o.u0, o.v0);
  else if (name == "channel")
    c = gen_channel(o.n, o.u_max);
  else if (name == "taylor-green")
    c = gen_taylor_green(o.n, o.amplitude);
  else if (name == "lamb-oseen")
    c = gen_lamb_oseen(o.n, {LambOseenSpec{{o.cx, o.cy}, o.gamma, o.core_radius}});
  else if (name == "cavity")
    c = gen_cavity_proxy(o.n, o.reynolds);
  else
    throw UsageError("unknown case '" + name + "'");
  c.name = name;
  write_case(c, dir);
  std::cout << "wrote " << (dir / (name + ".fld")).string() << "\n";
  return kExitOk;
}

LoadedCase load_input(const Options& o) {
  return load_case(o.field, o.sidecar.empty() ? std::nullopt : std::optional<fs::path>(o.sidecar));
}

int cmd_analyze(const Options& o) {
  const LoadedCase c = load_input(o);
  const AnalysisReport report = analyze(c.snapshot, c.sidecar.props, detection_params(o));
  std::cout << json(report).dump(2) << "\n";
  return kExitOk;
}

int cmd_train_codebook(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  PatchMatrix patches;
  auto add = [&](const FieldSnapshot& s) {
    const auto p = extract_patches(to_rgb(s), o.patch);
    if (patches.dim == 0) patches = p;
    else patches.append(p);
  };
  if (o.fields.empty()) {
    // Default training set: one field of each vortex-bearing family.
    add(gen_taylor_green(o.n).snapshot);
    add(gen_lamb_oseen(o.n, {LambOseenSpec{{0.3, 0.4}, 1.0, 0.06}, LambOseenSpec{{0.7, 0.6}, -0.8, 0.05}}).snapshot);
    add(gen_cavity_proxy(o.n, 100.0).snapshot);
    add(gen_channel(o.n, 1.0).snapshot);
  } else {
    for (const auto& f : o.fields) add(load_case(f).snapshot);
  }
  TrainOptions opts;
  opts.max_iterations = o.max_iter;
  const auto t0 = std::chrono::steady_clock::now();
  const Codebook cb = train_codebook(patches, o.k, o.seed, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_codebook(cb, o.out);
  std::printf("trained K=%zu s=%zu on %zu patches in %zu iterations (%.2f s), final inertia %.6g\n", cb.entry_count,
              cb.patch_size, patches.count(), cb.inertia_history.size(), secs,
              cb.inertia_history.empty() ? 0.0 : cb.inertia_history.back());
  return kExitOk;
}

int cmd_compress(const Options& o) {
  if (o.codebook.empty()) throw UsageError("--codebook is required");
  const LoadedCase c = load_input(o);
  const Codebook cb = load_codebook(o.codebook);
  const TokenSequence seq = encode(to_rgb(c.snapshot), cb);
  const CompressionStats st = compression_stats(c.snapshot, seq, cb);
  json j{{"tokens", tokens_to_json(seq)},
         {"patch_rows", seq.patch_rows},
         {"patch_cols", seq.patch_cols},
         {"patch_size", seq.patch_size},
         {"stats", st}};
  if (seq.meta) j["meta"] = *seq.meta;
  const fs::path out = o.out.empty() ? fs::path(o.field).replace_extension(".tokens.json") : fs::path(o.out);
  detail::write_text(out, j.dump(2) + "\n");
  std::printf("%zu tokens, reduction %.3f%% (per scalar %.3f%%), wrote %s\n", st.token_count, 100.0 * st.reduction,
              100.0 * st.reduction_per_scalar, out.string().c_str());
  return kExitOk;
}

std::string field_reference(const LoadedCase& c, const Options& o, const fs::path& field) {
  if (!o.codebook.empty()) return format_field_ref(encode(to_rgb(c.snapshot), load_codebook(o.codebook)));
  return "<field:" + field.filename().string() + ">";
}

std::string polisher_endpoint(const Options& o) {
  if (!o.polisher.empty()) return o.polisher;
  if (const char* env = std::getenv("FIELDLANG_POLISHER_URL")) return env;
  return {};
}

int cmd_describe(const Options& o) {
  const Task task = parse_task(o.task);
  const auto bank = question_bank(task);
  if (o.question < 1 || o.question > bank.size())
    throw UsageError("--question must be between 1 and " + std::to_string(bank.size()));
  const LoadedCase c = load_input(o);
  const AnalysisReport report = analyze(c.snapshot, c.sidecar.props, detection_params(o));
  std::string answer = render_answer(task, report);
  if (const auto endpoint = polisher_endpoint(o); !endpoint.empty()) {
    HttpPolisherClient client({endpoint, std::chrono::milliseconds(o.polisher_timeout_ms), 1});
    const PolishResult res = polish(client, answer, report);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    answer = res.text;
  }
  if (o.record)
    std::cout << emit_training_record(field_reference(c, o, o.field), bank[o.question - 1].text, answer) << "\n";
  else
    std::cout << answer << "\n";
  return kExitOk;
}

int cmd_dataset(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  const auto entries = load_manifest(o.manifest);
  std::optional<Codebook> cb;
  if (!o.codebook.empty()) cb = load_codebook(o.codebook);
  const DetectionParams params = detection_params(o);
  std::string lines;
  std::size_t count = 0;
  for (const auto& e : entries) {
    const LoadedCase c = load_case(e.field, e.sidecar);
    const AnalysisReport report = analyze(c.snapshot, c.sidecar.props, params);
    const std::string ref = cb ? format_field_ref(encode(to_rgb(c.snapshot), *cb)) : "<field:" + e.id + ">";
    for (Task t : kAllTasks) {
      const std::string answer = render_answer(t, report);
      for (const auto& q : question_bank(t)) {
        lines += emit_training_record(ref, q.text, answer) + "\n";
        ++count;
      }
    }
  }
  detail::write_text(o.out, lines);
  std::cout << "wrote " << count << " training records from " << entries.size() << " fields to " << o.out << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o) {
  std::vector<ManifestEntry> entries;
  try {
    entries = load_manifest(o.manifest);
  } catch (const Error& e) {
    std::cerr << "error: cannot load manifest: " << e.what() << "\n";
    return kExitData;
  }
  const BenchReport report = o.predictions.empty()
                                 ? run_benchmark_builtin(entries, detection_params(o))
                                 : run_benchmark_predictions(entries, load_predictions(o.predictions));
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(dir);
  emit_report(report, ReportFormat::Json, dir / "report.json");
  emit_report(report, ReportFormat::Markdown, dir / "report.md");
  emit_report(report, ReportFormat::Csv, dir / "report.csv");
  if (report.sample_count() == 0) {
    std::cout << "0 samples: manifest is empty, accuracies undefined\n";
    return kExitOk;
  }
  auto line = [](const char* name, const TaskScore& t) {
    std::printf("%-15s %7s%%  (%zu/%zu)\n", name, t.accuracy() ? detail::percent(t.accuracy()).c_str() : "n/a",
                t.passes, t.samples);
  };
  std::printf("%zu samples (%s)\n", report.sample_count(), report.mode.c_str());
  line("categorize", report.categorize);
  line("reynolds", report.reynolds);
  line("vortex", report.vortex);
  line("field-analysis", report.field_analysis);
  return kExitOk;
}

int cmd_export_png(const Options& o) {
  const LoadedCase c = load_input(o);
  const fs::path out = o.out.empty() ? fs::path(o.field).replace_extension(".png") : fs::path(o.out);
  export_png(to_rgb(c.snapshot), out);
  std::cout << "wrote " << out.string() << "\n";
  return kExitOk;
}

void add_detection_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--alpha", o.alpha, "Vortex core threshold as a fraction of each peak")->capture_default_str();
  cmd->add_option("--min-area", o.min_area, "Minimum core size in cells")->capture_default_str();
}

void add_field_input(CLI::App* cmd, Options& o) {
  cmd->add_option("field", o.field, "FLD1 field file")->required();
  cmd->add_option("--sidecar", o.sidecar, "Sidecar JSON (default: <field>.props.json)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analyze, compress and describe 2D velocity-pressure fields"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate analytic flow fields with ground truth");
  synth->add_option("case", o.synth_case, "uniform | channel | taylor-green | lamb-oseen | cavity | suite")->required();
  synth->add_option("--n", o.n, "Grid side length")->capture_default_str();
  synth->add_option("--out", o.out, "Output directory");
  synth->add_option("--seed", o.seed, "Seed for the suite's random Lamb-Oseen cases")->capture_default_str();
  synth->add_option("--amplitude", o.amplitude, "Taylor-Green amplitude")->capture_default_str();
  synth->add_option("--u-max", o.u_max, "Channel centreline speed")->capture_default_str();
  synth->add_option("--re", o.reynolds, "Cavity Reynolds number")->capture_default_str();
  synth->add_option("--u0", o.u0, "Uniform x velocity")->capture_default_str();
  synth->add_option("--v0", o.v0, "Uniform y velocity")->capture_default_str();
  synth->add_option("--gamma", o.gamma, "Lamb-Oseen circulation")->capture_default_str();
  synth->add_option("--core-radius", o.core_radius, "Lamb-Oseen core radius")->capture_default_str();
  synth->add_option("--x", o.cx, "Lamb-Oseen centre x")->capture_default_str();
  synth->add_option("--y", o.cy, "Lamb-Oseen centre y")->capture_default_str();

  auto* analyze_cmd = app.add_subcommand("analyze", "Print the analysis report as JSON");
  add_field_input(analyze_cmd, o);
  add_detection_flags(analyze_cmd, o);

  auto* train = app.add_subcommand("train-codebook", "Train a patch codebook (k-means)");
  train->add_option("fields", o.fields, "Training fields (default: built-in synthetic set)");
  train->add_option("--out", o.out, "Output codebook file")->required();
  train->add_option("--n", o.n, "Grid side of the built-in training fields")->capture_default_str();
  train->add_option("--k", o.k, "Codebook size")->capture_default_str();
  train->add_option("--patch", o.patch, "Patch side length")->capture_default_str();
  train->add_option("--seed", o.seed, "k-means++ seed")->capture_default_str();
  train->add_option("--max-iter", o.max_iter, "Lloyd iteration cap")->capture_default_str();

  auto* compress = app.add_subcommand("compress", "Encode a field to codebook tokens");
  add_field_input(compress, o);
  compress->add_option("--codebook", o.codebook, "Codebook file")->required();
  compress->add_option("--out", o.out, "Token JSON output (default: <field>.tokens.json)");

  auto* describe = app.add_subcommand("describe", "Render a textual answer for one task");
  add_field_input(describe, o);
  add_detection_flags(describe, o);
  describe->add_option("--task", o.task, "categorize | reynolds | vortex | field-analysis")->capture_default_str();
  describe->add_option("--question", o.question, "Question number within the task's bank")->capture_default_str();
  describe->add_option("--polisher", o.polisher, "Polisher endpoint URL (default: $FIELDLANG_POLISHER_URL)");
  describe->add_option("--polisher-timeout-ms", o.polisher_timeout_ms, "Polisher timeout")->capture_default_str();
  describe->add_flag("--record", o.record, "Emit a Human/Assistant training record line");
  describe->add_option("--codebook", o.codebook, "Codebook used for the record's token reference");

  auto* dataset = app.add_subcommand("dataset", "Write training records for every manifest entry");
  dataset->add_option("manifest", o.manifest, "Manifest (JSON lines)")->required();
  dataset->add_option("--out", o.out, "Output text file")->required();
  dataset->add_option("--codebook", o.codebook, "Codebook used for token references");
  add_detection_flags(dataset, o);

  auto* eval = app.add_subcommand("eval", "Score the four tasks over a manifest");
  eval->add_option("manifest", o.manifest, "Manifest (JSON lines)")->required();
  eval->add_option("--predictions", o.predictions, "Predictions (JSON lines); default runs the builtin pipeline");
  eval->add_option("--out", o.out, "Report directory");
  add_detection_flags(eval, o);

  auto* png = app.add_subcommand("export-png", "Write the RGB mapping as PNG plus .norm.json");
  add_field_input(png, o);
  png->add_option("--out", o.out, "Output PNG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (analyze_cmd->parsed()) return cmd_analyze(o);
    if (train->parsed()) return cmd_train_codebook(o);
    if (compress->parsed()) return cmd_compress(o);
    if (describe->parsed()) return cmd_describe(o);
    if (dataset->parsed()) return cmd_dataset(o);
    if (eval->parsed()) return cmd_eval(o);
    if (png->parsed()) return cmd_export_png(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument && (synth->parsed() || describe->parsed())) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kExitUsage;
    }
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
