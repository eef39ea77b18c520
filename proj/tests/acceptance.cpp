// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fieldlang/fieldlang.hpp"
#include "test_util.hpp"

using namespace fieldlang;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  if (!out.pass) ++failures;
  std::printf("%s  %d. %-22s %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Codebook train_default_codebook(std::size_t n) {
  PatchMatrix patches;
  for (const auto& c : {gen_taylor_green(n),
                        gen_lamb_oseen(n, {LambOseenSpec{{0.3, 0.3}, 1.0, 0.05}, LambOseenSpec{{0.7, 0.7}, -1.0, 0.05}}),
                        gen_cavity_proxy(n, 100.0), gen_channel(n, 1.0)})
    patches.append(extract_patches(to_rgb(c.snapshot), 16));
  return train_codebook(patches, 512, 42);
}

Outcome token_contract() {
  const Codebook cb = train_default_codebook(256);
  const std::vector<SynthCase> fields = {gen_taylor_green(256), gen_channel(256, 1.0), gen_uniform(256, 1.0, 0.5),
                                         gen_cavity_proxy(256, 400.0),
                                         gen_lamb_oseen(256, {LambOseenSpec{{0.4, 0.6}, -1.5, 0.06}})};
  double worst = 0.0;
  for (const auto& c : fields) {
    const auto t0 = Clock::now();
    const auto seq = encode(to_rgb(c.snapshot), cb);
    const auto st = compression_stats(c.snapshot, seq, cb);
    worst = std::max(worst, seconds_since(t0));
    if (seq.tokens.size() != 256 || st.token_count != 256)
      return {false, c.name + ": " + std::to_string(seq.tokens.size()) + " tokens"};
    if (std::abs(st.reduction - (1.0 - 256.0 / 65536.0)) > 1e-15 || fmt("%.3f", 100.0 * st.reduction) != "99.609")
      return {false, fmt("reduction %.6f%%", 100.0 * st.reduction)};
  }
  return {worst < 1.0, fmt("256 tokens, reduction 99.609%%, slowest field %.3f s", worst)};
}

Outcome vortex_oracle() {
  std::mt19937_64 rng(2024);
  std::size_t truths = 0, passes = 0, matched = 0, circ_ok = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 100; ++i) {
    const auto specs = sample_lamb_oseen(rng);
    const auto c = gen_lamb_oseen(256, specs);
    const auto report = analyze(c.snapshot, c.props);
    const auto ev = eval_vortices(report.vortices, c.truth.vortices, c.snapshot.grid);
    truths += ev.truth_count();
    passes += ev.passes;
    for (const auto& m : ev.matches) {
      if (!m.pass) continue;
      ++matched;
      circ_ok += m.circulation_ok;
    }
  }
  const double secs = seconds_since(t0);
  const double acc = 100.0 * passes / truths, circ = matched ? 100.0 * circ_ok / matched : 0.0;
  return {acc >= 95.0 && circ >= 90.0 && secs < 60.0,
          fmt("per-vortex %.2f%%, circulation within 10%% on %.2f%% of matches, %.1f s", acc, circ, secs)};
}

Outcome classification_oracle(const std::vector<SynthCase>& suite) {
  const std::set<FlowLabel> scored = {FlowLabel::Uniform, FlowLabel::Channel, FlowLabel::VortexArray,
                                      FlowLabel::LidDrivenCavity};
  std::size_t total = 0, hits = 0;
  std::set<FlowLabel> seen;
  std::string first_miss;
  for (const auto& c : suite) {
    if (!scored.count(c.truth.flow_class)) continue;
    ++total;
    seen.insert(c.truth.flow_class);
    const auto label = analyze(c.snapshot, c.props).flow.label;
    if (label == c.truth.flow_class)
      ++hits;
    else if (first_miss.empty())
      first_miss = "; first miss " + c.name + " -> " + to_string(label);
  }
  return {suite.size() >= 200 && total > 0 && hits == total && seen == scored,
          fmt("%.0f/%.0f scored cases, suite size %.0f", hits, total, suite.size()) + first_miss};
}

Outcome reynolds_oracle(const std::vector<SynthCase>& suite) {
  std::size_t hits = 0;
  for (const auto& c : suite) hits += eval_reynolds(analyze(c.snapshot, c.props).reynolds, c.truth.reynolds);
  const bool hand = eval_reynolds(109.0, 100.0) && !eval_reynolds(111.0, 100.0);
  return {hits == suite.size() && hand,
          fmt("%.0f/%.0f suite entries; hand cases 109/100 pass, 111/100 fail: ", hits, suite.size()) +
              (hand ? "ok" : "wrong")};
}

Outcome numerics() {
  double affine_err = 0.0;
  for (std::size_t n : {5u, 17u, 64u}) {
    const GridSpec g{n, n + 3, -1.0, 2.0, 0.5, 1.75};
    const auto s = testutil::sample(g, [](double x, double y) {
      return std::array{0.3 + 1.25 * x - 0.75 * y, -2.0 + 0.5 * x + 2.5 * y, x * y};
    });
    for (double w : vorticity(s).values) affine_err = std::max(affine_err, std::abs(w - (0.5 + 0.75)));
  }
  const auto tg = gen_taylor_green(256);
  double peak = 0.0;
  for (double w : vorticity(tg.snapshot).values) peak = std::max(peak, std::abs(w));
  const double tg_rel = std::abs(peak - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi);

  const auto patches = extract_patches(to_rgb(tg.snapshot), 16);
  const auto a = train_codebook(patches, 32, 42);
  const auto b = train_codebook(patches, 32, 42);
  bool monotone = !a.inertia_history.empty();
  for (std::size_t i = 1; i < a.inertia_history.size(); ++i)
    monotone = monotone && a.inertia_history[i] <= a.inertia_history[i - 1];
  const bool deterministic = a.same_entries(b) && encode_codebook(a) == encode_codebook(b);
  return {affine_err <= 1e-12 && tg_rel <= 0.01 && monotone && deterministic,
          fmt("affine stencil error %.2e, Taylor-Green peak off by %.4f%%", affine_err, 100.0 * tg_rel) +
              ", inertia " + (monotone ? "non-increasing" : "INCREASED") + ", training " +
              (deterministic ? "deterministic" : "NOT deterministic")};
}

Outcome round_trips() {
  testutil::TempDir dir("acceptance");
  for (int i = 0; i < 20; ++i) {
    const auto s = testutil::random_field(64, 1000 + i);
    save_field(s, dir / "f.fld");
    const auto bytes = detail::read_bytes(dir / "f.fld");
    if (encode_field(load_field(dir / "f.fld")) != bytes) return {false, "FLD1 bytes differ after save/load"};
    const auto img = to_rgb(s);
    const auto back = from_rgb(img, s.grid);
    for (int ch = 0; ch < 3; ++ch) {
      const ScalarGrid& orig = ch == 0 ? s.u : (ch == 1 ? s.v : s.p);
      const ScalarGrid& rec = ch == 0 ? back.u : (ch == 1 ? back.v : back.p);
      const double half = img.meta->channel(ch).span() / 255.0 / 2.0;
      for (std::size_t k = 0; k < orig.size(); ++k)
        if (std::abs(orig.values[k] - rec.values[k]) > half * (1.0 + 1e-9))
          return {false, "RGB round trip exceeds half a quantisation step"};
    }
  }
  const Codebook cb = train_codebook(extract_patches(to_rgb(testutil::random_field(128, 7)), 16), 24, 42);
  for (int i = 0; i < 20; ++i) {
    const auto img = to_rgb(testutil::random_field(64, 2000 + i));
    const auto seq = encode(img, cb);
    if (encode(decode(seq, cb), cb).tokens != seq.tokens) return {false, "encode(decode(encode(x))) differs"};
  }
  return {true, "FLD1 byte identity, RGB within half step, encode idempotent on 20 fields"};
}

Outcome formats() {
  const std::string line = emit_training_record("[3 141 59]", "Please analyze the detailed parameters of all vortex structures.",
                                                "One vortex was detected.");
  const bool grammar = line ==
                           "Human: [3 141 59], Please analyze the detailed parameters of all vortex structures. "
                           "<STOP> Assistant: One vortex was detected." &&
                       emit_training_record(parse_training_record(line)) == line;
  AnalysisReport r;
  r.vortices = {{{0.38, 0.24}, 0.40, 0.40, 0.2, 168.36, Rotation::CounterClockwise, 1.0},
                {{0.51, 0.72}, 0.45, 0.45, 0.2, -142.15, Rotation::Clockwise, -1.0}};
  const std::string text = render_vortex_answer(r);
  const std::string vortex1 =
      "vortex 1: [length 0.40, height 0.40, circulation 168.36, coordinates (0.38,0.24), rotation direction: "
      "counterclockwise]";
  const bool table = text.find(vortex1) != std::string::npos && text.rfind("Two vortices were detected, ", 0) == 0;
  return {grammar && table, std::string("record grammar ") + (grammar ? "exact" : "WRONG") + ", vortex block " +
                                (table ? "exact" : "WRONG")};
}

Outcome benchmark_sanity(const std::vector<SynthCase>& suite) {
  std::vector<ManifestEntry> entries;
  PredictionSet echo;
  for (const auto& c : suite) {
    ManifestEntry e;
    e.id = c.name;
    e.truth = c.truth;
    e.domain = c.snapshot.grid;
    entries.push_back(e);
    echo.by_id[c.name] = {report_from_truth(c.truth), false, {}};
  }
  const auto full = run_benchmark_predictions(entries, echo);
  const auto none = run_benchmark_predictions(entries, PredictionSet{});
  const auto all = [](const BenchReport& r, double v) {
    return r.categorize.accuracy() == v && r.reynolds.accuracy() == v && r.vortex.accuracy() == v &&
           r.field_analysis.accuracy() == v;
  };
  const bool ok = all(full, 100.0) && all(none, 0.0) && none.vortex_detail.false_positives == 0;
  return {ok, fmt("echo %.2f/%.2f/%.2f", *full.categorize.accuracy(), *full.reynolds.accuracy(),
                  *full.vortex.accuracy()) +
                  fmt("/%.2f, empty %.2f%% with %.0f false positives", *full.field_analysis.accuracy(),
                      *none.categorize.accuracy(), none.vortex_detail.false_positives)};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion(1, "token contract", token_contract);
  criterion(2, "vortex oracle", vortex_oracle);
  const auto suite = build_suite(256, 42);
  criterion(3, "classification oracle", [&] { return classification_oracle(suite); });
  criterion(4, "reynolds", [&] { return reynolds_oracle(suite); });
  criterion(5, "numerics", numerics);
  criterion(6, "round trips", round_trips);
  criterion(7, "formats", formats);
  criterion(8, "benchmark sanity", [&] { return benchmark_sanity(suite); });
  std::printf("%s: %d failed, total %.1f s\n", failures ? "FAIL" : "PASS", failures, seconds_since(t0));
  return failures ? 1 : 0;
}
