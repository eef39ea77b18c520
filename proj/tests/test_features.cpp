#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "fieldlang/features.hpp"
#include "fieldlang/synth.hpp"
#include "test_util.hpp"

using namespace fieldlang;
using testutil::sample;

namespace {

constexpr double kPi = std::numbers::pi;

struct Vel {
  double u, v, p;
};

double max_abs(const ScalarGrid& g) {
  double m = 0.0;
  for (double x : g.values) m = std::max(m, std::abs(x));
  return m;
}

const Evidence* find_evidence(const FlowClassResult& r, const std::string& feature) {
  for (const auto& e : r.evidence)
    if (e.feature == feature) return &e;
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Vorticity and Q

TEST(Vorticity, RigidRotationIsExactlyTwoEverywhere) {
  const auto s = sample(GridSpec{33, 17, -1.0, 2.0, 0.5, 1.5}, [](double x, double y) { return Vel{-y, x, 0.0}; });
  const auto w = vorticity(s);
  double err = 0.0;
  for (double x : w.values) err = std::max(err, std::abs(x - 2.0));
  EXPECT_LE(err, 1e-12);
}

TEST(Vorticity, AffineFieldsIncludingBoundaries) {
  const auto s = sample(GridSpec::unit(40), [](double x, double y) { return Vel{0.3 + 1.5 * x - 2.0 * y, -0.7 + 4.0 * x + 0.25 * y, 0.0}; });
  const auto w = vorticity(s);
  for (double x : w.values) EXPECT_NEAR(x, 6.0, 1e-12);
}

TEST(Vorticity, UniformFieldIsZero) {
  const auto w = vorticity(gen_uniform(16, 1.0, 0.0).snapshot);
  EXPECT_EQ(max_abs(w), 0.0);
}

TEST(Vorticity, TaylorGreenPeakMatchesIndependentStencil) {
  // Reference computed independently (numpy.gradient, edge_order=1) at n=256.
  const auto w = vorticity(gen_taylor_green(256).snapshot);
  const auto kp = key_points(gen_taylor_green(256).snapshot, w);
  EXPECT_NEAR(kp.max_abs_vorticity.value, 12.564622307681287, 1e-9);
  EXPECT_NEAR(kp.max_abs_vorticity.value, 4.0 * kPi, 0.01 * 4.0 * kPi);
  EXPECT_DOUBLE_EQ(kp.max_abs_vorticity.location.x, 64.0 / 255.0);
  EXPECT_DOUBLE_EQ(kp.max_abs_vorticity.location.y, 64.0 / 255.0);
  EXPECT_GT(w.at(64, 64), 0.0);
}

TEST(Vorticity, ChannelBoundaryUsesOneSidedDifferences) {
  // omega = -du/dy = -4(1 - 2y) for u_max = 1; forward difference at row 0.
  const auto w = vorticity(gen_channel(256, 1.0).snapshot);
  EXPECT_NEAR(w.at(0, 0), -3.9843137254901961, 1e-12);
  EXPECT_NEAR(w.at(1, 0), -3.9686274509803923, 1e-12);
  EXPECT_NEAR(w.at(255, 7), 3.9843137254901961, 1e-12);
}

TEST(QCriterion, RigidRotationIsOne) {
  const auto q = q_criterion(sample(GridSpec::unit(12), [](double x, double y) { return Vel{-y, x, 0.0}; }));
  for (double x : q.values) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(QCriterion, PureShearIsNeverPositive) {
  const auto q = q_criterion(sample(GridSpec::unit(12), [](double, double y) { return Vel{y, 0.0, 0.0}; }));
  for (double x : q.values) EXPECT_LE(x, 1e-12);
}

TEST(QCriterion, UniformIsZero) {
  EXPECT_EQ(max_abs(q_criterion(gen_uniform(8, 2.0, -1.0).snapshot)), 0.0);
}

// ---------------------------------------------------------------------------
// Detection

TEST(Detect, UniformHasNoVortices) { EXPECT_TRUE(detect_vortices(gen_uniform(64, 1.0, 0.5).snapshot).empty()); }

TEST(Detect, ChannelShearIsNotAVortex) { EXPECT_TRUE(detect_vortices(gen_channel(256, 1.0).snapshot).empty()); }

TEST(Detect, SingleLambOseen) {
  const auto sc = gen_lamb_oseen(256, {LambOseenSpec{{0.5, 0.5}, 1.0, 0.05}});
  const auto vs = detect_vortices(sc.snapshot);
  ASSERT_EQ(vs.size(), 1u);
  const double cell = sc.snapshot.grid.dx();
  EXPECT_LE(distance(vs[0].center, {0.5, 0.5}), 2.0 * cell);
  EXPECT_NEAR(vs[0].circulation, 1.0, 0.10);
  EXPECT_EQ(vs[0].direction, Rotation::CounterClockwise);
  EXPECT_GT(vs[0].peak_vorticity, 0.0);
  // Discrete peak from an independent stencil evaluation.
  EXPECT_NEAR(vs[0].peak_vorticity, 126.54452349543597, 1e-6);
}

TEST(Detect, ClockwiseVortexHasNegativeCirculation) {
  const auto vs = detect_vortices(gen_lamb_oseen(128, {LambOseenSpec{{0.4, 0.6}, -1.2, 0.06}}).snapshot);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].direction, Rotation::Clockwise);
  EXPECT_NEAR(vs[0].circulation, -1.2, 0.12);
}

TEST(Detect, TaylorGreenFourCellsWithAlternatingSigns) {
  const auto sc = gen_taylor_green(256);
  const auto vs = detect_vortices(sc.snapshot);
  ASSERT_EQ(vs.size(), 4u);
  // All four |Γ| are equal up to discretisation, so pair each truth with its nearest detection.
  std::set<std::size_t> used;
  for (const auto& t : sc.truth.vortices) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < vs.size(); ++i)
      if (distance(vs[i].center, t.center) < distance(vs[best].center, t.center)) best = i;
    used.insert(best);
    EXPECT_EQ(vs[best].direction, t.direction);
    EXPECT_LE(distance(vs[best].center, t.center), 0.02);
    EXPECT_NEAR(vs[best].circulation, t.circulation, 0.05 * 4.0 / kPi);
  }
  EXPECT_EQ(used.size(), 4u);
}

TEST(Detect, SmallCoresAreDropped) {
  // r_c = 0.02 at n = 64 leaves about 8 cells above alpha, under the default min_area of 16.
  const auto tiny = gen_lamb_oseen(64, {LambOseenSpec{{0.5, 0.5}, 1.0, 0.02}});
  EXPECT_TRUE(detect_vortices(tiny.snapshot).empty());
  DetectionParams loose;
  loose.min_area = 1;
  EXPECT_EQ(detect_vortices(tiny.snapshot, loose).size(), 1u);
  const auto wide = gen_lamb_oseen(64, {LambOseenSpec{{0.5, 0.5}, 1.0, 0.05}});
  EXPECT_EQ(detect_vortices(wide.snapshot).size(), 1u);
  DetectionParams strict;
  strict.min_area = 10000;
  EXPECT_TRUE(detect_vortices(wide.snapshot, strict).empty());
}

TEST(Detect, WeakVortexNextToStrongOneIsFoundInPeakRelativeMode) {
  const auto sc = gen_lamb_oseen(256, {LambOseenSpec{{0.3, 0.5}, 2.0, 0.03}, LambOseenSpec{{0.7, 0.5}, -0.5, 0.08}});
  const auto vs = detect_vortices(sc.snapshot);
  ASSERT_EQ(vs.size(), 2u);
  EXPECT_NEAR(vs[0].circulation, 2.0, 0.2);
  EXPECT_NEAR(vs[1].circulation, -0.5, 0.05);
  DetectionParams global;
  global.mode = ThresholdMode::Global;
  EXPECT_EQ(detect_vortices(sc.snapshot, global).size(), 1u);
}

TEST(Detect, InvalidParamsAreRejected) {
  DetectionParams p;
  p.alpha = 1.5;
  EXPECT_THROW(detect_vortices(gen_uniform(8, 1, 0).snapshot, p), Error);
  p = {};
  p.min_area = 0;
  EXPECT_THROW(p.check(), Error);
}

TEST(DetectProperty, CoordinateTranslationShiftsCentresOnly) {
  const auto base = gen_lamb_oseen(128, {LambOseenSpec{{0.35, 0.6}, 0.9, 0.06}, LambOseenSpec{{0.7, 0.3}, -1.4, 0.05}});
  const auto ref = detect_vortices(base.snapshot);
  ASSERT_EQ(ref.size(), 2u);
  FieldSnapshot moved = base.snapshot;
  moved.grid.x_min += 8.0;
  moved.grid.x_max += 8.0;
  moved.grid.y_min -= 4.0;
  moved.grid.y_max -= 4.0;
  const auto got = detect_vortices(moved);
  ASSERT_EQ(got.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(got[i].center.x, ref[i].center.x + 8.0, 1e-9);
    EXPECT_NEAR(got[i].center.y, ref[i].center.y - 4.0, 1e-9);
    EXPECT_NEAR(got[i].circulation, ref[i].circulation, 1e-12);
    EXPECT_EQ(got[i].direction, ref[i].direction);
  }
}

TEST(DetectProperty, DomainScalingByPowersOfTwo) {
  const auto base = gen_lamb_oseen(128, {LambOseenSpec{{0.45, 0.55}, 1.1, 0.07}});
  const auto ref = detect_vortices(base.snapshot);
  ASSERT_EQ(ref.size(), 1u);
  for (double k : {0.5, 2.0, 4.0}) {
    FieldSnapshot scaled = base.snapshot;
    scaled.grid.x_max = k;
    scaled.grid.y_max = k;
    const auto got = detect_vortices(scaled);
    ASSERT_EQ(got.size(), 1u) << k;
    // Same velocities on a k-times larger domain: omega / k, Γ * k, lengths * k.
    EXPECT_DOUBLE_EQ(got[0].center.x, k * ref[0].center.x);
    EXPECT_DOUBLE_EQ(got[0].center.y, k * ref[0].center.y);
    EXPECT_NEAR(got[0].circulation, k * ref[0].circulation, 1e-12 * k);
    EXPECT_DOUBLE_EQ(got[0].length, k * ref[0].length);
    EXPECT_NEAR(got[0].peak_vorticity, ref[0].peak_vorticity / k, 1e-9);
  }
}

TEST(DetectProperty, VelocityReversalFlipsCirculation) {
  auto sc = gen_lamb_oseen(128, {LambOseenSpec{{0.3, 0.3}, 1.0, 0.05}, LambOseenSpec{{0.7, 0.7}, -0.7, 0.06}});
  const auto ref = detect_vortices(sc.snapshot);
  for (auto* g : {&sc.snapshot.u, &sc.snapshot.v})
    for (auto& x : g->values) x = -x;
  const auto got = detect_vortices(sc.snapshot);
  ASSERT_EQ(got.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_EQ(got[i].center, ref[i].center);
    EXPECT_DOUBLE_EQ(got[i].circulation, -ref[i].circulation);
    EXPECT_NE(got[i].direction, ref[i].direction);
  }
}

TEST(DetectProperty, CirculationBudget) {
  // Basins are disjoint, so Σ|Γ_i| can never exceed ∬|ω| dA.
  const auto sc = gen_lamb_oseen(128, {LambOseenSpec{{0.3, 0.5}, 1.0, 0.06}, LambOseenSpec{{0.7, 0.5}, -1.0, 0.06}});
  const auto w = vorticity(sc.snapshot);
  VortexLabels labels;
  const auto vs = detect_vortices(sc.snapshot, w, {}, &labels);
  ASSERT_EQ(vs.size(), 2u);
  const double da = sc.snapshot.grid.dx() * sc.snapshot.grid.dy();
  double total_abs = 0.0;
  for (double x : w.values) total_abs += std::abs(x) * da;
  double sum = 0.0;
  std::vector<double> from_labels(vs.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (labels.core[i] != -1) EXPECT_EQ(labels.basin[i], labels.core[i]);
    if (labels.basin[i] != -1) from_labels[static_cast<std::size_t>(labels.basin[i])] += w.values[i] * da;
  }
  for (std::size_t k = 0; k < vs.size(); ++k) {
    sum += std::abs(vs[k].circulation);
    EXPECT_NEAR(from_labels[k], vs[k].circulation, 1e-9);
  }
  EXPECT_LE(sum, total_abs + 1e-12);
}

TEST(DetectProperty, Deterministic) {
  const auto sc = gen_taylor_green(128, 1.7);
  EXPECT_EQ(detect_vortices(sc.snapshot), detect_vortices(sc.snapshot));
}

// ---------------------------------------------------------------------------
// Reynolds number and key points

TEST(Reynolds, Formula) {
  EXPECT_DOUBLE_EQ(reynolds_number({1.0, 0.01, 1.0, 1.0}), 100.0);
  EXPECT_EQ(reynolds_number({1.0, 0.01, 0.0, 1.0}), 0.0);
  EXPECT_NEAR(reynolds_number({1.2, 1.8e-5, 2.5, 0.4}), 66666.67, 0.5);
  EXPECT_THROW(reynolds_number({1.0, 0.0, 1.0, 1.0}), Error);
}

TEST(KeyPoints, ChannelPeakOnCentreline) {
  const auto kp = key_points(gen_channel(256, 1.0).snapshot);
  EXPECT_NEAR(kp.u_max.value, 1.0, 1e-4);
  EXPECT_NEAR(kp.u_max.value, 0.99998462129950016, 1e-15);
  EXPECT_DOUBLE_EQ(kp.u_max.location.x, 0.0);
  EXPECT_NEAR(kp.u_max.location.y, 0.5, 1.0 / 255.0);
}

TEST(KeyPoints, ZeroFieldTiesGoToFirstNode) {
  const auto kp = key_points(gen_uniform(16, 0.0, 0.0).snapshot);
  EXPECT_EQ(kp.u_max.value, 0.0);
  EXPECT_EQ(kp.u_max.location, (Point{0.0, 0.0}));
}

TEST(KeyPoints, PressureExtremaOfLinearPressure) {
  const auto kp = key_points(sample(GridSpec{9, 5, 0.0, 2.0, 0.0, 1.0}, [](double x, double) { return Vel{0, 0, x}; }));
  EXPECT_DOUBLE_EQ(kp.p_max.value, 2.0);
  EXPECT_DOUBLE_EQ(kp.p_max.location.x, 2.0);
  EXPECT_DOUBLE_EQ(kp.p_min.location.x, 0.0);
}

// ---------------------------------------------------------------------------
// Classification

TEST(Classify, Uniform) {
  const auto sc = gen_uniform(64, 1.0, 0.3);
  const auto r = classify_flow(sc.snapshot, detect_vortices(sc.snapshot));
  EXPECT_EQ(r.label, FlowLabel::Uniform);
  ASSERT_NE(find_evidence(r, "max_abs_vorticity"), nullptr);
  EXPECT_TRUE(find_evidence(r, "speed_range")->fired);
}

TEST(Classify, Channel) {
  const auto sc = gen_channel(128, 2.0);
  const auto r = classify_flow(sc.snapshot, detect_vortices(sc.snapshot));
  EXPECT_EQ(r.label, FlowLabel::Channel);
  EXPECT_EQ(find_evidence(r, "cross_flow_violations")->value, 0.0);
}

TEST(Classify, TaylorGreenIsAVortexArray) {
  const auto sc = gen_taylor_green(256);
  const auto r = classify_flow(sc.snapshot, detect_vortices(sc.snapshot));
  EXPECT_EQ(r.label, FlowLabel::VortexArray);
  const auto* e = find_evidence(r, "checkerboard");
  ASSERT_NE(e, nullptr);
  EXPECT_TRUE(e->fired);
}

TEST(Classify, CavityProxyFindsTopLid) {
  const auto sc = gen_cavity_proxy(256, 100.0);
  const auto r = classify_flow(sc.snapshot, detect_vortices(sc.snapshot));
  EXPECT_EQ(r.label, FlowLabel::LidDrivenCavity);
  ASSERT_TRUE(r.driving_wall);
  EXPECT_EQ(*r.driving_wall, "top");
  EXPECT_GE(find_evidence(r, "wall_speed_ratio_top")->value, 10.0);
}

TEST(Classify, StaggeredStreetIsAWake) {
  std::vector<LambOseenSpec> street;
  for (int k = 0; k < 5; ++k)
    street.push_back({{0.15 + 0.17 * k, k % 2 ? 0.4 : 0.6}, k % 2 ? -1.0 : 1.0, 0.04});
  const auto sc = gen_lamb_oseen(256, street);
  EXPECT_EQ(sc.truth.flow_class, FlowLabel::BluffBodyWake);
  const auto vs = detect_vortices(sc.snapshot);
  ASSERT_EQ(vs.size(), 5u);
  EXPECT_EQ(classify_flow(sc.snapshot, vs).label, FlowLabel::BluffBodyWake);
}

TEST(Classify, SingleVortexIsUnknownWithEvidenceForEveryRule) {
  const auto sc = gen_lamb_oseen(128, {LambOseenSpec{{0.5, 0.5}, 1.0, 0.05}});
  const auto r = classify_flow(sc.snapshot, detect_vortices(sc.snapshot));
  EXPECT_EQ(r.label, FlowLabel::Unknown);
  std::set<std::string> rules;
  for (const auto& e : r.evidence) {
    rules.insert(e.rule);
    EXPECT_FALSE(e.fired);
  }
  EXPECT_EQ(rules.size(), 5u);
}

TEST(Analyze, ComposesAllFeatures) {
  const auto lo = gen_lamb_oseen(256, {LambOseenSpec{{0.5, 0.5}, 1.0, 0.05}});
  const auto r = analyze(lo.snapshot, lo.props);
  EXPECT_EQ(r.vortices.size(), 1u);
  EXPECT_TRUE(r.flow.label == FlowLabel::Unknown || r.flow.label == lo.truth.flow_class);
  EXPECT_DOUBLE_EQ(r.reynolds, reynolds_number(lo.props));

  const auto cav = gen_cavity_proxy(128, 100.0);
  EXPECT_NEAR(analyze(cav.snapshot, cav.props).reynolds, 100.0, 1e-9);

  const auto uni = gen_uniform(32, 0.5, 0.0);
  const auto ur = analyze(uni.snapshot, uni.props);
  EXPECT_TRUE(ur.vortices.empty());
  EXPECT_EQ(ur.flow.label, FlowLabel::Uniform);
  EXPECT_DOUBLE_EQ(ur.reynolds, 50.0);
}

TEST(Analyze, ReportJsonRoundTrip) {
  const auto tg = gen_taylor_green(64);
  const auto r = analyze(tg.snapshot, tg.props);
  const json j = r;
  for (const char* key : {"flow", "reynolds", "vortices", "u_max", "p_min", "p_max", "max_abs_vorticity"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.get<AnalysisReport>(), r);
}
