// A guided tour of the library: the two-sided ratio audit on a jet family
// that cannot come from a smooth horizontal curve, the same audit decaying on
// a family that can, and one full extend-and-verify round trip with a moved
// vertical target.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

#include <unistd.h>

#include "cw/conditions.hpp"
#include "cw/counterexample.hpp"
#include "cw/extend.hpp"
#include "cw/field_io.hpp"
#include "cw/jets.hpp"
#include "cw/polynomial.hpp"

using namespace cw;

namespace {

WhitneyField lift_at_points(const std::vector<Polynomial>& comps, int m,
                            const std::vector<double>& pts) {
  WhitneyField f;
  f.r = static_cast<int>(comps.size());
  f.m = m;
  f.K = CompactSet::points(pts);
  auto jets_of = [&](const Polynomial& p) {
    std::vector<std::vector<double>> jets;
    for (double x : pts) {
      std::vector<double> jet;
      for (int k = 0; k <= m; ++k) jet.push_back(p.eval_derivative(k, x));
      jets.push_back(jet);
    }
    return jets;
  };
  for (const Polynomial& p : comps)
    f.horizontal.push_back(FieldComponent::pointwise(jets_of(p)));
  for (auto [i, j] : vertical_pairs(f.r)) {
    const Polynomial& fi = comps[static_cast<std::size_t>(i - 1)];
    const Polynomial& fj = comps[static_cast<std::size_t>(j - 1)];
    const Polynomial area =
        (0.5 * (fi * fj.derivative() - fi.derivative() * fj)).antiderivative();
    f.vertical.push_back(FieldComponent::pointwise(jets_of(area)));
  }
  return f;
}

void blow_up_family() {
  std::printf("1. A jet family the plain ratio audit cannot reject\n\n");
  std::printf("   Accumulating intervals, horizontal data (t, 0, -t), and a vertical\n"
              "   area shrinking by 10x per level. The component-wise ratio decays, so\n"
              "   the one-pair test looks extendable; correcting component 1 by the\n"
              "   nearly dependent component 3 exposes growth instead.\n\n");
  const CounterexampleInstance inst = build_counterexample(6);
  std::printf("   level        span            component      corrected\n");
  for (int lev = 1; lev <= 6; ++lev) {
    const auto [a, b] = inst.gap_family[static_cast<std::size_t>(lev - 1)];
    const AVSample s = compute_av(inst.field, 2, 1, a, b);
    const GeneralizedAVSample g =
        compute_generalized(inst.field, 2, 1, a, b, {-1.0}, {0.0});
    std::printf("   %3d    [%.6f, %.6f]   %10.3f   %12.2f\n", lev, a, b, s.ratio, g.ratio);
  }
  std::printf("\n   Per level the left column shrinks by 0.8, the right grows by 1.6:\n"
              "   no smooth horizontal curve matches these jets, yet every finite\n"
              "   truncation still extends (see part 3 for what that costs).\n\n");
}

void decay_on_a_lift() {
  std::printf("2. The same audit on jets that do come from a curve\n\n");
  std::printf("   Jets of order 2 sampled from a lifted polynomial curve on a dyadic\n"
              "   grid. The audit searches for the worst corrective coefficients per\n"
              "   span; the worst ratio still decays linearly with the span width.\n\n");
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::vector<Polynomial> comps;
  for (int i = 0; i < 3; ++i)
    comps.push_back(Polynomial({U(rng), U(rng), U(rng), U(rng), U(rng)}));
  std::vector<double> pts;
  for (int j = 0; j <= 256; ++j) pts.push_back(j / 256.0);
  const WhitneyField f = lift_at_points(comps, 2, pts);

  std::printf("   width     worst corrected ratio\n");
  for (int s = 2; s <= 8; ++s) {
    const int cells = 1 << s;
    std::vector<std::pair<double, double>> spans;
    for (int t = 0; t < 6; ++t) {
      const int k = (cells - 1) * t / 5;
      spans.push_back({k / double(cells), (k + 1) / double(cells)});
    }
    const GeneralizedAudit audit = audit_generalized(f, spans);
    double mx = 0.0;
    for (const auto& row : audit.rows) mx = std::max(mx, row.best.ratio);
    std::printf("   2^-%d %14.5f\n", s, mx);
  }
  std::printf("\n");
}

void round_trip() {
  std::printf("3. Extend, move a target, verify\n\n");
  std::printf("   A field on three points with one vertical value displaced by 0.05.\n"
              "   The extension interpolates the horizontal jets across each gap, then\n"
              "   adds localized bumps whose areas make up exactly the displaced\n"
              "   vertical increment.\n\n");
  const std::vector<Polynomial> comps = {Polynomial({0.3, 1.0, -0.5}),
                                         Polynomial({-0.2, 0.7, 0.4}),
                                         Polynomial({0.1, -1.1, 0.2})};
  WhitneyField f = lift_at_points(comps, 2, {0.0, 0.45, 1.0});
  {
    auto jets = f.component_vertical(2, 1).jets();
    jets[1][0] += 0.05;
    f.vertical[static_cast<std::size_t>(vertical_pair_index(2, 1, f.r))] =
        FieldComponent::pointwise(jets);
  }

  const ExtensionResult ext = extend_field(f);
  for (const auto& g : ext.gaps) {
    std::printf("   gap [%.2f, %.2f]:\n", g.a, g.b);
    for (const auto& s : g.stages)
      std::printf("     pair (%d,%d): case %-7s target area %+.6f, achieved %+.6f\n",
                  s.pair_i, s.pair_j, s.case_tag.c_str(), s.target_area, s.achieved_area);
  }

  const VerifyReport rep = verify_extension(ext.curve, f);
  std::printf("\n   verification: jets %.2e, knot smoothness %.2e -> %s\n",
              rep.max_jet_residual, rep.max_knot_mismatch, rep.pass ? "pass" : "FAIL");

  const auto dir = std::filesystem::temp_directory_path() /
                   ("cw_tour_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string field_path = (dir / "field.json").string();
  const std::string curve_path = (dir / "curve.json").string();
  save_field(field_path, f);
  write_text_file(curve_path, curve_to_json(f, ext.gaps, ext.curve));
  std::printf("\n   wrote %s\n   and   %s\n", field_path.c_str(), curve_path.c_str());
  std::printf("   (the cw binary replays this: cw extend / cw verify / cw audit)\n");
}

}  // namespace

int main() {
  blow_up_family();
  decay_on_a_lift();
  round_trip();
  return 0;
}
