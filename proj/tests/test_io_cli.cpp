#include <catch2/catch_amalgamated.hpp>

#include <cw/cli.hpp>
#include <cw/counterexample.hpp>
#include <cw/field_io.hpp>

#include "test_support.hpp"

#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"

using namespace cw;
using cw::testing::make_rng;
using cw::testing::random_polynomial;
using cw::testing::uniform;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cw_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

WhitneyField pointwise_lift_field(const std::vector<Polynomial>& comps, int m,
                                  const std::vector<double>& pts) {
  WhitneyField f;
  f.r = int(comps.size());
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
    const Polynomial& fi = comps[std::size_t(i - 1)];
    const Polynomial& fj = comps[std::size_t(j - 1)];
    const Polynomial area =
        (0.5 * (fi * fj.derivative() - fi.derivative() * fj)).antiderivative();
    f.vertical.push_back(FieldComponent::pointwise(jets_of(area)));
  }
  return f;
}

}  // namespace

TEST_CASE("field files round-trip byte-identically and reject bad shapes") {
  const auto ce = build_counterexample(3);
  const std::string j1 = field_to_json(ce.field);
  const WhitneyField back = field_from_json(j1);
  CHECK(field_to_json(back) == j1);
  CHECK(back.r == 3);
  CHECK(back.K.interval_list().size() == 4);
  CHECK(back.value_vertical(2, 1, 0.75) == Catch::Approx(0.01));

  // Same through the filesystem.
  TempDir dir;
  save_field(dir.file("f.json"), ce.field);
  CHECK(field_to_json(load_field(dir.file("f.json"))) == j1);

  // A pointwise field survives too, with full double precision.
  auto rng = make_rng(2024);
  std::vector<Polynomial> comps;
  for (int i = 0; i < 3; ++i) comps.push_back(random_polynomial(rng, 2));
  const WhitneyField pf = pointwise_lift_field(comps, 2, {0.0, 1.0 / 3.0, 1.0});
  const WhitneyField pf2 = field_from_json(field_to_json(pf));
  for (int i = 1; i <= 3; ++i)
    CHECK(pf2.jet_horizontal(i, 1.0 / 3.0) == pf.jet_horizontal(i, 1.0 / 3.0));

  // Shape violations come back with the offending member spelled out.
  CHECK_THROWS_AS(field_from_json("{\"r\": 3"), ParseError);
  CHECK_THROWS_WITH(field_from_json("{\"r\": 1, \"m\": 1, \"K\": {\"points\": [0, 1]}, \"F\": {}}"),
                    Catch::Matchers::ContainsSubstring("$.r"));
  CHECK_THROWS_WITH(
      field_from_json("{\"r\": 2, \"m\": 1, \"K\": {\"points\": [0, 1]}, "
                      "\"F\": {\"1\": {\"pointwise\": [[0, 0], [0, 0]]}, "
                      "\"2\": {\"pointwise\": [[0, 0], [0, 0]]}}}"),
      Catch::Matchers::ContainsSubstring("missing component \"21\""));
  CHECK_THROWS_WITH(
      field_from_json("{\"r\": 2, \"m\": 1, \"K\": {\"points\": [0, 1]}, "
                      "\"F\": {\"1\": {\"pointwise\": [[0, 0], [0]]}, "
                      "\"2\": {\"pointwise\": [[0, 0], [0, 0]]}, "
                      "\"21\": {\"pointwise\": [[0, 0], [0, 0]]}}}"),
      Catch::Matchers::ContainsSubstring("$.F.1.pointwise[1]"));
}

TEST_CASE("audit reports are deterministic and carry the scale dichotomy") {
  const auto ce = build_counterexample(8);
  const AuditOutputs first = run_audit(ce.field, "ce.json", 4.0, 0.25);
  const AuditOutputs second = run_audit(ce.field, "ce.json", 4.0, 0.25);
  CHECK(first.report_json == second.report_json);
  CHECK(first.csv == second.csv);
  CHECK(first.compat_pass);

  const json rep = json::parse(first.report_json);
  CHECK(rep["component_trend"]["classification"] == "decaying");
  CHECK(rep["generalized_trend"]["classification"] == "growing");
  CHECK(std::abs(rep["generalized_trend"]["slope_per_level"].get<double>() -
                 std::log2(1.6)) < 0.02);
  CHECK(std::abs(rep["component_trend"]["slope_per_level"].get<double>() -
                 std::log2(0.8)) < 0.05);

  // The first inter-part pair carries the anchor ratios.
  bool found = false;
  for (const auto& p : rep["pairs"]) {
    if (p["i"] == 2 && p["j"] == 1 && std::abs(p["a"].get<double>() - 0.625) < 1e-12 &&
        std::abs(p["b"].get<double>() - 0.75) < 1e-12) {
      found = true;
      CHECK(p["ratio"].get<double>() == Catch::Approx(-40.96).epsilon(1e-9));
      CHECK(p["best"]["ratio"].get<double>() == Catch::Approx(368.64).epsilon(1e-9));
    }
  }
  CHECK(found);

  // CSV mirrors every candidate: header plus one line per (pair, candidate).
  std::size_t lines = 0;
  for (char c : first.csv) lines += (c == '\n');
  std::size_t expected = 1;
  for (const auto& p : rep["pairs"]) {
    (void)p;
    expected += 5;  // zero, two single-sided minimizers, both, grid
  }
  CHECK(lines == expected);

  // The all-zero field classifies as flat-zero, not merely flat.
  WhitneyField zf = pointwise_lift_field(
      {Polynomial{}, Polynomial{}, Polynomial{}}, 1, {0.0, 0.5, 1.0});
  const json zero_rep = json::parse(run_audit(zf, "zero", 4.0, 0.25).report_json);
  CHECK(zero_rep["component_trend"]["classification"] == "flat-zero");
  CHECK(zero_rep["generalized_trend"]["classification"] == "flat-zero");
}

TEST_CASE("extension pipeline writes a verifiable curve file") {
  auto rng = make_rng(515);
  std::vector<Polynomial> comps;
  for (int i = 0; i < 3; ++i) comps.push_back(random_polynomial(rng, 2));
  std::vector<double> pts = {0.0, 0.35, 0.8, 1.3};
  WhitneyField f = pointwise_lift_field(comps, 2, pts);

  TempDir dir;
  save_field(dir.file("f.json"), f);
  REQUIRE(cmd_extend(dir.file("f.json"), dir.file("c.json"), dir.file("e.json")) == kCliPass);
  CHECK(cmd_verify(dir.file("c.json"), dir.file("f.json"), dir.file("v.json")) == kCliPass);

  const json verify_rep = json::parse(read_text_file(dir.file("v.json")));
  CHECK(verify_rep["pass"] == true);
  CHECK(verify_rep["verification"]["jets"]["max_residual"].get<double>() < 1e-9);

  // The curve file reconstructs to a curve that passes the library check too.
  const LoadedCurve lc = load_curve(dir.file("c.json"));
  CHECK(verify_extension(lc.curve, f).pass);

  // A hand-corrupted curve is rejected with a located, failing residual.
  json curve_doc = json::parse(read_text_file(dir.file("c.json")));
  curve_doc["pieces"][0]["components"][1]["coeffs"][0] =
      curve_doc["pieces"][0]["components"][1]["coeffs"][0].get<double>() + 0.125;
  write_text_file(dir.file("bad.json"), curve_doc.dump());
  std::ostringstream out, err;
  CHECK(cmd_verify(dir.file("bad.json"), dir.file("f.json"), "", out, err) == kCliFail);
  const json bad_rep = json::parse(out.str());
  CHECK(bad_rep["verification"]["jets"]["pass"] == false);
  // The constant shift surfaces on the tampered component's own value row;
  // the lifted areas downstream pick up residuals of their own on top.
  bool located = false;
  for (const auto& row : bad_rep["verification"]["jets"]["worst"])
    if (row["component"] == "x2" && row["k"] == 0 &&
        std::abs(row["residual"].get<double>() - 0.125) < 1e-9)
      located = true;
  CHECK(located);

  // Truncated file: rejected outright, not reported as a check failure.
  write_text_file(dir.file("trunc.json"), read_text_file(dir.file("c.json")).substr(0, 100));
  CHECK(cmd_verify(dir.file("trunc.json"), dir.file("f.json"), "", out, err) == kCliReject);
}

TEST_CASE("one shifted area shows up as exactly one perturbed pair") {
  auto rng = make_rng(808);
  std::vector<Polynomial> comps;
  for (int i = 0; i < 3; ++i) comps.push_back(random_polynomial(rng, 1));
  WhitneyField f = pointwise_lift_field(comps, 1, {0.0, 0.6, 1.0});
  // Shift the (3,1) value at the middle knot.
  auto jets = f.component_vertical(3, 1).jets();
  jets[1][0] += 0.01;
  f.vertical[std::size_t(vertical_pair_index(3, 1, 3))] = FieldComponent::pointwise(jets);

  const ExtendOutputs res = run_extend(f, "shifted");
  REQUIRE(res.pass);
  const json rep = json::parse(res.report_json);
  std::set<std::pair<int, int>> perturbed;
  for (const auto& gap : rep["gaps"])
    for (const auto& pr : gap["perturbed_pairs"])
      perturbed.insert({pr[0].get<int>(), pr[1].get<int>()});
  CHECK(perturbed == std::set<std::pair<int, int>>{{3, 1}});

  // The curve file carries bump descriptors only where the shift lives.
  const json curve_doc = json::parse(res.curve_json);
  int pieces_with_bumps = 0;
  for (const auto& piece : curve_doc["pieces"])
    if (piece.contains("perturbations") && !piece["perturbations"].empty())
      pieces_with_bumps += 1;
  CHECK(pieces_with_bumps >= 1);
  for (const auto& piece : curve_doc["pieces"]) {
    if (!piece.contains("perturbations")) continue;
    for (const auto& pert : piece["perturbations"])
      for (const auto& bump : pert["bumps"]) {
        const std::string kind = bump["kind"].get<std::string>();
        CHECK((kind == "eta" || kind == "xi"));
      }
  }
}

TEST_CASE("extending the blow-up family reports the growing area demand") {
  const auto ce = build_counterexample(6);
  const ExtendOutputs res = run_extend(ce.field, "ce");
  // Finite truncations still extend; the diagnostics carry the blow-up.
  REQUIRE(res.pass);
  const json rep = json::parse(res.report_json);

  std::vector<double> demand;  // (2,1) stage area-to-budget per family gap
  for (const auto& gap : rep["gaps"]) {
    for (const auto& st : gap["stages"]) {
      if (st["pair"][0] == 2 && st["pair"][1] == 1 && st["case"] != "zero")
        demand.push_back(st["area_to_h2m"].get<double>());
    }
  }
  REQUIRE(demand.size() == 6);
  for (std::size_t n = 0; n < demand.size(); ++n) {
    const double closed = 230.4 * std::pow(1.6, double(n + 1));
    CHECK(demand[n] == Catch::Approx(closed).epsilon(1e-9));
  }
  for (std::size_t n = 1; n < demand.size(); ++n) CHECK(demand[n] > demand[n - 1]);
}

TEST_CASE("cli driver follows the exit contract") {
  TempDir dir;
  auto run = [&](std::vector<std::string> args) {
    std::vector<const char*> argv = {"cw"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(int(argv.size()), argv.data());
  };

  CHECK(run({"counterexample", "--levels", "2", "--out", dir.file("f.json")}) == kCliPass);
  CHECK(run({"audit", "--input", dir.file("f.json"), "--report", dir.file("r.json"),
             "--csv", dir.file("r.csv")}) == kCliPass);
  CHECK(run({"extend", "--input", dir.file("f.json"), "--curve", dir.file("c.json"),
             "--report", dir.file("e.json")}) == kCliPass);
  CHECK(run({"verify", "--curve", dir.file("c.json"), "--input", dir.file("f.json"),
             "--report", dir.file("v.json")}) == kCliPass);
  CHECK(run({"audit", "--input", dir.file("nope.json"), "--report", dir.file("x.json")}) ==
        kCliReject);

  // Same files, different field: knot mismatch is a rejection, not a failure.
  CHECK(run({"counterexample", "--levels", "3", "--out", dir.file("g.json")}) == kCliPass);
  CHECK(run({"verify", "--curve", dir.file("c.json"), "--input", dir.file("g.json")}) ==
        kCliReject);

  // Reports on disk are byte-stable across reruns.
  const std::string rep1 = read_text_file(dir.file("r.json"));
  CHECK(run({"audit", "--input", dir.file("f.json"), "--report", dir.file("r.json")}) ==
        kCliPass);
  CHECK(read_text_file(dir.file("r.json")) == rep1);
}
