#pragma once

#include <cmath>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "cw/conditions.hpp"
#include "cw/counterexample.hpp"
#include "cw/extend.hpp"
#include "cw/field_io.hpp"
#include "cw/jets.hpp"
#include "cw/trend.hpp"

namespace cw {

/// Exit codes shared by every subcommand: 0 when all enabled checks pass,
/// 1 when a check fails, 2 for unusable input (parse errors, file mismatch).
enum CliExit { kCliPass = 0, kCliFail = 1, kCliReject = 2 };

namespace clidetail {

inline void write_trend(JsonWriter& w, const DyadicSummary& s) {
  w.begin_object();
  w.key("classification").value(trend_name(s.classification));
  w.key("slope_per_level").value(s.slope_per_level);
  w.key("buckets").begin_array();
  for (const auto& b : s.buckets) {
    w.begin_object();
    w.key("level").value(b.level);
    w.key("count").value(b.count);
    w.key("max").value(b.max_value);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

inline void write_compatibility(JsonWriter& w, const CompatibilityReport& rep) {
  w.begin_object();
  w.key("pass").value(rep.pass);
  w.key("scale").value(rep.scale);
  w.key("tolerance").value(rep.tolerance);
  w.key("pairs").begin_array();
  for (const auto& p : rep.pairs) {
    w.begin_object();
    w.key("i").value(p.i);
    w.key("j").value(p.j);
    w.key("max_residual").value(p.max_residual);
    w.key("worst_location").value(p.worst_location);
    w.key("worst_order").value(p.worst_order);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

inline void write_generalized_sample(JsonWriter& w, const GeneralizedAVSample& g,
                                     const std::string& source) {
  w.begin_object();
  if (!source.empty()) w.key("source").value(source);
  w.key("c").number_array(g.c);
  w.key("c_tilde").number_array(g.ctilde);
  w.key("E").value(g.E);
  w.key("delta_i").value(g.delta_i);
  w.key("delta_j").value(g.delta_j);
  w.key("denom").value(g.denom);
  w.key("ratio").value(g.ratio);
  w.end_object();
}

inline void write_verify(JsonWriter& w, const VerifyReport& rep) {
  w.begin_object();
  w.key("pass").value(rep.pass);
  w.key("scale").value(rep.scale);
  w.key("jets").begin_object();
  w.key("pass").value(rep.jets_pass);
  w.key("max_residual").value(rep.max_jet_residual);
  w.key("worst").begin_array();
  for (const auto& row : rep.worst_jets) {
    w.begin_object();
    w.key("component").value(row.component);
    w.key("k").value(row.k);
    w.key("x").value(row.x);
    w.key("residual").value(row.residual);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.key("horizontality").begin_object();
  w.key("pass").value(rep.horizontality_pass);
  w.key("scale").value(rep.horizontality.scale);
  w.key("tolerance").value(rep.horizontality.tolerance);
  w.key("pairs").begin_array();
  for (const auto& p : rep.horizontality.pairs) {
    w.begin_object();
    w.key("i").value(p.i);
    w.key("j").value(p.j);
    w.key("max_increment_residual").value(p.max_increment_residual);
    w.key("max_derivative_residual").number_array(p.max_derivative_residual);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.key("knots").begin_object();
  w.key("pass").value(rep.knots_pass);
  w.key("max_mismatch").value(rep.max_knot_mismatch);
  w.key("worst").begin_array();
  for (const auto& row : rep.worst_knots) {
    w.begin_object();
    w.key("component").value(row.component);
    w.key("k").value(row.k);
    w.key("x").value(row.x);
    w.key("mismatch").value(row.mismatch);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.end_object();
}

inline std::string joined(const std::vector<double>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ';';
    out += format_number(vs[i]);
  }
  return out;
}

}  // namespace clidetail

// ---------------------------------------------------------------------------
// counterexample

inline int cmd_counterexample(int levels, int m, const std::string& out_path,
                              std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
  if (levels < 1) {
    err << "counterexample: --levels must be at least 1\n";
    return kCliReject;
  }
  if (m < 1) {
    err << "counterexample: --m must be at least 1\n";
    return kCliReject;
  }
  const auto inst = build_counterexample(levels, m);
  try {
    save_field(out_path, inst.field);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kCliReject;
  }
  out << "wrote " << out_path << ": r=3 m=" << m << " levels=" << levels << " knots="
      << inst.field.K.knots().size() << "\n";
  return kCliPass;
}

// ---------------------------------------------------------------------------
// audit

struct AuditOutputs {
  std::string report_json;
  std::string csv;
  bool compat_pass = false;
};

/// Runs the full audit stack on a parsed field and renders the report text.
/// Split from the command so tests can exercise it without touching disk.
inline AuditOutputs run_audit(const WhitneyField& f, const std::string& input_name,
                              double cbound, double grid) {
  GeneralizedAuditOptions opts;
  opts.clip = cbound;
  opts.grid_step = grid;

  const CompatibilityReport compat = check_horizontal_compatibility(f);
  const RemainderReport rem = remainder_audit(f);
  const GeneralizedAudit audit = audit_field(f, opts);

  AuditOutputs out;
  out.compat_pass = compat.pass;

  JsonWriter w;
  w.begin_object();
  w.key("tool").value("cw audit");
  w.key("input").value(input_name);
  w.key("r").value(f.r);
  w.key("m").value(f.m);
  w.key("options").begin_object();
  w.key("cbound").value(cbound);
  w.key("grid").value(grid);
  w.end_object();
  w.key("compatibility");
  clidetail::write_compatibility(w, compat);
  w.key("remainders").begin_object();
  w.key("max_scaled").value(rem.max_scaled);
  w.key("skipped_degenerate").value(rem.skipped_degenerate);
  w.key("trend");
  clidetail::write_trend(w, rem.summary);
  w.key("rows").begin_array();
  for (const auto& row : rem.rows) {
    w.begin_object();
    w.key("component").value(row.component);
    w.key("k").value(row.k);
    w.key("a").value(row.a);
    w.key("b").value(row.b);
    w.key("remainder").value(row.remainder);
    w.key("scaled").value(row.scaled);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.key("pairs").begin_array();
  for (const auto& row : audit.rows) {
    w.begin_object();
    w.key("i").value(row.av.i);
    w.key("j").value(row.av.j);
    w.key("a").value(row.av.a);
    w.key("b").value(row.av.b);
    w.key("width").value(row.av.b - row.av.a);
    w.key("A").value(row.av.A);
    w.key("V").value(row.av.V);
    w.key("ratio").value(row.av.ratio);
    w.key("best");
    clidetail::write_generalized_sample(w, row.best, "");
    w.end_object();
  }
  w.end_array();
  w.key("component_trend");
  clidetail::write_trend(w, audit.component_trend);
  w.key("generalized_trend");
  clidetail::write_trend(w, audit.generalized_trend);
  w.key("pass").value(compat.pass);
  w.end_object();
  out.report_json = w.take();

  CsvWriter csv({"i", "j", "a", "b", "width", "A", "V", "ratio", "candidate", "c",
                 "c_tilde", "E", "delta_i", "delta_j", "denom", "gen_ratio"});
  for (const auto& row : audit.rows) {
    for (const auto& cand : row.candidates) {
      csv.row({std::to_string(row.av.i), std::to_string(row.av.j), format_number(row.av.a),
               format_number(row.av.b), format_number(row.av.b - row.av.a),
               format_number(row.av.A), format_number(row.av.V), format_number(row.av.ratio),
               cand.source, clidetail::joined(cand.g.c), clidetail::joined(cand.g.ctilde),
               format_number(cand.g.E), format_number(cand.g.delta_i),
               format_number(cand.g.delta_j), format_number(cand.g.denom),
               format_number(cand.g.ratio)});
    }
  }
  out.csv = csv.text();
  return out;
}

inline int cmd_audit(const std::string& input, const std::string& report_path,
                     const std::string& csv_path, double cbound, double grid,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  WhitneyField f;
  try {
    f = load_field(input);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kCliReject;
  }
  const AuditOutputs res = run_audit(f, input, cbound, grid);
  try {
    write_text_file(report_path, res.report_json);
    if (!csv_path.empty()) write_text_file(csv_path, res.csv);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kCliReject;
  }
  out << "wrote " << report_path;
  if (!csv_path.empty()) out << " and " << csv_path;
  out << ": compatibility " << (res.compat_pass ? "pass" : "FAIL") << "\n";
  return res.compat_pass ? kCliPass : kCliFail;
}

// ---------------------------------------------------------------------------
// extend

struct ExtendOutputs {
  std::string report_json;
  std::string curve_json;  // empty when the curve could not be assembled
  bool pass = false;
};

inline ExtendOutputs run_extend(const WhitneyField& f, const std::string& input_name,
                                const ExtendConfig& cfg = ExtendConfig()) {
  const CompatibilityReport compat = check_horizontal_compatibility(f);
  ExtensionResult res;
  std::string pipeline_error;
  if (compat.pass) {
    try {
      res = extend_field(f, cfg);
    } catch (const std::exception& e) {
      pipeline_error = e.what();
    }
  }
  VerifyReport verify;
  const bool verified = compat.pass && res.ok && pipeline_error.empty();
  if (verified) verify = verify_extension(res.curve, f);

  ExtendOutputs out;
  out.pass = verified && verify.pass;

  JsonWriter w;
  w.begin_object();
  w.key("tool").value("cw extend");
  w.key("input").value(input_name);
  w.key("r").value(f.r);
  w.key("m").value(f.m);
  w.key("compatibility");
  clidetail::write_compatibility(w, compat);
  if (!pipeline_error.empty()) w.key("pipeline_error").value(pipeline_error);
  w.key("gap_count").value(res.gaps.size());
  w.key("gaps").begin_array();
  for (const auto& g : res.gaps) {
    w.begin_object();
    w.key("a").value(g.a);
    w.key("b").value(g.b);
    w.key("width").value(g.b - g.a);
    w.key("status").value(g.failed ? "failed" : (g.skipped ? "skipped" : "ok"));
    w.key("order").int_array(g.order);
    double worst_budget = 0.0;
    std::vector<std::pair<int, int>> perturbed;
    w.key("stages").begin_array();
    for (const auto& s : g.stages) {
      w.begin_object();
      w.key("seq").value(s.seq);
      w.key("path").value(s.path);
      w.key("pair").begin_array().value(s.pair_i).value(s.pair_j).end_array();
      w.key("case").value(s.case_tag);
      w.key("target_area").value(s.target_area);
      w.key("achieved_area").value(s.achieved_area);
      w.key("dispatch_mass").value(s.dispatch_mass);
      w.key("dispatch_threshold").value(s.dispatch_threshold);
      w.key("slot_count").value(s.slot_count);
      w.key("lambda").value(s.lambda);
      w.key("mu").value(s.mu);
      w.key("nu").value(s.nu);
      w.key("ortho_residual").value(s.ortho_residual);
      w.key("area_to_budget").value(s.area_to_budget);
      w.key("area_to_h2m").value(s.area_to_h2m);
      w.end_object();
      worst_budget = std::max(worst_budget, s.area_to_h2m);
      if (s.case_tag != "zero") perturbed.emplace_back(s.pair_i, s.pair_j);
    }
    w.end_array();
    w.key("perturbed_pairs").begin_array();
    for (auto [i, j] : perturbed) w.begin_array().value(i).value(j).end_array();
    w.end_array();
    w.key("area_to_h2m_max").value(worst_budget);
    w.key("staged_audit_max_drift").value(g.staged_audit_max_drift);
    w.key("sup_bounds").begin_array();
    for (const auto& sb : g.sup_bounds) w.number_array(sb);
    w.end_array();
    if (!g.warning.empty()) w.key("warning").value(g.warning);
    if (!g.failure.empty()) w.key("failure").value(g.failure);
    w.end_object();
  }
  w.end_array();
  w.key("failure_manifest").begin_array();
  if (!compat.pass) w.value("field is not horizontal-compatible; extension not attempted");
  if (!pipeline_error.empty()) w.value("pipeline: " + pipeline_error);
  for (const auto& g : res.gaps) {
    if (!g.failed) continue;
    std::string msg = "gap [" + format_number(g.a) + ", " + format_number(g.b) + "]: " +
                      g.failure;
    w.value(msg);
  }
  w.end_array();
  w.key("curve_written").value(verified);
  if (verified) {
    w.key("verification");
    clidetail::write_verify(w, verify);
  }
  w.key("pass").value(out.pass);
  w.end_object();
  out.report_json = w.take();

  if (verified) out.curve_json = curve_to_json(f, res.gaps, res.curve);
  return out;
}

inline int cmd_extend(const std::string& input, const std::string& curve_path,
                      const std::string& report_path, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  WhitneyField f;
  try {
    f = load_field(input);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kCliReject;
  }
  const ExtendOutputs res = run_extend(f, input);
  try {
    write_text_file(report_path, res.report_json);
    if (!res.curve_json.empty()) write_text_file(curve_path, res.curve_json);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kCliReject;
  }
  out << "wrote " << report_path;
  if (!res.curve_json.empty()) out << " and " << curve_path;
  out << ": " << (res.pass ? "pass" : "FAIL") << "\n";
  return res.pass ? kCliPass : kCliFail;
}

// ---------------------------------------------------------------------------
// verify

inline std::string verify_report_json(const std::string& curve_name,
                                      const std::string& input_name, int r, int m,
                                      const VerifyReport& rep) {
  JsonWriter w;
  w.begin_object();
  w.key("tool").value("cw verify");
  w.key("curve").value(curve_name);
  w.key("input").value(input_name);
  w.key("r").value(r);
  w.key("m").value(m);
  w.key("verification");
  clidetail::write_verify(w, rep);
  w.key("pass").value(rep.pass);
  w.end_object();
  return w.take();
}

inline int cmd_verify(const std::string& curve_path, const std::string& input,
                      const std::string& report_path = "", std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  WhitneyField f;
  LoadedCurve lc;
  try {
    f = load_field(input);
    lc = load_curve(curve_path);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kCliReject;
  }
  if (lc.r != f.r || lc.m != f.m) {
    err << "verify: curve is (r=" << lc.r << ", m=" << lc.m << ") but field is (r=" << f.r
        << ", m=" << f.m << ")\n";
    return kCliReject;
  }
  const auto ck = lc.K.knots();
  const auto fk = f.K.knots();
  const double tol = f.location_tolerance();
  bool same_knots = ck.size() == fk.size();
  for (std::size_t i = 0; same_knots && i < ck.size(); ++i)
    same_knots = std::abs(ck[i] - fk[i]) <= tol;
  if (!same_knots) {
    err << "verify: curve and field disagree on the knot family\n";
    return kCliReject;
  }

  const VerifyReport rep = verify_extension(lc.curve, f);
  const std::string json = verify_report_json(curve_path, input, f.r, f.m, rep);
  if (report_path.empty()) {
    out << json;
  } else {
    try {
      write_text_file(report_path, json);
    } catch (const ParseError& e) {
      err << e.what() << "\n";
      return kCliReject;
    }
    out << "wrote " << report_path << ": " << (rep.pass ? "pass" : "FAIL") << "\n";
  }
  return rep.pass ? kCliPass : kCliFail;
}

// ---------------------------------------------------------------------------
// argv wiring

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Jet and signed-area tooling for horizontal curve extension in "
               "free step-2 groups"};
  app.require_subcommand(1);

  int levels = 1, m = 2;
  std::string out_path;
  auto* ce = app.add_subcommand("counterexample",
                                "Generate the interval-family field whose plain pair ratios "
                                "decay while the corrected ones blow up");
  ce->add_option("--levels", levels, "Truncation depth of the interval family")->required();
  ce->add_option("--m", m, "Jet order");
  ce->add_option("--out", out_path, "Field file to write")->required();

  std::string a_input, a_report, a_csv;
  double cbound = 4.0, grid = 0.25;
  auto* au = app.add_subcommand("audit",
                                "Audit a field: Taylor remainders, pairing compatibility, "
                                "plain and corrected area ratios with scale trends");
  au->add_option("--input", a_input, "Field file")->required();
  au->add_option("--report", a_report, "Report JSON to write")->required();
  au->add_option("--csv", a_csv, "Optional CSV mirror, one row per candidate");
  au->add_option("--cbound", cbound, "Coefficient box half-width for candidates");
  au->add_option("--grid", grid, "Coefficient grid step");

  std::string e_input, e_curve, e_report;
  auto* ex = app.add_subcommand("extend",
                                "Build a smooth horizontal curve through a field and verify it");
  ex->add_option("--input", e_input, "Field file")->required();
  ex->add_option("--curve", e_curve, "Curve file to write")->required();
  ex->add_option("--report", e_report, "Report JSON to write")->required();

  std::string v_curve, v_input, v_report;
  auto* ve = app.add_subcommand("verify",
                                "Check a curve file against a field: jets, horizontality, "
                                "knot smoothness");
  ve->add_option("--curve", v_curve, "Curve file")->required();
  ve->add_option("--input", v_input, "Field file")->required();
  ve->add_option("--report", v_report, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (ce->parsed()) return cmd_counterexample(levels, m, out_path);
  if (au->parsed()) return cmd_audit(a_input, a_report, a_csv, cbound, grid);
  if (ex->parsed()) return cmd_extend(e_input, e_curve, e_report);
  if (ve->parsed()) return cmd_verify(v_curve, v_input, v_report);
  return kCliReject;
}

}  // namespace cw
