#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cw/compact_set.hpp"
#include "cw/curve.hpp"
#include "cw/extend.hpp"
#include "cw/jets.hpp"
#include "cw/numerics.hpp"
#include "cw/piecewise.hpp"
#include "cw/polynomial.hpp"

namespace cw {

/// Raised on malformed input files. The message always carries the origin
/// (path or "<memory>") and either a byte offset (syntax errors) or the
/// dotted path of the offending member (shape errors).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed decimal rendering, 17 significant digits. Every number written to a
/// report or data file goes through here so identical runs produce
/// byte-identical files.
inline std::string format_number(double v) {
  CW_REQUIRE(std::isfinite(v), "format_number: non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

/// Streaming JSON writer with a fixed layout: objects and arrays indent by
/// two spaces, keys keep insertion order, numbers go through format_number.
/// nlohmann::json is deliberately not used for output; its double rendering
/// is shortest-round-trip, not a fixed digit count.
class JsonWriter {
 public:
  JsonWriter() { out_.reserve(1 << 12); }

  JsonWriter& begin_object() { return open('{'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array() { return open('['); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(const std::string& k) {
    prepare_slot();
    append_quoted(k);
    out_ += ": ";
    pending_key_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(format_number(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(long long v) { return raw(std::to_string(v)); }
  JsonWriter& value(std::size_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(const char* s) { return value(std::string(s)); }
  JsonWriter& value(const std::string& s) {
    prepare_slot();
    append_quoted(s);
    return *this;
  }

  JsonWriter& number_array(const std::vector<double>& vs) {
    begin_array();
    for (double v : vs) value(v);
    return end_array();
  }
  JsonWriter& int_array(const std::vector<int>& vs) {
    begin_array();
    for (int v : vs) value(v);
    return end_array();
  }

  std::string take() {
    out_ += '\n';
    return std::move(out_);
  }

 private:
  JsonWriter& raw(const std::string& token) {
    prepare_slot();
    out_ += token;
    return *this;
  }

  JsonWriter& open(char c) {
    prepare_slot();
    out_ += c;
    depth_ += 1;
    fresh_ = true;
    return *this;
  }

  JsonWriter& close(char c) {
    depth_ -= 1;
    if (!fresh_) {
      out_ += '\n';
      indent();
    }
    out_ += c;
    fresh_ = false;
    return *this;
  }

  void prepare_slot() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (!fresh_) out_ += ',';
    if (depth_ > 0) {
      out_ += '\n';
      indent();
    }
    fresh_ = false;
  }

  void indent() { out_.append(static_cast<std::size_t>(2 * depth_), ' '); }

  void append_quoted(const std::string& s) {
    out_ += '"';
    for (char ch : s) {
      switch (ch) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        case '\r': out_ += "\\r"; break;
        default:
          if (static_cast<unsigned char>(ch) < 0x20) {
            char esc[8];
            std::snprintf(esc, sizeof esc, "\\u%04x", ch);
            out_ += esc;
          } else {
            out_ += ch;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  int depth_ = 0;
  bool fresh_ = true;
  bool pending_key_ = false;
};

/// Flat CSV writer: header first, one record per row, numbers through
/// format_number. Cells never contain commas, so no quoting is performed.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ += ',';
      out_ += header[i];
    }
    out_ += '\n';
    columns_ = header.size();
  }

  void row(const std::vector<std::string>& cells) {
    CW_REQUIRE(cells.size() == columns_, "CsvWriter: cell count mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }

  const std::string& text() const { return out_; }

 private:
  std::string out_;
  std::size_t columns_ = 0;
};

namespace iodetail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& origin, const std::string& where,
                              const std::string& what) {
  throw ParseError(origin + ": " + where + ": " + what);
}

inline json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline const json& member(const json& obj, const char* key, const std::string& origin,
                          const std::string& where) {
  if (!obj.is_object()) fail(origin, where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(origin, where, std::string("missing member \"") + key + "\"");
  return *it;
}

inline void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                           const std::string& origin, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const auto& k : allowed) known = known || (it.key() == k);
    if (!known) fail(origin, where, "unknown member \"" + it.key() + "\"");
  }
}

inline int int_member(const json& obj, const char* key, const std::string& origin,
                      const std::string& where) {
  const json& v = member(obj, key, origin, where);
  if (!v.is_number_integer()) fail(origin, where + "." + key, "expected an integer");
  return v.get<int>();
}

inline double number_at(const json& v, const std::string& origin, const std::string& where) {
  if (!v.is_number()) fail(origin, where, "expected a number");
  return v.get<double>();
}

inline std::vector<double> number_list(const json& v, const std::string& origin,
                                       const std::string& where) {
  if (!v.is_array()) fail(origin, where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number_at(v[i], origin, where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::string component_key(int i, int j) {
  return j == 0 ? std::to_string(i) : std::to_string(i) + std::to_string(j);
}

}  // namespace iodetail

// ---------------------------------------------------------------------------
// Whitney field files

inline void write_compact_set(JsonWriter& w, const CompactSet& K) {
  w.begin_object();
  if (K.is_points()) {
    w.key("points").number_array(K.point_list());
  } else {
    w.key("intervals").begin_array();
    for (auto [u, v] : K.interval_list()) {
      w.begin_array().value(u).value(v).end_array();
    }
    w.end_array();
  }
  w.end_object();
}

inline std::string field_to_json(const WhitneyField& f) {
  JsonWriter w;
  w.begin_object();
  w.key("r").value(f.r);
  w.key("m").value(f.m);
  w.key("K");
  write_compact_set(w, f.K);

  auto write_component = [&](const FieldComponent& c) {
    w.begin_object();
    if (c.is_pointwise()) {
      w.key("pointwise").begin_array();
      for (const auto& jet : c.jets()) w.number_array(jet);
      w.end_array();
    } else {
      w.key("per_interval_poly").begin_array();
      for (const Polynomial& p : c.polys()) w.number_array(p.coeffs());
      w.end_array();
    }
    w.end_object();
  };

  w.key("F").begin_object();
  for (int i = 1; i <= f.r; ++i) {
    w.key(iodetail::component_key(i, 0));
    write_component(f.component_horizontal(i));
  }
  for (auto [i, j] : vertical_pairs(f.r)) {
    w.key(iodetail::component_key(i, j));
    write_component(f.component_vertical(i, j));
  }
  w.end_object();

  w.end_object();
  return w.take();
}

namespace iodetail {

inline CompactSet read_compact_set(const json& jk, const std::string& origin,
                                   const std::string& where) {
  if (!jk.is_object()) fail(origin, where, "expected an object");
  reject_unknown(jk, {"points", "intervals"}, origin, where);
  const bool has_points = jk.contains("points");
  const bool has_intervals = jk.contains("intervals");
  if (has_points == has_intervals)
    fail(origin, where, "need exactly one of \"points\" or \"intervals\"");
  if (has_points) {
    auto pts = number_list(jk["points"], origin, where + ".points");
    if (pts.size() < 2) fail(origin, where + ".points", "need at least two points");
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i] > pts[i - 1]))
        fail(origin, where + ".points", "points must be strictly increasing");
    return CompactSet::points(std::move(pts));
  }
  const json& iv = jk["intervals"];
  if (!iv.is_array() || iv.empty())
    fail(origin, where + ".intervals", "expected a non-empty array");
  std::vector<std::pair<double, double>> parts;
  for (std::size_t i = 0; i < iv.size(); ++i) {
    const std::string at = where + ".intervals[" + std::to_string(i) + "]";
    auto uv = number_list(iv[i], origin, at);
    if (uv.size() != 2) fail(origin, at, "expected [u, v]");
    if (!(uv[1] >= uv[0])) fail(origin, at, "interval endpoints out of order");
    if (!parts.empty() && !(uv[0] > parts.back().second))
      fail(origin, at, "intervals must be disjoint and ascending");
    parts.emplace_back(uv[0], uv[1]);
  }
  return CompactSet::intervals(std::move(parts));
}

inline FieldComponent read_component(const json& jc, const CompactSet& K, int m,
                                     const std::string& origin, const std::string& where) {
  if (!jc.is_object()) fail(origin, where, "expected an object");
  reject_unknown(jc, {"pointwise", "per_interval_poly"}, origin, where);
  const bool pw = jc.contains("pointwise");
  const bool pp = jc.contains("per_interval_poly");
  if (pw == pp) fail(origin, where, "need exactly one of \"pointwise\" or \"per_interval_poly\"");
  if (pw) {
    if (!K.is_points())
      fail(origin, where, "\"pointwise\" data requires a point-family K");
    const json& rows = jc["pointwise"];
    if (!rows.is_array()) fail(origin, where + ".pointwise", "expected an array");
    if (rows.size() != K.point_list().size())
      fail(origin, where + ".pointwise", "row count must match the K points");
    std::vector<std::vector<double>> jets;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string at = where + ".pointwise[" + std::to_string(i) + "]";
      auto jet = number_list(rows[i], origin, at);
      if (static_cast<int>(jet.size()) != m + 1)
        fail(origin, at, "expected " + std::to_string(m + 1) + " jet entries");
      jets.push_back(std::move(jet));
    }
    return FieldComponent::pointwise(std::move(jets));
  }
  if (K.is_points())
    fail(origin, where, "\"per_interval_poly\" data requires an interval-family K");
  const json& rows = jc["per_interval_poly"];
  if (!rows.is_array()) fail(origin, where + ".per_interval_poly", "expected an array");
  if (rows.size() != K.interval_list().size())
    fail(origin, where + ".per_interval_poly", "row count must match the K intervals");
  std::vector<Polynomial> polys;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string at = where + ".per_interval_poly[" + std::to_string(i) + "]";
    auto c = number_list(rows[i], origin, at);
    if (static_cast<int>(c.size()) > m + 1)
      fail(origin, at, "degree exceeds the jet order");
    polys.emplace_back(std::move(c));
  }
  return FieldComponent::polynomials(std::move(polys));
}

}  // namespace iodetail

inline WhitneyField field_from_json(const std::string& text,
                                    const std::string& origin = "<memory>") {
  using iodetail::fail;
  const auto doc = iodetail::parse_text(text, origin);
  if (!doc.is_object()) fail(origin, "$", "expected a top-level object");
  iodetail::reject_unknown(doc, {"r", "m", "K", "F"}, origin, "$");

  WhitneyField f;
  f.r = iodetail::int_member(doc, "r", origin, "$");
  f.m = iodetail::int_member(doc, "m", origin, "$");
  if (f.r < 2) fail(origin, "$.r", "need at least two generators");
  if (f.m < 1) fail(origin, "$.m", "need a positive order");
  f.K = iodetail::read_compact_set(iodetail::member(doc, "K", origin, "$"), origin, "$.K");

  const auto& jf = iodetail::member(doc, "F", origin, "$");
  if (!jf.is_object()) fail(origin, "$.F", "expected an object");
  std::vector<std::string> allowed;
  for (int i = 1; i <= f.r; ++i) allowed.push_back(iodetail::component_key(i, 0));
  for (auto [i, j] : vertical_pairs(f.r)) allowed.push_back(iodetail::component_key(i, j));
  iodetail::reject_unknown(jf, allowed, origin, "$.F");

  auto read_named = [&](const std::string& name) {
    auto it = jf.find(name);
    if (it == jf.end()) fail(origin, "$.F", "missing component \"" + name + "\"");
    return iodetail::read_component(*it, f.K, f.m, origin, "$.F." + name);
  };
  for (int i = 1; i <= f.r; ++i)
    f.horizontal.push_back(read_named(iodetail::component_key(i, 0)));
  for (auto [i, j] : vertical_pairs(f.r))
    f.vertical.push_back(read_named(iodetail::component_key(i, j)));
  return f;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << text;
  if (!out) throw ParseError(path + ": write failed");
}

inline WhitneyField load_field(const std::string& path) {
  return field_from_json(read_text_file(path), path);
}

inline void save_field(const std::string& path, const WhitneyField& f) {
  write_text_file(path, field_to_json(f));
}

// ---------------------------------------------------------------------------
// Curve files

/// What a curve file round-trips: the assembled curve plus the per-gap
/// synthesis notes that travel with it.
struct CurveCaseNote {
  double a = 0.0, b = 0.0;
  int i = 0, j = 0;
  std::string case_tag;
  std::string path;
};

struct LoadedCurve {
  int r = 0, m = 0;
  CompactSet K;
  HorizontalCurve curve;
  std::vector<CurveCaseNote> cases;
};

inline std::string curve_to_json(const WhitneyField& f,
                                 const std::vector<GapPerturbation>& gaps,
                                 const HorizontalCurve& curve) {
  const auto knots = f.K.knots();
  const double tol = f.location_tolerance();
  JsonWriter w;
  w.begin_object();
  w.key("r").value(curve.rank());
  w.key("m").value(curve.order());
  w.key("K");
  write_compact_set(w, f.K);

  w.key("pieces").begin_array();
  for (std::size_t g = 0; g + 1 < knots.size(); ++g) {
    const double u = knots[g], v = knots[g + 1];
    const GapPerturbation* gp = nullptr;
    for (const auto& cand : gaps)
      if (std::abs(cand.a - u) <= tol && std::abs(cand.b - v) <= tol) gp = &cand;

    w.begin_object();
    w.key("span").begin_array().value(u).value(v).end_array();
    w.key("role").value(gp != nullptr ? "gap" : "part");
    w.key("components").begin_array();
    for (int i = 1; i <= curve.rank(); ++i) {
      const PiecewiseFunction& h = curve.horizontal(i);
      w.begin_object();
      w.key("coeffs").number_array(h.pieces()[g].coeffs());
      w.end_object();
    }
    w.end_array();

    if (gp != nullptr) {
      w.key("cases").begin_array();
      for (const StageRecord& s : gp->stages) {
        w.begin_object();
        w.key("pair").begin_array().value(s.pair_i).value(s.pair_j).end_array();
        w.key("case").value(s.case_tag);
        w.key("path").value(s.path);
        w.end_object();
      }
      w.end_array();
      w.key("perturbations").begin_array();
      for (int i = 1; i <= curve.rank(); ++i) {
        if (gp->phi[i - 1].bumps().empty()) continue;
        w.begin_object();
        w.key("component").value(i);
        w.key("bumps").begin_array();
        for (const BumpTerm& t : gp->phi[i - 1].bumps()) {
          w.begin_object();
          w.key("kind").value(t.kind == BumpKind::Plateau ? "eta" : "xi");
          w.key("interval").begin_array().value(t.u).value(t.v).end_array();
          w.key("amplitude").value(t.amplitude);
          w.end_object();
        }
        w.end_array();
        w.end_object();
      }
      w.end_array();
      if (gp->skipped) w.key("skipped").value(true);
    }
    w.end_object();
  }
  w.end_array();

  w.key("vertical").begin_array();
  for (auto [i, j] : vertical_pairs(curve.rank())) {
    const auto& pieces = curve.vertical_pieces()[vertical_pair_index(i, j, curve.rank())];
    w.begin_object();
    w.key("pair").begin_array().value(i).value(j).end_array();
    std::vector<double> offsets;
    for (const auto& vp : pieces) offsets.push_back(vp.offset);
    w.key("offsets").number_array(offsets);
    w.end_object();
  }
  w.end_array();

  w.end_object();
  return w.take();
}

inline LoadedCurve curve_from_json(const std::string& text,
                                   const std::string& origin = "<memory>") {
  using iodetail::fail;
  using iodetail::json;
  const auto doc = iodetail::parse_text(text, origin);
  if (!doc.is_object()) fail(origin, "$", "expected a top-level object");
  iodetail::reject_unknown(doc, {"r", "m", "K", "pieces", "vertical"}, origin, "$");

  LoadedCurve out;
  out.r = iodetail::int_member(doc, "r", origin, "$");
  out.m = iodetail::int_member(doc, "m", origin, "$");
  if (out.r < 2) fail(origin, "$.r", "need at least two generators");
  if (out.m < 1) fail(origin, "$.m", "need a positive order");
  out.K = iodetail::read_compact_set(iodetail::member(doc, "K", origin, "$"), origin, "$.K");

  const auto knots = out.K.knots();
  const double tol = 1e-12 * (out.K.diameter() + 1.0);

  const auto& jp = iodetail::member(doc, "pieces", origin, "$");
  if (!jp.is_array()) fail(origin, "$.pieces", "expected an array");
  if (jp.size() + 1 != knots.size())
    fail(origin, "$.pieces", "piece count must match the K knots");

  std::vector<std::vector<Polynomial>> comp_pieces(static_cast<std::size_t>(out.r));
  std::vector<std::vector<BumpTerm>> comp_bumps(static_cast<std::size_t>(out.r));
  for (std::size_t g = 0; g < jp.size(); ++g) {
    const std::string at = "$.pieces[" + std::to_string(g) + "]";
    const json& piece = jp[g];
    if (!piece.is_object()) fail(origin, at, "expected an object");
    iodetail::reject_unknown(
        piece, {"span", "role", "components", "cases", "perturbations", "skipped"}, origin, at);

    auto span = iodetail::number_list(iodetail::member(piece, "span", origin, at), origin,
                                      at + ".span");
    if (span.size() != 2) fail(origin, at + ".span", "expected [u, v]");
    if (std::abs(span[0] - knots[g]) > tol || std::abs(span[1] - knots[g + 1]) > tol)
      fail(origin, at + ".span", "span does not match the K knot sequence");

    const json& role = iodetail::member(piece, "role", origin, at);
    if (!role.is_string() ||
        (role.get<std::string>() != "part" && role.get<std::string>() != "gap"))
      fail(origin, at + ".role", "expected \"part\" or \"gap\"");

    const json& comps = iodetail::member(piece, "components", origin, at);
    if (!comps.is_array() || static_cast<int>(comps.size()) != out.r)
      fail(origin, at + ".components", "expected one entry per generator");
    for (int i = 0; i < out.r; ++i) {
      const std::string cat = at + ".components[" + std::to_string(i) + "]";
      const json& jc = comps[static_cast<std::size_t>(i)];
      if (!jc.is_object()) fail(origin, cat, "expected an object");
      iodetail::reject_unknown(jc, {"coeffs"}, origin, cat);
      comp_pieces[static_cast<std::size_t>(i)].emplace_back(iodetail::number_list(
          iodetail::member(jc, "coeffs", origin, cat), origin, cat + ".coeffs"));
    }

    if (piece.contains("cases")) {
      const json& cases = piece["cases"];
      if (!cases.is_array()) fail(origin, at + ".cases", "expected an array");
      for (std::size_t s = 0; s < cases.size(); ++s) {
        const std::string sat = at + ".cases[" + std::to_string(s) + "]";
        const json& jc = cases[s];
        if (!jc.is_object()) fail(origin, sat, "expected an object");
        iodetail::reject_unknown(jc, {"pair", "case", "path"}, origin, sat);
        auto pr = iodetail::number_list(iodetail::member(jc, "pair", origin, sat), origin,
                                        sat + ".pair");
        if (pr.size() != 2) fail(origin, sat + ".pair", "expected [i, j]");
        CurveCaseNote note;
        note.a = span[0];
        note.b = span[1];
        note.i = static_cast<int>(pr[0]);
        note.j = static_cast<int>(pr[1]);
        const json& tag = iodetail::member(jc, "case", origin, sat);
        if (!tag.is_string()) fail(origin, sat + ".case", "expected a string");
        note.case_tag = tag.get<std::string>();
        if (jc.contains("path") && jc["path"].is_string())
          note.path = jc["path"].get<std::string>();
        out.cases.push_back(std::move(note));
      }
    }

    if (piece.contains("perturbations")) {
      const json& perts = piece["perturbations"];
      if (!perts.is_array()) fail(origin, at + ".perturbations", "expected an array");
      for (std::size_t s = 0; s < perts.size(); ++s) {
        const std::string sat = at + ".perturbations[" + std::to_string(s) + "]";
        const json& jc = perts[s];
        if (!jc.is_object()) fail(origin, sat, "expected an object");
        iodetail::reject_unknown(jc, {"component", "bumps"}, origin, sat);
        const int comp = iodetail::int_member(jc, "component", origin, sat);
        if (comp < 1 || comp > out.r) fail(origin, sat + ".component", "label out of range");
        const json& bumps = iodetail::member(jc, "bumps", origin, sat);
        if (!bumps.is_array()) fail(origin, sat + ".bumps", "expected an array");
        for (std::size_t bix = 0; bix < bumps.size(); ++bix) {
          const std::string bat = sat + ".bumps[" + std::to_string(bix) + "]";
          const json& jb = bumps[bix];
          if (!jb.is_object()) fail(origin, bat, "expected an object");
          iodetail::reject_unknown(jb, {"kind", "interval", "amplitude"}, origin, bat);
          const json& kind = iodetail::member(jb, "kind", origin, bat);
          if (!kind.is_string() ||
              (kind.get<std::string>() != "eta" && kind.get<std::string>() != "xi"))
            fail(origin, bat + ".kind", "expected \"eta\" or \"xi\"");
          auto uv = iodetail::number_list(iodetail::member(jb, "interval", origin, bat),
                                          origin, bat + ".interval");
          if (uv.size() != 2 || !(uv[1] > uv[0]))
            fail(origin, bat + ".interval", "expected [u, v] with u < v");
          if (uv[0] < span[0] - tol || uv[1] > span[1] + tol)
            fail(origin, bat + ".interval", "bump leaves its piece");
          BumpTerm t;
          t.kind = kind.get<std::string>() == "eta" ? BumpKind::Plateau : BumpKind::Ramp;
          t.u = uv[0];
          t.v = uv[1];
          t.amplitude =
              iodetail::number_at(iodetail::member(jb, "amplitude", origin, bat), origin,
                                  bat + ".amplitude");
          t.order = out.m;
          comp_bumps[static_cast<std::size_t>(comp - 1)].push_back(t);
        }
      }
    }
  }

  const auto& jv = iodetail::member(doc, "vertical", origin, "$");
  if (!jv.is_array() ||
      static_cast<int>(jv.size()) != vertical_pair_count(out.r))
    fail(origin, "$.vertical", "expected one entry per vertical pair");
  std::vector<std::vector<HorizontalCurve::VerticalPiece>> vert;
  {
    const auto pairs = vertical_pairs(out.r);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const std::string at = "$.vertical[" + std::to_string(p) + "]";
      const json& jq = jv[p];
      if (!jq.is_object()) fail(origin, at, "expected an object");
      iodetail::reject_unknown(jq, {"pair", "offsets"}, origin, at);
      auto pr = iodetail::number_list(iodetail::member(jq, "pair", origin, at), origin,
                                      at + ".pair");
      if (pr.size() != 2 || static_cast<int>(pr[0]) != pairs[p].first ||
          static_cast<int>(pr[1]) != pairs[p].second)
        fail(origin, at + ".pair", "pairs must follow the canonical order");
      auto offsets = iodetail::number_list(iodetail::member(jq, "offsets", origin, at),
                                           origin, at + ".offsets");
      if (offsets.size() + 1 != knots.size())
        fail(origin, at + ".offsets", "offset count must match the pieces");
      std::vector<HorizontalCurve::VerticalPiece> pieces;
      for (double o : offsets) {
        HorizontalCurve::VerticalPiece vp;
        vp.lifted = true;
        vp.offset = o;
        pieces.push_back(vp);
      }
      vert.push_back(std::move(pieces));
    }
  }

  std::vector<PiecewiseFunction> horiz;
  for (int i = 0; i < out.r; ++i) {
    PiecewiseFunction h(knots, comp_pieces[static_cast<std::size_t>(i)]);
    for (const BumpTerm& t : comp_bumps[static_cast<std::size_t>(i)]) h.add_bump(t);
    horiz.push_back(std::move(h));
  }
  out.curve = HorizontalCurve(out.r, out.m, knots, std::move(horiz), std::move(vert));
  return out;
}

inline LoadedCurve load_curve(const std::string& path) {
  return curve_from_json(read_text_file(path), path);
}

}  // namespace cw
