#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "fmw/evaluator.hpp"
#include "fmw/games.hpp"
#include "fmw/nspace.hpp"
#include "fmw/parser.hpp"
#include "fmw/structure.hpp"
#include "fmw/transforms.hpp"

namespace fmw {

using json = nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& what = "input") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON in " + what + ": " + e.what());
  }
}

namespace detail {

template <class T>
T get_field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw Error(what + " is missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(what + " has a malformed field '" + key + "'");
  }
}

inline Element element_from(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw Error(what + " must be an integer element");
  return v.get<Element>();
}

} // namespace detail

// ---- structures ---------------------------------------------------------------

inline json vocabulary_to_json(const Vocabulary& v) {
  json rels = json::array(), consts = json::array();
  for (const auto& r : v.user_relations()) rels.push_back({r.name, r.arity});
  for (const auto& c : v.user_constants()) consts.push_back(c);
  return {{"relations", rels}, {"constants", consts}, {"builtins", v.has_builtins()}};
}

inline Vocabulary vocabulary_from_json(const json& j) {
  if (!j.is_object()) throw Error("vocabulary must be a JSON object");
  std::vector<std::pair<std::string, std::size_t>> rels;
  std::vector<std::string> consts;
  if (j.contains("relations"))
    for (const auto& r : j.at("relations")) {
      if (!r.is_array() || r.size() != 2 || !r[0].is_string() || !r[1].is_number_unsigned())
        throw Error("vocabulary relations must be [name, arity] pairs");
      rels.emplace_back(r[0].get<std::string>(), r[1].get<std::size_t>());
    }
  if (j.contains("constants"))
    for (const auto& c : j.at("constants")) {
      if (!c.is_string()) throw Error("vocabulary constants must be names");
      consts.push_back(c.get<std::string>());
    }
  return Vocabulary(rels, consts, j.value("builtins", false));
}

/// Accepts the full form {"vocab":…,"size":…,"relations":…,"constants":…} and the word
/// shorthand {"word":"0110","alphabet":"01","names":{"1":"R"}}.
inline Structure structure_from_json(const json& j) {
  if (!j.is_object()) throw Error("structure must be a JSON object");
  if (j.contains("word")) {
    auto alphabet = j.value("alphabet", std::string("01"));
    std::vector<std::pair<char, std::string>> names;
    if (j.contains("names"))
      for (auto& [letter, name] : j.at("names").items()) {
        if (letter.size() != 1) throw Error("word relation names are keyed by single letters");
        names.emplace_back(letter[0], name.get<std::string>());
      }
    return word_structure(detail::get_field<std::string>(j, "word", "word structure"), alphabet, names);
  }
  const json& vj = j.contains("vocab") ? j.at("vocab") : j.contains("vocabulary") ? j.at("vocabulary") : json::object();
  Vocabulary vocab = vocabulary_from_json(vj);
  auto n = detail::get_field<std::size_t>(j, "size", "structure");
  std::map<std::string, std::vector<Tuple>> rels;
  std::map<std::string, Element> consts;
  if (j.contains("relations")) {
    for (auto& [name, tuples] : j.at("relations").items()) {
      if (!tuples.is_array()) throw Error("relation '" + name + "' must be a list of tuples");
      auto& out = rels[name];
      for (const auto& t : tuples) {
        if (!t.is_array()) throw Error("relation '" + name + "' must be a list of tuples");
        Tuple tup;
        for (const auto& e : t) tup.push_back(detail::element_from(e, "tuple entry of '" + name + "'"));
        out.push_back(std::move(tup));
      }
    }
  }
  if (j.contains("constants"))
    for (auto& [name, v] : j.at("constants").items()) consts[name] = detail::element_from(v, "constant '" + name + "'");
  return new_structure(vocab, n, rels, consts);
}

inline json structure_to_json(const Structure& A) {
  json rels = json::object(), consts = json::object();
  const auto& v = A.vocab();
  for (std::size_t i = 0; i < v.relations().size(); ++i) {
    if (v.relations()[i].builtin) continue;
    json ts = json::array();
    for (const auto& t : A.relations()[i].tuples()) ts.push_back(t);
    rels[v.relations()[i].name] = ts;
  }
  for (std::size_t i = 0; i < v.constants().size(); ++i)
    if (!v.constants()[i].builtin) consts[v.constants()[i].name] = A.constant_values()[i];
  return {{"vocab", vocabulary_to_json(v)}, {"size", A.size()}, {"relations", rels}, {"constants", consts}};
}

inline Structure load_structure(const std::string& path) {
  return structure_from_json(parse_json(read_file(path), path));
}

/// A structure given as a JSON file, inline JSON, or a preset: builtin:N, order:N,
/// order-minmax:N, path:N, path-st:N, cycle:L (L+1 vertices), word:TEXT[:ALPHABET];
/// "X+Y" is the disjoint union.
/// `allow_files` false restricts to inline JSON and presets (used for network input).
inline Structure structure_from_spec(const std::string& spec, bool allow_files = true) {
  if (spec.empty()) throw Error("empty structure specification");
  if (spec.front() == '{') return structure_from_json(parse_json(spec, "inline structure"));
  if (allow_files && std::ifstream(spec).good()) return load_structure(spec);
  if (auto plus = spec.find('+'); plus != std::string::npos && spec.rfind("word:", 0) != 0)
    return disjoint_union(structure_from_spec(spec.substr(0, plus), allow_files),
                          structure_from_spec(spec.substr(plus + 1), allow_files));
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error("cannot read structure '" + spec + (allow_files ? "' (no such file or preset)" : "' (not a preset)"));
  std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
  if (kind == "word") {
    auto c2 = arg.find(':');
    std::string text = arg.substr(0, c2);
    std::string alphabet = c2 == std::string::npos ? std::string() : arg.substr(c2 + 1);
    if (alphabet.empty())
      for (char c : text)
        if (alphabet.find(c) == std::string::npos) alphabet += c;
    return word_structure(text, alphabet);
  }
  std::size_t n = 0;
  try {
    std::size_t used = 0;
    n = std::stoul(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
  } catch (const std::exception&) {
    throw Error("preset '" + kind + "' needs a numeric size, got '" + arg + "'");
  }
  if (kind == "builtin") return builtin_structure(n);
  if (kind == "order") return linear_order(n);
  if (kind == "order-minmax") return linear_order(n, true);
  if (kind == "path") return path_graph(n);
  if (kind == "path-st") return path_graph(n, true);
  if (kind == "cycle") return cycle_graph(n);
  throw Error("unknown structure preset '" + kind + "'");
}

// ---- traces ---------------------------------------------------------------------

inline json relation_to_json(const Relation& r) {
  json out = json::array();
  for (const auto& t : r.tuples()) out.push_back(t);
  return out;
}

inline json verdict_to_json(const Verdict& v) {
  if (v.fixed) return {{"fixedPointAt", v.depth}};
  return {{"noFixedPoint", {{"cycleStart", v.cycle_start}, {"cycleLength", v.cycle_length}}}};
}

inline json trace_to_json(const StageTrace& t) {
  json stages = json::array();
  for (const auto& s : t.stages) stages.push_back(relation_to_json(s));
  return {{"stages", stages}, {"verdict", verdict_to_json(t.verdict)}};
}

/// Stage-by-stage values of every component.
inline json simultaneous_to_json(const SimResult& r) {
  json stages = json::array();
  for (const auto& st : r.stages) {
    json row = json::array();
    for (const auto& rel : st) row.push_back(relation_to_json(rel));
    stages.push_back(row);
  }
  return {{"stages", stages}, {"verdict", verdict_to_json(r.verdict)}};
}

inline json nested_to_json(const NestedCostReport& rep) {
  json steps = json::array();
  for (const auto& st : rep.outer_steps) steps.push_back({{"outer", relation_to_json(st.outer)}, {"inner", trace_to_json(st.inner)}});
  return {{"outerSteps", steps},
          {"totalInnerIterations", rep.total_inner_iterations},
          {"outerVerdict", verdict_to_json(rep.outer_verdict)}};
}

inline StageTrace trace_from_json(const json& j, std::size_t arity, std::size_t n) {
  StageTrace t;
  for (const auto& s : j.at("stages")) {
    Relation r(arity, n);
    for (const auto& tup : s) r.insert(tup.get<Tuple>());
    t.stages.push_back(std::move(r));
  }
  const auto& v = j.at("verdict");
  if (v.contains("fixedPointAt")) t.verdict = {true, v.at("fixedPointAt").get<std::size_t>(), 0, 0};
  else
    t.verdict = {false, 0, v.at("noFixedPoint").at("cycleStart").get<std::size_t>(),
                 v.at("noFixedPoint").at("cycleLength").get<std::size_t>()};
  return t;
}

// ---- win sets -------------------------------------------------------------------

inline json pebbles_to_json(const std::vector<Element>& t) {
  json out = json::array();
  for (auto e : t) out.push_back(e == kStar ? json(nullptr) : json(e));
  return out;
}

inline std::vector<Element> pebbles_from_json(const json& j) {
  std::vector<Element> out;
  if (!j.is_array()) throw Error("pebble tuple must be an array");
  for (const auto& e : j) out.push_back(e.is_null() ? kStar : detail::element_from(e, "pebble"));
  return out;
}

inline json position_to_json(const Position& p) { return json::array({pebbles_to_json(p.left), pebbles_to_json(p.right)}); }

/// Level j as [[left, right], …]; null marks an unplaced pebble.
inline json win_level_to_json(const WinSets& w, std::size_t j) {
  json out = json::array();
  for (const auto& p : w.members(j)) out.push_back(position_to_json(p));
  return out;
}

inline json win_sets_to_json(const WinSets& w) {
  json levels = json::array();
  for (std::size_t j = 0; j < w.level_count(); ++j) levels.push_back(win_level_to_json(w, j));
  json out{{"pebbles", w.pebbles()}, {"levels", levels}};
  out["stabilizedAt"] = w.stabilized_at() ? json(*w.stabilized_at()) : json(nullptr);
  return out;
}

// ---- machines ---------------------------------------------------------------------

namespace detail {

inline HeadMove head_from_json(const json& j) {
  if (!j.is_string()) throw Error("head direction must be \"L\", \"R\" or \"S\"");
  auto s = j.get<std::string>();
  if (s == "L") return HeadMove::Left;
  if (s == "R") return HeadMove::Right;
  if (s == "S") return HeadMove::Stay;
  throw Error("head direction must be \"L\", \"R\" or \"S\", got \"" + s + "\"");
}

inline const char* head_name(HeadMove m) { return m == HeadMove::Left ? "L" : m == HeadMove::Right ? "R" : "S"; }

} // namespace detail

inline NTMSpec ntm_from_json(const json& j) {
  NTMSpec M;
  M.states = detail::get_field<std::size_t>(j, "states", "machine");
  M.accept = detail::get_field<std::size_t>(j, "accept", "machine");
  M.m = j.value("m", std::size_t{1});
  M.f = j.value("f", std::string("logn"));
  for (const auto& e : j.value("table", json::array())) {
    if (!e.is_array() || e.size() != 2 || e[0].size() != 3 || e[1].size() != 4)
      throw Error("transition entries must look like [[x,b,w],[x',dir,w',dir]]");
    Transition t;
    t.state = e[0][0].get<std::size_t>();
    t.input_bit = e[0][1].get<int>();
    t.work_bit = e[0][2].get<int>();
    t.next_state = e[1][0].get<std::size_t>();
    t.input_move = detail::head_from_json(e[1][1]);
    t.write_bit = e[1][2].get<int>();
    t.work_move = detail::head_from_json(e[1][3]);
    M.table.push_back(t);
  }
  M.validate();
  return M;
}

inline json ntm_to_json(const NTMSpec& M) {
  json table = json::array();
  for (const auto& t : M.table)
    table.push_back({{t.state, t.input_bit, t.work_bit},
                     {t.next_state, detail::head_name(t.input_move), t.write_bit, detail::head_name(t.work_move)}});
  return {{"states", M.states}, {"accept", M.accept}, {"m", M.m}, {"f", M.f}, {"table", table}};
}

inline NTMSpec load_ntm(const std::string& path) { return ntm_from_json(parse_json(read_file(path), path)); }

inline json layout_to_json(const ConfigLayout& L) {
  return {{"n", L.n}, {"m", L.m}, {"f", L.f}, {"a", L.a}, {"h", L.h}, {"t", L.t}, {"g", L.g}, {"wordBits", L.word_bits}};
}

// ---- interpretations ------------------------------------------------------------

/// {"k":2,"universe":"…","relations":{"E":"…"},"constants":{"s":"…"}}; formulas use x1..xk for
/// the universe and x1..x(a·k) for an a-ary relation. Arities default to the highest free index / k.
inline Interpretation interpretation_from_json(const json& j) {
  Interpretation I;
  I.k = detail::get_field<std::size_t>(j, "k", "interpretation");
  if (I.k == 0) throw Error("interpretation width must be positive");
  I.universe = parse(detail::get_field<std::string>(j, "universe", "interpretation"));
  I.target_builtins = j.value("builtins", false);
  json arities = j.value("arities", json::object());
  if (j.contains("relations"))
    for (auto& [name, text] : j.at("relations").items()) {
      Formula f = parse(text.get<std::string>());
      std::size_t arity = 0;
      if (arities.contains(name)) arity = arities.at(name).get<std::size_t>();
      else {
        std::size_t top = 0;
        for (auto v : f->free_vars) {
          auto s = sym_name(v);
          if (s.size() > 1 && s[0] == 'x') top = std::max<std::size_t>(top, std::stoul(s.substr(1)));
        }
        arity = std::max<std::size_t>(1, (top + I.k - 1) / I.k);
      }
      I.relation_arities.emplace_back(name, arity);
      I.relations[name] = f;
    }
  if (j.contains("constants"))
    for (auto& [name, text] : j.at("constants").items()) {
      I.constant_names.push_back(name);
      I.constants[name] = parse(text.get<std::string>());
    }
  validate_interpretation(I);
  return I;
}

inline Interpretation load_interpretation(const std::string& path) {
  return interpretation_from_json(parse_json(read_file(path), path));
}

} // namespace fmw
