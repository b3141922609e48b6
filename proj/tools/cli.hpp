#pragma once

#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fmw/evaluator.hpp"
#include "fmw/games.hpp"
#include "fmw/json_io.hpp"
#include "fmw/nspace.hpp"
#include "fmw/parser.hpp"
#include "fmw/rankers.hpp"
#include "fmw/transforms.hpp"

namespace fmw::cli {

struct UsageError : Error {
  using Error::Error;
};

/// What a verb produced: `text` for table mode, `rows` (header first) for csv, `data` for json.
struct Output {
  json data = json::object();
  std::string text;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::string scalar_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline void emit(const Output& o, const std::string& format, std::ostream& out) {
  if (format == "json") {
    out << o.data.dump(2) << "\n";
  } else if (format == "csv") {
    auto rows = o.rows;
    if (rows.empty()) {
      rows.push_back({"key", "value"});
      for (auto& [k, v] : o.data.items()) rows.push_back({k, scalar_text(v)});
    }
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_cell(r[i]);
      out << "\n";
    }
  } else {
    if (!o.text.empty()) {
      out << o.text;
      if (o.text.back() != '\n') out << "\n";
      return;
    }
    std::vector<std::size_t> width;
    for (const auto& r : o.rows)
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (width.size() <= i) width.push_back(0);
        width[i] = std::max(width[i], r[i].size());
      }
    for (const auto& r : o.rows) {
      for (std::size_t i = 0; i < r.size(); ++i)
        out << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << r[i];
      out << "\n";
    }
  }
}

inline std::string relation_text(const Relation& r) {
  std::string s = "{";
  bool first = true;
  for (const auto& t : r.tuples()) {
    s += first ? "" : ", ";
    first = false;
    if (t.size() == 1) s += std::to_string(t[0]);
    else {
      s += "(";
      for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
      s += ")";
    }
  }
  return s + "}";
}

inline std::vector<Element> parse_tuple(const std::string& text) {
  std::vector<Element> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "*" || item == "_") {
      out.push_back(kStar);
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad tuple entry '" + item + "'");
    }
  }
  return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  try {
    if (auto dots = text.find(".."); dots != std::string::npos) {
      auto lo = std::stoul(text.substr(0, dots)), hi = std::stoul(text.substr(dots + 2));
      for (auto n = lo; n <= hi; ++n) out.push_back(n);
      return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  } catch (const std::exception&) {
    throw UsageError("bad size list '" + text + "' (use 3..8 or 3,4,5)");
  }
  return out;
}

inline Assignment parse_assignment(const std::string& text) {
  Assignment a;
  if (text.empty()) return a;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eqpos = item.find('=');
    if (eqpos == std::string::npos) throw UsageError("assignment entries look like x=1, got '" + item + "'");
    try {
      a.set(item.substr(0, eqpos), std::stoi(item.substr(eqpos + 1)));
    } catch (const std::invalid_argument&) {
      throw UsageError("bad assignment value in '" + item + "'");
    }
  }
  return a;
}

inline Vocabulary vocab_from_spec(const std::string& spec) {
  std::string text = !spec.empty() && spec.front() == '{' ? spec : read_file(spec);
  return vocabulary_from_json(parse_json(text, "vocabulary"));
}

struct FixParts {
  Formula body;
  SymId rel;
  std::vector<SymId> vars;
  FixOp op;
};

inline FixParts fix_parts(const Formula& f) {
  if (f->kind != Kind::Fix) throw UsageError("this verb needs a single fixed-point formula [lfp R(x): ...](t)");
  return {f->kids[0], f->rel, f->bound, f->op};
}

inline const Formula& sim_node(const Formula& f) {
  if (f->kind != Kind::Sim) throw UsageError("this verb needs a simultaneous system [op sim {...} select R](t)");
  return f;
}

inline std::string move_text(const SpoilerMove& m, bool ef) {
  std::string s = ef ? "" : "pebble " + std::to_string(m.pebble) + " on ";
  return s + "element " + std::to_string(m.element) + " in " + to_string(m.side);
}

inline json move_json(const SpoilerMove& m) {
  return {{"structure", to_string(m.side)}, {"pebble", m.pebble}, {"element", m.element}};
}

} // namespace detail

/// Runs one command; returns the process exit status (0 ok, 1 domain error, 2 usage error).
inline int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite model theory workbench", "fmw"};
  app.require_subcommand(1);
  std::string format = "table";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "json", "csv"}));
  app.fallthrough();

  std::string structure, formula_file, expr, assign, left, right, left_tuple, right_tuple, rounds = "1", vocab_spec;
  std::size_t s = 1, size = 0, stage = 0, iterations = 0, limit = 1u << 20;
  bool inflationary = false, ef_flag = false, show_win = false, evaluate = false;

  auto add_formula = [&](CLI::App* c) {
    auto* f = c->add_option("--formula", formula_file, "Formula file");
    auto* e = c->add_option("--expr", expr, "Inline formula");
    f->excludes(e);
    e->excludes(f);
  };
  auto add_structure = [&](CLI::App* c, bool required) {
    auto* o = c->add_option("--structure", structure, "Structure: JSON file, inline JSON or preset");
    if (required) o->required();
  };

  auto* eval = app.add_subcommand("eval", "Evaluate a formula on a structure");
  add_structure(eval, true);
  add_formula(eval);
  eval->add_option("--assign", assign, "Assignment, e.g. x=0,y=2");

  auto* stages_cmd = app.add_subcommand("stages", "Print the stage sequence of a fixed point");
  add_structure(stages_cmd, true);
  add_formula(stages_cmd);
  stages_cmd->add_option("--assign", assign);
  stages_cmd->add_flag("--inflationary", inflationary);

  auto* depth_cmd = app.add_subcommand("depth", "Depth of a fixed-point body");
  add_structure(depth_cmd, false);
  add_formula(depth_cmd);
  depth_cmd->add_option("--assign", assign);
  depth_cmd->add_flag("--inflationary", inflationary);
  depth_cmd->add_option("--all-of-size", size, "Maximum depth over all structures of this size");
  depth_cmd->add_option("--vocab", vocab_spec, "Vocabulary (JSON file or inline) for --all-of-size");
  depth_cmd->add_option("--limit", limit, "Enumeration limit");

  auto* sim = app.add_subcommand("sim", "Simultaneous fixed point");
  add_structure(sim, true);
  add_formula(sim);
  sim->add_flag("--inflationary", inflationary);

  std::string outer_name;
  auto* nested = app.add_subcommand("nested", "Nested fixed point cost report");
  add_structure(nested, true);
  add_formula(nested);
  nested->add_option("--outer", outer_name, "Outer component (default: selected)");
  nested->add_flag("--inflationary-outer", inflationary);

  auto* game = app.add_subcommand("game", "Ehrenfeucht-Fraisse game");
  game->add_flag("--ef", ef_flag, "EF game (the default)");
  game->add_option("-m,--moves", rounds, "Number of moves")->required();
  game->add_option("--left", left)->required();
  game->add_option("--right", right)->required();
  game->add_option("--left-tuple", left_tuple, "Initial tuple in the left structure");
  game->add_option("--right-tuple", right_tuple, "Initial tuple in the right structure");

  auto* pebble = app.add_subcommand("pebble", "Pebble game");
  pebble->add_option("-s,--pebbles", s)->required();
  pebble->add_option("-m,--moves", rounds, "Number of moves or inf")->required();
  pebble->add_option("--left", left)->required();
  pebble->add_option("--right", right)->required();
  pebble->add_option("--left-tuple", left_tuple);
  pebble->add_option("--right-tuple", right_tuple);
  pebble->add_flag("--win-sets", show_win, "Include the W sets (json)");

  auto* rank = app.add_subcommand("rank", "s-rank of a structure");
  add_structure(rank, true);
  rank->add_option("-s,--pebbles", s)->required();

  std::string preset, sizes;
  auto* survey = app.add_subcommand("survey", "Maximum s-rank over a class by size");
  survey->add_option("--preset", preset, "orders, orders-minmax, paths, cycles, all-graphs, all-unary")->required();
  survey->add_option("-s,--pebbles", s)->required();
  survey->add_option("--sizes", sizes, "e.g. 3..8")->required();
  survey->add_option("--limit", limit);

  auto* qb = app.add_subcommand("qb", "Quantifier-block normal form");
  add_formula(qb);
  add_structure(qb, false);
  qb->add_option("--iterations", iterations, "Iterate the block this many times on --structure");

  auto* unfold = app.add_subcommand("unfold", "Stage formula of a fixed-point body");
  add_formula(unfold);
  add_structure(unfold, false);
  unfold->add_option("--stage", stage)->required();

  long long l_count = -1, m_count = -1, i_count = -1, t_count = -1, savitch = -1;
  auto* counts = app.add_subcommand("counts", "Symbol-count arithmetic and formula metrics");
  counts->add_option("--l", l_count, "Connectives of the body");
  counts->add_option("--m", m_count, "Occurrences of the relation variable");
  counts->add_option("--i", i_count, "Unfolding level");
  counts->add_option("--t", t_count, "Stage bound of the disjunction");
  counts->add_option("--savitch", savitch, "Savitch level i");
  add_formula(counts);

  std::string interp_file;
  auto* interp = app.add_subcommand("interp", "Apply an interpretation or its dual map");
  interp->add_option("--interp", interp_file)->required();
  add_structure(interp, false);
  add_formula(interp);

  std::string ranker_text, word, alphabet;
  auto* ranker = app.add_subcommand("ranker", "Evaluate a ranker on a word");
  ranker->add_option("--ranker", ranker_text)->required();
  ranker->add_option("--word", word)->required();
  ranker->add_option("--alphabet", alphabet);

  std::string machine;
  auto* compile = app.add_subcommand("compile", "Compile a machine into its reachability sentence");
  compile->add_option("--machine", machine)->required();
  compile->add_option("--size", size, "Universe size n");
  compile->add_option("--vocab", vocab_spec, "Input vocabulary (JSON); built-ins are added");
  add_structure(compile, false);
  compile->add_flag("--evaluate", evaluate, "Evaluate the sentence on --structure");
  compile->add_option("--limit", limit, "Configuration graph node limit");

  auto* encode = app.add_subcommand("encode", "Binary encoding of an ordered structure");
  add_structure(encode, true);

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back(); // program name
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  auto load_formula = [&]() -> Formula {
    if (!formula_file.empty()) return parse(read_file(formula_file));
    if (!expr.empty()) return parse(expr);
    throw UsageError("a formula is required (--formula FILE or --expr TEXT)");
  };
  auto need_structure = [&]() -> Structure {
    if (structure.empty()) throw UsageError("--structure is required here");
    return structure_from_spec(structure);
  };
  auto parse_rounds = [&]() -> Rounds {
    if (rounds == "inf" || rounds == "infinity") return std::nullopt;
    try {
      std::size_t used = 0;
      auto v = std::stoul(rounds, &used);
      if (used != rounds.size()) throw std::invalid_argument(rounds);
      return v;
    } catch (const std::exception&) {
      throw UsageError("--moves must be a number or inf");
    }
  };

  Output o;
  try {
    auto* cmd = app.get_subcommands().front();
    const std::string verb = cmd->get_name();

    if (verb == "eval") {
      Structure A = need_structure();
      bool v = satisfies(A, load_formula(), detail::parse_assignment(assign));
      o.data = {{"result", v}};
      o.text = v ? "true" : "false";
    } else if (verb == "stages") {
      Structure A = need_structure();
      auto fp = detail::fix_parts(load_formula());
      auto tr = stages(A, fp.body, fp.rel, fp.vars, detail::parse_assignment(assign), inflationary || fp.op == FixOp::IFP);
      o.data = trace_to_json(tr);
      o.rows.push_back({"stage", "relation"});
      for (std::size_t i = 0; i < tr.stages.size(); ++i) {
        o.text += "F" + std::to_string(i) + " = " + detail::relation_text(tr.stages[i]) + "\n";
        o.rows.push_back({std::to_string(i), detail::relation_text(tr.stages[i])});
      }
      o.text += "verdict: " + to_string(tr.verdict) + "\n";
    } else if (verb == "depth") {
      auto fp = detail::fix_parts(load_formula());
      std::optional<std::size_t> d;
      if (size > 0) {
        if (inflationary) throw UsageError("--all-of-size reports plain depth only");
        Vocabulary v = !vocab_spec.empty() ? detail::vocab_from_spec(vocab_spec)
                       : !structure.empty() ? structure_from_spec(structure).vocab()
                                            : throw UsageError("--all-of-size needs --vocab or --structure");
        d = depth_over_size(fp.body, fp.rel, fp.vars, v, size, limit);
      } else {
        Structure A = need_structure();
        Assignment alpha = detail::parse_assignment(assign);
        d = inflationary || fp.op == FixOp::IFP ? std::optional<std::size_t>(inflationary_depth(A, fp.body, fp.rel, fp.vars, alpha))
                                                : depth(A, fp.body, fp.rel, fp.vars, alpha);
      }
      o.data = {{"depth", d ? json(*d) : json("inf")}};
      o.text = depth_string(d);
    } else if (verb == "sim") {
      Structure A = need_structure();
      Formula f = detail::sim_node(load_formula());
      std::vector<SimComponentSpec> cs;
      for (const auto& c : f->comps) cs.push_back({c.rel, c.vars, c.body});
      auto r = simultaneous_fixpoint(A, cs, {}, inflationary || f->op == FixOp::IFP);
      o.data = {{"iterations", r.iterations()}, {"exists", r.exists()}, {"verdict", verdict_to_json(r.verdict)}};
      o.text = "iterations: " + std::to_string(r.iterations()) + "\nexists: " + (r.exists() ? "true" : "false") + "\n";
      o.rows.push_back({"relation", "value"});
      for (std::size_t i = 0; i < cs.size(); ++i) {
        o.data["relations"][sym_name(cs[i].rel)] = relation_to_json(r.relations[i]);
        o.text += sym_name(cs[i].rel) + " = " + detail::relation_text(r.relations[i]) + "\n";
        o.rows.push_back({sym_name(cs[i].rel), detail::relation_text(r.relations[i])});
      }
    } else if (verb == "nested") {
      Structure A = need_structure();
      Formula f = detail::sim_node(load_formula());
      if (f->comps.size() != 2) throw UsageError("nested needs a system of exactly two components");
      std::size_t oi = f->select;
      if (!outer_name.empty()) {
        if (sym_name(f->comps[0].rel) == outer_name) oi = 0;
        else if (sym_name(f->comps[1].rel) == outer_name) oi = 1;
        else throw UsageError("no component named " + outer_name);
      }
      const auto& oc = f->comps[oi];
      const auto& ic = f->comps[1 - oi];
      auto rep = nested_fixpoint(A, {oc.rel, oc.vars, oc.body}, {ic.rel, ic.vars, ic.body}, {}, inflationary);
      json steps = json::array();
      std::string depths;
      o.rows.push_back({"step", "outer", "inner_verdict"});
      for (std::size_t i = 0; i < rep.outer_steps.size(); ++i) {
        const auto& st = rep.outer_steps[i];
        steps.push_back({{"outer", relation_to_json(st.outer)}, {"inner", verdict_to_json(st.inner.verdict)}});
        depths += (i ? "," : "") + (st.inner.verdict.fixed ? std::to_string(st.inner.verdict.depth) : std::string("none"));
        o.rows.push_back({std::to_string(i), detail::relation_text(st.outer), to_string(st.inner.verdict)});
      }
      o.data = {{"outerSteps", steps},
                {"totalInnerIterations", rep.total_inner_iterations},
                {"outerVerdict", verdict_to_json(rep.outer_verdict)},
                {"convention", rep.convention}};
      o.text = "inner depths: " + depths + "\ntotal inner iterations: " + std::to_string(rep.total_inner_iterations) +
               "\nouter: " + to_string(rep.outer_verdict) + "\nconvention: " + rep.convention + "\n";
    } else if (verb == "game" || verb == "pebble") {
      Structure A = structure_from_spec(left), B = structure_from_spec(right);
      auto a = detail::parse_tuple(left_tuple), b = detail::parse_tuple(right_tuple);
      Rounds m = parse_rounds();
      GameResult r;
      if (verb == "game") {
        if (!m) throw UsageError("EF games need a finite number of moves");
        r = ef_game(A, a, B, b, *m);
      } else {
        r = pebble_game(A, a, B, b, s, m);
      }
      o.data = {{"winner", to_string(r.winner)}};
      o.text = std::string(to_string(r.winner)) + "\n";
      if (r.spoiler_opening) {
        o.data["opening"] = detail::move_json(*r.spoiler_opening);
        o.text += "opening: " + detail::move_text(*r.spoiler_opening, verb == "game") + "\n";
      }
      if (show_win) {
        auto* ps = dynamic_cast<PebbleSolver*>(r.solver.get());
        if (!ps || !ps->win_sets()) throw Error("win sets unavailable for this position space");
        o.data["winSets"] = win_sets_to_json(*ps->win_sets());
      }
    } else if (verb == "rank") {
      auto r = s_rank(need_structure(), s);
      o.data = {{"rank", r}};
      o.text = std::to_string(r);
    } else if (verb == "survey") {
      auto rows = survey_ranks(preset, s, detail::parse_sizes(sizes), limit);
      json arr = json::array();
      o.rows.push_back({"n", "max_rank", "structures"});
      for (const auto& r : rows) {
        arr.push_back({{"n", r.n}, {"maxRank", r.max_rank}, {"structures", r.structures}});
        o.rows.push_back({std::to_string(r.n), std::to_string(r.max_rank), std::to_string(r.structures)});
      }
      o.data = {{"preset", preset}, {"pebbles", s}, {"rows", arr}};
    } else if (verb == "qb") {
      auto fp = detail::fix_parts(load_formula());
      auto block = to_quantifier_block(fp.body, fp.rel, fp.vars);
      o.data = {{"block", to_string(block)}, {"formula", to_string(quantifier_block_formula(block))}};
      o.text = to_string(block) + "\n";
      if (!structure.empty()) {
        Structure A = need_structure();
        Relation r = iterate_qb(A, block, iterations);
        o.data["iterations"] = iterations;
        o.data["relation"] = relation_to_json(r);
        o.text += "[QB]^" + std::to_string(iterations) + " = " + detail::relation_text(r) + "\n";
      }
    } else if (verb == "unfold") {
      auto fp = detail::fix_parts(load_formula());
      Formula phi = unfold_stage_formula(fp.body, fp.rel, fp.vars, stage);
      auto mr = count_metrics(phi);
      o.data = {{"formula", to_string(phi)},
                {"connectives", mr.connectives},
                {"distinctVariables", mr.distinct_variables},
                {"quantifierRank", mr.quantifier_rank}};
      o.text = to_string(phi) + "\nconnectives: " + std::to_string(mr.connectives) +
               "\ndistinct variables: " + std::to_string(mr.distinct_variables) + "\n";
      if (!structure.empty()) {
        Relation r = define(need_structure(), phi, fp.vars);
        o.data["relation"] = relation_to_json(r);
        o.text += "defines " + detail::relation_text(r) + "\n";
      }
    } else if (verb == "counts") {
      bool any = false;
      o.rows.push_back({"quantity", "value"});
      auto put = [&](const std::string& k, Count v) {
        o.data[k] = v;
        o.rows.push_back({k, std::to_string(v)});
        o.text += k + ": " + std::to_string(v) + "\n";
        any = true;
      };
      if (l_count >= 0 && m_count >= 0 && i_count >= 0) {
        put("h", forall_count_h(static_cast<Count>(l_count), static_cast<Count>(m_count), static_cast<std::size_t>(i_count)));
        put("hClosed", forall_count_h_closed(static_cast<Count>(l_count), static_cast<Count>(m_count), static_cast<std::size_t>(i_count)));
      }
      if (l_count >= 0 && m_count >= 0 && t_count >= 0)
        put("pfpDisjunction", pfp_disjunction_count(static_cast<Count>(l_count), static_cast<Count>(m_count), static_cast<std::size_t>(t_count)));
      if (savitch >= 0) put("savitchConnectives", savitch_formula(static_cast<std::size_t>(savitch))->connectives);
      if (!formula_file.empty() || !expr.empty()) {
        auto mr = count_metrics(load_formula());
        put("quantifierRank", mr.quantifier_rank);
        put("distinctVariables", mr.distinct_variables);
        put("connectives", mr.connectives);
        put("forallSymbols", mr.forall_symbols);
        put("existsSymbols", mr.exists_symbols);
      }
      if (!any) throw UsageError("counts needs --l --m with --i or --t, --savitch, or a formula");
    } else if (verb == "interp") {
      Interpretation I = load_interpretation(interp_file);
      bool any = false;
      if (!formula_file.empty() || !expr.empty()) {
        Formula d = dual_formula(I, load_formula());
        o.data["dual"] = to_string(d);
        o.text += to_string(d) + "\n";
        any = true;
      }
      if (!structure.empty()) {
        Structure B = apply_interpretation(I, need_structure());
        o.data["structure"] = structure_to_json(B);
        o.text += structure_to_json(B).dump() + "\n";
        any = true;
      }
      if (!any) throw UsageError("interp needs --structure and/or a formula");
    } else if (verb == "ranker") {
      auto p = ranker_eval(parse_ranker(ranker_text), word, alphabet);
      o.data = {{"position", p ? json(*p) : json(nullptr)}};
      o.text = p ? std::to_string(*p) : "undefined";
    } else if (verb == "compile") {
      NTMSpec M = load_ntm(machine);
      std::optional<Structure> A;
      if (!structure.empty()) A = need_structure();
      Vocabulary v = !vocab_spec.empty() ? detail::vocab_from_spec(vocab_spec)
                     : A                 ? A->vocab()
                                         : throw UsageError("compile needs --vocab or --structure");
      if (!v.has_builtins()) {
        std::vector<std::pair<std::string, std::size_t>> rels;
        for (const auto& r : v.user_relations()) rels.push_back({r.name, r.arity});
        v = Vocabulary(rels, v.user_constants(), true);
      }
      std::size_t n = size ? size : A ? A->size() : throw UsageError("compile needs --size or --structure");
      auto cs = compile_sentence(M, v, n);
      o.data = {{"parameters", layout_to_json(cs.layout)},
                {"savitchLevel", cs.savitch_level},
                {"skeletonConnectives", cs.skeleton_connectives},
                {"edgeConnectives", cs.edge_connectives},
                {"psi1", cs.psi1},
                {"psi2", cs.psi2},
                {"psi3", cs.psi3},
                {"connectives", cs.connectives},
                {"distinctVariables", cs.distinct_variables}};
      const auto& L = cs.layout;
      o.text = "n=" + std::to_string(L.n) + " m=" + std::to_string(L.m) + " a=" + std::to_string(L.a) +
               " h=" + std::to_string(L.h) + " t=" + std::to_string(L.t) + " g=" + std::to_string(L.g) + "\n" +
               "savitch level: " + std::to_string(cs.savitch_level) + "\n" +
               "skeleton connectives: " + std::to_string(cs.skeleton_connectives) + "\n" +
               "edge formula connectives: " + std::to_string(cs.edge_connectives) + " (psi1 " + std::to_string(cs.psi1) +
               ", psi2 " + std::to_string(cs.psi2) + ", psi3 " + std::to_string(cs.psi3) + ")\n" +
               "total connectives: " + std::to_string(cs.connectives) + "\n" +
               "distinct variables: " + std::to_string(cs.distinct_variables) + "\n";
      if (A) {
        if (A->size() != n) throw UsageError("--size differs from the structure size");
        Structure In = A->vocab().has_builtins() ? *A : throw Error("the input structure must enable built-ins");
        bool run = run_ntm(M, In).accepted;
        o.data["run"] = run;
        o.text += std::string("machine: ") + (run ? "accept" : "reject") + "\n";
        try {
          bool bfs = graph_reaches(config_graph(M, In, limit));
          o.data["graph"] = bfs;
          o.text += std::string("configuration graph: ") + (bfs ? "reachable" : "unreachable") + "\n";
        } catch (const BoundExceeded& e) {
          o.data["graph"] = nullptr;
          o.text += std::string("configuration graph: skipped (") + e.what() + ")\n";
        }
        if (evaluate) {
          bool truth = satisfies(In, cs.sentence);
          o.data["sentence"] = truth;
          o.text += std::string("sentence: ") + (truth ? "true" : "false") + "\n";
        }
      }
    } else if (verb == "encode") {
      std::string bits = encode_binary(need_structure());
      o.data = {{"bits", bits}, {"length", bits.size()}};
      o.text = bits;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  detail::emit(o, format, out);
  return 0;
}

inline int run_command(int argc, char** argv) {
  return run_command(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace fmw::cli
