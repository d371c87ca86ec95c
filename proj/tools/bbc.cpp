// bbc: command-line front door for the BBC process-calculus toolkit.
//
// Exit codes: 0 success, 1 domain negative (type error, distinguished
// networks), 2 usage or parse error, 3 inconclusive.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "bbc/bbc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw bbc::BbcError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bbc::Program load(const std::string& path) { return bbc::parse_program(slurp(path)); }

std::size_t env_or(const char* var, std::size_t fallback) {
  if (const char* v = std::getenv(var)) return std::stoull(v);
  return fallback;
}

struct CommonOpts {
  std::string mode = "default";
  std::size_t maxStates = env_or("BBC_MAX_STATES", 50000);
  std::size_t unfoldBudget = env_or("BBC_UNFOLD_BUDGET", 32);
  std::size_t maxSteps = env_or("BBC_MAX_STEPS", 10000);
  std::string format = "text";
  std::string outPath;

  bbc::Mode run_mode() const {
    return mode == "exhaustive" ? bbc::Mode::Exhaustive : bbc::Mode::Default;
  }
  bbc::Limits limits() const {
    bbc::Limits l;
    l.maxStates = maxStates;
    l.unfoldBudget = unfoldBudget;
    l.maxSteps = maxSteps;
    return l;
  }
  std::ostream& out(std::ofstream& file) const {
    if (outPath.empty()) return std::cout;
    file.open(outPath);
    if (!file.good()) throw bbc::BbcError("cannot write " + outPath);
    return file;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool withFormat = true) {
  cmd->add_option("--mode", o.mode, "successor mode: default | exhaustive")
      ->check(CLI::IsMember({"default", "exhaustive"}));
  cmd->add_option("--max-states", o.maxStates, "state-graph size limit");
  cmd->add_option("--unfold-budget", o.unfoldBudget, "agent unfoldings per expansion");
  if (withFormat)
    cmd->add_option("--format", o.format, "output format: text | json | dot")
        ->check(CLI::IsMember({"text", "json", "dot"}));
  cmd->add_option("--out", o.outPath, "write machine output to a file");
}

void print_nf(std::ostream& os, const bbc::NormalForm& nf) {
  os << "restrictions:";
  if (nf.restrictions.empty()) os << " (none)";
  os << "\n";
  for (auto& r : nf.restrictions) {
    os << "  " << r.name.id << " " << bbc::pretty_print(r.bound);
    if (r.type) os << " : " << bbc::pretty_print(*r.type);
    os << "\n";
  }
  os << "connectivity:";
  if (nf.conn.pairs.empty()) os << " (none)";
  os << "\n";
  for (auto& [l, m] : nf.conn.pairs) os << "  " << l.id << " -> " << m.id << "\n";
  os << "located:\n";
  for (auto& [l, p] : nf.located) os << "  " << l.id << "::[ " << bbc::pretty_print(p) << " ]\n";
}

int cmd_parse(const std::string& path, const CommonOpts& o) {
  bbc::Program p = load(path);
  std::ofstream file;
  o.out(file) << bbc::pretty_print(p);
  return kExitOk;
}

int cmd_normalize(const std::string& path, const CommonOpts& o, bool canonical) {
  bbc::Program p = load(path);
  bbc::BuiltinRegistry reg = bbc::build_registry(p);
  bbc::NormalForm nf = canonical ? bbc::canonical_form(p.net, reg) : bbc::normalize(p.net);
  std::ofstream file;
  std::ostream& os = o.out(file);
  if (o.format == "json") {
    nlohmann::json j;
    j["network"] = bbc::nf_key(nf);
    os << j.dump(2) << "\n";
  } else {
    print_nf(os, nf);
  }
  return kExitOk;
}

int cmd_step(const std::string& path, const CommonOpts& o) {
  bbc::Program p = load(path);
  bbc::BuiltinRegistry reg = bbc::build_registry(p);
  bbc::SuccessorSet succ =
      bbc::successors(bbc::initial_state(p, reg), p, reg, o.run_mode(), o.unfoldBudget);
  std::ofstream file;
  std::ostream& os = o.out(file);
  if (o.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (auto& [label, nf] : succ.list) {
      nlohmann::json e = bbc::to_json(label);
      e["state"] = bbc::nf_key(nf);
      j.push_back(std::move(e));
    }
    os << j.dump(2) << "\n";
  } else {
    if (succ.list.empty()) os << "stuck: no successors\n";
    for (auto& [label, nf] : succ.list)
      os << label.str() << "\n    -> " << bbc::nf_key(nf) << "\n";
  }
  return kExitOk;
}

int cmd_run(const std::string& path, const CommonOpts& o, std::uint64_t seed) {
  bbc::Program p = load(path);
  bbc::BuiltinRegistry reg = bbc::build_registry(p);
  auto trace = bbc::run(p, reg, seed, o.maxSteps, o.run_mode(), o.unfoldBudget);
  std::ofstream file;
  std::ostream& os = o.out(file);
  if (o.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (auto& step : trace) {
      nlohmann::json e = bbc::to_json(step.label);
      e["state"] = bbc::nf_key(step.state);
      j.push_back(std::move(e));
    }
    os << j.dump(2) << "\n";
  } else {
    os << bbc::nf_key(bbc::initial_state(p, reg)) << "\n";
    for (auto& step : trace)
      os << "  --[" << step.label.str() << "]-->\n" << bbc::nf_key(step.state) << "\n";
    os << (trace.size() < o.maxSteps ? "stuck" : "step limit reached") << " after "
       << trace.size() << " step(s)\n";
  }
  return kExitOk;
}

int cmd_states(const std::string& path, const CommonOpts& o) {
  bbc::Program p = load(path);
  bbc::BuiltinRegistry reg = bbc::build_registry(p);
  bbc::StateGraph g = bbc::state_graph(p, reg, o.limits(), o.run_mode());
  std::ofstream file;
  std::ostream& os = o.out(file);
  if (o.format == "json") {
    os << bbc::to_json(g).dump(2) << "\n";
  } else if (o.format == "dot") {
    os << bbc::to_dot(g);
  } else {
    os << g.states.size() << " state(s), " << g.edges.size() << " edge(s)"
       << (g.truncated ? ", truncated" : "") << "\n";
    for (std::size_t i = 0; i < g.states.size(); ++i)
      os << "s" << i << (static_cast<int>(i) == g.initial ? " (initial)" : "") << ": "
         << g.keys[i] << "\n";
    for (auto& e : g.edges)
      os << "s" << e.from << " --[" << e.label.str() << "]--> s" << e.to << "\n";
  }
  return kExitOk;
}

int cmd_typecheck(const std::string& path) {
  bbc::Program p = load(path);
  try {
    bbc::check_program(p);
  } catch (const bbc::TypeError& e) {
    std::cerr << "type error: " << e.what() << "\n";
    return kExitNegative;
  }
  std::cout << "well-typed\n";
  return kExitOk;
}

int cmd_bisim(const std::string& left, const std::string& right, const CommonOpts& o,
              const std::string& barbMode, const std::string& tracePath) {
  bbc::Program p1 = load(left);
  bbc::Program p2 = load(right);
  bbc::BarbMode bm = barbMode == "weak" ? bbc::BarbMode::Weak : bbc::BarbMode::Strict;
  // Bisimulation always explores the full successor relation.
  bbc::BisimVerdict v = bbc::weak_barbed_bisim(p1, p2, o.limits(), bm, bbc::Mode::Exhaustive);

  std::ofstream file;
  std::ostream& os = o.out(file);
  if (o.format == "json") {
    os << bbc::to_json(v).dump(2) << "\n";
  } else {
    switch (v.kind) {
      case bbc::BisimVerdict::Kind::Bisimilar:
        os << "Bisimilar (" << v.witness.size() << " witness pairs)\n";
        break;
      case bbc::BisimVerdict::Kind::Distinguished:
        os << "Distinguished: " << v.reason << "\n";
        for (auto& s : v.trace)
          os << "  " << (s.side == 0 ? "left " : "right") << " " << s.label.str() << "\n";
        break;
      case bbc::BisimVerdict::Kind::Inconclusive:
        os << "Inconclusive: " << v.reason << "\n";
        break;
    }
  }
  if (!tracePath.empty() && v.kind == bbc::BisimVerdict::Kind::Distinguished) {
    std::ofstream tf(tracePath);
    if (!tf.good()) throw bbc::BbcError("cannot write " + tracePath);
    tf << bbc::to_json(v).dump(2) << "\n";
  }
  switch (v.kind) {
    case bbc::BisimVerdict::Kind::Bisimilar:
      return kExitOk;
    case bbc::BisimVerdict::Kind::Distinguished:
      return kExitNegative;
    default:
      return kExitInconclusive;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BBC process-calculus toolkit"};
  app.require_subcommand(1);

  std::string file1, file2;
  CommonOpts opts;
  std::uint64_t seed = 0;
  bool canonical = false;
  std::string barbMode = "strict";
  std::string tracePath;

  auto* cParse = app.add_subcommand("parse", "validate a program and pretty-print it");
  cParse->add_option("file", file1)->required();
  add_common(cParse, opts, false);

  auto* cNorm = app.add_subcommand("normalize", "print the normal form of the network");
  cNorm->add_option("file", file1)->required();
  cNorm->add_flag("--canonical", canonical, "fully canonicalise (congruence representative)");
  add_common(cNorm, opts);

  auto* cStep = app.add_subcommand("step", "list the successors of the initial network");
  cStep->add_option("file", file1)->required();
  add_common(cStep, opts);

  auto* cRun = app.add_subcommand("run", "random execution with a reproducible seed");
  cRun->add_option("file", file1)->required();
  cRun->add_option("--seed", seed, "random seed");
  cRun->add_option("--max-steps", opts.maxSteps, "trace length limit");
  add_common(cRun, opts);

  auto* cStates = app.add_subcommand("states", "build the bounded state graph");
  cStates->add_option("file", file1)->required();
  add_common(cStates, opts);

  auto* cBisim = app.add_subcommand("bisim", "decide weak barbed bisimilarity of two programs");
  cBisim->add_option("left", file1)->required();
  cBisim->add_option("right", file2)->required();
  cBisim->add_option("--barb-mode", barbMode, "barb matching: strict | weak")
      ->check(CLI::IsMember({"strict", "weak"}));
  cBisim->add_option("--trace-out", tracePath, "write a replayable distinguishing trace (JSON)");
  add_common(cBisim, opts);

  auto* cType = app.add_subcommand("typecheck", "check the program under its natural environment");
  cType->add_option("file", file1)->required();

  auto* cGen = app.add_subcommand("gen", "emit a generated protocol as a .bbc program");
  cGen->require_subcommand(1);

  std::size_t depth = 0;
  std::string branching = "2";
  std::string rounds = "once";
  std::string selection = "min";
  std::string leaf = "echo";
  bool flat = false;
  std::size_t electN = 2, electK = 1;
  std::string genOut;

  auto* cHier = cGen->add_subcommand("hierarchy", "n-level collect-and-broadcast protocol");
  cHier->add_option("--depth", depth, "intermediate central levels (0 = leaves under the root)");
  cHier->add_option("--branching", branching, "comma-separated fan-outs, root first (depth+1)");
  cHier->add_option("--rounds", rounds)->check(CLI::IsMember({"once", "repeat"}));
  cHier->add_option("--selection", selection, "selector name (shipped: min)");
  cHier->add_option("--leaf", leaf, "leaf behaviour after the decision")
      ->check(CLI::IsMember({"echo", "inert"}));
  cHier->add_flag("--flatten", flat, "emit the flattened counterpart instead");
  cHier->add_option("--out", genOut, "output file (default stdout)");

  auto* cElect = cGen->add_subcommand("electoral", "leader election on a common channel");
  cElect->add_option("--n", electN, "number of participants (>= 2)");
  cElect->add_option("--rounds-k", electK, "collection rounds per participant");
  cElect->add_option("--out", genOut, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cParse->parsed()) return cmd_parse(file1, opts);
    if (cNorm->parsed()) return cmd_normalize(file1, opts, canonical);
    if (cStep->parsed()) return cmd_step(file1, opts);
    if (cRun->parsed()) return cmd_run(file1, opts, seed);
    if (cStates->parsed()) return cmd_states(file1, opts);
    if (cType->parsed()) return cmd_typecheck(file1);
    if (cBisim->parsed()) return cmd_bisim(file1, file2, opts, barbMode, tracePath);
    if (cGen->parsed()) {
      bbc::Program p;
      if (cHier->parsed()) {
        bbc::HierarchySpec spec;
        spec.depth = depth;
        spec.branching.clear();
        std::stringstream ss(branching);
        for (std::string tok; std::getline(ss, tok, ',');)
          spec.branching.push_back(std::stoull(tok));
        spec.rounds = rounds == "repeat" ? bbc::Rounds::Repeat : bbc::Rounds::Once;
        spec.selection = bbc::Name(selection);
        spec.leafBody = leaf == "inert" ? bbc::LeafBody::Inert : bbc::LeafBody::Echo;
        p = flat ? bbc::flatten(spec) : bbc::gen_hierarchical(spec);
      } else {
        bbc::ElectoralSpec spec;
        spec.n = electN;
        spec.roundsK = electK;
        p = bbc::gen_electoral(spec);
      }
      if (genOut.empty()) {
        std::cout << bbc::pretty_print(p);
      } else {
        std::ofstream out(genOut);
        if (!out.good()) throw bbc::BbcError("cannot write " + genOut);
        out << bbc::pretty_print(p);
      }
      return kExitOk;
    }
  } catch (const bbc::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const bbc::TypeError& e) {
    std::cerr << "type error: " << e.what() << "\n";
    return kExitNegative;
  } catch (const bbc::BbcError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
