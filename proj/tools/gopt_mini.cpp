#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "gopt/parser.hpp"
#include "gopt/pipeline.hpp"
#include "json.hpp"

namespace {

using namespace gopt;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitInferenceInvalid = 3;
constexpr int kExitExecution = 4;

struct RunConfig {
  std::string graph_path;
  std::string schema_path;
  bool extract_schema_flag = false;
  std::string stats_path;
  std::string query_path;
  std::string query_inline;
  std::string backend = "into";
  std::string semantics = "homomorphism";
  std::string rules = "all";
  bool no_prune = false;
  bool distributed = false;
  int k = 3;
  std::string out_path;
  std::string stats_out_path;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::string load_query_text(const RunConfig& cfg) {
  if (!cfg.query_inline.empty()) return cfg.query_inline;
  if (!cfg.query_path.empty()) return slurp(cfg.query_path);
  throw CLI::ValidationError("no query given (use --query or --query-text)");
}

Semantics semantics_of(const RunConfig& cfg) {
  if (cfg.semantics == "homomorphism") return Semantics::Homomorphism;
  if (cfg.semantics == "edge_distinct") return Semantics::EdgeDistinct;
  throw CLI::ValidationError("unknown semantics: " + cfg.semantics);
}

std::set<std::string> rules_of(const RunConfig& cfg) {
  if (cfg.rules == "all")
    return std::set<std::string>(kAllRuleNames.begin(), kAllRuleNames.end());
  std::set<std::string> enabled;
  std::stringstream ss(cfg.rules);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    if (std::find(kAllRuleNames.begin(), kAllRuleNames.end(), name) ==
        kAllRuleNames.end())
      throw CLI::ValidationError("unknown rule: " + name);
    enabled.insert(name);
  }
  return enabled;
}

GraphSchema resolve_schema(const RunConfig& cfg, const DataGraph& graph) {
  if (!cfg.schema_path.empty()) return load_schema(cfg.schema_path);
  if (cfg.extract_schema_flag) return extract_schema(graph);
  throw CLI::ValidationError("either --schema or --extract-schema is required");
}

json value_json(const Value& v, const DataGraph& g) {
  struct Visitor {
    const DataGraph& g;
    json operator()(const VertexRef& r) {
      return json{{"kind", "vertex"}, {"id", r.id},
                  {"type", g.vertex(r.id).type}};
    }
    json operator()(const EdgeRef& r) {
      const Edge& e = g.edge(r.id);
      return json{{"kind", "edge"},
                  {"id", r.id},
                  {"src", e.src},
                  {"dst", e.dst},
                  {"type", e.type}};
    }
    json operator()(const PathRef& r) {
      json elems = json::array();
      for (size_t i = 0; i < r.elements.size(); ++i)
        elems.push_back(json{{i % 2 == 0 ? "v" : "e", r.elements[i]}});
      return json{{"kind", "path"}, {"elements", elems}};
    }
    json operator()(const PropertyValue& p) {
      switch (p.kind()) {
        case PropertyValue::Kind::Int: return json(p.as_int());
        case PropertyValue::Kind::Float: return json(p.as_float());
        case PropertyValue::Kind::String: return json(p.as_string());
        case PropertyValue::Kind::Bool: return json(p.as_bool());
        case PropertyValue::Kind::ListKind: {
          json arr = json::array();
          for (const auto& item : p.as_list()) arr.push_back((*this)(item));
          return arr;
        }
      }
      return json(nullptr);
    }
  };
  return std::visit(Visitor{g}, v);
}

int cmd_build_stats(const RunConfig& cfg) {
  DataGraph graph = load_graph(cfg.graph_path);
  Glogue stats = Glogue::build(graph, cfg.k);
  stats.save(cfg.out_path);
  std::cout << "wrote " << stats.patterns().size() << " patterns (k="
            << stats.k() << ") to " << cfg.out_path << "\n";
  return 0;
}

int cmd_infer_types(const RunConfig& cfg) {
  DataGraph graph = load_graph(cfg.graph_path);
  GraphSchema schema = resolve_schema(cfg, graph);
  GirPlan plan = parse_query(load_query_text(cfg), semantics_of(cfg));
  json out = json::array();
  for (const auto& n : plan.nodes) {
    const auto* mp = std::get_if<MatchPatternOp>(&n.data);
    if (!mp) continue;
    InferenceResult r = infer_types(mp->graph, schema);
    if (!is_valid(r)) {
      std::cerr << "INVALID: no valid types for '" << invalid_alias(r)
                << "'\n";
      return kExitInferenceInvalid;
    }
    const PatternGraph& p = valid_pattern(r);
    json verts = json::array();
    for (const auto& v : p.vertices) {
      json types = json::array();
      for (const auto& t : v.types.names()) types.push_back(t);
      verts.push_back(json{{"alias", v.alias}, {"types", types}});
    }
    json edges = json::array();
    for (const auto& e : p.edges) {
      json types = json::array();
      for (const auto& t : e.types.names()) types.push_back(t);
      edges.push_back(json{{"alias", e.alias},
                           {"from", e.from},
                           {"to", e.to},
                           {"dir", to_string(e.dir)},
                           {"types", types}});
    }
    out.push_back(json{{"vertices", verts}, {"edges", edges}});
  }
  write_or_print(cfg.out_path, out.dump(2));
  return 0;
}

PipelineOptions pipeline_options(const RunConfig& cfg,
                                 std::optional<Glogue>& stats_holder) {
  PipelineOptions opt;
  opt.backend = BackendProfile::by_name(cfg.backend);
  if (cfg.distributed) opt.backend.distributed = true;
  opt.enabled_rules = rules_of(cfg);
  opt.pruning = !cfg.no_prune;
  if (!cfg.stats_path.empty()) {
    stats_holder = Glogue::load(cfg.stats_path);
    opt.stats = &*stats_holder;
  } else {
    std::cerr << "warning: no --stats given; skipping cost-based "
                 "optimization (heuristic rules only)\n";
  }
  return opt;
}

int cmd_explain(const RunConfig& cfg) {
  DataGraph graph = load_graph(cfg.graph_path);
  GraphSchema schema = resolve_schema(cfg, graph);
  GirPlan plan = parse_query(load_query_text(cfg), semantics_of(cfg));
  std::optional<Glogue> stats;
  PipelineOptions opt = pipeline_options(cfg, stats);
  RunOutcome out = plan_gir(plan, graph, schema, opt);
  json report;
  report["rule_trace"] = out.rule_trace;
  if (out.unsatisfiable) {
    report["unsatisfiable"] = true;
    report["diagnostic"] = out.diagnostic;
    write_or_print(cfg.out_path, report.dump(2));
    return kExitInferenceInvalid;
  }
  report["physical_plan"] = json::parse(phys_plan_to_json(out.physical));
  report["logical_plan"] = json::parse(plan_to_json(out.optimized_logical));
  write_or_print(cfg.out_path, report.dump(2));
  return 0;
}

int cmd_run(const RunConfig& cfg) {
  DataGraph graph = load_graph(cfg.graph_path);
  GraphSchema schema = resolve_schema(cfg, graph);
  GirPlan plan = parse_query(load_query_text(cfg), semantics_of(cfg));
  std::optional<Glogue> stats;
  PipelineOptions opt = pipeline_options(cfg, stats);
  RunOutcome out = run_gir(plan, graph, schema, opt);
  if (out.unsatisfiable) {
    std::cerr << out.diagnostic << "\n";
    write_or_print(cfg.out_path, "");
    return kExitInferenceInvalid;
  }
  std::ostringstream lines;
  for (const auto& rec : out.results) {
    json row = json::object();
    for (const auto& [alias, value] : rec)
      row[alias] = value_json(value, graph);
    lines << row.dump() << "\n";
  }
  write_or_print(cfg.out_path, lines.str());
  if (!cfg.stats_out_path.empty())
    write_or_print(cfg.stats_out_path, out.stats.to_json());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-native query optimization toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--graph", cfg.graph_path, "graph JSON file")->required();
    sub->add_option("--schema", cfg.schema_path, "schema JSON file");
    sub->add_flag("--extract-schema", cfg.extract_schema_flag,
                  "derive the schema from the data graph");
    sub->add_option("--query", cfg.query_path, "query file");
    sub->add_option("--query-text", cfg.query_inline, "inline query text");
    sub->add_option("--stats", cfg.stats_path, "precomputed stats file");
    sub->add_option("--backend", cfg.backend,
                    "backend profile: into|intersect");
    sub->add_option("--semantics", cfg.semantics,
                    "homomorphism|edge_distinct");
    sub->add_option("--rules", cfg.rules,
                    "comma list of enabled rules, or 'all'");
    sub->add_flag("--no-prune", cfg.no_prune,
                  "disable branch-and-bound pruning");
    sub->add_flag("--distributed", cfg.distributed,
                  "treat the backend as distributed");
    sub->add_option("--out", cfg.out_path, "output file (default stdout)");
  };

  CLI::App* build =
      app.add_subcommand("build-stats", "precompute pattern statistics");
  build->add_option("--graph", cfg.graph_path, "graph JSON file")->required();
  build->add_option("--k", cfg.k, "max pattern vertices (2..4)");
  build->add_option("--out", cfg.out_path, "stats output file")->required();

  CLI::App* infer =
      app.add_subcommand("infer-types", "type inference for a query");
  add_common(infer);

  CLI::App* explain =
      app.add_subcommand("explain", "optimize and print the plan");
  add_common(explain);

  CLI::App* run = app.add_subcommand("run", "optimize and execute");
  add_common(run);
  run->add_option("--stats-out", cfg.stats_out_path,
                  "execution statistics output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_build_stats(cfg);
    if (infer->parsed()) return cmd_infer_types(cfg);
    if (explain->parsed()) return cmd_explain(cfg);
    if (run->parsed()) return cmd_run(cfg);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return kExitParse;
  } catch (const GraphError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitParse;
  } catch (const StatsError& e) {
    std::cerr << "stats error: " << e.what() << "\n";
    return kExitParse;
  } catch (const PlanError& e) {
    std::cerr << "plan error: " << e.what() << "\n";
    return kExitExecution;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitExecution;
  }
}
