#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "krail/error.hpp"
#include "krail/eval.hpp"
#include "krail/graph.hpp"
#include "krail/idtable.hpp"
#include "krail/json_codec.hpp"
#include "krail/service.hpp"
#include "krail/session.hpp"

namespace {

using namespace krail;

struct ProviderFlags {
  std::string kind = "mock";
  std::vector<std::string> fixtures;
  std::string endpoint;
  std::string model;
  double rpm = 60.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--provider", kind, "Model provider")->check(CLI::IsMember({"mock", "live"}));
    cmd->add_option("--fixtures", fixtures, "Mock fixture files (JSONL)")->check(CLI::ExistingFile);
    cmd->add_option("--endpoint", endpoint, "Chat-completions endpoint for the live provider");
    cmd->add_option("--model", model, "Model name for the live provider");
    cmd->add_option("--rpm", rpm, "Live provider request budget per minute");
  }

  std::shared_ptr<Provider> make() const {
    ProviderSettings s;
    s.kind = kind;
    for (const auto& f : fixtures) s.fixture_files.emplace_back(f);
    s.live.endpoint = endpoint;
    s.live.model = model;
    s.live.requests_per_minute = rpm;
    return make_provider(s);
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FormatError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TableId table_arg(const std::string& code) {
  auto t = parse_table_id(code);
  if (!t) throw Error(ErrorCode::InvalidArgument, "unknown table '" + code + "' (expected SF, IAR or TC)");
  return *t;
}

void print_resolution(const ReviewSession& s, const KnowledgeGraph& graph) {
  const auto& a = *s.resolved_attrs;
  std::cout << "Attributes (rank 1):\n"
            << "  PIF:         " << a.pif.to_string() << '\n'
            << "  CFM:         " << render_cfm_set(a.cfms) << '\n'
            << "  Task:        " << a.task << '\n'
            << "  PIF measure: " << a.pif_measure << '\n'
            << "  Other PIFs:  " << a.other_pifs << "\n\n";
  std::cout << "Ranked matches:\n";
  std::size_t rank = 0;
  for (const auto& m : s.resolution->ranked_matches) {
    const auto* e = graph.store().find(m.entry_id);
    char score[32];
    std::snprintf(score, sizeof score, "%.4f", m.score);
    std::cout << "  " << ++rank << ". " << m.entry_id << "  score " << score << "  rate "
              << render_error_rate(m.error_rate) << "  " << (e ? e->pif.to_string() : "") << '\n';
  }
  std::cout << "\nbase HEP: " << render_error_rate(s.resolution->base_hep) << '\n';
}

int cmd_run(const std::string& data, const std::string& case_file, const std::string& table, int shots,
            bool ablation, const ProviderFlags& pf, const std::string& export_path) {
  std::string stage = "setup";
  try {
    auto graph = build_graph(std::make_shared<const EntryStore>(load_idtable_dir(data)));
    auto provider = pf.make();
    stage = "create";
    auto s = create_session({read_file(case_file), table_arg(table)}, ShotConfig::of(shots), ablation);
    std::cout << "Session " << s.session_id << " (" << table_code(s.case_input.table) << ", " << shots
              << "-shot)\n";
    if (ablation) {
      std::cout << "Part A skipped (ablation): no agent decomposition\n";
    } else {
      stage = "decompose";
      advance_decompose(s, *provider);
      std::cout << "Part A: " << s.reports->size() << " agent reports\n";
    }
    stage = "attribute";
    advance_attribute(s, graph, *provider);
    stage = "resolve";
    advance_resolve(s, graph);
    std::cout << '\n';
    print_resolution(s, graph);
    if (!export_path.empty()) {
      std::ofstream out(export_path, std::ios::binary);
      out << session_export(s).dump(2) << '\n';
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "krail run: failed at stage " << stage << ": " << e.what() << '\n';
    if (!e.raw_text().empty()) std::cerr << "--- raw model text ---\n" << e.raw_text() << '\n';
    return 1;
  }
}

int cmd_eval(const std::string& data, const std::string& dataset_path, int shots, std::uint64_t seed,
             std::size_t resamples, bool ablation, bool compare, bool timings, const ProviderFlags& pf,
             const std::vector<std::string>& other_fixtures, const std::string& out_path) {
  try {
    auto graph = build_graph(std::make_shared<const EntryStore>(load_idtable_dir(data)));
    const auto dataset = load_eval_dataset_file(dataset_path, graph.store());
    auto provider = pf.make();
    EvalConfig cfg;
    cfg.shots = ShotConfig::of(shots);
    cfg.seed = seed;
    cfg.n_resamples = resamples;
    cfg.ablation = ablation;
    std::optional<TableId> table;
    if (!dataset.empty()) table = dataset.front().case_input.table;

    const auto summary = run_evaluation(dataset, graph, *provider, cfg);
    std::cout << render_summary(summary, table);
    auto doc = summary_to_json(summary, timings);

    if (compare) {
      auto alt = cfg;
      alt.ablation = !cfg.ablation;
      auto other_pf = pf;
      if (!other_fixtures.empty()) other_pf.fixtures = other_fixtures;
      const auto other = run_evaluation(dataset, graph, *other_pf.make(), alt);
      const auto& base = cfg.ablation ? other : summary;
      const auto& abl = cfg.ablation ? summary : other;
      const auto cmp = compare_outcomes(base.outcomes, abl.outcomes);
      std::cout << "\nWith agents vs without (better / worse / unchanged):\n";
      nlohmann::json parts = nlohmann::json::object();
      for (Dimension d : kAllDimensions) {
        const auto& p = cmp.dimension(d);
        std::cout << "  " << dimension_title(d) << ": " << p.better << " / " << p.worse << " / " << p.unchanged
                  << '\n';
        parts[std::string(dimension_key(d))] = {{"better", p.better}, {"worse", p.worse}, {"unchanged", p.unchanged}};
      }
      doc["ablation_comparison"] = parts;
    }
    if (!out_path.empty()) {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw Error(ErrorCode::FormatError, "cannot write " + out_path);
      out << doc.dump(2) << '\n';
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "krail eval: " << e.what() << '\n';
    return 1;
  }
}

int cmd_ingest_check(const std::vector<std::string>& paths, bool triples) {
  int status = 0;
  for (const auto& p : paths) {
    try {
      auto store = std::make_shared<const EntryStore>(load_idtable_dir(p));
      std::cout << p << ": " << store->size() << " entries\n";
      for (TableId t : store->tables()) {
        std::cout << "  " << table_code(t) << " (" << table_title(t) << "): " << store->by_table(t).size() << '\n';
      }
      if (triples) std::cout << export_triples(build_graph(store));
    } catch (const Error& e) {
      std::cerr << p << ": " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(ServiceConfig cfg, int shots, const ProviderFlags& pf) {
  try {
    cfg.default_shots = ShotConfig::of(shots);
    Service service(cfg, pf.make());
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "krail: serving " << service.graph().store().size() << " entries on " << cfg.host << ':' << cfg.port
              << " (" << service.session_count() << " sessions restored)" << std::endl;
    service.listen();
    g_service = nullptr;
    return 0;
  } catch (const Error& e) {
    std::cerr << "krail serve: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Base HEP estimation from scenario text and IDHEAS data tables"};
  app.require_subcommand(1);
  std::string data = "data";

  ProviderFlags serve_pf;
  ServiceConfig serve_cfg;
  int serve_shots = 5;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", serve_cfg.host);
  serve->add_option("--port", serve_cfg.port);
  serve->add_option("--data", data, "IDTABLE file or directory");
  serve->add_option("--journal", serve_cfg.journal_dir, "Session journal directory");
  serve->add_option("--shots", serve_shots)->check(CLI::IsMember({0, 1, 3, 5}));
  serve->add_flag("--parallel-agents", serve_cfg.parallel_agents, "Run the four agents concurrently");
  serve_pf.add_to(serve);

  ProviderFlags run_pf;
  std::string case_file, table = "SF", export_path;
  int run_shots = 5;
  bool run_ablation = false;
  auto* run = app.add_subcommand("run", "Estimate one case end to end, accepting the model's attributes");
  run->add_option("--case", case_file, "Case text file")->required()->check(CLI::ExistingFile);
  run->add_option("--table", table, "SF, IAR or TC");
  run->add_option("--data", data, "IDTABLE file or directory");
  run->add_option("--shots", run_shots)->check(CLI::IsMember({0, 1, 3, 5}));
  run->add_flag("--ablation", run_ablation, "Skip the agent decomposition");
  run->add_option("--export", export_path, "Write the session export as JSON");
  run_pf.add_to(run);

  ProviderFlags eval_pf;
  std::string dataset, out_path;
  int eval_shots = 5;
  std::uint64_t seed = 0;
  std::size_t resamples = kDefaultResamples;
  bool eval_ablation = false, compare = false, timings = false;
  auto* eval = app.add_subcommand("eval", "Score a labelled dataset with the top-5 metric");
  eval->add_option("--dataset", dataset, "Evaluation dataset CSV")->required();
  eval->add_option("--data", data, "IDTABLE file or directory");
  eval->add_option("--shots", eval_shots)->check(CLI::IsMember({0, 1, 3, 5}));
  eval->add_option("--seed", seed);
  eval->add_option("--resamples", resamples)->check(CLI::PositiveNumber);
  eval->add_flag("--ablation", eval_ablation, "Skip the agent decomposition");
  std::vector<std::string> other_fixtures;
  eval->add_flag("--compare-ablation", compare, "Also run the opposite configuration and compare per case");
  eval->add_option("--compare-fixtures", other_fixtures, "Fixture files for the comparison run")
      ->check(CLI::ExistingFile);
  eval->add_flag("--timings", timings, "Include wall-clock timings in the summary file");
  eval->add_option("--out", out_path, "Summary JSON path");
  eval_pf.add_to(eval);

  std::vector<std::string> ingest_paths;
  bool triples = false;
  auto* ingest = app.add_subcommand("ingest-check", "Validate IDTABLE files");
  ingest->add_option("paths", ingest_paths, "Files or directories")->required();
  ingest->add_flag("--triples", triples, "Print the graph as triples");

  CLI11_PARSE(app, argc, argv);

  if (*serve) {
    serve_cfg.data_dir = data;
    return cmd_serve(serve_cfg, serve_shots, serve_pf);
  }
  if (*run) return cmd_run(data, case_file, table, run_shots, run_ablation, run_pf, export_path);
  if (*eval) {
    return cmd_eval(data, dataset, eval_shots, seed, resamples, eval_ablation, compare, timings, eval_pf, other_fixtures,
                    out_path);
  }
  return cmd_ingest_check(ingest_paths, triples);
}
