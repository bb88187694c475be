// Command-line front end: solve-qnp, check, loop, eval, report.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "absforge/error.hpp"
#include "absforge/harness.hpp"
#include "absforge/pipeline.hpp"
#include "absforge/proposer.hpp"
#include "absforge/solver.hpp"

namespace {

using namespace absforge;

constexpr int kExitInputError = 4;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

struct Problem {
  std::shared_ptr<const pddl::Domain> domain;
  std::vector<pddl::Instance> instances;
};

Problem load(const std::string& domain, const std::vector<std::string>& instances) {
  Problem p;
  p.domain = std::make_shared<const pddl::Domain>(pddl::parse_domain(read_file(domain), domain));
  for (const auto& i : instances) p.instances.push_back(pddl::parse_instance(read_file(i), p.domain, i));
  return p;
}

/// Parses and validates a document; prints the DOC_INVALID report on failure.
std::optional<refinement::Abstraction> load_abstraction(const std::string& path, const pddl::Domain& dom,
                                                        bool as_json, std::string* doc_text) {
  const std::string text = read_file(path);
  pipeline::DebugReport report;
  try {
    auto doc = proposer::parse_abstraction_doc(text, &dom);
    if (doc_text) *doc_text = doc.serialize();
    auto v = proposer::validate_doc(doc, dom);
    if (auto* a = std::get_if<refinement::Abstraction>(&v)) return std::move(*a);
    report = std::get<pipeline::DebugReport>(v);
  } catch (const proposer::DocError& e) {
    report.stage = pipeline::Stage::DocInvalid;
    report.detail = "the file is not a usable abstraction document";
    report.violations.push_back(e.what());
  }
  if (as_json) {
    std::cout << nlohmann::json{{"outcome", "rejected"}, {"report", report.to_json()}}.dump(2) << "\n";
  } else {
    std::cout << "rejected: " << pipeline::stage_name(report.stage) << "\n";
    for (const auto& v : report.violations) std::cout << "  " << v << "\n";
  }
  return std::nullopt;
}

void print_report(const pipeline::DebugReport& r) {
  std::cout << "rejected: " << pipeline::stage_name(r.stage);
  if (!r.instance.empty()) std::cout << " on " << r.instance;
  std::cout << "\n" << r.to_json().dump(2) << "\n";
}

int cmd_solve(const std::string& file, std::size_t max_nodes, long time_ms) {
  auto p = qnp::parse_qnp(read_file(file), file);
  qnp::SolverBudget budget{max_nodes, std::chrono::milliseconds(time_ms)};
  auto out = qnp::solve(p, budget);
  if (auto* s = std::get_if<qnp::Solved>(&out)) {
    std::cout << qnp::format_policy(s->policy, p);
    return 0;
  }
  if (std::holds_alternative<qnp::Unsolvable>(out)) {
    std::cout << "UNSOLVABLE\n";
    return 1;
  }
  std::cout << "RESOURCE-LIMIT\n";
  std::cerr << std::get<qnp::SolverResourceLimit>(out).reason << "\n";
  return 2;
}

int cmd_check(const std::string& abstraction, const std::string& domain, const std::vector<std::string>& instances,
              bool as_json, bool show_prompt) {
  auto prob = load(domain, instances);
  std::string doc_text;
  auto a = load_abstraction(abstraction, *prob.domain, as_json, &doc_text);
  if (!a) return 1;
  auto outcome = pipeline::run_pipeline(*a, prob.instances);
  if (auto* ok = std::get_if<pipeline::Accepted>(&outcome)) {
    if (as_json) {
      nlohmann::json plans = nlohmann::json::array();
      for (std::size_t i = 0; i < ok->plans.size(); ++i) {
        std::vector<std::string> steps;
        for (const auto& s : ok->plans[i]) steps.push_back(pddl::format_action(prob.instances[i], s));
        plans.push_back({{"instance", prob.instances[i].name()}, {"plan", steps}});
      }
      std::cout << nlohmann::json{{"outcome", "accepted"}, {"policy", qnp::format_policy(ok->policy, a->qnp)},
                                  {"plans", plans}}
                       .dump(2)
                << "\n";
    } else {
      std::cout << "accepted\npolicy:\n" << qnp::format_policy(ok->policy, a->qnp);
      for (std::size_t i = 0; i < ok->plans.size(); ++i) {
        std::cout << "plan for " << prob.instances[i].name() << ":\n";
        for (const auto& s : ok->plans[i]) std::cout << "  " << pddl::format_action(prob.instances[i], s) << "\n";
      }
    }
    return 0;
  }
  const auto& rej = std::get<pipeline::Rejected>(outcome);
  if (as_json) {
    std::cout << nlohmann::json{{"outcome", "rejected"}, {"report", rej.report.to_json()}}.dump(2) << "\n";
  } else {
    print_report(rej.report);
  }
  if (show_prompt) {
    pipeline::PromptContext ctx;
    ctx.domain_pddl = prob.domain->source;
    ctx.abstraction = doc_text;
    ctx.qnp_text = qnp::write_qnp(a->qnp);
    if (rej.policy) ctx.policy_text = qnp::format_policy(*rej.policy, a->qnp);
    for (const auto& inst : prob.instances) {
      if (inst.name() == rej.report.instance) ctx.instance_pddl = inst.source();
    }
    std::cout << "\n" << pipeline::render_prompt(rej.report, ctx);
  }
  return 1;
}

int cmd_eval(const std::string& abstraction, const std::string& domain, const std::vector<std::string>& instances,
             bool as_json) {
  auto prob = load(domain, instances);
  auto a = load_abstraction(abstraction, *prob.domain, as_json, nullptr);
  if (!a) return 1;
  auto asc = pipeline::run_asc(*a);
  if (auto* r = std::get_if<pipeline::DebugReport>(&asc)) {
    print_report(*r);
    return 1;
  }
  const auto& pi = std::get<qnp::Policy>(asc);
  auto res = harness::evaluate_abstraction(*a, pi, prob.instances);
  if (as_json) {
    nlohmann::json j;
    j["coverage"] = res.coverage ? nlohmann::json(*res.coverage) : nlohmann::json(nullptr);
    j["solved"] = res.solved;
    j["total"] = res.instances.size();
    j["instances"] = nlohmann::json::array();
    for (const auto& r : res.instances) {
      j["instances"].push_back({{"instance", r.instance}, {"solved", r.solved}, {"plan_length", r.plan.size()},
                                {"failure", r.failure}});
    }
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& r : res.instances) {
      std::cout << r.instance << ": "
                << (r.solved ? "solved in " + std::to_string(r.plan.size()) + " steps" : "failed: " + r.failure)
                << "\n";
    }
    if (res.coverage) {
      std::cout << "coverage " << res.solved << "/" << res.instances.size() << " = " << *res.coverage << "\n";
    } else {
      std::cout << "coverage n/a (empty evaluation set)\n";
    }
  }
  return 0;
}

struct LoopFlags {
  std::string config;
  std::string domain;
  std::vector<std::string> training;
  std::vector<std::string> evaluation;
  std::vector<std::string> script;
  std::optional<std::size_t> max_iterations;
  std::string split;
  std::string label;
  std::string output;
};

int cmd_loop(const LoopFlags& f) {
  harness::RunConfig cfg;
  if (!f.config.empty()) {
    auto j = nlohmann::json::parse(read_file(f.config), nullptr, false);
    if (j.is_discarded()) throw InputError(f.config + " is not valid JSON");
    cfg = harness::RunConfig::from_json(j, std::filesystem::path(f.config).parent_path());
  }
  if (!f.domain.empty()) cfg.domain = f.domain;
  if (!f.training.empty()) cfg.training = f.training;
  if (!f.evaluation.empty()) cfg.evaluation = f.evaluation;
  if (!f.script.empty()) {
    cfg.proposer.kind = proposer::ProposerConfig::Kind::File;
    cfg.proposer.files = f.script;
  }
  if (f.max_iterations) cfg.max_iterations = *f.max_iterations;
  if (!f.split.empty()) cfg.set_training_split(f.split);
  if (!f.label.empty()) cfg.label = f.label;
  if (!f.output.empty()) cfg.output_dir = f.output;
  if (cfg.domain.empty() || cfg.training.empty()) throw InputError("loop needs a domain and training instances");

  auto rec = harness::run_loop(cfg);
  const std::string text = rec.serialize();
  if (cfg.output_dir.empty()) {
    std::cout << text;
  } else {
    auto path = std::filesystem::path(cfg.output_dir) / "run_record.json";
    write_file(path, text);
    std::cout << "wrote " << path.string() << "\n";
  }
  std::cerr << (rec.accepted ? "accepted at iteration " + std::to_string(*rec.accepted_iteration)
                             : "no abstraction accepted after " + std::to_string(rec.iterations.size()) + " proposal(s)")
            << (rec.error.empty() ? "" : " (" + rec.error + ")") << "\n";
  return rec.accepted ? 0 : 3;
}

int cmd_report(const std::vector<std::string>& files, const std::string& csv_dir) {
  std::vector<harness::RunRecord> records;
  for (const auto& f : files) {
    auto j = nlohmann::json::parse(read_file(f), nullptr, false);
    if (j.is_discarded()) throw InputError(f + " is not valid JSON");
    try {
      records.push_back(harness::RunRecord::from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(f + " is not a run record: " + e.what());
    }
  }
  auto t = harness::report(records);
  for (const auto& w : t.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "Coverage\n" << t.coverage_text << "\nDetected errors\n" << t.stages_text;
  if (!csv_dir.empty()) {
    write_file(std::filesystem::path(csv_dir) / "coverage.csv", t.coverage_csv);
    write_file(std::filesystem::path(csv_dir) / "stages.csv", t.stages_csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify and repair QNP abstractions of PDDL domains"};
  app.require_subcommand(1);

  std::string qnp_file;
  std::size_t max_nodes = qnp::SolverBudget{}.max_nodes;
  long time_ms = 10'000;
  auto* solve = app.add_subcommand("solve-qnp", "Solve a QNP given in the .qnp text format");
  solve->add_option("file", qnp_file, "QNP file")->required();
  solve->add_option("--max-nodes", max_nodes, "Search node budget");
  solve->add_option("--time-limit-ms", time_ms, "Search time budget in milliseconds");

  std::string abstraction, domain;
  std::vector<std::string> instances;
  bool as_json = false, show_prompt = false;
  auto* check = app.add_subcommand("check", "Run the four checks of an abstraction on training instances");
  check->add_option("--abstraction", abstraction, "Abstraction document (JSON)")->required();
  check->add_option("--domain", domain, "PDDL domain")->required();
  check->add_option("--instances", instances, "PDDL instances")->required();
  check->add_flag("--json", as_json, "Print JSON");
  check->add_flag("--prompt", show_prompt, "Also print the feedback prompt for a rejection");

  auto* eval = app.add_subcommand("eval", "Refine the abstraction's policy on evaluation instances");
  eval->add_option("--abstraction", abstraction, "Abstraction document (JSON)")->required();
  eval->add_option("--domain", domain, "PDDL domain")->required();
  eval->add_option("--instances", instances, "PDDL instances")->required();
  eval->add_flag("--json", as_json, "Print JSON");

  LoopFlags lf;
  std::size_t n_iter = 0;
  auto* loop = app.add_subcommand("loop", "Generate and debug an abstraction with a proposer");
  loop->add_option("--config", lf.config, "Run configuration (JSON)");
  loop->add_option("--domain", lf.domain, "PDDL domain");
  loop->add_option("--training", lf.training, "Training instances");
  loop->add_option("--evaluation", lf.evaluation, "Evaluation instances");
  loop->add_option("--script", lf.script, "Scripted documents for the file proposer, in call order");
  auto* n_opt = loop->add_option("-N,--max-iterations", n_iter, "Upper bound on fix prompts");
  loop->add_option("--training-split", lf.split, "INIT:DEBUG training split (default 2:2)");
  loop->add_option("--label", lf.label, "Domain label for the report tables");
  loop->add_option("--output", lf.output, "Directory for run_record.json (default: stdout)");

  std::vector<std::string> records;
  std::string csv_dir;
  auto* rep = app.add_subcommand("report", "Print coverage and detected-error tables from run records");
  rep->add_option("records", records, "RunRecord JSON files");
  rep->add_option("--csv-dir", csv_dir, "Also write coverage.csv and stages.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*solve) return cmd_solve(qnp_file, max_nodes, time_ms);
    if (*check) return cmd_check(abstraction, domain, instances, as_json, show_prompt);
    if (*eval) return cmd_eval(abstraction, domain, instances, as_json);
    if (*loop) {
      if (*n_opt) lf.max_iterations = n_iter;
      return cmd_loop(lf);
    }
    if (*rep) return cmd_report(records, csv_dir);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
