#include "absforge/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "absforge/error.hpp"
#include "absforge/solver.hpp"

namespace absforge::harness {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

std::vector<std::string> resolve_all(const std::filesystem::path& base, const std::vector<std::string>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(resolve(base, p));
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void RunConfig::set_training_split(std::string_view text) {
  auto colon = text.find(':');
  auto number = [&](std::string_view s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) {
      throw std::invalid_argument("training split must look like INIT:DEBUG, got '" + std::string(text) + "'");
    }
    return static_cast<std::size_t>(std::stoul(std::string(s)));
  };
  if (colon == std::string_view::npos) number("");
  split_init = number(text.substr(0, colon));
  split_debug = number(text.substr(colon + 1));
  if (split_init == 0) throw std::invalid_argument("the initial prompt needs at least one training instance");
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
  RunConfig c;
  try {
    c.domain = resolve(base_dir, j.at("domain").get<std::string>());
    c.training = resolve_all(base_dir, j.value("training", std::vector<std::string>{}));
    c.evaluation = resolve_all(base_dir, j.value("evaluation", std::vector<std::string>{}));
    if (j.contains("proposer")) c.proposer = proposer::ProposerConfig::from_json(j["proposer"]);
    c.proposer.files = resolve_all(base_dir, c.proposer.files);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    if (j.contains("training_split")) c.set_training_split(j["training_split"].get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.label = j.value("label", "");
    c.output_dir = resolve(base_dir, j.value("output_dir", ""));
    if (j.contains("step_bound") && !j["step_bound"].is_null()) c.pipeline.step_bound = j["step_bound"].get<std::size_t>();
    c.exec.step_bound = c.pipeline.step_bound;
    c.pipeline.solver.max_nodes = j.value("solver_max_nodes", c.pipeline.solver.max_nodes);
    c.pipeline.solver.time_limit = std::chrono::milliseconds(j.value("solver_time_ms", c.pipeline.solver.time_limit.count()));
    c.pipeline.reach_budget = j.value("reach_budget", c.pipeline.reach_budget);
    c.pipeline.tree.max_nodes = j.value("tree_max_nodes", c.pipeline.tree.max_nodes);
    c.exec.max_expansions = j.value("exec_max_expansions", c.exec.max_expansions);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("run config: ") + e.what());
  }
  if (c.training.empty()) throw std::invalid_argument("run config needs at least one training instance");
  return c;
}

EvalResult evaluate_abstraction(const refinement::Abstraction& a, const qnp::Policy& pi,
                                std::span<const pddl::Instance> insts, const pipeline::ExecOptions& opts) {
  EvalResult out;
  for (const auto& inst : insts) {
    InstanceResult r;
    r.instance = inst.name();
    auto res = pipeline::execute_refined_policy(a, pi, inst, opts);
    if (auto* plan = std::get_if<pddl::Plan>(&res)) {
      auto check = pddl::validate_plan(inst, *plan);
      if (check.valid) {
        r.solved = true;
        for (const auto& step : *plan) r.plan.push_back(pddl::format_action(inst, step));
      } else {
        r.failure = "refined plan failed validation at step " + std::to_string(check.failing_step.value_or(0));
      }
    } else {
      r.failure = std::get<pipeline::ExecFailure>(res).reason;
    }
    if (r.solved) ++out.solved;
    out.instances.push_back(std::move(r));
  }
  if (!insts.empty()) out.coverage = static_cast<double>(out.solved) / static_cast<double>(insts.size());
  return out;
}

json RunRecord::to_json() const {
  json j;
  j["domain"] = domain;
  j["proposer"] = proposer;
  j["max_iterations"] = max_iterations;
  j["training_split"] = training_split;
  j["seed"] = seed;
  j["iterations"] = json::array();
  for (const auto& it : iterations) {
    json ij;
    ij["index"] = it.index;
    ij["doc"] = it.doc;
    ij["outcome"] = it.accepted ? "accepted" : "rejected";
    ij["report"] = it.report ? it.report->to_json() : json(nullptr);
    j["iterations"].push_back(std::move(ij));
  }
  j["accepted"] = accepted;
  j["accepted_iteration"] = accepted_iteration ? json(*accepted_iteration) : json(nullptr);
  j["fix_calls"] = fix_calls;
  j["final_doc"] = final_doc ? *final_doc : json(nullptr);
  j["policy"] = policy;
  json ev;
  ev["evaluated"] = evaluated;
  ev["coverage"] = evaluation.coverage ? json(*evaluation.coverage) : json(nullptr);
  ev["solved"] = evaluation.solved;
  ev["total"] = evaluation.instances.size();
  ev["instances"] = json::array();
  for (const auto& r : evaluation.instances) {
    ev["instances"].push_back({{"instance", r.instance}, {"solved", r.solved}, {"plan", r.plan}, {"failure", r.failure}});
  }
  j["evaluation"] = std::move(ev);
  j["stage_counts"] = stage_counts;
  j["error"] = error;
  return j;
}

RunRecord RunRecord::from_json(const json& j) {
  RunRecord r;
  r.domain = j.at("domain").get<std::string>();
  r.proposer = j.at("proposer").get<std::string>();
  r.max_iterations = j.at("max_iterations").get<std::size_t>();
  r.training_split = j.value("training_split", "");
  r.seed = j.value("seed", std::uint64_t{0});
  for (const auto& ij : j.at("iterations")) {
    IterationRecord it;
    it.index = ij.at("index").get<std::size_t>();
    it.doc = ij.at("doc");
    it.accepted = ij.at("outcome").get<std::string>() == "accepted";
    if (!ij.at("report").is_null()) it.report = pipeline::DebugReport::from_json(ij["report"]);
    r.iterations.push_back(std::move(it));
  }
  r.accepted = j.at("accepted").get<bool>();
  if (!j.at("accepted_iteration").is_null()) r.accepted_iteration = j["accepted_iteration"].get<std::size_t>();
  r.fix_calls = j.value("fix_calls", std::size_t{0});
  if (j.contains("final_doc") && !j["final_doc"].is_null()) r.final_doc = j["final_doc"];
  r.policy = j.value("policy", "");
  const auto& ev = j.at("evaluation");
  r.evaluated = ev.at("evaluated").get<bool>();
  if (!ev.at("coverage").is_null()) r.evaluation.coverage = ev["coverage"].get<double>();
  r.evaluation.solved = ev.at("solved").get<std::size_t>();
  for (const auto& ij : ev.at("instances")) {
    r.evaluation.instances.push_back({ij.at("instance").get<std::string>(), ij.at("solved").get<bool>(),
                                      ij.at("plan").get<std::vector<std::string>>(),
                                      ij.at("failure").get<std::string>()});
  }
  r.stage_counts = j.at("stage_counts").get<std::map<std::string, std::size_t>>();
  r.error = j.value("error", "");
  return r;
}

std::string RunRecord::serialize() const { return to_json().dump(2) + "\n"; }

namespace {

struct Loaded {
  std::shared_ptr<const pddl::Domain> domain;
  std::vector<pddl::Instance> training;
  std::vector<pddl::Instance> evaluation;
};

Loaded load(const RunConfig& cfg) {
  Loaded l;
  l.domain = std::make_shared<const pddl::Domain>(pddl::parse_domain(read_file(cfg.domain), cfg.domain));
  for (const auto& p : cfg.training) l.training.push_back(pddl::parse_instance(read_file(p), l.domain, p));
  for (const auto& p : cfg.evaluation) l.evaluation.push_back(pddl::parse_instance(read_file(p), l.domain, p));
  if (l.training.empty()) throw std::invalid_argument("at least one training instance is required");
  return l;
}

}  // namespace

RunRecord run_loop(const RunConfig& cfg, proposer::Proposer& prop) {
  const Loaded data = load(cfg);
  const pddl::Domain& dom = *data.domain;

  RunRecord rec;
  rec.domain = cfg.label.empty() ? dom.name : cfg.label;
  rec.proposer = cfg.proposer.kind == proposer::ProposerConfig::Kind::File ? "file" : cfg.proposer.model;
  rec.max_iterations = cfg.max_iterations;
  rec.training_split = std::to_string(cfg.split_init) + ":" + std::to_string(cfg.split_debug);
  rec.seed = cfg.seed;
  for (auto s : pipeline::kAllStages) rec.stage_counts[std::string(pipeline::stage_name(s))] = 0;

  // The no-debug setting shows and checks every training instance; with
  // debugging, the initial and checked slices follow the split.
  std::span<const pddl::Instance> all(data.training);
  std::span<const pddl::Instance> init_set = all;
  std::span<const pddl::Instance> check_set = all;
  if (cfg.max_iterations > 0) {
    const std::size_t n_init = std::min(cfg.split_init, all.size());
    init_set = all.first(n_init);
    const std::size_t n_debug = std::min(cfg.split_debug, all.size() - n_init);
    if (n_debug > 0) check_set = all.subspan(n_init, n_debug);
  }

  std::optional<refinement::Abstraction> last_abs;
  std::optional<qnp::Policy> last_policy;
  std::optional<json> last_doc;
  try {
    proposer::Conversation conv;
    std::string reply = prop.propose_initial(dom, init_set, conv);
    for (std::size_t iter = 1;; ++iter) {
      IterationRecord it;
      it.index = iter;
      std::optional<pipeline::DebugReport> report;
      last_abs.reset();
      last_policy.reset();
      last_doc.reset();
      std::string doc_text = reply;
      try {
        auto doc = proposer::parse_abstraction_doc(reply, &dom);
        it.doc = doc.to_json();
        last_doc = it.doc;
        doc_text = doc.serialize();
        auto validated = proposer::validate_doc(doc, dom);
        if (auto* r = std::get_if<pipeline::DebugReport>(&validated)) {
          report = std::move(*r);
        } else {
          last_abs = std::get<refinement::Abstraction>(std::move(validated));
        }
      } catch (const proposer::DocError& e) {
        it.doc = reply;
        pipeline::DebugReport r;
        r.stage = pipeline::Stage::DocInvalid;
        r.detail = "the reply is not a usable abstraction document";
        r.violations.push_back(e.what());
        report = std::move(r);
      }

      if (last_abs) {
        auto outcome = pipeline::run_pipeline(*last_abs, check_set, cfg.pipeline);
        if (auto* ok = std::get_if<pipeline::Accepted>(&outcome)) {
          last_policy = ok->policy;
          it.accepted = true;
          rec.iterations.push_back(std::move(it));
          rec.accepted = true;
          rec.accepted_iteration = iter;
          break;
        }
        auto& rej = std::get<pipeline::Rejected>(outcome);
        last_policy = rej.policy;
        report = std::move(rej.report);
      }
      rec.stage_counts[std::string(pipeline::stage_name(report->stage))] += 1;
      it.report = report;
      rec.iterations.push_back(std::move(it));
      if (rec.fix_calls >= cfg.max_iterations) break;

      pipeline::PromptContext ctx;
      ctx.domain_pddl = dom.source;
      ctx.abstraction = doc_text;
      if (last_abs) ctx.qnp_text = qnp::write_qnp(last_abs->qnp);
      if (last_abs && last_policy) ctx.policy_text = qnp::format_policy(*last_policy, last_abs->qnp);
      for (const auto& inst : check_set) {
        if (inst.name() == report->instance) ctx.instance_pddl = inst.source();
      }
      const std::string prompt = pipeline::render_prompt(*report, ctx);
      ++rec.fix_calls;
      reply = prop.propose_fix(conv, prompt);
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }

  const bool evaluate = rec.accepted || (cfg.max_iterations == 0 && last_abs && last_policy);
  if (evaluate) {
    rec.final_doc = last_doc;
    rec.policy = qnp::format_policy(*last_policy, last_abs->qnp);
    rec.evaluated = true;
    rec.evaluation = evaluate_abstraction(*last_abs, *last_policy, data.evaluation, cfg.exec);
  }
  return rec;
}

RunRecord run_loop(const RunConfig& cfg) {
  auto prop = proposer::make_proposer(cfg.proposer);
  return run_loop(cfg, *prop);
}

namespace {

/// Coverage a run contributes to Table 1: an unevaluated run solved nothing.
std::optional<double> run_coverage(const RunRecord& r) {
  if (r.evaluated) return r.evaluation.coverage;
  return 0.0;
}

std::string pad(const std::string& s, std::size_t width, bool left) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += "  ";
      out += pad(cells[c], width[c], c == 0);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& row : rows) out += line(row);
  return out;
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      out += cells[c];
    }
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& row : rows) out += line(row);
  return out;
}

constexpr const char* kStageGroups[] = {"DOC", "ASC", "HLISC", "HLPRC", "LLGRC"};

std::string stage_group(const std::string& stage) { return stage.substr(0, stage.find('_')); }

}  // namespace

Tables report(std::span<const RunRecord> records) {
  Tables t;
  if (records.empty()) t.warnings.push_back("no run records given; tables are empty");

  std::vector<std::string> domains, proposers;
  for (const auto& r : records) {
    if (std::find(domains.begin(), domains.end(), r.domain) == domains.end()) domains.push_back(r.domain);
    if (std::find(proposers.begin(), proposers.end(), r.proposer) == proposers.end()) proposers.push_back(r.proposer);
  }

  // Coverage: one row per domain, an AD and a noAD column per proposer.
  std::vector<std::string> header{"Domain"};
  for (const auto& p : proposers) {
    header.push_back(p + " AD");
    header.push_back(p + " noAD");
  }
  std::vector<std::vector<std::string>> text_rows, csv_rows;
  std::size_t max_runs = 0;
  for (const auto& d : domains) {
    std::vector<std::string> text_row{d}, csv_row{d};
    for (const auto& p : proposers) {
      for (bool debug : {true, false}) {
        double sum = 0;
        std::size_t n = 0;
        for (const auto& r : records) {
          if (r.domain != d || r.proposer != p || r.debugging() != debug) continue;
          if (auto c = run_coverage(r)) {
            sum += *c;
            ++n;
          }
        }
        max_runs = std::max(max_runs, n);
        text_row.push_back(n ? fixed(sum / static_cast<double>(n), 3) : "-");
        csv_row.push_back(n ? fixed(sum / static_cast<double>(n), 6) : "");
      }
    }
    text_rows.push_back(std::move(text_row));
    csv_rows.push_back(std::move(csv_row));
  }
  t.coverage_text = render_table(header, text_rows);
  t.coverage_csv = render_csv(header, csv_rows);
  if (!records.empty()) {
    t.coverage_text += "Coverage in [0,1] on the evaluation set, averaged over up to " + std::to_string(max_runs) +
                       " run(s) per cell. AD = automated debugging. A file proposer is deterministic, so one run "
                       "per cell is enough.\n";
  }

  // Detected errors: one row per stage group, one column per proposer,
  // averaged over debugging runs.
  std::vector<std::string> sheader{"Error Source"};
  for (const auto& p : proposers) sheader.push_back(p);
  std::vector<std::vector<std::string>> stext, scsv;
  for (const char* group : kStageGroups) {
    std::vector<std::string> trow{group}, crow{group};
    for (const auto& p : proposers) {
      double sum = 0;
      std::size_t n = 0;
      for (const auto& r : records) {
        if (r.proposer != p || !r.debugging()) continue;
        ++n;
        for (const auto& [stage, count] : r.stage_counts) {
          if (stage_group(stage) == group) sum += static_cast<double>(count);
        }
      }
      trow.push_back(n ? fixed(sum / static_cast<double>(n), 2) : "-");
      crow.push_back(n ? fixed(sum / static_cast<double>(n), 6) : "");
    }
    stext.push_back(std::move(trow));
    scsv.push_back(std::move(crow));
  }
  t.stages_text = render_table(sheader, stext);
  t.stages_csv = render_csv(sheader, scsv);
  if (!records.empty()) t.stages_text += "Average number of detected errors per debugging run.\n";
  return t;
}

}  // namespace absforge::harness
