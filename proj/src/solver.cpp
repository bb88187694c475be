#include "absforge/solver.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace absforge::qnp {

namespace {

std::uint32_t mask_of(const Action& a, bool increase) {
  std::uint32_t m = 0;
  for (const auto& e : a.num_eff) {
    if (e.increase == increase) m |= std::uint32_t{1} << e.var;
  }
  return m;
}

/// Tarjan's algorithm over the edges flagged alive; returns a component id
/// per node.
std::vector<std::size_t> strongly_connected(std::size_t n, const std::vector<PolicyEdge>& edges,
                                            const std::vector<bool>& alive) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (alive[e]) adj[edges[e].from].push_back(edges[e].to);
  }
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, comps = 0;

  auto visit = [&](auto&& self, std::size_t v) -> void {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] == kUnset) {
        self(self, w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = comps;
      } while (w != v);
      ++comps;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] == kUnset) visit(visit, v);
  }
  return comp;
}

/// Nodes from which some goal node is reachable along the graph's edges.
std::vector<bool> reaches_goal(const PolicyGraph& g) {
  std::vector<std::vector<std::size_t>> rev(g.nodes.size());
  for (const auto& e : g.edges) rev[e.to].push_back(e.from);
  std::vector<bool> ok(g.nodes.size(), false);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.goal[i]) {
      ok[i] = true;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : rev[v]) {
      if (!ok[u]) {
        ok[u] = true;
        queue.push_back(u);
      }
    }
  }
  return ok;
}

bool graph_solves(const PolicyGraph& g) {
  auto ok = reaches_goal(g);
  if (std::find(ok.begin(), ok.end(), false) != ok.end()) return false;
  return sieve_terminates(g);
}

}  // namespace

std::optional<PolicyGraph> build_policy_graph(const Policy& pi, const Problem& p, std::string* why) {
  PolicyGraph g;
  std::map<QState, std::size_t> index;
  std::deque<std::size_t> queue;
  auto intern = [&](const QState& s) {
    auto [it, fresh] = index.emplace(s, g.nodes.size());
    if (fresh) {
      g.nodes.push_back(s);
      g.goal.push_back(is_goal_q(s, p));
      queue.push_back(it->second);
    }
    return it->second;
  };
  for (const auto& s : initial_qstates(p)) intern(s);
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    if (g.goal[v]) continue;
    const QState s = g.nodes[v];
    auto a = pi.lookup(s);
    if (!a) {
      if (why) *why = "policy undefined at reachable qstate {" + p.format(s) + "}";
      return std::nullopt;
    }
    if (*a >= p.actions().size() || !applicable_q(s, p.actions()[*a])) {
      if (why) *why = "policy maps {" + p.format(s) + "} to an inapplicable action";
      return std::nullopt;
    }
    const Action& act = p.actions()[*a];
    for (const auto& succ : successors_q(s, act)) {
      std::size_t w = intern(succ);
      g.edges.push_back({v, w, *a, mask_of(act, true), mask_of(act, false)});
    }
  }
  return g;
}

bool sieve_terminates(const PolicyGraph& g, const SieveChooser& choose) {
  const std::size_t n = g.nodes.size();
  std::vector<bool> alive(g.edges.size(), true);
  for (;;) {
    auto comp = strongly_connected(n, g.edges, alive);
    std::map<std::size_t, std::vector<std::size_t>> internal;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (alive[e] && comp[g.edges[e].from] == comp[g.edges[e].to]) internal[comp[g.edges[e].from]].push_back(e);
    }
    std::vector<std::pair<std::size_t, std::size_t>> candidates;  // (component, variable)
    for (const auto& [c, edges] : internal) {
      std::uint32_t inc = 0, dec = 0;
      for (std::size_t e : edges) {
        inc |= g.edges[e].inc_mask;
        dec |= g.edges[e].dec_mask;
      }
      std::uint32_t removable = dec & ~inc;
      for (std::size_t v = 0; v < kMaxVariables; ++v) {
        if (removable & (std::uint32_t{1} << v)) candidates.emplace_back(c, v);
      }
    }
    if (candidates.empty()) return internal.empty();
    std::size_t pick = choose ? choose(candidates.size()) : 0;
    if (pick >= candidates.size()) pick = 0;
    const auto [c, v] = candidates[pick];
    for (std::size_t e : internal[c]) {
      if (g.edges[e].dec_mask & (std::uint32_t{1} << v)) alive[e] = false;
    }
  }
}

bool verify_policy(const Policy& pi, const Problem& p) {
  auto g = build_policy_graph(pi, p);
  return g && graph_solves(*g);
}

// ---------------------------------------------------------------------------
// Solver

namespace {

struct LimitReached {
  std::string reason;
};

class AndOrSearch {
 public:
  AndOrSearch(const Problem& p, const SolverBudget& budget)
      : p_(p), budget_(budget), start_(std::chrono::steady_clock::now()) {}

  SolveOutcome run() {
    try {
      explore();
      prune_unsafe();
      for (std::size_t s : initial_) {
        if (!safe_[s]) return Unsolvable{};
      }
      order_actions();
      assign_.assign(states_.size(), kNone);
      if (search()) return Solved{extract()};
      return Unsolvable{};
    } catch (const LimitReached& e) {
      return SolverResourceLimit{e.reason};
    }
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void tick() {
    if (++work_ > budget_.max_nodes) throw LimitReached{"node budget of " + std::to_string(budget_.max_nodes) + " exhausted"};
    if (std::chrono::steady_clock::now() - start_ > budget_.time_limit) throw LimitReached{"time limit exceeded"};
  }

  std::size_t intern(const QState& s) {
    auto [it, fresh] = index_.emplace(s, states_.size());
    if (fresh) {
      tick();
      states_.push_back(s);
      goal_.push_back(is_goal_q(s, p_));
      succ_.emplace_back();
      queue_.push_back(it->second);
    }
    return it->second;
  }

  void explore() {
    for (const auto& s : initial_qstates(p_)) initial_.push_back(intern(s));
    while (!queue_.empty()) {
      std::size_t v = queue_.front();
      queue_.pop_front();
      if (goal_[v]) continue;
      std::vector<std::vector<std::size_t>> per_action(p_.actions().size());
      for (std::size_t a = 0; a < p_.actions().size(); ++a) {
        if (!applicable_q(states_[v], p_.actions()[a])) continue;
        for (const auto& succ : successors_q(states_[v], p_.actions()[a])) per_action[a].push_back(intern(succ));
      }
      succ_[v] = std::move(per_action);
    }
  }

  /// Greatest fixpoint of qstates that have an action whose successors all
  /// stay in the set and from which a goal is reachable inside the set.
  void prune_unsafe() {
    const std::size_t n = states_.size();
    safe_.assign(n, true);
    safe_actions_.assign(n, {});
    dist_.assign(n, kNone);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t v = 0; v < n; ++v) {
        if (!safe_[v] || goal_[v]) continue;
        safe_actions_[v].clear();
        for (std::size_t a = 0; a < succ_[v].size(); ++a) {
          const auto& out = succ_[v][a];
          if (out.empty()) continue;
          if (std::all_of(out.begin(), out.end(), [&](std::size_t w) { return safe_[w]; })) {
            safe_actions_[v].push_back(a);
          }
        }
        if (safe_actions_[v].empty()) {
          safe_[v] = false;
          changed = true;
        }
      }
      // goal distance over safe actions (OR: some outcome of some action)
      std::fill(dist_.begin(), dist_.end(), kNone);
      std::deque<std::size_t> queue;
      for (std::size_t v = 0; v < n; ++v) {
        if (goal_[v]) {
          dist_[v] = 0;
          queue.push_back(v);
        }
      }
      std::vector<std::vector<std::size_t>> rev(n);
      for (std::size_t v = 0; v < n; ++v) {
        if (!safe_[v] || goal_[v]) continue;
        for (std::size_t a : safe_actions_[v]) {
          for (std::size_t w : succ_[v][a]) rev[w].push_back(v);
        }
      }
      while (!queue.empty()) {
        std::size_t w = queue.front();
        queue.pop_front();
        for (std::size_t v : rev[w]) {
          if (dist_[v] == kNone) {
            dist_[v] = dist_[w] + 1;
            queue.push_back(v);
          }
        }
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (safe_[v] && !goal_[v] && dist_[v] == kNone) {
          safe_[v] = false;
          changed = true;
        }
      }
    }
  }

  /// Best-first: prefer actions with an outcome closest to the goal, then
  /// the smallest worst-case outcome, then declaration order.
  void order_actions() {
    for (std::size_t v = 0; v < states_.size(); ++v) {
      auto key = [&](std::size_t a) {
        std::size_t best = kNone, worst = 0;
        for (std::size_t w : succ_[v][a]) {
          best = std::min(best, dist_[w]);
          worst = std::max(worst, dist_[w]);
        }
        return std::tuple(best, worst, a);
      };
      std::sort(safe_actions_[v].begin(), safe_actions_[v].end(),
                [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    }
  }

  /// First reachable, non-goal qstate without an action, in BFS order from
  /// the initial qstates; kNone when the partial policy is closed.
  std::size_t open_state() const {
    std::vector<bool> seen(states_.size(), false);
    std::deque<std::size_t> queue;
    for (std::size_t s : initial_) {
      if (!seen[s]) {
        seen[s] = true;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      std::size_t v = queue.front();
      queue.pop_front();
      if (goal_[v]) continue;
      if (assign_[v] == kNone) return v;
      for (std::size_t w : succ_[v][assign_[v]]) {
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
      }
    }
    return kNone;
  }

  bool search() {
    tick();
    std::size_t v = open_state();
    if (v == kNone) return graph_solves(*build_policy_graph(extract(), p_));
    for (std::size_t a : safe_actions_[v]) {
      assign_[v] = a;
      if (search()) return true;
    }
    assign_[v] = kNone;
    return false;
  }

  Policy extract() const {
    Policy pi;
    for (std::size_t v = 0; v < states_.size(); ++v) {
      if (assign_[v] != kNone) pi.rules[states_[v]] = assign_[v];
    }
    return pi;
  }

  const Problem& p_;
  SolverBudget budget_;
  std::chrono::steady_clock::time_point start_;
  std::size_t work_ = 0;

  std::map<QState, std::size_t> index_;
  std::vector<QState> states_;
  std::vector<bool> goal_;
  std::vector<std::vector<std::vector<std::size_t>>> succ_;  // [state][action] → successors
  std::deque<std::size_t> queue_;
  std::vector<std::size_t> initial_;

  std::vector<bool> safe_;
  std::vector<std::vector<std::size_t>> safe_actions_;
  std::vector<std::size_t> dist_;
  std::vector<std::size_t> assign_;
};

}  // namespace

SolveOutcome solve(const Problem& p, const SolverBudget& budget) { return AndOrSearch(p, budget).run(); }

ExecOutcome execute_policy_q(const Policy& pi, const QState& s0, const Problem& p, const BranchOracle& oracle,
                             std::size_t step_bound) {
  std::vector<ExecStep> trace;
  QState s = s0;
  for (;;) {
    if (is_goal_q(s, p)) return ExecReachedGoal{std::move(trace), s};
    if (trace.size() >= step_bound) return ExecStepLimit{std::move(trace), s};
    auto a = pi.lookup(s);
    if (!a || *a >= p.actions().size() || !applicable_q(s, p.actions()[*a])) return ExecAborted{std::move(trace), s};
    const Action& act = p.actions()[*a];
    QState next = oracle(s, act);
    auto succs = successors_q(s, act);
    if (std::find(succs.begin(), succs.end(), next) == succs.end()) {
      throw std::logic_error("branch oracle returned a qstate that is not a successor");
    }
    trace.push_back({s, *a});
    s = next;
  }
}

}  // namespace absforge::qnp
