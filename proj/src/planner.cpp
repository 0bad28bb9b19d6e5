#include "mirl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include "mirl/seeding.hpp"

namespace mirl {

std::vector<Action> action_templates(const Scenario& scenario, const PlannerConfig& cfg) {
  std::vector<double> vys = cfg.vy_template;
  if (vys.empty()) {
    const double lateral = scenario.road.lane_width / cfg.lane_change_time;
    vys = {-lateral, 0.0, lateral};
  }
  std::vector<Action> out;
  out.reserve(cfg.ax_template.size() * vys.size());
  for (double ax : cfg.ax_template)
    for (double vy : vys) out.push_back({ax, vy, scenario.dt});
  if (out.empty()) throw ConfigError("planner: empty action template");
  return out;
}

SearchRoot SearchRoot::initial(JointState s) {
  SearchRoot r;
  r.prev = s;
  r.prefix.assign(s.size(), 0.0);
  r.states = std::move(s);
  return r;
}

std::size_t AgentQ::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return best;
}

double step_reward(const RewardModel& model, const AgentSpec& spec, const Road& road,
                   const AgentState& prev, const AgentState& state, const Action& action,
                   Terminal flag) {
  const FeatureVector f = feature_step(state, action, prev, spec, road, flag);
  AugmentedFeatureVector a{};
  std::copy(f.begin(), f.end(), a.begin());
  if (model.is_linear()) return model.reward(a);
  // Previous-step values of the state-only features.
  const FeatureVector pf = feature_step(prev, action, prev, spec, road, Terminal::none);
  a[7] = pf[kDesLane];
  a[8] = pf[kDesVelocity];
  a[9] = pf[kLaneCenter];
  return model.reward(a);
}

namespace {

struct AgentStats {
  std::vector<Action> actions;
  std::vector<int> n;
  std::vector<double> q;
  std::vector<std::size_t> order;  // template permutation used for widening
  std::size_t widened = 0;
};

struct Node;

struct Edge {
  std::unique_ptr<Node> child;
  std::vector<double> rewards;
  bool terminal = false;
};

struct Node {
  int t = 0;
  JointState states;
  JointState prev;
  int visits = 0;
  std::vector<AgentStats> agents;
  std::map<std::vector<std::uint32_t>, Edge> children;
};

class Search {
 public:
  Search(const RewardModel& model, const Scenario& scenario, const PlannerConfig& cfg,
         std::uint64_t seed)
      : model_(model),
        scenario_(scenario),
        cfg_(cfg),
        templates_(action_templates(scenario, cfg)),
        rng_(make_rng(seed)) {
    discount_.resize(static_cast<std::size_t>(scenario.horizon) + 1, 1.0);
    for (std::size_t k = 1; k < discount_.size(); ++k) discount_[k] = discount_[k - 1] * cfg.gamma;
  }

  std::vector<AgentQ> run(const SearchRoot& root) {
    if (cfg_.budget < 1) throw std::invalid_argument("mcts_q_estimate: budget must be >= 1");
    if (root.t >= scenario_.horizon)
      throw std::invalid_argument("mcts_q_estimate: root at or beyond the horizon");
    auto node = make_node(root.t, root.states, root.prev);
    for (int it = 0; it < cfg_.budget; ++it) iterate(*node, root.prefix);

    std::vector<AgentQ> out(node->agents.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].actions = node->agents[i].actions;
      out[i].q = node->agents[i].q;
      out[i].visits = node->agents[i].n;
    }
    return out;
  }

 private:
  std::unique_ptr<Node> make_node(int t, JointState states, JointState prev) {
    auto node = std::make_unique<Node>();
    node->t = t;
    node->states = std::move(states);
    node->prev = std::move(prev);
    node->agents.resize(node->states.size());
    for (auto& a : node->agents) {
      a.order.resize(templates_.size());
      for (std::size_t k = 0; k < a.order.size(); ++k) a.order[k] = k;
      for (std::size_t k = a.order.size(); k > 1; --k) {
        const auto j = static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(k));
        std::swap(a.order[k - 1], a.order[std::min(j, k - 1)]);
      }
    }
    return node;
  }

  bool can_widen(const AgentStats& a) const {
    return a.widened < templates_.size() || cfg_.jitter_ax > 0.0 || cfg_.jitter_vy > 0.0;
  }

  Action new_action(AgentStats& a) {
    Action act = templates_[a.order[a.widened % templates_.size()]];
    ++a.widened;
    if (cfg_.jitter_ax > 0.0) act.ax += cfg_.jitter_ax * standard_normal(rng_);
    if (cfg_.jitter_vy > 0.0) act.vy += cfg_.jitter_vy * standard_normal(rng_);
    return act;
  }

  std::uint32_t select(Node& node, std::size_t agent) {
    AgentStats& a = node.agents[agent];
    const double cap = std::max(
        1.0, std::ceil(cfg_.pw_k * std::pow(static_cast<double>(node.visits), cfg_.pw_alpha)));
    if (static_cast<double>(a.actions.size()) < cap && can_widen(a)) {
      a.actions.push_back(new_action(a));
      a.n.push_back(0);
      a.q.push_back(0.0);
      return static_cast<std::uint32_t>(a.actions.size() - 1);
    }
    const double log_n = std::log(static_cast<double>(std::max(node.visits, 1)));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < a.actions.size(); ++k) {
      const double score =
          a.n[k] == 0 ? std::numeric_limits<double>::infinity()
                      : a.q[k] + cfg_.exploration * std::sqrt(log_n / static_cast<double>(a.n[k]));
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    return static_cast<std::uint32_t>(best);
  }

  Edge& expand(Node& node, const std::vector<std::uint32_t>& key, bool& created) {
    auto it = node.children.find(key);
    created = it == node.children.end();
    if (!created) return it->second;

    JointAction joint(key.size());
    for (std::size_t i = 0; i < key.size(); ++i) joint[i] = node.agents[i].actions[key[i]];
    Transition tr = transition(scenario_, node.states, joint);
    Edge edge;
    edge.terminal = tr.any_terminal;
    edge.rewards.resize(key.size());
    for (std::size_t i = 0; i < key.size(); ++i) {
      edge.rewards[i] = step_reward(model_, scenario_.agents[i], scenario_.road, node.prev[i],
                                    node.states[i], joint[i], tr.flags[i]);
    }
    if (!edge.terminal) edge.child = make_node(node.t + 1, std::move(tr.next), node.states);
    return node.children.emplace(key, std::move(edge)).first->second;
  }

  /// Uniform-template rollout from (t, states); adds discounted rewards to
  /// acc and returns the number of recorded steps of the full episode.
  int simulate(int t, JointState states, JointState prev, std::vector<double>& acc) {
    const std::size_t m = states.size();
    JointAction joint(m);
    while (t < scenario_.horizon) {
      for (std::size_t i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(templates_.size()));
        joint[i] = templates_[std::min(k, templates_.size() - 1)];
      }
      Transition tr = transition(scenario_, states, joint);
      for (std::size_t i = 0; i < m; ++i) {
        acc[i] += discount_[t] * step_reward(model_, scenario_.agents[i], scenario_.road, prev[i],
                                             states[i], joint[i], tr.flags[i]);
      }
      if (tr.any_terminal) return t + 1;
      prev = std::move(states);
      states = std::move(tr.next);
      ++t;
    }
    return scenario_.horizon;
  }

  void iterate(Node& root, const std::vector<double>& prefix) {
    std::vector<double> acc = prefix;
    path_.clear();
    Node* node = &root;
    int length = scenario_.horizon;
    const std::size_t m = root.states.size();
    while (node->t < scenario_.horizon) {
      std::vector<std::uint32_t> key(m);
      for (std::size_t i = 0; i < m; ++i) key[i] = select(*node, i);
      bool created = false;
      Edge& edge = expand(*node, key, created);
      path_.push_back({node, key});
      for (std::size_t i = 0; i < m; ++i) acc[i] += discount_[node->t] * edge.rewards[i];
      if (edge.terminal) {
        length = node->t + 1;
        break;
      }
      Node* child = edge.child.get();
      if (created) {
        length = simulate(child->t, child->states, child->prev, acc);
        break;
      }
      node = child;
    }

    const double norm = 1.0 / static_cast<double>(length);
    for (auto& [n, key] : path_) {
      ++n->visits;
      for (std::size_t i = 0; i < m; ++i) {
        AgentStats& a = n->agents[i];
        const std::uint32_t k = key[i];
        ++a.n[k];
        a.q[k] += (acc[i] * norm - a.q[k]) / static_cast<double>(a.n[k]);
      }
    }
  }

  const RewardModel& model_;
  const Scenario& scenario_;
  const PlannerConfig& cfg_;
  std::vector<Action> templates_;
  Rng rng_;
  std::vector<double> discount_;
  std::vector<std::pair<Node*, std::vector<std::uint32_t>>> path_;
};

}  // namespace

std::vector<AgentQ> mcts_q_estimate(const RewardModel& model, const Scenario& scenario,
                                    const SearchRoot& root, const PlannerConfig& cfg,
                                    std::uint64_t seed) {
  Search search(model, scenario, cfg, seed);
  return search.run(root);
}

std::vector<double> softmax(const std::vector<double>& q, double c) {
  if (q.empty()) throw std::invalid_argument("softmax: empty input");
  if (!(c > 0.0)) throw std::invalid_argument("softmax: c must be > 0");
  const double mx = *std::max_element(q.begin(), q.end());
  std::vector<double> p(q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = std::exp(c * (q[i] - mx));
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

PlanStepResult softmax_q_proposal(const std::vector<AgentQ>& q, double c, std::uint64_t seed) {
  PlanStepResult out;
  out.agents.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    AgentSelection sel;
    sel.distribution = softmax(q[i].q, c);
    Rng rng = make_rng(derive_seed(seed, {i}));
    const double u = uniform01(rng);
    double cum = 0.0;
    sel.index = sel.distribution.size() - 1;
    for (std::size_t k = 0; k < sel.distribution.size(); ++k) {
      cum += sel.distribution[k];
      if (u < cum) {
        sel.index = k;
        break;
      }
    }
    // Guard against rounding in the cumulative sum landing on a zero-mass tail.
    while (sel.distribution[sel.index] <= 0.0 && sel.index > 0) --sel.index;
    sel.prob = sel.distribution[sel.index];
    sel.action = q[i].actions[sel.index];
    out.agents.push_back(std::move(sel));
  }
  return out;
}

PlanStepResult greedy_selection(const std::vector<AgentQ>& q) {
  PlanStepResult out;
  for (const auto& agent : q) {
    AgentSelection sel;
    sel.index = agent.argmax();
    sel.action = agent.actions[sel.index];
    sel.prob = 1.0;
    sel.distribution.assign(agent.q.size(), 0.0);
    sel.distribution[sel.index] = 1.0;
    out.agents.push_back(std::move(sel));
  }
  return out;
}

double replay_log_prob(const SampledBatchEntry& entry) {
  double lp = 0.0;
  for (const auto& r : entry.records) lp += std::log(r.distribution.at(r.chosen));
  return lp;
}

namespace {

std::vector<SampledBatchEntry> run_episode(const RewardModel& model, const Scenario& scenario,
                                           const PlannerConfig& cfg, std::uint64_t seed,
                                           bool greedy) {
  const std::size_t m = scenario.agents.size();
  SearchRoot root = SearchRoot::initial(sample_start_states(scenario, derive_seed(seed, {0})));

  std::vector<SampledBatchEntry> entries(m);
  for (std::size_t i = 0; i < m; ++i) {
    Trajectory& tr = entries[i].trajectory;
    tr.agent_id = static_cast<int>(i);
    tr.dt = scenario.dt;
    tr.horizon = scenario.horizon;
    tr.start = root.states[i];
    entries[i].seed = seed;
  }

  double discount = 1.0;
  for (int t = 0; t < scenario.horizon; ++t) {
    root.t = t;
    const auto q = mcts_q_estimate(model, scenario, root, cfg,
                                   derive_seed(seed, {1, static_cast<std::uint64_t>(t)}));
    const PlanStepResult sel =
        greedy ? greedy_selection(q)
               : softmax_q_proposal(q, cfg.c, derive_seed(seed, {2, static_cast<std::uint64_t>(t)}));

    JointAction joint(m);
    for (std::size_t i = 0; i < m; ++i) joint[i] = sel.agents[i].action;
    Transition tr = transition(scenario, root.states, joint);
    for (std::size_t i = 0; i < m; ++i) {
      SampledBatchEntry& e = entries[i];
      e.trajectory.steps.push_back({root.states[i], joint[i]});
      e.trajectory.terminal = tr.flags[i];
      if (!greedy) e.log_prob += std::log(sel.agents[i].prob);
      e.records.push_back({sel.agents[i].distribution, sel.agents[i].index});
      root.prefix[i] += discount * step_reward(model, scenario.agents[i], scenario.road,
                                               root.prev[i], root.states[i], joint[i],
                                               tr.flags[i]);
    }
    if (tr.any_terminal) break;
    discount *= cfg.gamma;
    root.prev = std::move(root.states);
    root.states = std::move(tr.next);
  }
  return entries;
}

}  // namespace

std::vector<SampledBatchEntry> generate_samples(const RewardModel& model,
                                                const Scenario& scenario,
                                                const PlannerConfig& cfg, std::uint64_t seed) {
  return run_episode(model, scenario, cfg, seed, false);
}

std::vector<SampledBatchEntry> plan_expert(const Scenario& scenario,
                                           const RewardModel& baseline,
                                           const PlannerConfig& cfg, std::uint64_t seed) {
  return run_episode(baseline, scenario, cfg, seed, true);
}

}  // namespace mirl
