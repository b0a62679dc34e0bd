// SPDX-License-Identifier: Apache-2.0

#include "orchsim/verify.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "orchsim/balancers.hpp"
#include "orchsim/exchange.hpp"
#include "orchsim/log.hpp"
#include "orchsim/topology.hpp"

namespace orchsim {

namespace {

std::string join_lengths(const std::vector<SeqItem>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(items[i].length);
  }
  return out + "]";
}

std::vector<SeqItem> random_items(std::mt19937_64& rng, int n, int d, std::int64_t lo,
                                  std::int64_t hi) {
  std::vector<SeqItem> items;
  for (int i = 0; i < n; ++i) {
    items.push_back({i, "m", 0, lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)),
                     static_cast<int>(rng() % d)});
  }
  return items;
}

// A broken stand-in for the greedy balancer: every item lands on the batch
// with the *largest* running sum.
double corrupted_greedy_objective(int d, const std::vector<SeqItem>& items) {
  std::vector<std::int64_t> sums(d, 0);
  std::vector<SeqItem> sorted = items;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SeqItem& a, const SeqItem& b) { return a.length > b.length; });
  for (const SeqItem& item : sorted) {
    auto it = std::max_element(sums.begin(), sums.end());
    *it += item.length;
  }
  return static_cast<double>(*std::max_element(sums.begin(), sums.end()));
}

struct CheckContext {
  const VerifyOptions& options;
  VerifyOutcome& outcome;

  void pass(const std::string& name, const std::string& detail) {
    outcome.lines.push_back("[pass] " + name + ": " + detail);
  }
  void vacuous(const std::string& name) {
    log::warn(name + " has a zero trial cap; vacuous pass");
    outcome.lines.push_back("[pass] " + name + ": vacuous (0 trials)");
  }
  void fail(const std::string& name, const std::string& counterexample) {
    outcome.ok = false;
    outcome.lines.push_back("[fail] " + name);
    outcome.failures.push_back(name + ": " + counterexample);
  }
};

void check_greedy_bound(CheckContext& ctx) {
  const std::string name = "greedy 4/3 approximation bound";
  const int trials = ctx.options.caps.greedy_trials;
  if (trials == 0) {
    ctx.vacuous(name);
    return;
  }
  const CostModel linear = policy_cost_model({PolicyKind::GreedyUnpadded, 0, 0.0});
  std::mt19937_64 rng(ctx.options.caps.seed);
  long checked = 0;

  const auto violates = [&](int d, const std::vector<SeqItem>& items,
                            std::string& dump) -> bool {
    const double objective = ctx.options.inject_fault
                                 ? corrupted_greedy_objective(d, items)
                                 : balance_greedy_unpadded(d, items).objective_value;
    const double optimum = oracle_optimal(d, items, linear).objective;
    ++checked;
    if (objective <= 4.0 / 3.0 * optimum + 1e-9) return false;
    std::ostringstream out;
    out << "d=" << d << " lengths=" << join_lengths(items) << " objective=" << objective
        << " optimum=" << optimum;
    dump = out.str();
    return true;
  };

  std::string dump;
  for (int trial = 0; trial < trials; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 12);
    if (violates(d, random_items(rng, n, d, 1, 50), dump)) {
      ctx.fail(name, dump);
      return;
    }
  }

  // Exhaustive small instances: every length multiset over [1,6], n <= 8.
  std::vector<std::int64_t> lengths;
  const auto sweep = [&](auto&& self, std::int64_t max_next) -> bool {
    if (!lengths.empty()) {
      std::vector<SeqItem> items;
      for (std::size_t i = 0; i < lengths.size(); ++i) {
        items.push_back({static_cast<std::int64_t>(i), "m", 0, lengths[i], 0});
      }
      for (int d = 2; d <= 4; ++d) {
        if (violates(d, items, dump)) return false;
      }
    }
    if (lengths.size() == 8) return true;
    for (std::int64_t next = 1; next <= max_next; ++next) {
      lengths.push_back(next);
      if (!self(self, next)) return false;
      lengths.pop_back();
    }
    return true;
  };
  if (!sweep(sweep, 6)) {
    ctx.fail(name, dump);
    return;
  }
  ctx.pass(name, std::to_string(checked) + " instances, zero violations");
}

void check_padded_minimality(CheckContext& ctx) {
  const std::string name = "padded bound minimality";
  const int trials = ctx.options.caps.padded_trials;
  if (trials == 0) {
    ctx.vacuous(name);
    return;
  }
  const CostModel padded = policy_cost_model({PolicyKind::BinaryPadded, 0, 0.0});
  std::mt19937_64 rng(ctx.options.caps.seed + 1);
  for (int trial = 0; trial < trials; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 10);
    auto items = random_items(rng, n, d, 1, 30);
    const std::int64_t bound = min_feasible_padded_bound(d, items);
    const bool feasible = padded_bound_feasible(d, items, bound);
    const bool below_infeasible = !padded_bound_feasible(d, items, bound - 1);
    const double objective = balance_binary_padded(d, items).objective_value;
    const double optimum = oracle_optimal(d, items, padded).objective;
    if (!feasible || !below_infeasible || objective > 4.0 / 3.0 * optimum + 1e-9) {
      std::ostringstream out;
      out << "d=" << d << " lengths=" << join_lengths(items) << " bound=" << bound
          << " feasible=" << feasible << " below_infeasible=" << below_infeasible
          << " objective=" << objective << " optimum=" << optimum;
      ctx.fail(name, out.str());
      return;
    }
  }
  ctx.pass(name, std::to_string(trials) + " trials, zero violations");
}

std::int64_t exhaustive_hosting(const VolumeMatrix& volumes, const ClusterTopology& topo) {
  const int d = topo.instance_count;
  std::vector<int> hosting(d, -1);
  std::vector<int> room(topo.node_count(), topo.instances_per_node);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  const auto recurse = [&](auto&& self, int batch) -> void {
    if (batch == d) {
      const auto egress = inter_node_egress(volumes, topo, hosting);
      best = std::min(best, *std::max_element(egress.begin(), egress.end()));
      return;
    }
    for (int node = 0; node < topo.node_count(); ++node) {
      if (room[node] == 0) continue;
      room[node] -= 1;
      hosting[batch] = node;
      self(self, batch + 1);
      hosting[batch] = -1;
      room[node] += 1;
    }
  };
  recurse(recurse, 0);
  return best;
}

void check_nodewise_optimality(CheckContext& ctx) {
  const std::string name = "node-wise hosting optimality";
  const int trials = ctx.options.caps.nodewise_trials;
  if (trials == 0) {
    ctx.vacuous(name);
    return;
  }
  std::mt19937_64 rng(ctx.options.caps.seed + 2);
  const std::pair<int, int> shapes[] = {{4, 2}, {6, 2}, {6, 3}, {8, 2}, {8, 4}};
  for (int trial = 0; trial < trials; ++trial) {
    const auto [d, c] = shapes[rng() % 5];
    ClusterTopology topo{d, c, 4.0, 1.0};
    VolumeMatrix volumes(d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (rng() % 3 != 0) volumes.at(i, j) = static_cast<std::int64_t>(rng() % 40);
      }
    }
    const HostingSolution solution = solve_hosting(volumes, topo);
    const std::int64_t optimum = exhaustive_hosting(volumes, topo);
    const auto identity = inter_node_egress(volumes, topo, identity_hosting(topo));
    const std::int64_t identity_max = *std::max_element(identity.begin(), identity.end());
    if (solution.max_egress != optimum || solution.max_egress > identity_max) {
      std::ostringstream out;
      out << "d=" << d << " c=" << c << " solver=" << solution.max_egress
          << " optimum=" << optimum << " identity=" << identity_max;
      ctx.fail(name, out.str());
      return;
    }
  }
  ctx.pass(name, std::to_string(trials) + " trials, solver equals exhaustive optimum");
}

void check_composition(CheckContext& ctx) {
  const std::string name = "rearrangement composition";
  const int trials = ctx.options.caps.compose_trials;
  if (trials == 0) {
    ctx.vacuous(name);
    return;
  }
  std::mt19937_64 rng(ctx.options.caps.seed + 3);
  for (int trial = 0; trial < trials; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 20);
    auto items = random_items(rng, n, d, 1, 50);
    auto batches = batches_from_items(d, items, PaddingMode::Unpadded);

    const auto random_re = [&]() {
      std::vector<SlotRef> sources;
      for (int i = 0; i < d; ++i) {
        for (int s = 0; s < static_cast<int>(batches[i].items.size()); ++s) {
          sources.push_back({i, s});
        }
      }
      auto destinations = sources;
      std::shuffle(destinations.begin(), destinations.end(), rng);
      std::vector<int> next(d, 0);
      std::map<SlotRef, SlotRef> moves;
      for (std::size_t k = 0; k < sources.size(); ++k) {
        moves[sources[k]] = {destinations[k].instance, next[destinations[k].instance]++};
      }
      return Rearrangement(d, moves);
    };

    const Rearrangement encoder_re = random_re();
    const Rearrangement backbone_re = random_re();
    const auto encoded = apply(encoder_re, batches);

    const auto composed_path = apply(compose(backbone_re, encoder_re), encoded);
    const auto reference_path = apply(backbone_re, apply(inverse(encoder_re), encoded));
    const auto inverse_roundtrip = apply(inverse(encoder_re), encoded);
    bool identity_ok = true;
    for (int i = 0; i < d && identity_ok; ++i) {
      identity_ok = inverse_roundtrip[i].items == batches[i].items;
    }
    if (composed_path != reference_path || !identity_ok) {
      std::ostringstream out;
      out << "d=" << d << " n=" << n << " trial=" << trial
          << (identity_ok ? " composed != reference" : " inverse roundtrip broke");
      ctx.fail(name, out.str());
      return;
    }
  }
  ctx.pass(name, std::to_string(trials) + " random pairs, composed equals reference");
}

}  // namespace

VerifyOutcome run_verification(const VerifyOptions& options) {
  VerifyOutcome outcome;
  CheckContext ctx{options, outcome};
  check_greedy_bound(ctx);
  check_padded_minimality(ctx);
  check_nodewise_optimality(ctx);
  check_composition(ctx);
  return outcome;
}

}  // namespace orchsim
