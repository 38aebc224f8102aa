// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <fmt/ranges.h>

#include "macroreg/bookshelf.hpp"
#include "macroreg/env.hpp"
#include "macroreg/greedy.hpp"
#include "macroreg/policy.hpp"
#include "macroreg/ppo.hpp"
#include "macroreg/synthetic.hpp"
#include "oracles.hpp"

using namespace macroreg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

EnvConfig config(Mode mode, int n, double alpha = EnvConfig::kDefaultAlpha) {
  EnvConfig c;
  c.mode = mode;
  c.n_grid = n;
  c.alpha = alpha;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Positions of every placed macro except `skip`.
oracle::Partial others(const PlacementState& s, int skip) {
  oracle::Partial p(s.num_macros());
  for (int i = 0; i < s.num_macros(); ++i)
    if (i != skip) p[i] = s.position(i);
  return p;
}

Placement start_for(const Netlist& nl, int n, Rng& rng) {
  if (auto p = oracle::random_legal(nl, n, rng)) return *p;
  return greedy_place(nl, n);
}

Outcome wire_mask_oracle() {
  const auto t0 = Clock::now();
  long cells = 0, bad = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Netlist nl = gen_synthetic({seed, 1 + static_cast<int>(seed % 8), static_cast<int>(seed % 13)});
    Rng rng(seed + 1000);
    for (Mode mode : {Mode::Place, Mode::Regulate}) {
      Env env(nl, config(mode, 16));
      env.reset(mode == Mode::Regulate ? std::optional(start_for(nl, 16, rng)) : std::nullopt);
      const Canvas& c = env.canvas();
      while (!env.done()) {
        const Observation& obs = env.observation();
        const int m = obs.macro;
        oracle::Partial pos = others(env.state(), m);
        double base = oracle::hpwl(nl, c, pos);
        if (mode == Mode::Regulate) {
          pos[m] = env.state().previous(m);
          base = oracle::hpwl(nl, c, pos);
        }
        for (int cell = 0; cell < c.cells(); ++cell) {
          if (obs.position.values[cell] == 0.0) continue;
          pos[m] = c.pos(cell);
          ++cells;
          if (obs.wire_raw.values[cell] != oracle::hpwl(nl, c, pos) - base) ++bad;
        }
        const int a = oracle::random_valid(obs, rng);
        if (a < 0) break;
        env.step(a);
      }
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 30.0, fmt::format("{} cells checked, {} mismatches, {:.2f} s", cells, bad, secs)};
}

Outcome incremental_equals_full() {
  const Netlist nl = gen_synthetic({7, 8, 12});
  Rng rng(7);
  Env env(nl, config(Mode::Regulate, 32));
  Placement start = start_for(nl, 32, rng);
  int steps = 0, bad = 0;
  while (steps < 1000) {
    env.reset(start);
    while (!env.done() && steps < 1000) {
      const StepResult r = env.step(oracle::random_valid(env.observation(), rng));
      ++steps;
      const Placement now = env.placement();
      if (r.hpwl != hpwl_total(nl, env.canvas(), now) || r.hpwl != oracle::hpwl(nl, env.canvas(), now)) ++bad;
    }
    start = env.placement();
  }
  return {bad == 0, fmt::format("{} steps, {} mismatches", steps, bad)};
}

Outcome zero_overlap() {
  int done = 0, overlaps = 0, dead_ends = 0;
  std::uint64_t seed = 0;
  while (done < 1000) {
    // Place, then Regulate under both blocking rules.
    const Mode mode = seed % 3 ? Mode::Regulate : Mode::Place;
    EnvConfig cfg = config(mode, 32);
    cfg.blocking = seed % 3 == 2 ? Blocking::AdjustedOnly : Blocking::AllPlaced;
    const Netlist nl = gen_synthetic({seed, 2 + static_cast<int>(seed % 11), 4 + static_cast<int>(seed % 9)});
    Rng rng(seed * 31 + 5);
    ++seed;
    Env env(nl, cfg);
    env.reset(mode == Mode::Regulate ? std::optional(start_for(nl, 32, rng)) : std::nullopt);
    bool stuck = false;
    while (!env.done()) {
      const int a = oracle::random_valid(env.observation(), rng);
      if (a < 0) {
        stuck = true;
        break;
      }
      env.step(a);
    }
    if (stuck) {
      ++dead_ends;
      continue;
    }
    ++done;
    const Placement p = env.placement();
    const bool lib = overlap_free(nl, env.canvas(), p) && overlap_free(env.state(), nl);
    if (!lib || !oracle::overlap_free(nl, env.canvas(), p)) ++overlaps;
  }
  return {overlaps == 0,
          fmt::format("{} episodes, {} with overlap, {} dead-ends skipped", done, overlaps, dead_ends)};
}

// Regulate greedily and count steps where `metric` went up.
Outcome greedy_monotone(double alpha, bool wire) {
  int episodes = 0, rises = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Netlist nl = gen_synthetic({seed + 500, 4 + static_cast<int>(seed % 9), 6 + static_cast<int>(seed % 15)});
    Rng rng(seed);
    for (const Placement& init : {greedy_place(nl, 32), start_for(nl, 32, rng)}) {
      Env env(nl, config(Mode::Regulate, 32, alpha));
      const EpisodeRecord rec = run_greedy(env, alpha, init);
      ++episodes;
      double prev = wire ? rec.initial_hpwl : regularity_total(env.canvas(), init).total;
      for (const StepLog& s : rec.steps) {
        const double now = wire ? s.hpwl : s.regularity;
        if (now > prev) {
          ++rises;
          worst = std::max(worst, now - prev);
        }
        prev = now;
      }
    }
  }
  return {rises == 0, fmt::format("{} episodes, {} rising steps (largest {})", episodes, rises, worst)};
}

struct TrainingRun {
  std::vector<double> finals;
  double initial = 0.0;
  double random_median = 0.0;
  double seconds = 0.0;
  long steps = 0, out_of_range = 0;
  double lo = 1e300, hi = -1e300, wlo = 1e300, whi = -1e300;
};

const Netlist& chip42() {
  static const Netlist nl = gen_synthetic({42, 10, 20});
  return nl;
}

const TrainingRun& training_run() {
  static const TrainingRun run = [] {
    TrainingRun tr;
    const Netlist& nl = chip42();
    const Placement init = greedy_place(nl, 32);
    tr.initial = hpwl_total(nl, canvas_for(nl, 32), init);

    Rng rng(4242);
    std::vector<double> random;
    while (random.size() < 100) {
      if (auto p = oracle::random_legal(nl, 32, rng)) random.push_back(oracle::hpwl(nl, canvas_for(nl, 32), *p));
    }
    tr.random_median = median(random);

    TrainHooks hooks;
    hooks.on_step = [&tr](const Observation& obs, const StepResult& r) {
      ++tr.steps;
      for (double v : {r.r_wire, r.r_reg, r.reward}) {
        tr.lo = std::min(tr.lo, v);
        tr.hi = std::max(tr.hi, v);
        if (!(v >= 0.0 && v <= 1.0)) ++tr.out_of_range;
      }
      for (std::size_t i = 0; i < obs.wire_norm.values.size(); ++i) {
        if (obs.position.values[i] == 0.0) continue;
        const double v = obs.wire_norm.values[i];
        tr.wlo = std::min(tr.wlo, v);
        tr.whi = std::max(tr.whi, v);
        if (!(v >= -1.0 && v <= 1.0)) ++tr.out_of_range;
      }
    };
    const auto t0 = Clock::now();
    for (std::uint64_t seed : {0, 1, 2}) {
      PPOConfig cfg;
      cfg.episodes = 200;
      cfg.seed = seed;
      PolicyConfig pc;
      pc.n_grid = 32;
      pc.seed = seed;
      Policy policy(pc);
      const TrainResult res = train(policy, nl, config(Mode::Regulate, 32, 0.7), cfg, init, hooks);
      tr.finals.push_back(res.best->hpwl);
      policy.params() = res.best_params;
      Env env(nl, config(Mode::Regulate, 32, 0.7));
      const double greedy_policy = run_policy(env, policy, init).hpwl;
      fmt::print("  seed {}: best episode HPWL {} (last episode {}, argmax rollout of best params {})\n", seed,
                 res.best->hpwl, res.curve.back().hpwl, greedy_policy);
    }
    tr.seconds = seconds_since(t0);
    return tr;
  }();
  return run;
}

Outcome training_efficacy() {
  const TrainingRun& tr = training_run();
  const bool each = std::all_of(tr.finals.begin(), tr.finals.end(), [&](double f) { return f <= tr.initial; });
  const double med = median(tr.finals);
  const bool margin = med <= 0.95 * tr.random_median;
  return {each && margin && tr.seconds < 900.0,
          fmt::format("initial {}, finals [{}, {}, {}], median {} vs 0.95 x random median {} = {}, {:.0f} s",
                      tr.initial, tr.finals[0], tr.finals[1], tr.finals[2], med, tr.random_median,
                      0.95 * tr.random_median, tr.seconds)};
}

Outcome normalization_ranges() {
  const TrainingRun& tr = training_run();
  return {tr.out_of_range == 0 && tr.steps > 0,
          fmt::format("{} steps, rewards in [{}, {}], wire_norm in [{}, {}], {} out of range", tr.steps, tr.lo, tr.hi,
                      tr.wlo, tr.whi, tr.out_of_range)};
}

Outcome scale_invariance() {
  int compared = 0, differ = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Netlist nl = gen_synthetic({seed + 900, 3 + static_cast<int>(seed % 8), 5 + static_cast<int>(seed % 10)});
    const Netlist big = scale_netlist(nl, 7.0);
    for (Mode mode : {Mode::Place, Mode::Regulate}) {
      std::vector<int> seq[2];
      int i = 0;
      for (const Netlist* n : {&nl, &big}) {
        Env env(*n, config(mode, 32));
        const auto init = mode == Mode::Regulate ? std::optional(greedy_place(*n, 32)) : std::nullopt;
        for (const StepLog& s : run_greedy(env, 0.7, init).steps) seq[i].push_back(s.action);
        ++i;
      }
      ++compared;
      if (seq[0] != seq[1]) ++differ;
    }
  }
  return {differ == 0, fmt::format("{} episode pairs, {} differ", compared, differ)};
}

Outcome parser_round_trip() {
  const fs::path dir = fs::temp_directory_path() / "macroreg_acceptance_rt";
  fs::remove_all(dir);
  int ok = 0, total = 0;
  const auto check = [&](const Netlist& nl, const std::string& name) {
    ++total;
    const Netlist once = bookshelf::parse_bundle(bookshelf::write_bundle(nl, dir, name));
    const Netlist twice = bookshelf::parse_bundle(bookshelf::write_bundle(once, dir, name + "_2"));
    if (once == nl && twice == once) ++ok;
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Netlist nl = gen_synthetic({seed, 1 + static_cast<int>(seed % 12), static_cast<int>(seed % 17)});
    Rng rng(seed);
    const Placement p = start_for(nl, 32, rng);
    const Canvas c = canvas_for(nl, 32);
    for (std::size_t m = 0; m < p.size(); ++m) nl.initial[m] = Point{c.x_of(p[m].gx), c.y_of(p[m].gy)};
    check(nl, "syn" + std::to_string(seed));
  }
  check(bookshelf::parse_bundle(fs::path(MACROREG_TEST_DATA) / "tiny.aux"), "tiny");
  fs::remove_all(dir);
  return {ok == total, fmt::format("{}/{} bundles identical after parse . write . parse", ok, total)};
}

Outcome alpha_tradeoff() {
  const Netlist& nl = chip42();
  const Placement init = greedy_place(nl, 32);
  std::vector<double> h, r;
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Env env(nl, config(Mode::Regulate, 32, alpha));
    const EpisodeRecord rec = run_greedy(env, alpha, init);
    h.push_back(rec.hpwl);
    r.push_back(rec.regularity);
  }
  int hinv = 0, rinv = 0;
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1]) ++hinv;
    if (r[i] < r[i - 1]) ++rinv;
  }
  return {hinv <= 1 && rinv <= 1, fmt::format("hpwl [{}], regularity [{}], inversions {} / {}", fmt::join(h, ", "),
                                              fmt::join(r, ", "), hinv, rinv)};
}

Outcome vanilla_ablation() {
  int wins = 0;
  std::vector<std::string> rows;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Netlist nl = gen_synthetic({seed + 300, 6 + static_cast<int>(seed % 5), 10 + static_cast<int>(seed % 11)});
    const Placement placed = greedy_place(nl, 32);
    const double before = hpwl_total(nl, canvas_for(nl, 32), placed);
    Env env(nl, config(Mode::Regulate, 32, 1.0));
    const double after = run_greedy(env, 1.0, placed).hpwl;
    if (after <= before) ++wins;
    rows.push_back(fmt::format("{}->{}", before, after));
  }
  return {wins >= 8, fmt::format("{}/10 chips not worse ({})", wins, fmt::join(rows, " "))};
}

Outcome gradient_check() {
  const Netlist nl = gen_synthetic({12, 3, 5});
  EnvConfig ec = config(Mode::Regulate, 8);
  Env env(nl, ec);
  env.reset(greedy_place(nl, 8));
  PolicyConfig pc;
  pc.n_grid = 8;
  pc.max_macros = 4;
  pc.seed = 12;
  Policy policy(pc);
  PPOConfig cfg;

  std::vector<Transition> ts;
  Rng rng(12);
  while (!env.done()) {
    Transition t;
    t.input = make_input(env.observation());
    const auto p = softmax(policy.forward(t.input).logits);
    t.action = sample_action(p, rng);
    t.log_prob = std::log(p[t.action]) + 0.1 * (static_cast<double>(ts.size()) - 1.0);
    env.step(t.action);
    ts.push_back(std::move(t));
  }
  const std::vector<Sample> batch{{&ts[0], 0.8, 1.1}, {&ts[1], -0.4, -0.6}, {&ts[2], 0.2, 0.5}};

  std::vector<double> params = policy.params();
  std::vector<double> grads(params.size(), 0.0);
  ppo_loss(policy, params, batch, cfg, grads);

  int probes = 0, bad = 0;
  double worst = 0.0;
  std::set<std::size_t> seen;
  while (probes < 40) {
    const std::size_t j = rng.below(params.size());
    if (!seen.insert(j).second) continue;
    const double h = 1e-6, keep = params[j];
    params[j] = keep + h;
    const double up = ppo_loss(policy, params, batch, cfg).loss;
    params[j] = keep - h;
    const double down = ppo_loss(policy, params, batch, cfg).loss;
    params[j] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(grads[j]), 1e-8});
    const double rel = std::abs(fd - grads[j]) / scale;
    worst = std::max(worst, rel);
    if (rel > 1e-3) ++bad;
    ++probes;
  }
  return {bad == 0 && ts.size() == 3, fmt::format("{} probes, {} beyond 1e-3, worst relative error {:.2e}", probes, bad, worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"wire mask equals full-recompute difference", wire_mask_oracle},
      {"incremental HPWL equals full recompute", incremental_equals_full},
      {"zero overlap", zero_overlap},
      {"greedy alpha=1 never increases HPWL", [] { return greedy_monotone(1.0, true); }},
      {"greedy alpha=0 never increases regularity", [] { return greedy_monotone(0.0, false); }},
      {"toy training efficacy", training_efficacy},
      {"normalization ranges", normalization_ranges},
      {"scale invariance", scale_invariance},
      {"parser round trip", parser_round_trip},
      {"alpha trade-off direction", alpha_tradeoff},
      {"vanilla regulator vs placer", vanilla_ablation},
      {"gradient correctness", gradient_check},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    if (!o.pass) ++failed;
    fmt::print("{} {:2d} {}: {}\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
