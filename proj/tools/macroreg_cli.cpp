// Command-line front end. Exit codes: 0 ok, 1 usage/other, 2 netlist parse
// error, 3 infeasible (no legal cell), 4 invalid placement, 5 non-finite loss.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "macroreg/bookshelf.hpp"
#include "macroreg/env.hpp"
#include "macroreg/error.hpp"
#include "macroreg/greedy.hpp"
#include "macroreg/policy.hpp"
#include "macroreg/ppo.hpp"
#include "macroreg/render.hpp"
#include "macroreg/synthetic.hpp"

namespace fs = std::filesystem;
using namespace macroreg;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile:
    case ErrorKind::MalformedLine:
    case ErrorKind::UnresolvedPinOwner:
    case ErrorKind::InvalidNetlist:
      return 2;
    case ErrorKind::NoValidPosition:
    case ErrorKind::InfeasibleAreaBudget:
      return 3;
    case ErrorKind::InvalidInitialPlacement:
    case ErrorKind::MissingInitial:
    case ErrorKind::OutOfCanvas:
    case ErrorKind::CellOccupied:
    case ErrorKind::UnplacedOwner:
      return 4;
    case ErrorKind::NonFiniteLoss:
      return 5;
    default:
      return 1;
  }
}

// Options shared by every command that reads a netlist.
struct Source {
  std::string input;      // .aux path
  std::string synthetic;  // "seed:k:n"
  bool free_fixed = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("input", input, "Bookshelf .aux file");
    cmd->add_option("--synthetic", synthetic, "Generate an instance instead: seed:k:n");
    cmd->add_flag("--free-fixed-macros", free_fixed, "Treat tall fixed nodes as movable macros");
  }

  Netlist load() const {
    if (!synthetic.empty()) {
      SyntheticSpec spec;
      char sep1 = 0, sep2 = 0;
      std::istringstream ss(synthetic);
      if (!(ss >> spec.seed >> sep1 >> spec.k_macros >> sep2 >> spec.n_nets) || sep1 != ':' || sep2 != ':') {
        throw Error(ErrorKind::InvalidConfig, "--synthetic expects seed:k:n");
      }
      return gen_synthetic(spec);
    }
    if (input.empty()) throw Error(ErrorKind::InvalidConfig, "need an input .aux or --synthetic");
    return bookshelf::parse_bundle(input, {free_fixed});
  }

  std::string name() const {
    if (!synthetic.empty()) {
      std::string s = "synthetic-" + synthetic;
      for (char& c : s) c = c == ':' ? '-' : c;
      return s;
    }
    return fs::path(input).stem().string();
  }
};

std::optional<OrderRule> parse_rule(const std::string& s) {
  auto r = order_rule_from(s);
  if (!r) throw Error(ErrorKind::InvalidConfig, "unknown order rule: " + s);
  return r;
}

Blocking parse_blocking(const std::string& s) {
  auto b = blocking_from(s);
  if (!b) throw Error(ErrorKind::InvalidConfig, "unknown blocking rule: " + s);
  return *b;
}

void write_resolved(const CLI::App* cmd, const fs::path& primary) {
  fs::path p = primary;
  p.replace_extension(".config.ini");
  std::ofstream os(p);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + p.string());
  os << cmd->config_to_str(true, false);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

Placement load_pl(const Netlist& netlist, const Canvas& canvas, const std::string& path) {
  const auto pts = bookshelf::read_pl(netlist, path);
  std::vector<Point> flat;
  for (std::size_t m = 0; m < pts.size(); ++m) {
    if (!pts[m]) throw Error(ErrorKind::InvalidInitialPlacement, fmt::format("{} has no position in {}",
                                                                             netlist.macros[m].id, path));
    flat.push_back(*pts[m]);
  }
  return snap_to_grid(canvas, flat);
}

void write_metrics(const fs::path& path, const std::vector<MetricRow>& rows) {
  ensure_parent(path);
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_metrics_header(os);
  for (const auto& r : rows) write_metrics_row(os, r);
}

MetricRow row_for(const std::string& instance, int step, const Netlist& netlist, const Canvas& canvas,
                  const Placement& placement) {
  const Evaluation e = evaluate(netlist, canvas, placement);
  return {instance, step, e.hpwl, e.regularity, e.regularity_mean};
}

using Chooser = std::function<int(const Observation&)>;

// One episode driven by `choose`; optionally logs the transcript.
Placement run_episode(Env& env, const Chooser& choose, const std::optional<Placement>& initial,
                      std::ostream* transcript) {
  env.reset(initial);
  while (!env.done()) {
    const Observation& obs = env.observation();
    const int action = choose(obs);
    const int step = env.steps_taken();
    const std::string id = env.netlist().macros[obs.macro].id;
    const StepResult r = env.step(action);
    if (r.invalid_action) throw Error(ErrorKind::NoValidPosition, "chosen cell is not legal");
    if (transcript) write_transcript_line(*transcript, step, id, action, r);
  }
  return env.placement();
}

struct GridOpt {
  int n = Canvas::kDefaultGrid;
  CLI::Option* opt = nullptr;
  void add_to(CLI::App* cmd) { opt = cmd->add_option("--grid", n, "Grid size N")->check(CLI::PositiveNumber); }
  bool given() const { return opt && opt->count() > 0; }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid macro placement and regulation"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // parse
  Source parse_src;
  bool parse_dump = false;
  auto* parse = app.add_subcommand("parse", "Read a Bookshelf bundle and print a summary");
  parse_src.add_to(parse);
  parse->add_flag("--dump", parse_dump, "Print the full structural dump");

  // gen
  SyntheticSpec gen_spec;
  std::string gen_dir = ".", gen_name = "synthetic";
  bool gen_initial = false;
  auto* gen = app.add_subcommand("gen", "Write a synthetic instance as a Bookshelf bundle");
  gen->add_option("--seed", gen_spec.seed);
  gen->add_option("--k", gen_spec.k_macros, "Macro count")->check(CLI::PositiveNumber);
  gen->add_option("--nets", gen_spec.n_nets, "Net count")->check(CLI::NonNegativeNumber);
  gen->add_option("--width", gen_spec.canvas_width);
  gen->add_option("--height", gen_spec.canvas_height);
  gen->add_option("--out-dir", gen_dir);
  gen->add_option("--name", gen_name);
  gen->add_flag("--with-initial", gen_initial, "Store a greedy placement in the .pl");

  // place
  Source place_src;
  GridOpt place_grid;
  double place_alpha = 1.0;
  std::string place_rule = "area-then-nets", place_out = "place.pl", place_metrics;
  auto* place = app.add_subcommand("place", "Greedy placement from an empty canvas");
  place_src.add_to(place);
  place_grid.add_to(place);
  place->add_option("--alpha", place_alpha)->check(CLI::Range(0.0, 1.0));
  place->add_option("--order", place_rule);
  place->add_option("--out", place_out, ".pl output");
  place->add_option("--metrics", place_metrics, "Metrics CSV (default: <out>.csv)");

  // regulate
  Source reg_src;
  GridOpt reg_grid;
  double reg_alpha = EnvConfig::kDefaultAlpha;
  int reg_passes = 1;
  std::string reg_init = "greedy", reg_policy = "greedy", reg_rule = "area-then-nets", reg_out = "regulate.pl",
              reg_metrics, reg_transcript;
  std::string reg_blocking = "all";
  bool reg_no_regular = false;
  auto* regulate = app.add_subcommand("regulate", "Refine an existing placement one macro at a time");
  reg_src.add_to(regulate);
  reg_grid.add_to(regulate);
  regulate->add_option("--init", reg_init, ".pl file or \"greedy\"");
  regulate->add_option("--policy", reg_policy, "Checkpoint file or \"greedy\"");
  regulate->add_option("--alpha", reg_alpha)->check(CLI::Range(0.0, 1.0));
  regulate->add_option("--passes", reg_passes)->check(CLI::NonNegativeNumber);
  regulate->add_option("--order", reg_rule);
  regulate->add_option("--blocking", reg_blocking, "\"all\" placed macros block, or only \"adjusted\" ones");
  regulate->add_flag("--no-regular-mask", reg_no_regular);
  regulate->add_option("--out", reg_out);
  regulate->add_option("--metrics", reg_metrics);
  regulate->add_option("--transcript", reg_transcript, "Per-step log");

  // train
  Source train_src;
  GridOpt train_grid;
  train_grid.n = 32;
  EnvConfig train_env;
  PPOConfig ppo;
  ppo.episodes = 200;
  std::string train_init = "greedy", train_rule = "area-then-nets", train_dir = "train";
  std::string train_mode = "regulate", train_blocking = "all";
  int max_macros = 64;
  auto* trainc = app.add_subcommand("train", "PPO training of the regulator policy");
  train_src.add_to(trainc);
  train_grid.add_to(trainc);
  trainc->add_option("--alpha", train_env.alpha)->check(CLI::Range(0.0, 1.0));
  trainc->add_option("--mode", train_mode, "regulate or place");
  trainc->add_option("--init", train_init, ".pl file or \"greedy\" (regulate mode)");
  trainc->add_option("--order", train_rule);
  trainc->add_option("--blocking", train_blocking, "\"all\" or \"adjusted\"");
  trainc->add_flag("!--no-regular-mask", train_env.use_regular_mask);
  trainc->add_flag("!--no-normalize", train_env.normalize_reward);
  trainc->add_option("--seed", ppo.seed);
  trainc->add_option("--episodes", ppo.episodes);
  trainc->add_option("--learning-rate", ppo.learning_rate);
  trainc->add_option("--update-epochs", ppo.update_epochs);
  trainc->add_option("--batch-size", ppo.batch_size);
  trainc->add_option("--buffer-capacity", ppo.buffer_capacity);
  trainc->add_option("--clip-eps", ppo.clip_eps);
  trainc->add_option("--grad-clip-norm", ppo.grad_clip_norm);
  trainc->add_option("--gamma", ppo.gamma);
  trainc->add_option("--entropy-coef", ppo.entropy_coef);
  trainc->add_option("--value-coef", ppo.value_coef);
  trainc->add_option("--episodes-per-update", ppo.episodes_per_update);
  trainc->add_option("--max-macros", max_macros, "Rows of the value head's step embedding");
  trainc->add_option("--out-dir", train_dir);

  // eval
  Source eval_src;
  GridOpt eval_grid;
  std::string eval_pl, eval_metrics;
  auto* evalc = app.add_subcommand("eval", "Report HPWL, regularity and overlap of a placement");
  eval_src.add_to(evalc);
  eval_grid.add_to(evalc);
  evalc->add_option("--placement", eval_pl)->required();
  evalc->add_option("--metrics", eval_metrics);

  // ablate
  Source abl_src;
  GridOpt abl_grid;
  std::string abl_out = "ablate.csv", abl_policy = "greedy";
  int abl_episodes = 50;
  std::uint64_t abl_seed = 0;
  auto* ablate = app.add_subcommand("ablate", "Alpha sweep and regulator variants in one CSV");
  abl_src.add_to(ablate);
  abl_grid.add_to(ablate);
  ablate->add_option("--policy", abl_policy, "\"greedy\" or \"train\"");
  ablate->add_option("--episodes", abl_episodes, "PPO episodes per variant with --policy train");
  ablate->add_option("--seed", abl_seed);
  ablate->add_option("--out", abl_out);

  // render
  Source ren_src;
  GridOpt ren_grid;
  std::string ren_pl, ren_out = "layout.svg";
  RenderOptions ren_opts;
  auto* render = app.add_subcommand("render", "Draw a placement as SVG");
  ren_src.add_to(render);
  ren_grid.add_to(render);
  render->add_option("--placement", ren_pl, ".pl file; omit for terminals only");
  render->add_option("--out", ren_out);
  render->add_flag("--grid-lines", ren_opts.grid_lines);
  render->add_option("--pixels", ren_opts.pixels);

  for (CLI::App* cmd : app.get_subcommands({})) cmd->set_config("--config", "", "key = value configuration file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) {
      const Netlist nl = parse_src.load();
      if (parse_dump) {
        dump_text(std::cout, nl);
      } else {
        std::size_t pins = 0;
        for (const Net& n : nl.nets) pins += n.pins.size();
        fmt::print("macros {}\nterminals {}\nnets {}\npins {}\ncanvas {} x {}\norigin {} {}\n", nl.macros.size(),
                   nl.terminals.size(), nl.nets.size(), pins, nl.canvas_width, nl.canvas_height, nl.origin_x,
                   nl.origin_y);
      }
    } else if (gen->parsed()) {
      Netlist nl = gen_synthetic(gen_spec);
      if (gen_initial) {
        const Canvas canvas = canvas_for(nl);
        const Placement p = greedy_place(nl, canvas.n());
        nl.initial.clear();
        for (const GridPos& g : p) nl.initial.emplace_back(Point{canvas.x_of(g.gx), canvas.y_of(g.gy)});
      }
      fs::create_directories(gen_dir);
      std::cout << bookshelf::write_bundle(nl, gen_dir, gen_name).string() << '\n';
    } else if (place->parsed()) {
      const Netlist nl = place_src.load();
      const Canvas canvas = canvas_for(nl, place_grid.n);
      const Placement p = greedy_place(nl, place_grid.n, place_alpha, *parse_rule(place_rule));
      ensure_parent(place_out);
      bookshelf::write_pl(nl, canvas, p, place_out);
      const fs::path metrics = place_metrics.empty() ? fs::path(place_out).replace_extension(".csv") : fs::path(place_metrics);
      write_metrics(metrics, {row_for(place_src.name(), 0, nl, canvas, p)});
      write_resolved(place, place_out);
    } else if (regulate->parsed()) {
      const Netlist nl = reg_src.load();
      std::optional<Policy> policy;
      if (reg_policy != "greedy") {
        policy.emplace(load_checkpoint(reg_policy));
        if (!reg_grid.given()) reg_grid.n = policy->n();
      }
      EnvConfig cfg;
      cfg.mode = Mode::Regulate;
      cfg.alpha = reg_alpha;
      cfg.n_grid = reg_grid.n;
      cfg.order_rule = *parse_rule(reg_rule);
      cfg.blocking = parse_blocking(reg_blocking);
      cfg.use_regular_mask = !reg_no_regular;
      Env env(nl, cfg);
      const Canvas& canvas = env.canvas();
      Placement current = reg_init == "greedy" ? greedy_place(nl, cfg.n_grid, 1.0, cfg.order_rule)
                                               : load_pl(nl, canvas, reg_init);
      if (!overlap_free(nl, canvas, current)) {
        throw Error(ErrorKind::InvalidInitialPlacement, "starting placement has overlapping blocks");
      }
      Chooser choose = [&](const Observation& obs) {
        if (!policy) return greedy_act(obs, reg_alpha);
        return argmax_action(policy->forward(make_input(obs)).logits);
      };
      std::ofstream transcript;
      if (!reg_transcript.empty()) {
        ensure_parent(reg_transcript);
        transcript.open(reg_transcript);
        write_transcript_header(transcript);
      }
      std::vector<MetricRow> rows{row_for(reg_src.name(), 0, nl, canvas, current)};
      for (int pass = 1; pass <= reg_passes; ++pass) {
        current = run_episode(env, choose, current, transcript.is_open() ? &transcript : nullptr);
        rows.push_back(row_for(reg_src.name(), pass, nl, canvas, current));
      }
      ensure_parent(reg_out);
      bookshelf::write_pl(nl, canvas, current, reg_out);
      write_metrics(reg_metrics.empty() ? fs::path(reg_out).replace_extension(".csv") : fs::path(reg_metrics), rows);
      write_resolved(regulate, reg_out);
    } else if (trainc->parsed()) {
      const Netlist nl = train_src.load();
      const auto mode = mode_from(train_mode);
      if (!mode) throw Error(ErrorKind::InvalidConfig, "unknown mode: " + train_mode);
      train_env.mode = *mode;
      train_env.n_grid = train_grid.n;
      train_env.order_rule = *parse_rule(train_rule);
      train_env.blocking = parse_blocking(train_blocking);
      train_env.seed = ppo.seed;
      const Canvas canvas = canvas_for(nl, train_grid.n);
      std::optional<Placement> initial;
      if (train_env.mode == Mode::Regulate) {
        initial = train_init == "greedy" ? greedy_place(nl, train_grid.n, 1.0, train_env.order_rule)
                                         : load_pl(nl, canvas, train_init);
      }
      Policy policy(PolicyConfig{train_grid.n, max_macros, ppo.seed});
      const fs::path dir = train_dir;
      fs::create_directories(dir);
      const TrainResult result = train(policy, nl, train_env, ppo, initial);
      policy.params() = result.best_params;
      save_checkpoint(policy, dir / "policy.ckpt");
      std::ofstream curve(dir / "curve.csv");
      write_curve(curve, result.curve);
      if (result.best) {
        bookshelf::write_pl(nl, canvas, result.best->placement, dir / "best.pl");
        std::vector<MetricRow> rows;
        if (initial) rows.push_back(row_for(train_src.name(), 0, nl, canvas, *initial));
        rows.push_back(row_for(train_src.name(), static_cast<int>(result.curve.size()), nl, canvas,
                               result.best->placement));
        write_metrics(dir / "metrics.csv", rows);
      }
      write_resolved(trainc, dir / "train");
    } else if (evalc->parsed()) {
      const Netlist nl = eval_src.load();
      const Canvas canvas = canvas_for(nl, eval_grid.n);
      const Placement p = load_pl(nl, canvas, eval_pl);
      const bool ok = overlap_free(nl, canvas, p);
      const Evaluation e = evaluate(nl, canvas, p);
      fmt::print("hpwl {}\nregularity_total {}\nregularity_mean {}\noverlap_free {}\n", e.hpwl, e.regularity,
                 e.regularity_mean, ok ? "true" : "false");
      if (!eval_metrics.empty()) write_metrics(eval_metrics, {row_for(eval_src.name(), 0, nl, canvas, p)});
      if (!ok) return 4;
    } else if (ablate->parsed()) {
      const Netlist nl = abl_src.load();
      const int n = abl_grid.given() ? abl_grid.n : (abl_policy == "train" ? 32 : abl_grid.n);
      const Canvas canvas = canvas_for(nl, n);
      const Placement start = greedy_place(nl, n);

      struct Variant {
        std::string name;
        EnvConfig cfg;
      };
      std::vector<Variant> variants;
      const auto make = [&](std::string name, Mode mode, double alpha, bool reg, bool norm) {
        EnvConfig c;
        c.mode = mode;
        c.alpha = alpha;
        c.n_grid = n;
        c.seed = abl_seed;
        c.use_regular_mask = reg;
        c.normalize_reward = norm;
        variants.push_back({std::move(name), c});
      };
      for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) make("alpha", Mode::Regulate, a, true, true);
      make("vanilla", Mode::Regulate, 1.0, false, true);
      make("no-norm", Mode::Regulate, EnvConfig::kDefaultAlpha, true, false);
      make("placer+regular", Mode::Place, EnvConfig::kDefaultAlpha, true, true);

      ensure_parent(abl_out);
      std::ofstream os(abl_out);
      if (!os) throw Error(ErrorKind::Io, "cannot write " + abl_out);
      os << "variant,alpha,hpwl,regularity_total,regularity_mean\n";
      fmt::print(os, "initial,,{},{},{}\n", evaluate(nl, canvas, start).hpwl, evaluate(nl, canvas, start).regularity,
                 evaluate(nl, canvas, start).regularity_mean);
      for (const Variant& v : variants) {
        const std::optional<Placement> init = v.cfg.mode == Mode::Regulate ? std::optional(start) : std::nullopt;
        Placement out;
        if (abl_policy == "train") {
          PPOConfig pc;
          pc.episodes = abl_episodes;
          pc.seed = abl_seed;
          Policy pol(PolicyConfig{n, 64, abl_seed});
          const TrainResult r = train(pol, nl, v.cfg, pc, init);
          if (!r.best) throw Error(ErrorKind::InvalidConfig, "--episodes must be positive with --policy train");
          out = r.best->placement;
        } else if (abl_policy == "greedy") {
          Env env(nl, v.cfg);
          out = run_greedy(env, v.cfg.alpha, init).placement;
        } else {
          throw Error(ErrorKind::InvalidConfig, "--policy must be greedy or train");
        }
        const Evaluation e = evaluate(nl, canvas, out);
        fmt::print(os, "{},{},{},{},{}\n", v.name, v.cfg.alpha, e.hpwl, e.regularity, e.regularity_mean);
      }
      write_resolved(ablate, abl_out);
    } else if (render->parsed()) {
      const Netlist nl = ren_src.load();
      const Canvas canvas = canvas_for(nl, ren_grid.n);
      const Placement p = ren_pl.empty() ? Placement{} : load_pl(nl, canvas, ren_pl);
      ensure_parent(ren_out);
      render_svg(fs::path(ren_out), nl, canvas, p, ren_opts);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
