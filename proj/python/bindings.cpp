#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "macroreg/bookshelf.hpp"
#include "macroreg/env.hpp"
#include "macroreg/error.hpp"
#include "macroreg/greedy.hpp"
#include "macroreg/synthetic.hpp"

namespace py = pybind11;
using namespace macroreg;

namespace {

using Cells = std::vector<std::pair<int, int>>;

Placement to_placement(const Cells& cells) {
  Placement p;
  p.reserve(cells.size());
  for (auto [gx, gy] : cells) p.push_back({gx, gy});
  return p;
}

Cells to_cells(const Placement& p) {
  Cells out;
  out.reserve(p.size());
  for (const GridPos& g : p) out.emplace_back(g.gx, g.gy);
  return out;
}

// N x N array indexed [gy, gx]; invalid cells become NaN.
py::array_t<double> to_array(const Mask& m) {
  py::array_t<double> a({m.n, m.n});
  auto v = a.mutable_unchecked<2>();
  for (int gy = 0; gy < m.n; ++gy)
    for (int gx = 0; gx < m.n; ++gx) {
      const double x = m.at(gx, gy);
      v(gy, gx) = Mask::valid(x) ? x : std::numeric_limits<double>::quiet_NaN();
    }
  return a;
}

py::dict observation_dict(const Observation& o) {
  py::dict d;
  if (o.position.n == 0) return d;
  d["canvas"] = to_array(o.canvas_image);
  d["position"] = to_array(o.position);
  d["wire_raw"] = to_array(o.wire_raw);
  d["wire_norm"] = to_array(o.wire_norm);
  d["regular_raw"] = to_array(o.regular_raw);
  d["regular_norm"] = to_array(o.regular_norm);
  d["macro"] = o.macro;
  d["macro_index"] = o.macro_index;
  d["valid_cells"] = o.valid_cells;
  return d;
}

Mode mode_of(const std::string& name) {
  auto m = mode_from(name);
  if (!m) throw Error(ErrorKind::InvalidConfig, "unknown mode: " + name);
  return *m;
}

}  // namespace

PYBIND11_MODULE(_macroreg, m) {
  m.doc() = "Grid macro placement and regulation";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<Netlist>(m, "Netlist")
      .def_readonly("canvas_width", &Netlist::canvas_width)
      .def_readonly("canvas_height", &Netlist::canvas_height)
      .def_property_readonly("num_macros", &Netlist::num_macros)
      .def_property_readonly("num_terminals", [](const Netlist& n) { return n.terminals.size(); })
      .def_property_readonly("num_nets", [](const Netlist& n) { return n.nets.size(); })
      .def_property_readonly("macro_ids",
                             [](const Netlist& n) {
                               std::vector<std::string> ids;
                               for (const Macro& mac : n.macros) ids.push_back(mac.id);
                               return ids;
                             })
      .def("dump", [](const Netlist& n) { return dump_text(n); })
      .def("structural_hash", [](const Netlist& n) { return structural_hash(n); })
      .def("__eq__", [](const Netlist& a, const Netlist& b) { return a == b; });

  m.def(
      "gen_synthetic",
      [](std::uint64_t seed, int k, int nets, double width, double height) {
        return gen_synthetic({seed, k, nets, width, height});
      },
      py::arg("seed"), py::arg("k"), py::arg("nets"), py::arg("width") = 1000.0, py::arg("height") = 1000.0);
  m.def("scale_netlist", &scale_netlist, py::arg("netlist"), py::arg("factor"));
  m.def(
      "parse_bundle",
      [](const std::filesystem::path& aux, bool free_fixed) { return bookshelf::parse_bundle(aux, {free_fixed}); },
      py::arg("aux"), py::arg("free_fixed_macros") = false);

  m.def(
      "greedy_place",
      [](const Netlist& n, int grid, double alpha) { return to_cells(greedy_place(n, grid, alpha)); },
      py::arg("netlist"), py::arg("grid") = 32, py::arg("alpha") = 1.0);
  m.def(
      "evaluate",
      [](const Netlist& n, int grid, const Cells& cells) {
        const Evaluation e = evaluate(n, canvas_for(n, grid), to_placement(cells));
        py::dict d;
        d["hpwl"] = e.hpwl;
        d["regularity_total"] = e.regularity;
        d["regularity_mean"] = e.regularity_mean;
        return d;
      },
      py::arg("netlist"), py::arg("grid"), py::arg("placement"));
  m.def(
      "overlap_free",
      [](const Netlist& n, int grid, const Cells& cells) {
        return overlap_free(n, canvas_for(n, grid), to_placement(cells));
      },
      py::arg("netlist"), py::arg("grid"), py::arg("placement"));
  m.def(
      "run_greedy",
      [](const Netlist& n, int grid, double alpha, const std::string& mode, std::optional<Cells> initial) {
        EnvConfig cfg;
        cfg.mode = mode_of(mode);
        cfg.n_grid = grid;
        cfg.alpha = alpha;
        Env env(n, cfg);
        std::optional<Placement> init;
        if (initial) init = to_placement(*initial);
        const EpisodeRecord rec = run_greedy(env, alpha, init);
        py::dict d;
        d["placement"] = to_cells(rec.placement);
        d["hpwl"] = rec.hpwl;
        d["regularity"] = rec.regularity;
        d["initial_hpwl"] = rec.initial_hpwl;
        std::vector<int> actions;
        for (const StepLog& s : rec.steps) actions.push_back(s.action);
        d["actions"] = actions;
        return d;
      },
      py::arg("netlist"), py::arg("grid") = 32, py::arg("alpha") = EnvConfig::kDefaultAlpha,
      py::arg("mode") = "regulate", py::arg("initial") = std::nullopt);

  py::class_<Env>(m, "Env")
      .def(py::init([](const Netlist& n, const std::string& mode, int grid, double alpha, const std::string& blocking) {
             EnvConfig cfg;
             cfg.mode = mode_of(mode);
             cfg.n_grid = grid;
             cfg.alpha = alpha;
             auto b = blocking_from(blocking);
             if (!b) throw Error(ErrorKind::InvalidConfig, "unknown blocking rule: " + blocking);
             cfg.blocking = *b;
             return Env(n, cfg);
           }),
           py::arg("netlist"), py::arg("mode") = "regulate", py::arg("grid") = 32,
           py::arg("alpha") = EnvConfig::kDefaultAlpha, py::arg("blocking") = "all")
      .def(
          "reset",
          [](Env& e, std::optional<Cells> initial) {
            std::optional<Placement> init;
            if (initial) init = to_placement(*initial);
            return observation_dict(e.reset(init));
          },
          py::arg("initial") = std::nullopt)
      .def("step",
           [](Env& e, int action) {
             const StepResult r = e.step(action);
             py::dict d;
             d["observation"] = observation_dict(r.observation);
             d["reward"] = r.reward;
             d["r_wire"] = r.r_wire;
             d["r_reg"] = r.r_reg;
             d["done"] = r.done;
             d["invalid_action"] = r.invalid_action;
             d["macro"] = r.macro;
             d["cell"] = std::pair(r.cell.gx, r.cell.gy);
             d["hpwl"] = r.hpwl;
             d["regularity"] = r.regularity;
             return d;
           })
      .def("greedy_action", [](const Env& e, double alpha) { return greedy_act(e.observation(), alpha); })
      .def_property_readonly("observation", [](const Env& e) { return observation_dict(e.observation()); })
      .def_property_readonly("done", &Env::done)
      .def_property_readonly("episode_length", &Env::episode_length)
      .def_property_readonly("order", [](const Env& e) { return std::vector<int>(e.order().begin(), e.order().end()); })
      .def("placement", [](const Env& e) { return to_cells(e.placement()); });
}
