#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sshc/core.hpp"
#include "sshc/flip_solver.hpp"
#include "sshc/footprint.hpp"
#include "sshc/io/config.hpp"
#include "sshc/io/csv.hpp"
#include "sshc/io/format.hpp"
#include "sshc/io/svg.hpp"
#include "sshc/sweep.hpp"
#include "sshc/timing.hpp"
#include "sshc/waveform.hpp"

namespace sshc::cli {

namespace {

using io::format_fixed;
using io::format_sig;
using io::format_si;
using json = nlohmann::ordered_json;

const char* const ohm = "\xCE\xA9";
const char* const micro = "\xC2\xB5";
const char* const le = "\xE2\x89\xA4";
const char* const squared = "\xC2\xB2";
const char* const cubed = "\xC2\xB3";

struct Globals {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::string svg_path;
};

struct Context {
  Globals globals;
  io::RunConfig config;
  std::ostream& out;
  std::ostream& err;

  bool json() const { return globals.format == "json"; }

  /// Writes to --out when given, otherwise to stdout.
  void emit(const std::string& text) const {
    if (globals.out_path.empty()) {
      out << text;
      return;
    }
    write_file(globals.out_path, text);
  }

  void write_svg(const std::vector<io::Panel>& panels) const {
    if (!globals.svg_path.empty()) write_file(globals.svg_path, io::render_svg(panels));
  }

  static void write_file(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << text;
  }
};

std::string us(double seconds) { return format_sig(seconds * 1e6, 4) + " " + micro + "s"; }
std::string uw(double watts) { return format_sig(watts * 1e6, 4) + " " + micro + "W"; }
std::string mm2(double area) { return format_sig(area, 4) + " mm" + squared; }
std::string ohms(double r) { return format_sig(r, 4) + " " + ohm; }

// ---------------------------------------------------------------------------

int cmd_efficiency(const Context& ctx, std::optional<int> k_min, std::optional<int> k_max) {
  const auto& c = ctx.config;
  const int lo = k_min.value_or(c.k_min);
  const int hi = k_max.value_or(c.k_max);
  if (lo < 0 || lo > hi) throw std::invalid_argument("efficiency range needs 0 <= k_min <= k_max");

  Table table;
  table.columns = {"k", "eta_iterative", "eta_closed_form"};
  io::Series iterative{"steady-state iteration", {}, {}, "#d62728", false, true};
  io::Series closed{"k/(k+2)", {}, {}, "#1f77b4", true, false};
  for (int k = lo; k <= hi; ++k) {
    const auto config = SshcConfig<>::equal_bank(k, c.source.c_p, c.resolved_r_on(), c.settle_factor);
    const auto flip = steady_state_efficiency(c.source, config, c.settle, c.solver);
    const double exact = closed_form_efficiency(k);
    table.rows.push_back({Cell::number(k), flip.converged ? Cell::number(flip.efficiency) : Cell::flagged("nonconverged"),
                          Cell::number(exact)});
    iterative.x.push_back(k);
    iterative.y.push_back(flip.efficiency);
    closed.x.push_back(k);
    closed.y.push_back(exact);
  }

  ctx.emit(ctx.json() ? io::to_json(table).dump(2) + "\n" : io::to_csv(table));
  ctx.write_svg({{"Voltage flip efficiency", "number of capacitors k", "flip efficiency", {closed, iterative}}});
  return ExitCode::ok;
}

int cmd_design(const Context& ctx) {
  const auto& c = ctx.config;
  const auto config = c.sshc_config();
  const double period = c.source.period();
  const double r_max = max_on_resistance(c.source.c_p, period, c.k, c.budget_fraction, c.settle_factor);
  const auto timing = timing_report(c.source, config);
  const double budget = c.budget_fraction * timing.half_period;
  const bool timing_ok = within_budget(timing.t_flip, budget);
  const double area = bank_area(config, c.process);
  const auto volume = inductor_comparison(area, c.chip_thickness_mm);
  const bool have_stages = config.r_on > 0;
  StageCount stages;
  if (have_stages) {
    stages = max_stage_count(c.source.c_p, period, config.r_on, c.budget_fraction, c.settle_factor);
  }

  std::optional<StageChoice> choice;
  bool area_ok = true;
  if (c.area_budget_mm2) {
    area_ok = within_budget(area, *c.area_budget_mm2);
    if (config.r_on > 0) {
      choice = best_stage_count({config.r_on, *c.area_budget_mm2, c.budget_fraction, c.settle_factor}, c.source,
                                c.process);
    }
  }
  const bool feasible = timing_ok && area_ok;

  if (ctx.json()) {
    json doc;
    doc["k"] = c.k;
    doc["phases"] = 2 * c.k + 1;
    doc["switches"] = switch_count(c.k);
    doc["max_r_on_ohm"] = r_max;
    doc["r_on_ohm"] = config.r_on;
    doc["tau_s"] = timing.tau;
    doc["t_phase_s"] = timing.t_phase;
    doc["t_flip_s"] = timing.t_flip;
    doc["half_period_s"] = timing.half_period;
    doc["flip_fraction"] = timing.flip_fraction;
    doc["budget_fraction"] = c.budget_fraction;
    doc["bank_area_mm2"] = area;
    doc["bank_volume_mm3"] = volume.bank_volume_mm3;
    doc["inductor_volume_mm3"] = volume.inductor_volume_mm3;
    doc["inductor_to_bank_ratio"] = std::isfinite(volume.ratio) ? json(volume.ratio) : json("infinite");
    if (have_stages) doc["max_stage_count"] = stages.feasible ? json(stages.k) : json("infeasible");
    if (choice) {
      doc["best_stage_count"] = choice->feasible ? json(choice->k) : json("infeasible");
      doc["timing_binding"] = choice->timing_binding;
      doc["area_binding"] = choice->area_binding;
    }
    doc["feasible"] = feasible;
    ctx.emit(doc.dump(2) + "\n");
  } else {
    std::ostringstream s;
    s << "design point: k = " << c.k << " (" << 2 * c.k + 1 << " phases, " << switch_count(c.k)
      << " switches), C_P = " << format_si(c.source.c_p, "F") << ", f_res = " << format_si(c.source.f_res, "Hz")
      << "\n";
    s << "flip-time budget: T_F " << le << " " << format_sig(c.budget_fraction, 4) << " x T/2 = " << us(budget) << "\n";
    s << "R_ON " << le << " " << ohms(r_max) << "\n";
    s << "R_ON used: " << ohms(config.r_on) << "\n";
    s << "tau = " << format_si(timing.tau, "s") << ", T_F = " << us(timing.t_flip)
      << ", flip_fraction = " << format_fixed(timing.flip_fraction, 4) << "\n";
    s << "bank area " << mm2(area) << " (" << c.k << " capacitors at " << format_sig(c.process.mim_density, 4)
      << " fF/" << micro << "m" << squared << ")\n";
    s << "bank volume " << format_sig(volume.bank_volume_mm3, 4) << " mm" << cubed << " vs inductor "
      << format_sig(volume.inductor_volume_mm3, 4) << " mm" << cubed << ", ratio "
      << (std::isfinite(volume.ratio) ? format_sig(volume.ratio, 4) : std::string("infinite")) << "\n";
    if (have_stages) {
      s << "largest k at this R_ON: " << (stages.feasible ? std::to_string(stages.k) : std::string("infeasible"))
        << "\n";
    }
    if (choice) {
      s << "best k within " << mm2(*c.area_budget_mm2) << ": "
        << (choice->feasible ? std::to_string(choice->k) : std::string("infeasible"));
      if (choice->feasible) {
        s << " (" << (choice->timing_binding ? "timing" : "") << (choice->timing_binding && choice->area_binding ? " and " : "")
          << (choice->area_binding ? "area" : "") << " bound)";
      }
      if (!choice->note.empty()) s << ", " << choice->note;
      s << "\n";
    }
    s << "status: " << (feasible ? "feasible" : "infeasible");
    if (!timing_ok) s << " (T_F exceeds the budget)";
    if (!area_ok) s << " (bank area exceeds the budget)";
    s << "\n";
    ctx.emit(s.str());
  }
  return feasible ? ExitCode::ok : ExitCode::infeasible;
}

std::string rectifier_label(RectifierKind kind) {
  switch (kind) {
    case RectifierKind::fbr: return "FBR";
    case RectifierKind::sshc: return "SSHC";
    case RectifierKind::sshi_baseline: return "SSHI baseline";
  }
  return "";
}

int cmd_simulate(const Context& ctx, const std::optional<std::string>& rectifier, const std::optional<std::string>& v_s_arg) {
  io::RunConfig c = ctx.config;
  if (rectifier) {
    if (*rectifier == "fbr") {
      c.rectifier = RectifierKind::fbr;
    } else if (*rectifier == "sshc") {
      c.rectifier = RectifierKind::sshc;
    } else if (*rectifier == "sshi") {
      c.rectifier = RectifierKind::sshi_baseline;
    } else {
      throw std::invalid_argument("--rectifier must be fbr, sshc or sshi");
    }
  }
  if (v_s_arg) {
    if (*v_s_arg == "auto") {
      c.v_s.reset();
    } else {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(*v_s_arg, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v_s_arg->size() || !(v >= 0)) throw std::invalid_argument("--v-s must be 'auto' or a voltage >= 0");
      c.v_s = v;
    }
  }

  RectifierModel<> model;
  switch (c.rectifier) {
    case RectifierKind::fbr: model = RectifierModel<>::fbr(); break;
    case RectifierKind::sshc: {
      const auto config = c.sshc_config();
      const auto flip = steady_state_efficiency(c.source, config, c.settle, c.solver);
      model = RectifierModel<>::sshc(flip.efficiency, c.flip_duration.value_or(timing_report(c.source, config).t_flip));
      break;
    }
    case RectifierKind::sshi_baseline:
      model = RectifierModel<>::sshi_baseline(c.sshi_efficiency, c.flip_duration.value_or(0.0));
      break;
  }

  const bool auto_vs = !c.v_s;
  double v_s = 0;
  if (auto_vs) {
    const auto opt = optimal_storage_voltage(c.source, model.effective_eta());
    if (opt.unbounded) throw std::invalid_argument("optimal V_S is unbounded for a lossless flip; give v_s explicitly");
    v_s = opt.v_s_opt;
  } else {
    v_s = *c.v_s;
  }

  const auto sim = simulate(c.source, model, v_s, SimulationOptions<>{c.n_cycles, c.steps_per_period});
  const auto loss = flip_energy_loss(sim.trace);
  const auto& p = sim.power;
  const double flip_fraction = model.effective_duration() / c.source.half_period();

  if (!ctx.globals.out_path.empty()) Context::write_file(ctx.globals.out_path, io::trace_to_csv(sim.trace));

  if (ctx.json()) {
    json doc;
    doc["rectifier"] = rectifier_label(model.kind);
    doc["flip_efficiency"] = model.effective_eta();
    doc["flip_duration_s"] = model.effective_duration();
    doc["flip_fraction"] = flip_fraction;
    doc["v_s"] = p.v_s;
    doc["v_s_auto"] = auto_vs;
    doc["q_half_c"] = p.q_half;
    doc["q_reflip_c"] = p.q_reflip;
    doc["q_flip_waste_c"] = p.q_flip_waste;
    doc["q_out_c"] = p.q_out;
    doc["flip_loss_fraction"] = loss.fraction_of_q_half;
    doc["p_out_w"] = p.p_out;
    ctx.out << doc.dump(2) << "\n";
  } else {
    ctx.out << "rectifier: " << rectifier_label(model.kind) << ", eta = " << format_fixed(model.effective_eta(), 4)
            << ", T_F = " << us(model.effective_duration()) << "\n";
    ctx.out << "flip_fraction = " << format_fixed(flip_fraction, 4) << "\n";
    ctx.out << "V_S = " << format_sig(p.v_s, 4) << " V" << (auto_vs ? " (optimal)" : "") << "\n";
    ctx.out << "q_half = " << format_si(p.q_half, "C") << ", q_reflip = " << format_si(p.q_reflip, "C")
            << ", q_flip_waste = " << format_si(p.q_flip_waste, "C") << ", q_out = " << format_si(p.q_out, "C") << "\n";
    ctx.out << "flip loss = " << format_fixed(loss.fraction_of_q_half, 4) << " of q_half\n";
    ctx.out << "P_out = " << uw(p.p_out) << "\n";
  }

  if (!ctx.globals.svg_path.empty()) {
    // Last two cycles, at most ~2000 points per series.
    const auto& tr = sim.trace;
    const Eigen::Index per_cycle = c.steps_per_period;
    const Eigen::Index first = std::max<Eigen::Index>(0, tr.size() - 1 - 2 * per_cycle);
    const Eigen::Index stride = std::max<Eigen::Index>(1, (tr.size() - first) / 2000);
    io::Series current{"I_P", {}, {}, "#1f77b4"};
    io::Series voltage{"V_PT", {}, {}, "#d62728"};
    for (Eigen::Index n = first; n < tr.size(); n += stride) {
      current.x.push_back(tr.t[n] * 1e6);
      current.y.push_back(tr.i_p[n] * 1e6);
      voltage.x.push_back(tr.t[n] * 1e6);
      voltage.y.push_back(tr.v_pt[n]);
    }
    const std::string t_label = std::string("time (") + micro + "s)";
    ctx.write_svg({{"Transducer current", t_label, std::string("I_P (") + micro + "A)", {current}},
                   {"Transducer voltage", t_label, "V_PT (V)", {voltage}}});
  }
  return ExitCode::ok;
}

int cmd_sweep(const Context& ctx, unsigned threads) {
  const auto& c = ctx.config;
  if (!c.sweep) throw std::invalid_argument("config has no sweep section");
  const SweepSpec spec{c.sweep->axes, c.design_point(), c.sweep->objectives};
  const Table table = run_sweep(spec, threads);
  ctx.emit(ctx.json() ? io::to_json(table).dump(2) + "\n" : io::to_csv(table));
  return ExitCode::ok;
}

int cmd_area(const Context& ctx) {
  const auto& c = ctx.config;
  const auto config = c.sshc_config();
  const double area = bank_area(config, c.process);
  const double unit = mim_area(c.source.c_p, c.process);
  const auto volume = inductor_comparison(area, c.chip_thickness_mm);
  if (ctx.json()) {
    json doc;
    doc["k"] = c.k;
    doc["mim_density_ff_per_um2"] = c.process.mim_density;
    doc["capacitor_area_mm2"] = unit;
    doc["bank_area_mm2"] = area;
    doc["chip_thickness_mm"] = c.chip_thickness_mm;
    doc["bank_volume_mm3"] = volume.bank_volume_mm3;
    doc["inductor_volume_mm3"] = volume.inductor_volume_mm3;
    doc["inductor_to_bank_ratio"] = std::isfinite(volume.ratio) ? json(volume.ratio) : json("infinite");
    ctx.emit(doc.dump(2) + "\n");
  } else {
    std::ostringstream s;
    s << "C = " << format_si(c.source.c_p, "F") << " at " << format_sig(c.process.mim_density, 4) << " fF/" << micro
      << "m" << squared << ": " << mm2(unit) << "\n";
    s << "bank area " << mm2(area) << " (k = " << c.k << ")\n";
    s << "bank volume " << format_sig(volume.bank_volume_mm3, 4) << " mm" << cubed << " at "
      << format_sig(c.chip_thickness_mm, 4) << " mm thickness\n";
    s << "reference inductor volume " << format_sig(volume.inductor_volume_mm3, 4) << " mm" << cubed << ", ratio "
      << (std::isfinite(volume.ratio) ? format_sig(volume.ratio, 4) : std::string("infinite")) << "\n";
    ctx.emit(s.str());
  }
  return ExitCode::ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SSHC rectifier analysis: flip efficiency, timing budget, output power and area", "sshc"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  app.add_option("--config", globals.config_path, "JSON configuration file");
  app.add_option("--out", globals.out_path, "Write the table, report or trace to this file");
  app.add_option("--format", globals.format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
  app.add_option("--svg", globals.svg_path, "Write an SVG plot to this file");

  auto* efficiency = app.add_subcommand("efficiency", "Flip efficiency against stage count");
  std::optional<int> k_min, k_max;
  efficiency->add_option("--k-min", k_min, "First stage count");
  efficiency->add_option("--k-max", k_max, "Last stage count");

  auto* design = app.add_subcommand("design", "Maximum ON-resistance, flip time and bank area");

  auto* simulate_cmd = app.add_subcommand("simulate", "Time-domain waveform and output power");
  std::optional<std::string> rectifier, v_s;
  simulate_cmd->add_option("--rectifier", rectifier, "fbr, sshc or sshi");
  simulate_cmd->add_option("--v-s", v_s, "Storage voltage in volts, or 'auto'");

  auto* sweep = app.add_subcommand("sweep", "Evaluate objectives over a parameter grid");
  unsigned threads = 1;
  sweep->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));

  auto* area = app.add_subcommand("area", "On-chip capacitor area and inductor comparison");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::invalid_input;
  }

  try {
    Context ctx{globals, globals.config_path.empty() ? io::RunConfig{} : io::load_config(globals.config_path), out, err};
    if (*efficiency) return cmd_efficiency(ctx, k_min, k_max);
    if (*design) return cmd_design(ctx);
    if (*simulate_cmd) return cmd_simulate(ctx, rectifier, v_s);
    if (*sweep) return cmd_sweep(ctx, threads);
    if (*area) return cmd_area(ctx);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::invalid_input;
  }
  return ExitCode::invalid_input;
}

}  // namespace sshc::cli
