#include "sshc/io/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sshc/timing.hpp"

namespace sshc::io {

namespace {

using nlohmann::json;

/// One JSON object whose keys must all be known.
class Section {
 public:
  Section(const json& doc, std::string path, std::set<std::string> allowed) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_ + " must be an object");
    for (const auto& item : doc_.items()) {
      if (!allowed.contains(item.key())) throw ConfigError("unknown key '" + path_ + "." + item.key() + "'");
    }
  }

  bool has(const std::string& key) const { return doc_.contains(key); }
  const json& at(const std::string& key) const { return doc_.at(key); }
  std::string where(const std::string& key) const { return path_ + "." + key; }

  void read(const std::string& key, double& out) const {
    if (!has(key)) return;
    out = number(at(key), where(key));
  }

  void read(const std::string& key, int& out) const {
    if (!has(key)) return;
    out = integer(at(key), where(key));
  }

  void read(const std::string& key, std::optional<double>& out, bool allow_auto) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (allow_auto && v.is_string() && v.get<std::string>() == "auto") {
      out.reset();
      return;
    }
    out = number(v, where(key));
  }

  static double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
  }

  static int integer(const json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 1e9) return static_cast<int>(d);
    }
    throw ConfigError(where + " must be an integer");
  }

  std::string string(const std::string& key) const {
    if (!at(key).is_string()) throw ConfigError(where(key) + " must be a string");
    return at(key).get<std::string>();
  }

 private:
  const json& doc_;
  std::string path_;
};

Axis parse_axis(const json& doc, const std::string& path) {
  Section s(doc, path, {"name", "min", "max", "steps", "spacing", "values"});
  Axis axis;
  if (!s.has("name")) throw ConfigError(path + ".name is required");
  axis.name = s.string("name");
  s.read("min", axis.min);
  s.read("max", axis.max);
  s.read("steps", axis.steps);
  if (s.has("spacing")) {
    const auto spacing = s.string("spacing");
    if (spacing == "linear") {
      axis.spacing = Spacing::linear;
    } else if (spacing == "log") {
      axis.spacing = Spacing::log;
    } else {
      throw ConfigError(s.where("spacing") + " must be \"linear\" or \"log\"");
    }
  }
  if (s.has("values")) {
    if (!s.at("values").is_array()) throw ConfigError(s.where("values") + " must be an array");
    for (const auto& v : s.at("values")) axis.values.push_back(Section::number(v, s.where("values")));
  }
  if (!s.has("values") && !s.has("min")) throw ConfigError("axis '" + axis.name + "': min is required");
  if (!s.has("values") && !s.has("max")) axis.max = axis.min;
  return axis;
}

std::string_view rectifier_name(RectifierKind kind) {
  switch (kind) {
    case RectifierKind::fbr: return "fbr";
    case RectifierKind::sshc: return "sshc";
    case RectifierKind::sshi_baseline: return "sshi";
  }
  return "sshc";
}

}  // namespace

double RunConfig::resolved_r_on() const {
  if (r_on) return *r_on;
  return max_on_resistance(source.c_p, source.period(), k, budget_fraction, settle_factor);
}

SshcConfig<> RunConfig::sshc_config() const {
  SshcConfig<> config = SshcConfig<>::equal_bank(k, source.c_p, resolved_r_on(), settle_factor);
  if (bank) config.bank = Eigen::Map<const VectorX<double>>(bank->data(), static_cast<Eigen::Index>(bank->size()));
  return config;
}

DesignPoint RunConfig::design_point() const {
  DesignPoint point;
  point.source = source;
  point.k = k;
  point.r_on = resolved_r_on();
  point.settle_factor = settle_factor;
  point.budget_fraction = budget_fraction;
  point.v_s = v_s.value_or(0.0);
  point.process = process;
  point.settle = settle;
  point.solver = solver;
  return point;
}

ValidationReport validate(const RunConfig& c) {
  ValidationReport report = sshc::validate(c.source);
  auto add = [&](bool ok, const char* message) {
    if (!ok) report.errors.emplace_back(message);
  };
  add(c.k >= 0, "k must be non-negative");
  if (c.bank) {
    add(static_cast<int>(c.bank->size()) == c.k, "bank length mismatch");
    for (double b : *c.bank) add(b > 0, "bank capacitances must be positive");
  }
  if (c.r_on) add(*c.r_on >= 0, "r_on must be non-negative");
  add(c.settle_factor > 0, "settle_factor must be positive");
  add(c.budget_fraction > 0 && c.budget_fraction <= 1, "budget_fraction must be in (0, 1]");
  add(c.chip_thickness_mm > 0, "chip_thickness_mm must be positive");
  for (auto& e : sshc::validate(c.process).errors) report.errors.push_back(e);
  for (auto& e : sshc::validate(c.settle).errors) report.errors.push_back(e);
  add(c.solver.tol > 0, "solver tol must be positive");
  add(c.solver.max_iters >= 1, "solver max_iters must be at least 1");
  add(c.solver.v_ref > 0, "solver v_ref must be positive");
  add(c.k_min >= 0 && c.k_min <= c.k_max, "efficiency range needs 0 <= k_min <= k_max");
  add(c.sshi_efficiency >= 0 && c.sshi_efficiency < 1, "sshi_efficiency must be in [0, 1)");
  add(c.n_cycles >= 1, "n_cycles must be at least 1");
  add(c.steps_per_period >= 1000, "steps_per_period must be at least 1000");
  if (c.v_s) add(*c.v_s >= 0, "v_s must be non-negative");
  if (c.flip_duration) {
    add(*c.flip_duration >= 0, "flip_duration must be non-negative");
    if (c.source.f_res > 0) add(*c.flip_duration <= c.source.half_period(), "flip_duration must not exceed T/2");
  }
  if (c.area_budget_mm2) add(*c.area_budget_mm2 >= 0, "area_budget_mm2 must be non-negative");

  if (report.ok() && c.sweep) {
    try {
      validate_sweep({c.sweep->axes, c.design_point(), c.sweep->objectives});
    } catch (const std::invalid_argument& e) {
      report.errors.emplace_back(e.what());
    }
  }
  return report;
}

RunConfig config_from_json(const json& doc) {
  RunConfig c;
  Section root(doc, "config",
               {"source", "sshc", "timing", "process", "settling", "solver", "efficiency", "simulation", "design",
                "sweep"});

  if (root.has("source")) {
    Section s(root.at("source"), "source", {"c_p", "f_res", "i_amp", "v_d"});
    s.read("c_p", c.source.c_p);
    s.read("f_res", c.source.f_res);
    s.read("i_amp", c.source.i_amp);
    s.read("v_d", c.source.v_d);
  }
  if (root.has("sshc")) {
    Section s(root.at("sshc"), "sshc", {"k", "bank", "r_on", "settle_factor"});
    s.read("k", c.k);
    if (s.has("bank")) {
      if (!s.at("bank").is_array()) throw ConfigError("sshc.bank must be an array");
      std::vector<double> bank;
      for (const auto& v : s.at("bank")) bank.push_back(Section::number(v, "sshc.bank"));
      c.bank = std::move(bank);
    }
    s.read("r_on", c.r_on, false);
    s.read("settle_factor", c.settle_factor);
  }
  if (root.has("timing")) {
    Section s(root.at("timing"), "timing", {"budget_fraction"});
    s.read("budget_fraction", c.budget_fraction);
  }
  if (root.has("process")) {
    Section s(root.at("process"), "process", {"mim_density", "chip_thickness_mm"});
    s.read("mim_density", c.process.mim_density);
    s.read("chip_thickness_mm", c.chip_thickness_mm);
  }
  if (root.has("settling")) {
    Section s(root.at("settling"), "settling", {"mode", "t_phase"});
    if (s.has("mode")) {
      const auto mode = s.string("mode");
      if (mode == "full") {
        c.settle.mode = SettlingMode::full;
      } else if (mode == "partial") {
        c.settle.mode = SettlingMode::partial;
      } else {
        throw ConfigError("settling.mode must be \"full\" or \"partial\"");
      }
    }
    s.read("t_phase", c.settle.t_phase);
  }
  if (root.has("solver")) {
    Section s(root.at("solver"), "solver", {"tol", "max_iters", "v_ref"});
    s.read("tol", c.solver.tol);
    s.read("max_iters", c.solver.max_iters);
    s.read("v_ref", c.solver.v_ref);
  }
  if (root.has("efficiency")) {
    Section s(root.at("efficiency"), "efficiency", {"k_min", "k_max"});
    s.read("k_min", c.k_min);
    s.read("k_max", c.k_max);
  }
  if (root.has("simulation")) {
    Section s(root.at("simulation"), "simulation",
              {"rectifier", "v_s", "flip_duration", "sshi_efficiency", "n_cycles", "steps_per_period"});
    if (s.has("rectifier")) {
      const auto kind = s.string("rectifier");
      if (kind == "fbr") {
        c.rectifier = RectifierKind::fbr;
      } else if (kind == "sshc") {
        c.rectifier = RectifierKind::sshc;
      } else if (kind == "sshi") {
        c.rectifier = RectifierKind::sshi_baseline;
      } else {
        throw ConfigError("simulation.rectifier must be \"fbr\", \"sshc\" or \"sshi\"");
      }
    }
    s.read("v_s", c.v_s, true);
    s.read("flip_duration", c.flip_duration, true);
    s.read("sshi_efficiency", c.sshi_efficiency);
    s.read("n_cycles", c.n_cycles);
    s.read("steps_per_period", c.steps_per_period);
  }
  if (root.has("design")) {
    Section s(root.at("design"), "design", {"area_budget_mm2"});
    s.read("area_budget_mm2", c.area_budget_mm2, false);
  }
  if (root.has("sweep")) {
    Section s(root.at("sweep"), "sweep", {"axes", "objectives"});
    SweepSection sweep;
    if (s.has("axes")) {
      if (!s.at("axes").is_array()) throw ConfigError("sweep.axes must be an array");
      std::size_t i = 0;
      for (const auto& a : s.at("axes")) sweep.axes.push_back(parse_axis(a, "sweep.axes[" + std::to_string(i++) + "]"));
    }
    if (s.has("objectives")) {
      if (!s.at("objectives").is_array()) throw ConfigError("sweep.objectives must be an array");
      for (const auto& o : s.at("objectives")) {
        if (!o.is_string()) throw ConfigError("sweep.objectives entries must be strings");
        auto parsed = parse_objective(o.get<std::string>());
        if (!parsed) throw ConfigError("unknown objective '" + o.get<std::string>() + "'");
        sweep.objectives.push_back(*parsed);
      }
    }
    c.sweep = std::move(sweep);
  }

  auto report = validate(c);
  if (!report.ok()) throw ConfigError(report.message());
  return c;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  using oj = nlohmann::ordered_json;
  oj doc;
  doc["source"] = {{"c_p", c.source.c_p}, {"f_res", c.source.f_res}, {"i_amp", c.source.i_amp}, {"v_d", c.source.v_d}};
  oj sshc_section;
  sshc_section["k"] = c.k;
  if (c.bank) sshc_section["bank"] = *c.bank;
  if (c.r_on) sshc_section["r_on"] = *c.r_on;
  sshc_section["settle_factor"] = c.settle_factor;
  doc["sshc"] = sshc_section;
  doc["timing"] = {{"budget_fraction", c.budget_fraction}};
  doc["process"] = {{"mim_density", c.process.mim_density}, {"chip_thickness_mm", c.chip_thickness_mm}};
  doc["settling"] = {{"mode", c.settle.mode == SettlingMode::full ? "full" : "partial"},
                     {"t_phase", c.settle.t_phase}};
  doc["solver"] = {{"tol", c.solver.tol}, {"max_iters", c.solver.max_iters}, {"v_ref", c.solver.v_ref}};
  doc["efficiency"] = {{"k_min", c.k_min}, {"k_max", c.k_max}};
  oj sim;
  sim["rectifier"] = rectifier_name(c.rectifier);
  sim["v_s"] = c.v_s ? oj(*c.v_s) : oj("auto");
  sim["flip_duration"] = c.flip_duration ? oj(*c.flip_duration) : oj("auto");
  sim["sshi_efficiency"] = c.sshi_efficiency;
  sim["n_cycles"] = c.n_cycles;
  sim["steps_per_period"] = c.steps_per_period;
  doc["simulation"] = sim;
  oj design = oj::object();
  if (c.area_budget_mm2) design["area_budget_mm2"] = *c.area_budget_mm2;
  doc["design"] = design;
  if (c.sweep) {
    oj axes = oj::array();
    for (const Axis& a : c.sweep->axes) {
      oj axis{{"name", a.name}, {"min", a.min}, {"max", a.max}, {"steps", a.steps},
              {"spacing", a.spacing == Spacing::linear ? "linear" : "log"}};
      if (!a.values.empty()) axis["values"] = a.values;
      axes.push_back(axis);
    }
    oj objectives = oj::array();
    for (Objective o : c.sweep->objectives) objectives.push_back(std::string(to_string(o)));
    doc["sweep"] = {{"axes", axes}, {"objectives", objectives}};
  }
  return doc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace sshc::io
