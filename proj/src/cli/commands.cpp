#include "cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <variant>

#include "json.hpp"

#include "tbsm/analytic.hpp"
#include "tbsm/oracle.hpp"
#include "tbsm/scattering.hpp"
#include "tbsm/tracker.hpp"

namespace tbsm::cli {

namespace {

using Value = std::variant<std::monostate, double, long long, bool, std::string>;
using Row = std::vector<Value>;

struct Table {
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

void write_output(const RunConfig& config, const std::string& command, const Table& table) {
  std::string body;
  if (config.format == "csv") {
    body += "# tbsm " + std::string(kVersion) + " " + command + "\n";
    body += "# format = csv\n";
    for (const auto& [key, value] : config.entries) body += "# " + key + " = " + value + "\n";
    for (size_t c = 0; c < table.columns.size(); ++c)
      body += table.columns[c] + (c + 1 < table.columns.size() ? "," : "\n");
    for (const Row& row : table.rows) {
      for (size_t c = 0; c < row.size(); ++c) {
        std::visit(
            [&body](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) body += format_real(v);
              if constexpr (std::is_same_v<T, long long>) body += std::to_string(v);
              if constexpr (std::is_same_v<T, bool>) body += v ? "1" : "0";
              if constexpr (std::is_same_v<T, std::string>) body += v;
            },
            row[c]);
        body += c + 1 < row.size() ? "," : "\n";
      }
    }
  } else {
    nlohmann::ordered_json doc;
    doc["tool"] = "tbsm";
    doc["version"] = kVersion;
    doc["command"] = command;
    nlohmann::ordered_json cfg;
    for (const auto& [key, value] : config.entries) cfg[key] = value;
    doc["config"] = cfg;
    doc["columns"] = table.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const Row& row : table.rows) {
      nlohmann::ordered_json obj;
      for (size_t c = 0; c < row.size(); ++c) {
        const std::string& col = table.columns[c];
        std::visit(
            [&obj, &col](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, std::monostate>)
                obj[col] = nullptr;
              else
                obj[col] = v;
            },
            row[c]);
      }
      rows.push_back(obj);
    }
    doc["rows"] = rows;
    body = doc.dump(2);
    body += "\n";
  }

  const std::string tmp = config.out_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << body;
  }
  if (std::rename(tmp.c_str(), config.out_path.c_str()) != 0)
    throw std::runtime_error("cannot move output into place at '" + config.out_path + "'");
}

Value real_or_empty(double x) {
  if (std::isnan(x)) return std::monostate{};
  return x;
}

}  // namespace

int cmd_sweep(const RunConfig& config) {
  const System system = build_system(config);
  const Eigen::VectorXd grid = energy_grid(config);
  const SweepTable sweep = conductance_sweep(system, grid, config.mode, 0, 1, config.threads);

  // Closed-box levels as plotting overlays: each level marks its nearest row.
  std::map<Eigen::Index, double> stars;
  for (Eigen::Index l = 0; l < system.levels.size(); ++l) {
    Eigen::Index nearest = 0;
    for (Eigen::Index g = 1; g < grid.size(); ++g)
      if (std::abs(grid(g) - system.levels(l)) < std::abs(grid(nearest) - system.levels(l)))
        nearest = g;
    stars.emplace(nearest, system.levels(l));
  }

  Table table;
  table.columns = {"energy", "k", "conductance"};
  for (const std::string& label : sweep.pair_labels) table.columns.push_back("abs2_" + label);
  for (const std::string& label : sweep.pair_labels) table.columns.push_back("arg_" + label);
  table.columns.insert(table.columns.end(), {"open_channels", "excluded", "box_level"});
  for (size_t g = 0; g < sweep.rows.size(); ++g) {
    const SweepRow& row = sweep.rows[g];
    Row out;
    out.push_back(row.energy);
    out.push_back(real_or_empty(row.k_first_open));
    out.push_back(row.conductance);
    for (size_t p = 0; p < sweep.pair_labels.size(); ++p) out.push_back(real_or_empty(row.t2[p]));
    for (size_t p = 0; p < sweep.pair_labels.size(); ++p)
      out.push_back(real_or_empty(row.phase[p]));
    out.push_back(static_cast<long long>(row.open_count));
    out.push_back(row.excluded);
    const auto star = stars.find(static_cast<Eigen::Index>(g));
    out.push_back(star == stars.end() ? Value(std::monostate{}) : Value(star->second));
    table.rows.push_back(std::move(out));
  }
  write_output(config, "sweep", table);
  return kExitOk;
}

int cmd_poles(const RunConfig& config) {
  const System system = build_system(config);
  std::vector<double> energies;
  if (config.has("grid.min")) {
    const Eigen::VectorXd grid = energy_grid(config);
    energies.assign(grid.data(), grid.data() + grid.size());
  } else {
    energies.push_back(config.number("energy", 0.0));
  }

  Table table;
  table.columns = {"energy", "pole", "re_z", "im_z", "width", "defective"};
  for (double energy : energies) {
    const PoleSet poles = eigensystem(build_heff(system, energy, config.mode));
    for (Eigen::Index i = 0; i < poles.poles.size(); ++i)
      table.rows.push_back({energy, static_cast<long long>(i), poles.poles(i).real(),
                            poles.poles(i).imag(), -2.0 * poles.poles(i).imag(),
                            poles.defective[i]});
  }
  write_output(config, "poles", table);
  return kExitOk;
}

namespace {

RunConfig with_strengths(RunConfig config, double v_left, double v_right) {
  const std::string prefix = config.geometry + ".";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v_left);
  if (config.geometry == "slab3d") {
    config.entries[prefix + "v"] = buf;
  } else {
    config.entries[prefix + "v_left"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", v_right);
    config.entries[prefix + "v_right"] = buf;
  }
  return config;
}

}  // namespace

int cmd_track(const RunConfig& config) {
  const std::string parameter = config.text("track.parameter", "v-both");
  if (!config.has("track.from") || !config.has("track.to"))
    throw ConfigError("config: missing required keys 'track.from'/'track.to'");
  const double from = config.require_number("track.from");
  const double to = config.require_number("track.to");
  const int count = config.integer("track.count", 401);
  if (count < 2) throw ConfigError("config: key 'track.count' must be >= 2");

  std::vector<double> path(count);
  for (int i = 0; i < count; ++i) path[i] = from + (to - from) * i / (count - 1);

  const double energy = config.number("track.energy", config.number("energy", 0.0));
  const double fixed_vl =
      config.number("track.v_left", config.number(config.geometry + ".v_left", 1.0));
  const double fixed_vr =
      config.number("track.v_right", config.number(config.geometry + ".v_right", 1.0));

  std::function<EffectiveHamiltonian(double)> builder;
  if (parameter == "v-both") {
    builder = [&](double s) { return build_heff(build_system(with_strengths(config, s, s)), energy, config.mode); };
  } else if (parameter == "v-left") {
    builder = [&](double s) {
      return build_heff(build_system(with_strengths(config, s, fixed_vr)), energy, config.mode);
    };
  } else if (parameter == "v-right") {
    builder = [&](double s) {
      return build_heff(build_system(with_strengths(config, fixed_vl, s)), energy, config.mode);
    };
  } else if (parameter == "energy") {
    const System system = build_system(config);
    builder = [&, system](double s) { return build_heff(system, s, config.mode); };
  } else {
    throw ConfigError("config: key 'track.parameter' must be v-both, v-left, v-right or energy");
  }

  const PoleTrajectory traj = trace_poles(builder, path);

  Table table;
  table.columns = {"step",  "parameter", "v_left", "v_right", "energy",   "branch",
                   "re_z",  "im_z",      "width",  "guard",   "ambiguous"};
  for (size_t s = 0; s < path.size(); ++s) {
    double vl = fixed_vl, vr = fixed_vr, e = energy;
    if (parameter == "v-both") vl = vr = path[s];
    if (parameter == "v-left") vl = path[s];
    if (parameter == "v-right") vr = path[s];
    if (parameter == "energy") e = path[s];
    for (Eigen::Index b = 0; b < traj.branches.rows(); ++b) {
      const Complex z = traj.branches(b, static_cast<Eigen::Index>(s));
      table.rows.push_back({static_cast<long long>(s), path[s], vl, vr, e,
                            static_cast<long long>(b), z.real(), z.imag(), -2.0 * z.imag(),
                            traj.guard[s], traj.ambiguous[s]});
    }
  }
  write_output(config, "track", table);
  return kExitOk;
}

namespace {

struct Check {
  std::string name;
  std::string status;  // pass | fail | skip | info
  double tolerance = 0.0;
  double measured = 0.0;
};

class Validator {
 public:
  explicit Validator(std::optional<double> tolerance_override)
      : override_(tolerance_override) {}

  void check(const std::string& name, double measured, double tolerance) {
    const double tol = override_.value_or(tolerance);
    checks_.push_back({name, measured <= tol ? "pass" : "fail", tol, measured});
  }
  void info(const std::string& name, double measured) {
    checks_.push_back({name, "info", std::numeric_limits<double>::quiet_NaN(), measured});
  }
  void skip(const std::string& name) {
    checks_.push_back({name, "skip", std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN()});
  }

  const std::vector<Check>& checks() const { return checks_; }
  bool failed() const {
    for (const Check& c : checks_)
      if (c.status == "fail") return true;
    return false;
  }

 private:
  std::optional<double> override_;
  std::vector<Check> checks_;
};

Eigen::VectorXd validation_grid(const RunConfig& config) {
  if (config.has("grid.min")) return energy_grid(config);
  const int count = config.integer("validate.grid_count", 41);
  Eigen::VectorXd grid(count);
  for (int i = 0; i < count; ++i) grid(i) = -1.8 + 3.6 * i / (count - 1);
  return grid;
}

// Pipeline invariants shared by every geometry: complex symmetry, pole trace
// identity, decay of every pole, reciprocity and (in all-channels mode)
// unitarity of the S-matrix.
void common_checks(Validator& v, const System& system, const Eigen::VectorXd& grid,
                   SelfEnergyMode mode) {
  double sym = 0.0, trace_dev = 0.0, im_max = -1e300, unit = 0.0, recip = 0.0;
  bool any = false;
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const double energy = grid(g);
    bool open = false;
    double min_sin = 1e300;
    for (const Channel& ch : system.coupling.channels) {
      const LeadMomentum lm = channel_momentum(energy, ch.threshold);
      if (lm.open) {
        open = true;
        min_sin = std::min(min_sin, lm.phase.imag());
      }
    }
    if (!open || min_sin < 1e-6) continue;
    any = true;

    const EffectiveHamiltonian heff = build_heff(system, energy, mode);
    sym = std::max(sym,
                   (heff.matrix - heff.matrix.transpose()).cwiseAbs().maxCoeff());
    const PoleSet poles = eigensystem(heff);
    trace_dev = std::max(trace_dev, std::abs(poles.poles.sum() - heff.matrix.trace()));
    im_max = std::max(im_max, poles.poles.imag().maxCoeff());

    const SMatrixResult s = smatrix(system, energy, mode);
    const Eigen::MatrixXcd I =
        Eigen::MatrixXcd::Identity(s.s_wave.rows(), s.s_wave.cols());
    unit = std::max(unit, (s.s_wave * s.s_wave.adjoint() - I).cwiseAbs().maxCoeff());
    recip = std::max(recip, (s.s_wave - s.s_wave.transpose()).cwiseAbs().maxCoeff());
  }
  if (!any) {
    v.skip("heff.complex_symmetry");
    return;
  }
  v.check("heff.complex_symmetry", sym, 1e-12);
  v.check("poles.trace_identity", trace_dev, 1e-10);
  v.check("poles.decay_sign", std::max(im_max, 0.0), 1e-12);
  v.check("smatrix.reciprocity", recip, 1e-10);
  // Unitary in every mode: truncating the channel sum only moves the
  // Hermitian part of H_eff.
  v.check("smatrix.unitarity", unit, 1e-8);
}

void validate_chain(Validator& v, const RunConfig& config, const System& system,
                    const Eigen::VectorXd& grid) {
  const bool series_dot = config.geometry == "dot2";
  const int sites = series_dot ? 2 : config.require_integer("chain1d.sites");
  const std::string prefix = config.geometry + ".";
  const double vl = config.number(prefix + "v_left", 1.0);
  const double vr = config.number(prefix + "v_right", 1.0);
  if (vl < 1e-12 || vr < 1e-12) {
    v.skip("chain.analytic_vs_pipeline_t");
    v.skip("chain.pipeline_vs_oracle_t");
    return;
  }

  double dev_analytic = 0.0, dev_oracle_t = 0.0, dev_oracle_r = 0.0, dev_pole = 0.0;
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const double energy = grid(g);
    if (std::abs(energy) >= 2.0) continue;
    const double k = std::acos(-0.5 * energy);
    if (std::sin(k) < 1e-6) continue;

    const ChainAmplitudes an = chain_rt(sites, vl, vr, k);
    const ScatteringSolution1D oracle = solve_chain_1d(sites, vl, vr, k);
    const SMatrixResult s = smatrix(system, energy, SelfEnergyMode::AllChannels);
    const Complex t = s.wave_block(1, 0)(0, 0);
    const Complex r = s.wave_block(0, 0)(0, 0);
    dev_analytic = std::max(dev_analytic, std::abs(an.t - t));
    dev_oracle_t = std::max(dev_oracle_t, std::abs(t - oracle.t));
    dev_oracle_r = std::max(dev_oracle_r, std::abs(r - oracle.r));

    const PoleSet poles = eigensystem(build_heff(system, energy, SelfEnergyMode::AllChannels));
    if (!poles.any_defective()) {
      const Complex tp = transmission_pole_expansion(system, energy, poles, 0, 1);
      dev_pole = std::max(dev_pole, std::abs(tp - t));
    }
  }
  v.check("chain.analytic_vs_pipeline_t", dev_analytic, 1e-10);
  v.check("chain.pipeline_vs_oracle_t", dev_oracle_t, 1e-8);
  v.check("chain.pipeline_vs_oracle_r", dev_oracle_r, 1e-8);
  v.check("chain.pole_expansion_vs_resolvent", dev_pole, 1e-10);
}

void validate_dot2_shared(Validator& v, const RunConfig& config, const System& system,
                          const Eigen::VectorXd& grid) {
  const double vl = config.number("dot2.v_left", 1.0);
  const double vr = config.number("dot2.v_right", 1.0);
  const Dot2Params params{vl, vr, Dot2Topology::SharedSite};

  double dev_t = 0.0, dev_poles = 0.0;
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const double energy = grid(g);
    if (std::abs(energy) >= 2.0 || std::sqrt(1.0 - 0.25 * energy * energy) < 1e-6) continue;
    const SMatrixResult s = smatrix(system, energy, SelfEnergyMode::AllChannels);
    dev_t = std::max(dev_t,
                     std::abs(dot2_transmission(params, energy) - s.wave_block(1, 0)(0, 0)));
    const auto [z1, z2] = dot2_poles(params, energy);
    const PoleSet poles = eigensystem(build_heff(system, energy, SelfEnergyMode::AllChannels));
    const double d1 = std::min(std::abs(poles.poles(0) - z1), std::abs(poles.poles(0) - z2));
    const double d2 = std::min(std::abs(poles.poles(1) - z1), std::abs(poles.poles(1) - z2));
    dev_poles = std::max(dev_poles, std::max(d1, d2));
  }
  v.check("dot2.analytic_vs_pipeline_t", dev_t, 1e-10);
  v.check("dot2.analytic_vs_pipeline_poles", dev_poles, 1e-10);
  v.skip("dot2.pipeline_vs_oracle_t");  // no wave-matching oracle for the shared-site contact
}

void validate_rect(Validator& v, const RunConfig& config, const System& system,
                   const Eigen::VectorXd& grid) {
  RectGeometry geometry;
  geometry.nx = config.require_integer("rect2d.nx");
  geometry.ny = config.require_integer("rect2d.ny");
  geometry.left = {Side::Left, config.integer("rect2d.left_wall_low", 0),
                   config.integer("rect2d.left_wall_high", geometry.ny + 1),
                   config.number("rect2d.v_left", 1.0)};
  geometry.right = {Side::Right, config.integer("rect2d.right_wall_low", 0),
                    config.integer("rect2d.right_wall_high", geometry.ny + 1),
                    config.number("rect2d.v_right", 1.0)};

  double dev_s = 0.0, dev_open = 0.0;
  bool any = false;
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const double energy = grid(g);
    bool open = false;
    double min_sin = 1e300;
    for (const Channel& ch : system.coupling.channels) {
      const LeadMomentum lm = channel_momentum(energy, ch.threshold);
      if (lm.open) {
        open = true;
        min_sin = std::min(min_sin, lm.phase.imag());
      }
    }
    if (!open || min_sin < 1e-6) continue;
    any = true;
    const LatticeSolution oracle = solve_lattice_2d(geometry, energy);
    const SMatrixResult s = smatrix(system, energy, SelfEnergyMode::AllChannels);
    dev_s = std::max(dev_s, (s.s_wave - oracle.s).cwiseAbs().maxCoeff());
    if (config.mode == SelfEnergyMode::OpenChannelsOnly) {
      const SMatrixResult truncated = smatrix(system, energy, config.mode);
      dev_open = std::max(dev_open, (truncated.s_wave - oracle.s).cwiseAbs().maxCoeff());
    }
  }
  if (!any) {
    v.skip("rect2d.pipeline_vs_oracle_s");
    return;
  }
  v.check("rect2d.pipeline_vs_oracle_s", dev_s, 1e-8);
  if (config.mode == SelfEnergyMode::OpenChannelsOnly)
    v.info("rect2d.openonly_vs_oracle_deviation", dev_open);
}

void validate_point_contact(Validator& v, const RunConfig& config, const System& system) {
  const int li = config.require_integer("point-contact.left_i");
  const int lj = config.require_integer("point-contact.left_j");
  const int ri = config.require_integer("point-contact.right_i");
  const int rj = config.require_integer("point-contact.right_j");
  v.skip("point_contact.pipeline_vs_oracle");  // wave-matching oracle covers side leads only
  if (li != ri || lj != rj) {
    v.skip("point_contact.secular_vs_eigensystem");
    return;
  }
  const RectSpectrum2D rect = rect_eigensystem(config.require_integer("point-contact.nx"),
                                               config.require_integer("point-contact.ny"));
  Eigen::VectorXd amps(rect.size());
  for (int s = 0; s < rect.size(); ++s) amps(s) = rect.psi(s, li, lj);
  const std::vector<PoleRoot> roots =
      point_contact_pole_roots(rect.level_energies(), amps,
                               config.number("point-contact.v_left", 1.0),
                               config.number("point-contact.v_right", 1.0));
  double dev = 0.0;
  for (const PoleRoot& root : roots) {
    const SelfConsistentPole pole = solve_pole(system, root.z);
    dev = std::max(dev, std::abs(pole.z - root.z));
  }
  v.check("point_contact.secular_vs_eigensystem", dev, 1e-8);
}

void validate_slab(Validator& v, const RunConfig& config, const System& system) {
  const std::string variant = config.text("slab3d.variant", "face-lead");
  const RectSpectrum2D rect = rect_eigensystem(config.require_integer("slab3d.nx"),
                                               config.require_integer("slab3d.ny"));
  const double vc = config.number("slab3d.v", 1.0);
  const double energy = config.number("energy", 0.0);
  v.skip("slab3d.pipeline_vs_oracle");  // wave-matching oracle covers side leads only

  std::vector<Complex> expected;
  if (variant == "site-leads") {
    const Complex phase = channel_momentum(energy, 0.0).phase;
    for (int b = 0; b < rect.size(); ++b)
      expected.push_back(rect.states[b].energy - vc * vc * phase);
  } else {
    const int nz = config.require_integer("slab3d.nz");
    for (int b = 0; b < rect.size(); ++b) {
      if (nz == 2) {
        const auto [z1, z2] = slab_poles(rect.states[b].energy, vc, energy);
        expected.push_back(z1);
        expected.push_back(z2);
      } else if (nz == 1) {
        expected.push_back(rect.states[b].energy -
                           vc * vc * channel_momentum(energy, rect.states[b].energy).phase);
      }
    }
    if (nz > 2) {
      v.skip("slab3d.analytic_vs_eigensystem");  // closed block forms exist for nz <= 2 only
      return;
    }
  }
  const PoleSet poles = eigensystem(build_heff(system, energy, SelfEnergyMode::AllChannels));
  double dev = 0.0;
  for (const Complex& z : expected) {
    double best = 1e300;
    for (Eigen::Index i = 0; i < poles.poles.size(); ++i)
      best = std::min(best, std::abs(poles.poles(i) - z));
    dev = std::max(dev, best);
  }
  v.check("slab3d.analytic_vs_eigensystem", dev, 1e-12);
}

}  // namespace

int cmd_validate(const RunConfig& config) {
  std::optional<double> override;
  if (config.has("validate.tolerance")) override = config.require_number("validate.tolerance");
  Validator v(override);

  const System system = build_system(config);
  const Eigen::VectorXd grid = validation_grid(config);

  common_checks(v, system, grid, config.mode);
  if (config.geometry == "chain1d" ||
      (config.geometry == "dot2" && config.text("dot2.topology", "series") == "series")) {
    validate_chain(v, config, system, grid);
  } else if (config.geometry == "dot2") {
    validate_dot2_shared(v, config, system, grid);
  } else if (config.geometry == "rect2d") {
    validate_rect(v, config, system, grid);
  } else if (config.geometry == "point-contact") {
    validate_point_contact(v, config, system);
  } else if (config.geometry == "slab3d") {
    validate_slab(v, config, system);
  }

  Table table;
  table.columns = {"check", "status", "tolerance", "measured"};
  for (const Check& c : v.checks()) {
    Row row;
    row.push_back(c.name);
    row.push_back(c.status);
    row.push_back(std::isnan(c.tolerance) ? Value(std::monostate{}) : Value(c.tolerance));
    row.push_back(std::isnan(c.measured) ? Value(std::monostate{}) : Value(c.measured));
    table.rows.push_back(std::move(row));
    std::cout << c.name << ": " << c.status;
    if (!std::isnan(c.measured)) std::cout << " (measured " << c.measured << ")";
    std::cout << "\n";
  }
  write_output(config, "validate", table);
  return v.failed() ? kExitValidation : kExitOk;
}

int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_path, const std::string& format) {
  try {
    RunConfig config = load_config(config_path);
    config.out_path = out_path;
    config.format = format;
    if (format != "csv" && format != "json")
      throw ConfigError("config: format must be csv or json");
    if (const char* env = std::getenv("TBSM_THREADS")) {
      config.threads = std::max(1, std::atoi(env));
    }
    if (command == "sweep") return cmd_sweep(config);
    if (command == "poles") return cmd_poles(config);
    if (command == "track") return cmd_track(config);
    if (command == "validate") return cmd_validate(config);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace tbsm::cli
