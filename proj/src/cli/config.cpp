#include "cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace tbsm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {
      "geometry", "mode", "energy",
      "chain1d.sites", "chain1d.v_left", "chain1d.v_right",
      "dot2.topology", "dot2.v_left", "dot2.v_right",
      "rect2d.nx", "rect2d.ny", "rect2d.left_wall_low", "rect2d.left_wall_high",
      "rect2d.right_wall_low", "rect2d.right_wall_high", "rect2d.v_left", "rect2d.v_right",
      "point-contact.nx", "point-contact.ny", "point-contact.left_i", "point-contact.left_j",
      "point-contact.right_i", "point-contact.right_j", "point-contact.v_left",
      "point-contact.v_right",
      "slab3d.variant", "slab3d.nx", "slab3d.ny", "slab3d.nz", "slab3d.v",
      "grid.min", "grid.max", "grid.count",
      "track.parameter", "track.from", "track.to", "track.count", "track.energy",
      "track.v_left", "track.v_right",
      "validate.tolerance", "validate.grid_count",
  };
  return keys;
}

const std::set<std::string>& known_geometries() {
  static const std::set<std::string> names = {"chain1d", "dot2", "rect2d", "point-contact",
                                              "slab3d"};
  return names;
}

}  // namespace

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second;
}

double RunConfig::number(const std::string& key, double fallback) const {
  const auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  try {
    size_t used = 0;
    const double value = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a number: '" + it->second + "'");
  }
}

int RunConfig::integer(const std::string& key, int fallback) const {
  const auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  try {
    size_t used = 0;
    const int value = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not an integer: '" + it->second + "'");
  }
}

double RunConfig::require_number(const std::string& key) const {
  if (!has(key)) throw ConfigError("config: missing required key '" + key + "'");
  return number(key, 0.0);
}

int RunConfig::require_integer(const std::string& key) const {
  if (!has(key)) throw ConfigError("config: missing required key '" + key + "'");
  return integer(key, 0);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");

  RunConfig config;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        throw ConfigError("config: malformed section header at line " + std::to_string(line_no));
      section = trim(stripped.substr(1, stripped.size() - 2));
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " + std::to_string(line_no));
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    if (!allowed_keys().count(full)) throw ConfigError("config: unknown key '" + full + "'");
    if (config.entries.count(full)) throw ConfigError("config: duplicate key '" + full + "'");
    config.entries[full] = value;
  }

  if (!config.has("geometry")) throw ConfigError("config: missing required key 'geometry'");
  config.geometry = config.entries.at("geometry");
  if (!known_geometries().count(config.geometry))
    throw ConfigError("config: unknown geometry '" + config.geometry + "'");

  // Sections other than the active geometry's own catch stale configs.
  for (const auto& [key, value] : config.entries) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string sec = key.substr(0, dot);
    if (known_geometries().count(sec) && sec != config.geometry)
      throw ConfigError("config: section '" + sec + "' does not match geometry '" +
                        config.geometry + "'");
  }

  const std::string mode = config.text("mode", "all-channels");
  if (mode == "open-only")
    config.mode = SelfEnergyMode::OpenChannelsOnly;
  else if (mode == "all-channels")
    config.mode = SelfEnergyMode::AllChannels;
  else if (mode == "wide-band")
    config.mode = SelfEnergyMode::WideBand;
  else
    throw ConfigError("config: key 'mode' must be open-only, all-channels or wide-band");

  return config;
}

System build_system(const RunConfig& config) {
  const std::string& g = config.geometry;
  if (g == "chain1d") {
    return chain_system(config.require_integer("chain1d.sites"),
                        config.number("chain1d.v_left", 1.0),
                        config.number("chain1d.v_right", 1.0));
  }
  if (g == "dot2") {
    const std::string topology = config.text("dot2.topology", "series");
    const double vl = config.number("dot2.v_left", 1.0);
    const double vr = config.number("dot2.v_right", 1.0);
    if (topology == "series") return dot2_system(Dot2Topology::SeriesSites, vl, vr);
    if (topology == "shared") return dot2_system(Dot2Topology::SharedSite, vl, vr);
    throw ConfigError("config: key 'dot2.topology' must be series or shared");
  }
  if (g == "rect2d") {
    RectGeometry geometry;
    geometry.nx = config.require_integer("rect2d.nx");
    geometry.ny = config.require_integer("rect2d.ny");
    geometry.left = {Side::Left, config.integer("rect2d.left_wall_low", 0),
                     config.integer("rect2d.left_wall_high", geometry.ny + 1),
                     config.number("rect2d.v_left", 1.0)};
    geometry.right = {Side::Right, config.integer("rect2d.right_wall_low", 0),
                      config.integer("rect2d.right_wall_high", geometry.ny + 1),
                      config.number("rect2d.v_right", 1.0)};
    return rect_system(geometry);
  }
  if (g == "point-contact") {
    const RectSpectrum2D rect = rect_eigensystem(config.require_integer("point-contact.nx"),
                                                 config.require_integer("point-contact.ny"));
    return point_contact_system(
        rect,
        {config.require_integer("point-contact.left_i"),
         config.require_integer("point-contact.left_j")},
        {config.require_integer("point-contact.right_i"),
         config.require_integer("point-contact.right_j")},
        config.number("point-contact.v_left", 1.0), config.number("point-contact.v_right", 1.0));
  }
  if (g == "slab3d") {
    const std::string variant = config.text("slab3d.variant", "face-lead");
    const RectSpectrum2D rect = rect_eigensystem(config.require_integer("slab3d.nx"),
                                                 config.require_integer("slab3d.ny"));
    const double v = config.number("slab3d.v", 1.0);
    if (variant == "site-leads") {
      Eigen::MatrixXd site_modes(rect.size(), rect.size());
      int site = 0;
      for (int i = 1; i <= rect.nx; ++i)
        for (int j = 1; j <= rect.ny; ++j, ++site)
          for (int s = 0; s < rect.size(); ++s) site_modes(site, s) = rect.psi(s, i, j);
      return slab_site_leads_system(rect.level_energies(), site_modes, v);
    }
    if (variant == "face-lead")
      return slab_face_lead_system(rect.level_energies(), config.require_integer("slab3d.nz"), v);
    throw ConfigError("config: key 'slab3d.variant' must be site-leads or face-lead");
  }
  throw ConfigError("config: unknown geometry '" + g + "'");
}

Eigen::VectorXd energy_grid(const RunConfig& config) {
  if (!config.has("grid.min") || !config.has("grid.max"))
    throw ConfigError("config: missing required keys 'grid.min'/'grid.max'");
  const double lo = config.require_number("grid.min");
  const double hi = config.require_number("grid.max");
  const int count = config.integer("grid.count", 401);
  if (count < 2) throw ConfigError("config: key 'grid.count' must be >= 2 for a sweep");
  if (!(hi > lo)) throw ConfigError("config: key 'grid.max' must exceed 'grid.min'");
  Eigen::VectorXd grid(count);
  for (int i = 0; i < count; ++i) grid(i) = lo + (hi - lo) * i / (count - 1);
  return grid;
}

}  // namespace tbsm::cli
