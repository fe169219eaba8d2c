#pragma once

// One structured JSON config drives every subcommand. Keys carry their units
// (trap_z_MHz, g_Hz, t_q_s, ...); unknown keys are rejected and all schema
// violations are reported at once.

#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinflow/crystal.hpp"
#include "spinflow/magnet.hpp"
#include "spinflow/reservoir.hpp"
#include "spinflow/transport.hpp"
#include "spinflow/units.hpp"

namespace spinflow {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& errors)
      : std::runtime_error(join(errors)), errors_(errors) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::ostringstream os;
    os << "config validation failed (" << errors.size() << " error"
       << (errors.size() == 1 ? "" : "s") << "):";
    for (const auto& e : errors) os << "\n  - " << e;
    return os.str();
  }
  std::vector<std::string> errors_;
};

struct GridSpec {
  double start = 0.0, stop = 0.0;
  int points = 0;
  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(points);
    for (int i = 0; i < points; ++i)
      v.push_back(points == 1 ? start : start + (stop - start) * double(i) / double(points - 1));
    return v;
  }
};

struct RunConfig {
  // crystal
  CrystalArrangement arrangement;
  TrapConfig trap;

  // cooling
  CoolingLaser laser;
  std::optional<GridSpec> cooling_scan;  // detuning grid, rad/s

  // magnet
  SpinModelKind magnet_kind = SpinModelKind::Ising;
  double field = 0.0;                                   // rad/s
  std::array<std::optional<double>, 3> uniform_coupling;  // x,y,z uniform NN, rad/s
  std::array<std::optional<Eigen::MatrixXd>, 3> coupling_matrix;
  struct ForceSpec {
    double amplitude = 0.0;             // F x0, rad/s
    double detuning_above_branch = 0.0;  // rad/s
    Branch branch = Branch::X;
  };
  std::optional<ForceSpec> force;

  // drive
  struct DriveSide {
    int mode = 0;          // 0-based axial mode index
    double g = 0.0;        // rad/s
    double delta = 0.0;    // rad/s
    std::optional<double> kappa_override;  // rad/s
    std::optional<double> nbar_override;
  };
  std::array<DriveSide, 2> drive;  // source, drain
  struct SweepSpec {
    GridSpec delta;                     // rad/s, applied to both reservoirs
    std::vector<double> kappa_scales{1.0};
  };
  std::optional<SweepSpec> sweep;

  // solver
  double rtol = 1e-10;
  double atol = 1e-13;
  SteadyMethod steady_method = SteadyMethod::Nullspace;
  CoherenceMode coherence_mode = CoherenceMode::Secular;
  int spin_cap = kDefaultSpinCap;
  double validity_warn = 0.1;
  double validity_error = 0.5;
  std::string initial_state = "all_down";
  struct OracleSpec {
    int n_max = 6;
    int n_max_cap = 14;
    double truncation_threshold = 1e-4;
    std::string method = "direct";  // direct | propagate
  } oracle;
  struct ProtocolSpec {
    double t_q = 0.0;   // seconds
    double dt = 0.0;    // seconds
    std::optional<long> repetitions;
    unsigned long seed = 0x5eed;
    double flip_probability = 0.0;
  } protocol;

  // output
  std::string output_path = "out.csv";
  int precision = 12;

  json serialize() const;
};

namespace detail {

// Tracks the key paths visited so unknown keys can be rejected, and collects
// every violation instead of stopping at the first.
class SchemaReader {
 public:
  SchemaReader(const json& root, std::vector<std::string>& errors)
      : root_(root), errors_(errors) {}

  bool has(const std::string& path) const { return find(path) != nullptr; }

  template <typename T>
  T get(const std::string& path, const T& fallback, bool required = false) {
    mark(path);
    const json* node = find(path);
    if (!node) {
      if (required) errors_.push_back("missing required key: " + path);
      return fallback;
    }
    try {
      return node->get<T>();
    } catch (const json::exception&) {
      errors_.push_back("wrong type for " + path);
      return fallback;
    }
  }

  double positive(const std::string& path, double fallback, bool required = false) {
    const double v = get<double>(path, fallback, required);
    if (find(path) && v <= 0) errors_.push_back(path + " must be positive");
    return v;
  }

  void fail(const std::string& message) { errors_.push_back(message); }
  void mark(const std::string& path) { visited_.push_back(path); }

  // every leaf key must have been visited (or be under a visited prefix)
  void check_unknown() const {
    std::vector<std::string> leaves;
    collect(root_, "", leaves);
    for (const auto& leaf : leaves) {
      bool known = false;
      for (const auto& v : visited_) {
        if (leaf == v || leaf.rfind(v + ".", 0) == 0 || leaf.rfind(v + "[", 0) == 0) {
          known = true;
          break;
        }
      }
      if (!known) errors_.push_back("unknown key: " + leaf);
    }
  }

  const json* find(const std::string& path) const {
    const json* node = &root_;
    std::string part;
    std::istringstream ss(path);
    while (std::getline(ss, part, '.')) {
      if (!node->is_object() || !node->contains(part)) return nullptr;
      node = &(*node)[part];
    }
    return node;
  }

 private:
  static void collect(const json& node, const std::string& prefix, std::vector<std::string>& out) {
    if (node.is_object()) {
      for (auto it = node.begin(); it != node.end(); ++it)
        collect(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (node.is_array()) {
      for (size_t i = 0; i < node.size(); ++i)
        collect(node[i], prefix + "[" + std::to_string(i) + "]", out);
    } else {
      out.push_back(prefix);
    }
  }

  const json& root_;
  std::vector<std::string>& errors_;
  std::vector<std::string> visited_;
};

inline std::optional<GridSpec> read_grid(SchemaReader& r, const std::string& path,
                                         double unit_to_rad) {
  if (!r.find(path)) {
    r.mark(path);
    return std::nullopt;
  }
  GridSpec g;
  g.start = r.get<double>(path + ".start", 0.0, true) * unit_to_rad;
  g.stop = r.get<double>(path + ".stop", 0.0, true) * unit_to_rad;
  g.points = r.get<int>(path + ".points", 0, true);
  if (g.points < 0) r.fail(path + ".points must be non-negative");
  return g;
}

}  // namespace detail

inline RunConfig parse_config_json(const json& root) {
  std::vector<std::string> errors;
  detail::SchemaReader r(root, errors);
  RunConfig cfg;

  // ---- crystal ----
  r.mark("crystal.species");
  if (const json* species = r.find("crystal.species"); species && species->is_array()) {
    int idx = 0;
    for (const auto& s : *species) {
      IonSpecies ion;
      const std::string where = "crystal.species[" + std::to_string(idx) + "]";
      ion.name = s.value("name", "ion" + std::to_string(idx));
      ion.mass_amu = s.value("mass_amu", 0.0);
      if (ion.mass_amu <= 0) errors.push_back(where + ".mass_amu must be positive");
      const std::string role = s.value("role", "");
      if (role == "coolant")
        ion.role = IonRole::Coolant;
      else if (role == "spin")
        ion.role = IonRole::Spin;
      else
        errors.push_back(where + ".role must be 'coolant' or 'spin'");
      ion.linewidth = units::mhz_to_rad(s.value("linewidth_MHz", 0.0));
      if (ion.linewidth < 0) errors.push_back(where + ".linewidth_MHz must be non-negative");
      for (auto it = s.begin(); it != s.end(); ++it)
        if (it.key() != "name" && it.key() != "mass_amu" && it.key() != "role" &&
            it.key() != "linewidth_MHz")
          errors.push_back("unknown key: " + where + "." + it.key());
      cfg.arrangement.species.push_back(ion);
      ++idx;
    }
  } else {
    errors.push_back("missing required key: crystal.species");
  }
  cfg.arrangement.reference_site = r.get<int>("crystal.reference_site", 0);
  if (cfg.arrangement.reference_site < 0 ||
      cfg.arrangement.reference_site >= std::max(1, int(cfg.arrangement.species.size())))
    errors.push_back("crystal.reference_site out of range");
  cfg.trap.omega_x = units::mhz_to_rad(r.positive("crystal.trap_x_MHz", 1.0, true));
  cfg.trap.omega_y = units::mhz_to_rad(r.positive("crystal.trap_y_MHz", 1.0, true));
  cfg.trap.omega_z = units::mhz_to_rad(r.positive("crystal.trap_z_MHz", 1.0, true));
  if (cfg.trap.omega_z >= std::min(cfg.trap.omega_x, cfg.trap.omega_y))
    errors.push_back("crystal.trap_z_MHz must be below both radial frequencies");

  // ---- cooling ----
  cfg.laser.rabi = units::mhz_to_rad(r.positive("cooling.rabi_MHz", 1.0));
  cfg.laser.detuning = units::mhz_to_rad(r.get<double>("cooling.detuning_MHz", 0.0));
  const double wavelength = r.positive("cooling.wavelength_nm", 280.353);
  const double projection = r.get<double>("cooling.axial_projection", 1.0);
  cfg.laser.wavevector = units::two_pi / units::nm_to_m(wavelength) * projection;
  cfg.laser.recoil_heating = r.get<bool>("cooling.recoil_heating", false);
  cfg.cooling_scan = detail::read_grid(r, "cooling.scan_MHz", units::two_pi * 1e6);
  // linewidth comes from the coolant species
  for (const auto& s : cfg.arrangement.species)
    if (s.role == IonRole::Coolant && s.linewidth > 0) cfg.laser.linewidth = s.linewidth;
  if (cfg.laser.linewidth <= 0) cfg.laser.linewidth = units::mhz_to_rad(41.4);

  // ---- magnet ----
  {
    const std::string kind = r.get<std::string>("magnet.kind", "ising");
    if (kind == "ising")
      cfg.magnet_kind = SpinModelKind::Ising;
    else if (kind == "xy")
      cfg.magnet_kind = SpinModelKind::XY;
    else if (kind == "xxz")
      cfg.magnet_kind = SpinModelKind::XXZ;
    else if (kind == "xyz")
      cfg.magnet_kind = SpinModelKind::XYZ;
    else
      errors.push_back("magnet.kind must be one of ising|xy|xxz|xyz");
    cfg.field = units::khz_to_rad(r.get<double>("magnet.field_kHz", 0.0));
  }

  auto read_uniform = [&](const std::string& key, int axis) {
    if (r.find(key)) cfg.uniform_coupling[axis] = units::khz_to_rad(r.get<double>(key, 0.0));
    else r.mark(key);
  };
  auto read_matrix = [&](const std::string& key, int axis) {
    r.mark(key);
    if (const json* m = r.find(key)) {
      try {
        const auto rows = m->get<std::vector<std::vector<double>>>();
        const int n = int(rows.size());
        Eigen::MatrixXd mat(n, n);
        for (int i = 0; i < n; ++i) {
          if (int(rows[i].size()) != n) throw json::type_error::create(302, "ragged", nullptr);
          for (int j = 0; j < n; ++j) mat(i, j) = units::khz_to_rad(rows[i][j]);
        }
        cfg.coupling_matrix[axis] = mat;
      } catch (const json::exception&) {
        errors.push_back(key + " must be a square matrix of numbers");
      }
    }
  };
  switch (cfg.magnet_kind) {
    case SpinModelKind::Ising:
      read_uniform("magnet.coupling_kHz", 2);
      read_matrix("magnet.coupling_matrix_kHz", 2);
      break;
    case SpinModelKind::XY:
      read_uniform("magnet.coupling_x_kHz", 0);
      read_uniform("magnet.coupling_y_kHz", 1);
      read_matrix("magnet.coupling_matrix_x_kHz", 0);
      read_matrix("magnet.coupling_matrix_y_kHz", 1);
      break;
    case SpinModelKind::XXZ:
      read_uniform("magnet.coupling_perp_kHz", 0);
      read_uniform("magnet.coupling_par_kHz", 2);
      break;
    case SpinModelKind::XYZ:
      read_uniform("magnet.coupling_x_kHz", 0);
      read_uniform("magnet.coupling_y_kHz", 1);
      read_uniform("magnet.coupling_z_kHz", 2);
      break;
  }
  r.mark("magnet.force");
  if (r.find("magnet.force")) {
    RunConfig::ForceSpec f;
    f.amplitude = units::khz_to_rad(r.positive("magnet.force.amplitude_kHz", 1.0, true));
    f.detuning_above_branch =
        units::khz_to_rad(r.positive("magnet.force.detuning_above_branch_kHz", 1.0, true));
    const std::string br = r.get<std::string>("magnet.force.branch", "x");
    if (br == "x")
      f.branch = Branch::X;
    else if (br == "y")
      f.branch = Branch::Y;
    else
      errors.push_back("magnet.force.branch must be 'x' or 'y'");
    cfg.force = f;
  }

  // ---- drive ----
  const char* side_names[2] = {"drive.source", "drive.drain"};
  for (int s = 0; s < 2; ++s) {
    const std::string base = side_names[s];
    // 1-based axial mode index: 1 = center of mass, N = highest
    const int n_modes = std::max(1, int(cfg.arrangement.species.size()));
    const int mode = r.get<int>(base + ".mode", s == 0 ? 1 : n_modes);
    if (mode < 1 || mode > n_modes) errors.push_back(base + ".mode out of range");
    cfg.drive[s].mode = mode - 1;
    cfg.drive[s].g = units::hz_to_rad(r.get<double>(base + ".g_Hz", 0.0));
    cfg.drive[s].delta = units::hz_to_rad(r.get<double>(base + ".delta_Hz", 0.0));
    if (r.find(base + ".kappa_Hz"))
      cfg.drive[s].kappa_override = units::hz_to_rad(r.positive(base + ".kappa_Hz", 1.0));
    else
      r.mark(base + ".kappa_Hz");
    if (r.find(base + ".nbar")) {
      const double nb = r.get<double>(base + ".nbar", 0.0);
      if (nb < 0) errors.push_back(base + ".nbar must be non-negative");
      cfg.drive[s].nbar_override = nb;
    } else {
      r.mark(base + ".nbar");
    }
  }
  r.mark("drive.sweep");
  if (r.find("drive.sweep")) {
    RunConfig::SweepSpec sw;
    if (auto g = detail::read_grid(r, "drive.sweep.delta_Hz", units::two_pi)) sw.delta = *g;
    else errors.push_back("drive.sweep requires delta_Hz");
    sw.kappa_scales = r.get<std::vector<double>>("drive.sweep.kappa_scales",
                                                 std::vector<double>{1.0});
    for (double k : sw.kappa_scales)
      if (k <= 0) errors.push_back("drive.sweep.kappa_scales entries must be positive");
    if (sw.delta.points > 1 && sw.delta.stop <= sw.delta.start)
      errors.push_back("drive.sweep.delta_Hz must be monotone increasing");
    cfg.sweep = sw;
  }

  // ---- solver ----
  cfg.rtol = r.positive("solver.rtol", cfg.rtol);
  cfg.atol = r.positive("solver.atol", cfg.atol);
  {
    const std::string m = r.get<std::string>("solver.steady_method", "nullspace");
    if (m == "nullspace")
      cfg.steady_method = SteadyMethod::Nullspace;
    else if (m == "propagate")
      cfg.steady_method = SteadyMethod::Propagate;
    else if (m == "cross_check")
      cfg.steady_method = SteadyMethod::CrossCheck;
    else
      errors.push_back("solver.steady_method must be nullspace|propagate|cross_check");
    const std::string c = r.get<std::string>("solver.coherence_mode", "secular");
    if (c == "secular")
      cfg.coherence_mode = CoherenceMode::Secular;
    else if (c == "nonsecular")
      cfg.coherence_mode = CoherenceMode::Nonsecular;
    else
      errors.push_back("solver.coherence_mode must be secular|nonsecular");
  }
  cfg.spin_cap = r.get<int>("solver.spin_cap", cfg.spin_cap);
  cfg.validity_warn = r.positive("solver.validity_warn", cfg.validity_warn);
  cfg.validity_error = r.positive("solver.validity_error", cfg.validity_error);
  cfg.initial_state = r.get<std::string>("solver.initial_state", cfg.initial_state);
  if (cfg.initial_state != "all_down" && cfg.initial_state != "triplet" &&
      cfg.initial_state != "singlet")
    errors.push_back("solver.initial_state must be all_down|triplet|singlet");
  cfg.oracle.n_max = r.get<int>("solver.oracle.n_max", cfg.oracle.n_max);
  cfg.oracle.n_max_cap = r.get<int>("solver.oracle.n_max_cap", cfg.oracle.n_max_cap);
  cfg.oracle.truncation_threshold =
      r.positive("solver.oracle.truncation_threshold", cfg.oracle.truncation_threshold);
  cfg.oracle.method = r.get<std::string>("solver.oracle.method", cfg.oracle.method);
  if (cfg.oracle.method != "direct" && cfg.oracle.method != "propagate")
    errors.push_back("solver.oracle.method must be direct|propagate");
  cfg.protocol.t_q = r.positive("solver.protocol.t_q_s", cfg.protocol.t_q ? cfg.protocol.t_q : 1.0);
  if (!r.find("solver.protocol.t_q_s")) cfg.protocol.t_q = 0.0;
  cfg.protocol.dt = r.positive("solver.protocol.dt_s", cfg.protocol.dt ? cfg.protocol.dt : 1.0);
  if (!r.find("solver.protocol.dt_s")) cfg.protocol.dt = 0.0;
  if (r.find("solver.protocol.repetitions"))
    cfg.protocol.repetitions = r.get<long>("solver.protocol.repetitions", 0);
  else
    r.mark("solver.protocol.repetitions");
  cfg.protocol.seed = r.get<unsigned long>("solver.protocol.seed", cfg.protocol.seed);
  cfg.protocol.flip_probability =
      r.get<double>("solver.protocol.flip_probability", cfg.protocol.flip_probability);
  if (cfg.protocol.flip_probability < 0 || cfg.protocol.flip_probability > 0.5)
    errors.push_back("solver.protocol.flip_probability must be in [0, 0.5]");

  // ---- output ----
  cfg.output_path = r.get<std::string>("output.path", cfg.output_path);
  cfg.precision = r.get<int>("output.precision", cfg.precision);
  if (cfg.precision < 1 || cfg.precision > 17) errors.push_back("output.precision must be in [1,17]");

  r.check_unknown();
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config file not found: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ConfigError({std::string("invalid JSON: ") + e.what()});
  }
  return parse_config_json(root);
}

inline json RunConfig::serialize() const {
  json root;
  for (const auto& s : arrangement.species) {
    json ion{{"name", s.name},
             {"mass_amu", s.mass_amu},
             {"role", s.role == IonRole::Coolant ? "coolant" : "spin"}};
    if (s.linewidth > 0) ion["linewidth_MHz"] = s.linewidth / (units::two_pi * 1e6);
    root["crystal"]["species"].push_back(ion);
  }
  root["crystal"]["reference_site"] = arrangement.reference_site;
  root["crystal"]["trap_x_MHz"] = trap.omega_x / (units::two_pi * 1e6);
  root["crystal"]["trap_y_MHz"] = trap.omega_y / (units::two_pi * 1e6);
  root["crystal"]["trap_z_MHz"] = trap.omega_z / (units::two_pi * 1e6);

  root["cooling"]["rabi_MHz"] = laser.rabi / (units::two_pi * 1e6);
  root["cooling"]["detuning_MHz"] = laser.detuning / (units::two_pi * 1e6);
  root["cooling"]["wavelength_nm"] = units::two_pi / laser.wavevector * 1e9;
  root["cooling"]["recoil_heating"] = laser.recoil_heating;
  if (cooling_scan) {
    root["cooling"]["scan_MHz"] = {{"start", cooling_scan->start / (units::two_pi * 1e6)},
                                   {"stop", cooling_scan->stop / (units::two_pi * 1e6)},
                                   {"points", cooling_scan->points}};
  }

  root["magnet"]["kind"] = spin_model_name(magnet_kind);
  root["magnet"]["field_kHz"] = field / (units::two_pi * 1e3);
  const char* axis_key[3] = {"magnet.coupling_x_kHz", "magnet.coupling_y_kHz",
                             "magnet.coupling_z_kHz"};
  (void)axis_key;
  auto put_uniform = [&](const char* key, int axis) {
    if (uniform_coupling[axis]) root["magnet"][key] = *uniform_coupling[axis] / (units::two_pi * 1e3);
  };
  switch (magnet_kind) {
    case SpinModelKind::Ising: put_uniform("coupling_kHz", 2); break;
    case SpinModelKind::XY:
      put_uniform("coupling_x_kHz", 0);
      put_uniform("coupling_y_kHz", 1);
      break;
    case SpinModelKind::XXZ:
      put_uniform("coupling_perp_kHz", 0);
      put_uniform("coupling_par_kHz", 2);
      break;
    case SpinModelKind::XYZ:
      put_uniform("coupling_x_kHz", 0);
      put_uniform("coupling_y_kHz", 1);
      put_uniform("coupling_z_kHz", 2);
      break;
  }
  auto put_matrix = [&](const char* key, int axis) {
    if (!coupling_matrix[axis]) return;
    const auto& m = *coupling_matrix[axis];
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j) / (units::two_pi * 1e3));
      rows.push_back(row);
    }
    root["magnet"][key] = rows;
  };
  if (magnet_kind == SpinModelKind::Ising) put_matrix("coupling_matrix_kHz", 2);
  if (magnet_kind == SpinModelKind::XY) {
    put_matrix("coupling_matrix_x_kHz", 0);
    put_matrix("coupling_matrix_y_kHz", 1);
  }
  if (force) {
    root["magnet"]["force"]["amplitude_kHz"] = force->amplitude / (units::two_pi * 1e3);
    root["magnet"]["force"]["detuning_above_branch_kHz"] =
        force->detuning_above_branch / (units::two_pi * 1e3);
    root["magnet"]["force"]["branch"] = branch_name(force->branch);
  }

  const char* side_names[2] = {"source", "drain"};
  for (int s = 0; s < 2; ++s) {
    json& side = root["drive"][side_names[s]];
    side["mode"] = drive[s].mode + 1;
    side["g_Hz"] = drive[s].g / units::two_pi;
    side["delta_Hz"] = drive[s].delta / units::two_pi;
    if (drive[s].kappa_override) side["kappa_Hz"] = *drive[s].kappa_override / units::two_pi;
    if (drive[s].nbar_override) side["nbar"] = *drive[s].nbar_override;
  }
  if (sweep) {
    root["drive"]["sweep"]["delta_Hz"] = {{"start", sweep->delta.start / units::two_pi},
                                          {"stop", sweep->delta.stop / units::two_pi},
                                          {"points", sweep->delta.points}};
    root["drive"]["sweep"]["kappa_scales"] = sweep->kappa_scales;
  }

  root["solver"]["rtol"] = rtol;
  root["solver"]["atol"] = atol;
  root["solver"]["steady_method"] = steady_method == SteadyMethod::Nullspace   ? "nullspace"
                                    : steady_method == SteadyMethod::Propagate ? "propagate"
                                                                               : "cross_check";
  root["solver"]["coherence_mode"] =
      coherence_mode == CoherenceMode::Secular ? "secular" : "nonsecular";
  root["solver"]["spin_cap"] = spin_cap;
  root["solver"]["validity_warn"] = validity_warn;
  root["solver"]["validity_error"] = validity_error;
  root["solver"]["initial_state"] = initial_state;
  root["solver"]["oracle"]["n_max"] = oracle.n_max;
  root["solver"]["oracle"]["n_max_cap"] = oracle.n_max_cap;
  root["solver"]["oracle"]["truncation_threshold"] = oracle.truncation_threshold;
  root["solver"]["oracle"]["method"] = oracle.method;
  if (protocol.t_q > 0) root["solver"]["protocol"]["t_q_s"] = protocol.t_q;
  if (protocol.dt > 0) root["solver"]["protocol"]["dt_s"] = protocol.dt;
  if (protocol.repetitions) root["solver"]["protocol"]["repetitions"] = *protocol.repetitions;
  root["solver"]["protocol"]["seed"] = protocol.seed;
  root["solver"]["protocol"]["flip_probability"] = protocol.flip_probability;

  root["output"]["path"] = output_path;
  root["output"]["precision"] = precision;
  return root;
}

}  // namespace spinflow
