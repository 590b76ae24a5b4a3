#include "grape/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "grape/gates.hpp"
#include "grape/sequence_io.hpp"

namespace grape {

using json = nlohmann::json;

ErrorKind parse_error_kind(const std::string& text) {
  if (text == "PLE" || text == "ple") return ErrorKind::kPle;
  if (text == "ORE" || text == "ore") return ErrorKind::kOre;
  throw ConfigError("invalid error kind '" + text + "' (expected PLE or ORE)");
}

std::string to_string(ErrorKind kind) { return kind == ErrorKind::kPle ? "PLE" : "ORE"; }

void RunConfig::override_seed(std::uint64_t s) {
  rng_seed = s;
  optimizer.seed = s;
}

namespace {

/// A JSON object plus its dotted path, for diagnostics.
class Section {
 public:
  Section(const json& node, std::string path, std::string source)
      : node_(node), path_(std::move(path)), source_(std::move(source)) {
    if (!node_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    std::string field = path_;
    if (!key.empty()) field += (field.empty() ? "" : ".") + key;
    throw ConfigError(source_ + ": field '" + (field.empty() ? "<root>" : field) + "': " + message);
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : node_.items()) {
      if (!allowed.count(item.key())) fail(item.key(), "unknown field");
    }
  }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "expected a finite number");
    return d;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_int(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? unsigned_int(key) : fallback;
  }

  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }

  Section section(const std::string& key) const { return {at(key), join(key), source_}; }

  const json& array(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& source() const { return source_; }

  template <typename F>
  auto wrap(const std::string& key, F&& f) const {
    try {
      return f();
    } catch (const ConfigError& e) {
      fail(key, e.what());
    }
  }

 private:
  const json& at(const std::string& key) const {
    if (!node_.contains(key)) fail(key, "missing required field");
    return node_.at(key);
  }

  const json& node_;
  std::string path_;
  std::string source_;
};

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < std::min(e.byte == 0 ? 0 : e.byte - 1, text.size()); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << column << ": JSON parse error: " << e.what();
    throw ConfigError(os.str());
  }
}

std::string read_file(const std::filesystem::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t index_of(const json& v, const Section& parent, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) parent.fail(key, "expected a spin index");
  return v.get<std::size_t>();
}

constexpr double kDegToRad = std::numbers::pi / 180.0;

double rotation_phase(const Section& t) {
  if (t.has("axis")) {
    const std::string axis = t.string("axis");
    if (axis == "x") return 0.0;
    if (axis == "y") return 0.5 * std::numbers::pi;
    if (axis == "-x") return std::numbers::pi;
    if (axis == "-y") return 1.5 * std::numbers::pi;
    t.fail("axis", "expected x, y, -x or -y");
  }
  return t.number("phase_deg", 0.0) * kDegToRad;
}

TargetGate parse_target(const Section& t, std::size_t num_spins, const std::filesystem::path& base) {
  if (t.has("matrix_file")) {
    t.allow_only({"matrix_file", "label"});
    const auto path = base / t.string("matrix_file");
    TargetGate g{t.wrap("matrix_file", [&] { return load_matrix(path); }), t.string("label", path.filename().string())};
    t.wrap("matrix_file", [&] {
      g.validate();
      return 0;
    });
    return g;
  }
  const std::string gate = t.string("gate");
  return t.wrap("gate", [&] {
    if (gate == "identity") {
      t.allow_only({"gate"});
      return identity_gate(num_spins);
    }
    if (gate == "rotation") {
      t.allow_only({"gate", "spin", "angle_deg", "axis", "phase_deg"});
      if (t.has("axis") && t.has("phase_deg")) t.fail("axis", "give either axis or phase_deg");
      TargetGate g = rotation_gate(t.number("angle_deg") * kDegToRad, rotation_phase(t),
                                   t.unsigned_int("spin", 0), num_spins);
      return g;
    }
    if (gate == "z_rotation") {
      t.allow_only({"gate", "spin", "angle_deg"});
      return z_rotation_gate(t.number("angle_deg") * kDegToRad, t.unsigned_int("spin", 0), num_spins);
    }
    if (gate == "controlled_phase") {
      t.allow_only({"gate", "theta_deg", "a", "b"});
      return controlled_phase_gate(t.number("theta_deg", 180.0) * kDegToRad, t.unsigned_int("a", 0),
                                   t.unsigned_int("b", 1), num_spins);
    }
    if (gate == "cnot" || gate == "controlled_not") {
      t.allow_only({"gate", "control", "target"});
      return controlled_not_gate(t.unsigned_int("control", 0), t.unsigned_int("target", 1), num_spins);
    }
    t.fail("gate", "unknown gate '" + gate + "' (identity, rotation, z_rotation, controlled_phase, cnot)");
  });
}

OptimizerConfig parse_optimizer(const Section& s) {
  s.allow_only({"max_iterations", "fidelity_goal", "gradient_norm_floor", "line_search", "perturbation",
                "max_restarts", "seed", "gradient_mode", "reset_interval"});
  OptimizerConfig c;
  c.max_iterations = s.unsigned_int("max_iterations", c.max_iterations);
  c.fidelity_goal = s.number("fidelity_goal", c.fidelity_goal);
  c.gradient_norm_floor = s.number("gradient_norm_floor", c.gradient_norm_floor);
  c.perturbation = s.number("perturbation", c.perturbation);
  c.max_restarts = s.unsigned_int("max_restarts", c.max_restarts);
  c.seed = s.unsigned_int("seed", c.seed);
  c.reset_interval = s.unsigned_int("reset_interval", c.reset_interval);
  if (s.has("gradient_mode")) {
    c.gradient_mode = s.wrap("gradient_mode", [&] { return parse_gradient_mode(s.string("gradient_mode")); });
  }
  if (s.has("line_search")) {
    const Section ls = s.section("line_search");
    ls.allow_only({"initial_step", "growth", "shrink", "max_probes", "sufficient_increase", "curvature"});
    auto& l = c.line_search;
    l.initial_step = ls.number("initial_step", l.initial_step);
    l.growth = ls.number("growth", l.growth);
    l.shrink = ls.number("shrink", l.shrink);
    l.max_probes = ls.unsigned_int("max_probes", l.max_probes);
    l.sufficient_increase = ls.number("sufficient_increase", l.sufficient_increase);
    l.curvature = ls.number("curvature", l.curvature);
  }
  s.wrap("", [&] {
    c.validate();
    return 0;
  });
  return c;
}

double nominal_amplitude_hz(const SpinSystem& system) {
  double m = 0.0;
  for (const auto& ch : system.channels) m = std::max(m, ch.max_amplitude_hz);
  return m;
}

}  // namespace

SpinSystem parse_spin_system(const std::string& text, const std::string& source) {
  const json root = parse_json(text, source);
  const Section s(root, "", source);
  s.allow_only({"spins", "couplings", "contaminants", "channels", "max_spins", "label"});
  SpinSystem sys;
  sys.max_spins = s.unsigned_int("max_spins", sys.max_spins);

  const json& spins = s.array("spins");
  for (std::size_t i = 0; i < spins.size(); ++i) {
    const json& v = spins[i];
    const std::string key = "spins[" + std::to_string(i) + "]";
    if (v.is_number()) {
      sys.offsets_hz.push_back(v.get<double>());
    } else if (v.is_object()) {
      const Section spin(v, key, source);
      spin.allow_only({"offset_hz", "label"});
      sys.offsets_hz.push_back(spin.number("offset_hz"));
    } else {
      s.fail(key, "expected an offset in Hz or {\"offset_hz\": ...}");
    }
  }

  if (s.has("couplings")) {
    const json& cs = s.array("couplings");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const Section c(cs[i], "couplings[" + std::to_string(i) + "]", source);
      c.allow_only({"a", "b", "j_hz", "mode"});
      Coupling cp;
      cp.a = c.unsigned_int("a");
      cp.b = c.unsigned_int("b");
      cp.j_hz = c.number("j_hz");
      cp.mode = c.wrap("mode", [&] { return parse_coupling_mode(c.string("mode", "weak")); });
      sys.couplings.push_back(cp);
    }
  }

  if (s.has("contaminants")) {
    const json& cs = s.array("contaminants");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const json& v = cs[i];
      if (v.is_number()) {
        sys.contaminant_offsets_hz.push_back(v.get<double>());
      } else {
        const Section c(v, "contaminants[" + std::to_string(i) + "]", source);
        c.allow_only({"offset_hz", "label"});
        sys.contaminant_offsets_hz.push_back(c.number("offset_hz"));
      }
    }
  }

  if (s.has("channels")) {
    const json& chs = s.array("channels");
    for (std::size_t i = 0; i < chs.size(); ++i) {
      const std::string key = "channels[" + std::to_string(i) + "]";
      const Section c(chs[i], key, source);
      c.allow_only({"spins", "max_amplitude_hz", "label"});
      Channel ch;
      const json& addressed = c.array("spins");
      for (const auto& a : addressed) ch.spins.push_back(index_of(a, c, "spins"));
      ch.max_amplitude_hz = c.number("max_amplitude_hz", 0.0);
      sys.channels.push_back(std::move(ch));
    }
  } else {
    Channel all;
    for (std::size_t i = 0; i < sys.offsets_hz.size(); ++i) all.spins.push_back(i);
    sys.channels.push_back(std::move(all));
  }

  try {
    sys.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return sys;
}

SpinSystem load_spin_system(const std::filesystem::path& path) {
  return parse_spin_system(read_file(path, "system file"), path.string());
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& source) {
  const std::string src = source.string();
  const json root = parse_json(text, src);
  const Section s(root, "", src);
  s.allow_only({"system", "target", "seed", "optimizer", "ensemble", "contaminant_weight", "penalty",
                "hardware", "scan", "coarsen", "output_dir", "label"});
  const std::filesystem::path base = source.has_parent_path() ? source.parent_path() : std::filesystem::path(".");

  RunConfig cfg;
  cfg.config_path = source;
  cfg.system_path = base / s.string("system");
  if (!std::filesystem::exists(cfg.system_path)) {
    s.fail("system", "system file '" + cfg.system_path.string() + "' does not exist");
  }
  cfg.system = load_spin_system(cfg.system_path);
  cfg.target = parse_target(s.section("target"), cfg.system.num_spins(), base);
  cfg.target.label = s.section("target").string("gate", cfg.target.label);

  const double nominal_hz = nominal_amplitude_hz(cfg.system);
  {
    const Section sd = s.section("seed");
    sd.allow_only({"n_steps", "dt_s", "n_harmonics", "amplitude_bound_hz", "rng_seed"});
    cfg.seed.n_steps = sd.unsigned_int("n_steps");
    if (cfg.seed.n_steps == 0) sd.fail("n_steps", "must be at least 1");
    cfg.seed.channels = cfg.system.channels.size();
    cfg.seed.n_harmonics = sd.unsigned_int("n_harmonics", cfg.seed.n_harmonics);
    const double bound_hz = sd.number("amplitude_bound_hz", nominal_hz > 0.0 ? 0.25 * nominal_hz : 0.0);
    if (!(bound_hz > 0.0)) sd.fail("amplitude_bound_hz", "must be positive (or give channel max amplitudes)");
    cfg.seed.amplitude_bound = hz_to_rad(bound_hz);
    const double reference_hz = nominal_hz > 0.0 ? nominal_hz : bound_hz;
    cfg.seed.dt_s = sd.number("dt_s", 0.1 / hz_to_rad(reference_hz));
    if (!(cfg.seed.dt_s > 0.0)) sd.fail("dt_s", "must be positive");
    cfg.rng_seed = sd.unsigned_int("rng_seed", 1);
  }

  if (s.has("optimizer")) cfg.optimizer = parse_optimizer(s.section("optimizer"));

  if (s.has("ensemble")) {
    const json& members = s.array("ensemble");
    cfg.ensemble.members.clear();
    for (std::size_t i = 0; i < members.size(); ++i) {
      const Section m(members[i], "ensemble[" + std::to_string(i) + "]", src);
      m.allow_only({"ple", "ore_hz", "weight"});
      EnsembleMember member;
      if (m.has("ple")) {
        const double scale = m.number("ple");
        if (!(scale > 0.0)) m.fail("ple", "must be positive");
        member.errors.emplace_back(PulseLengthError{scale});
      }
      if (m.has("ore_hz")) member.errors.emplace_back(OffResonanceError{m.number("ore_hz")});
      member.weight = m.number("weight", 1.0);
      if (!(member.weight >= 0.0)) m.fail("weight", "must be non-negative");
      cfg.ensemble.members.push_back(std::move(member));
    }
    if (cfg.ensemble.members.empty()) s.fail("ensemble", "needs at least one member");
  }
  cfg.ensemble.contaminant_weight = s.number("contaminant_weight", cfg.ensemble.contaminant_weight);
  s.wrap("ensemble", [&] { return cfg.ensemble.validate(); });

  if (s.has("penalty")) {
    const Section p = s.section("penalty");
    p.allow_only({"u_max_hz", "lambda"});
    cfg.penalty.enabled = true;
    const double umax_hz = p.number("u_max_hz", nominal_hz);
    if (!(umax_hz > 0.0)) p.fail("u_max_hz", "must be positive");
    cfg.penalty.u_max = hz_to_rad(umax_hz);
    cfg.penalty.lambda = p.number("lambda", cfg.penalty.lambda);
    if (!(cfg.penalty.lambda >= 0.0)) p.fail("lambda", "must be non-negative");
  }

  if (s.has("hardware")) {
    const Section h = s.section("hardware");
    h.allow_only({"amplitude_levels", "phase_resolution_deg", "max_amplitude_hz", "pre_delay_s", "post_delay_s"});
    if (h.has("amplitude_levels") || h.has("phase_resolution_deg")) {
      QuantizationSpec q;
      q.amplitude_levels = h.unsigned_int("amplitude_levels", q.amplitude_levels);
      q.phase_resolution_deg = h.number("phase_resolution_deg", q.phase_resolution_deg);
      q.max_amplitude_hz = h.number("max_amplitude_hz", nominal_hz);
      h.wrap("", [&] {
        q.validate();
        return 0;
      });
      cfg.quantization = q;
    }
    cfg.pad.pre_s = h.number("pre_delay_s", 0.0);
    cfg.pad.post_s = h.number("post_delay_s", 0.0);
    h.wrap("", [&] {
      cfg.pad.validate();
      return 0;
    });
  }

  if (s.has("scan")) {
    const Section sc = s.section("scan");
    sc.allow_only({"kind", "from", "to", "points"});
    cfg.scan.kind = sc.wrap("kind", [&] { return parse_error_kind(sc.string("kind", "PLE")); });
    cfg.scan.from = sc.number("from", cfg.scan.from);
    cfg.scan.to = sc.number("to", cfg.scan.to);
    cfg.scan.points = sc.unsigned_int("points", cfg.scan.points);
    if (cfg.scan.points < 2) sc.fail("points", "must be at least 2");
  }

  if (s.has("coarsen")) {
    const Section c = s.section("coarsen");
    c.allow_only({"depth", "min_steps"});
    cfg.coarsen.depth = c.unsigned_int("depth", cfg.coarsen.depth);
    cfg.coarsen.min_steps = c.unsigned_int("min_steps", cfg.coarsen.min_steps);
  }

  if (s.has("output_dir")) cfg.output_dir = base / s.string("output_dir");
  else cfg.output_dir = base / "out";
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path, "config file"), path);
}

}  // namespace grape
