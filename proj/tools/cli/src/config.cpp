#include "fluxspin/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace fluxspin::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads an object, remembering which keys were consumed so that leftovers can
// be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string key(const std::string& k) const { return join(path_, k); }

  const json* take(const std::string& k) {
    seen_.insert(k);
    const auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& k, double def) {
    const json* v = take(k);
    if (!v) return def;
    return as_number(*v, key(k));
  }

  double positive(const std::string& k, double def) {
    const double v = number(k, def);
    if (!(v > 0.0)) throw ConfigError(key(k), "must be positive");
    return v;
  }

  double non_negative(const std::string& k, double def) {
    const double v = number(k, def);
    if (!(v >= 0.0)) throw ConfigError(key(k), "must be non-negative");
    return v;
  }

  long long integer(const std::string& k, long long def, long long min, long long max) {
    const json* v = take(k);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(key(k), "expected an integer");
    if (v->is_number_unsigned() && v->get<unsigned long long>() > static_cast<unsigned long long>(max))
      throw ConfigError(key(k), "out of range");
    const auto x = v->get<long long>();
    if (x < min || x > max) throw ConfigError(key(k), "out of range [" + std::to_string(min) + ", " + std::to_string(max) + "]");
    return x;
  }

  std::uint64_t unsigned64(const std::string& k, std::uint64_t def) {
    const json* v = take(k);
    if (!v) return def;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<long long>() < 0))
      throw ConfigError(key(k), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& k, bool def) {
    const json* v = take(k);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& k, const std::string& def) {
    const json* v = take(k);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(key(k), "expected a string");
    return v->get<std::string>();
  }

  std::array<double, 3> vec3(const std::string& k, std::array<double, 3> def) {
    const json* v = take(k);
    if (!v) return def;
    return as_vec3(*v, key(k));
  }

  std::vector<double> numbers(const std::string& k) {
    const json* v = take(k);
    if (!v) return {};
    if (!v->is_array()) throw ConfigError(key(k), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_number((*v)[i], key(k) + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::optional<Reader> object(const std::string& k) {
    const json* v = take(k);
    if (!v) return std::nullopt;
    return Reader(*v, key(k));
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.contains(item.key())) throw ConfigError(key(item.key()), "unknown key");
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where, "must be finite");
    return x;
  }

  static std::array<double, 3> as_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(where, "expected [x, y, z]");
    return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]"), as_number(v[2], where + "[2]")};
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

PrecessionVector to_vector(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

BlochVector to_spin(const std::array<double, 3>& a, const std::string& where) {
  try {
    return BlochVector::pure(a[0], a[1], a[2]);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where, e.what());
  }
}

FluctuatorConfig read_fluctuator(Reader& parent) {
  auto r = parent.object("fluctuator");
  if (!r) throw ConfigError(parent.key("fluctuator"), "required");
  FluctuatorConfig f;
  const json* omegas = r->take("omegas");
  if (!omegas || !omegas->is_array() || omegas->empty())
    throw ConfigError(r->key("omegas"), "expected a non-empty array of [x, y, z]");
  for (std::size_t i = 0; i < omegas->size(); ++i)
    f.omegas.push_back(Reader::as_vec3((*omegas)[i], r->key("omegas") + "[" + std::to_string(i) + "]"));
  const std::size_t n = f.omegas.size();

  const json* rates = r->take("rates");
  if (!rates) {
    if (n != 1) throw ConfigError(r->key("rates"), "required when there is more than one state");
    f.rates = {{0.0}};
  } else {
    if (!rates->is_array() || rates->size() != n)
      throw ConfigError(r->key("rates"), "expected an " + std::to_string(n) + " x " + std::to_string(n) + " matrix");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string where = r->key("rates") + "[" + std::to_string(i) + "]";
      const json& row = (*rates)[i];
      if (!row.is_array() || row.size() != n) throw ConfigError(where, "expected " + std::to_string(n) + " entries");
      std::vector<double> values;
      for (std::size_t j = 0; j < n; ++j) {
        const double x = Reader::as_number(row[j], where + "[" + std::to_string(j) + "]");
        if (i != j && x < 0.0) throw ConfigError(where + "[" + std::to_string(j) + "]", "rates must be non-negative");
        values.push_back(i == j ? 0.0 : x);
      }
      f.rates.push_back(std::move(values));
    }
  }

  if (const json* labels = r->take("labels")) {
    if (!labels->is_array() || labels->size() != n)
      throw ConfigError(r->key("labels"), "expected " + std::to_string(n) + " strings");
    for (const auto& l : *labels) {
      if (!l.is_string()) throw ConfigError(r->key("labels"), "expected strings");
      f.labels.push_back(l.get<std::string>());
    }
  }
  r->finish();
  try {
    f.labels = f.build().labels();
  } catch (const Error& e) {
    throw ConfigError(parent.key("fluctuator"), e.what());
  }
  return f;
}

OccupationConfig read_occupation(Reader& r, OccupationConfig def) {
  const json* v = r.take("occupation");
  if (!v) return def;
  OccupationConfig o;
  if (v->is_string()) {
    o.kind = v->get<std::string>();
    if (o.kind != "ground" && o.kind != "stationary")
      throw ConfigError(r.key("occupation"), "expected \"ground\", \"stationary\" or a list of probabilities");
    return o;
  }
  if (!v->is_array()) throw ConfigError(r.key("occupation"), "expected \"ground\", \"stationary\" or a list of probabilities");
  o.kind = "custom";
  for (std::size_t i = 0; i < v->size(); ++i)
    o.probabilities.push_back(Reader::as_number((*v)[i], r.key("occupation") + "[" + std::to_string(i) + "]"));
  return o;
}

void check_occupation(const FluctuatorSpec& spec, const OccupationConfig& o, const std::string& where) {
  try {
    (void)occupation_probabilities(spec, o.build());
  } catch (const Error& e) {
    throw ConfigError(where, e.what());
  }
}

TimeGridConfig read_grid(Reader& parent, TimeGridConfig def) {
  auto r = parent.object("grid");
  if (!r) return def;
  TimeGridConfig g;
  g.t_end = r->non_negative("t_end", def.t_end);
  g.points = static_cast<int>(r->integer("points", def.points, 0, 1000000));
  if (g.points == 1) throw ConfigError(r->key("points"), "need at least 2 points (0 for the default grid)");
  r->finish();
  return g;
}

SimulateConfig read_simulate(Reader& r) {
  SimulateConfig c;
  c.fluctuator = read_fluctuator(r);
  c.initial_spin = r.vec3("initial_spin", c.initial_spin);
  (void)to_spin(c.initial_spin, r.key("initial_spin"));
  c.occupation = read_occupation(r, c.occupation);
  c.grid = read_grid(r, c.grid);
  if (c.grid.points > 0 && !(c.grid.t_end > 0.0)) throw ConfigError(r.key("grid.t_end"), "must be positive when points is set");
  check_occupation(c.fluctuator.build(), c.occupation, r.key("occupation"));
  return c;
}

CrossoverConfig read_crossover(Reader& r) {
  CrossoverConfig c;
  c.rate_ba = r.positive("rate_ba", c.rate_ba);
  c.rate_ab = r.positive("rate_ab", c.rate_ab);
  c.mean_omega = r.vec3("mean_omega", c.mean_omega);
  c.direction = r.vec3("direction", c.direction);
  c.initial_spin = r.vec3("initial_spin", c.initial_spin);
  (void)to_spin(c.initial_spin, r.key("initial_spin"));
  c.occupation = read_occupation(r, c.occupation);
  c.min_over_rate = r.positive("min_over_rate", c.min_over_rate);
  c.max_over_rate = r.positive("max_over_rate", c.max_over_rate);
  c.points = static_cast<int>(r.integer("points", c.points, 2, 100000));
  c.values = r.numbers("values");
  if (c.values.empty() && c.max_over_rate <= c.min_over_rate) throw ConfigError(r.key("max_over_rate"), "must exceed min_over_rate");
  try {
    const CrossoverTemplate t = c.build();
    (void)t.build(0.0);
    check_occupation(t.build(1.0), c.occupation, r.key("occupation"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(r.path(), e.what());
  }
  for (std::size_t k = 0; k < c.values.size(); ++k) {
    if (c.values[k] < 0.0) throw ConfigError(r.key("values"), "must be non-negative");
    if (k > 0 && c.values[k] <= c.values[k - 1]) throw ConfigError(r.key("values"), "must be strictly increasing");
  }
  return c;
}

Fig2Config read_fig2(Reader& r) {
  Fig2Config c;
  c.n_states = static_cast<int>(r.integer("n_states", c.n_states, 2, 64));
  c.sigma_omega_ratio = r.positive("sigma_omega_ratio", c.sigma_omega_ratio);
  c.gamma_rad = r.positive("gamma_rad", c.gamma_rad);
  c.excitation_rate = r.positive("excitation_rate", c.excitation_rate);
  c.n_realizations = static_cast<int>(r.integer("n_realizations", c.n_realizations, 1, 1000000));
  c.occupation = read_occupation(r, c.occupation);
  if (c.occupation.kind == "custom" && static_cast<int>(c.occupation.probabilities.size()) != c.n_states)
    throw ConfigError(r.key("occupation"), "expected " + std::to_string(c.n_states) + " probabilities");
  c.gamma0_offset = r.non_negative("gamma0_offset", c.gamma0_offset);
  c.gamma_dark = r.non_negative("gamma_dark", c.gamma_dark);
  c.resample_per_point = r.boolean("resample_per_point", c.resample_per_point);
  c.min_over_gamma = r.positive("min_over_gamma", c.min_over_gamma);
  c.max_over_gamma = r.positive("max_over_gamma", c.max_over_gamma);
  c.points = static_cast<int>(r.integer("points", c.points, 2, 100000));
  c.values = r.numbers("values");
  if (c.values.empty()) {
    if (c.max_over_gamma <= c.min_over_gamma) throw ConfigError(r.key("max_over_gamma"), "must exceed min_over_gamma");
    if (c.max_over_gamma > 0.25) throw ConfigError(r.key("max_over_gamma"), "must not exceed 0.25");
  }
  for (std::size_t k = 0; k < c.values.size(); ++k) {
    if (!(c.values[k] > 0.0) || c.values[k] > 0.25 * c.gamma_rad) throw ConfigError(r.key("values"), "must lie in (0, 0.25 gamma_rad]");
    if (k > 0 && c.values[k] <= c.values[k - 1]) throw ConfigError(r.key("values"), "must be strictly increasing");
  }
  try {
    c.build(0).validate();
  } catch (const Error& e) {
    throw ConfigError(r.path(), e.what());
  }
  return c;
}

McValidateConfig read_mc_validate(Reader& r) {
  McValidateConfig c;
  c.fluctuator = read_fluctuator(r);
  c.initial_spin = r.vec3("initial_spin", c.initial_spin);
  (void)to_spin(c.initial_spin, r.key("initial_spin"));
  c.occupation = read_occupation(r, c.occupation);
  c.grid = read_grid(r, c.grid);
  if (c.grid.points < 2) throw ConfigError(r.key("grid.points"), "need at least 2 points");
  c.trajectories = r.unsigned64("trajectories", c.trajectories);
  if (c.trajectories < 2) throw ConfigError(r.key("trajectories"), "need at least 2 trajectories");
  c.threshold_se = r.positive("threshold_se", c.threshold_se);
  check_occupation(c.fluctuator.build(), c.occupation, r.key("occupation"));
  return c;
}

SweetspotConfig read_sweetspot(Reader& r) {
  SweetspotConfig c;
  c.fluctuator = read_fluctuator(r);
  c.occupation = read_occupation(r, c.occupation);
  const FluctuatorSpec spec = c.fluctuator.build();
  check_occupation(spec, c.occupation, r.key("occupation"));
  try {
    (void)stationary_distribution(spec);
  } catch (const Error& e) {
    throw ConfigError(r.key("fluctuator"), e.what());
  }
  return c;
}

std::string section_name(Command c) {
  return c == Command::McValidate ? "mc_validate" : command_name(c);
}

json vec3_json(const std::array<double, 3>& a) { return json::array({a[0], a[1], a[2]}); }

json occupation_json(const OccupationConfig& o) {
  if (o.kind == "custom") return o.probabilities;
  return o.kind;
}

json fluctuator_json(const FluctuatorConfig& f) {
  json omegas = json::array();
  for (const auto& w : f.omegas) omegas.push_back(vec3_json(w));
  return {{"rates", f.rates}, {"omegas", omegas}, {"labels", f.labels}};
}

json grid_json(const TimeGridConfig& g) { return {{"t_end", g.t_end}, {"points", g.points}}; }

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::Simulate:
      return "simulate";
    case Command::Crossover:
      return "crossover";
    case Command::Fig2:
      return "fig2";
    case Command::McValidate:
      return "mc-validate";
    case Command::Sweetspot:
      return "sweetspot";
  }
  return "";
}

std::optional<Command> parse_command(const std::string& name) {
  for (Command c : {Command::Simulate, Command::Crossover, Command::Fig2, Command::McValidate, Command::Sweetspot})
    if (command_name(c) == name) return c;
  return std::nullopt;
}

FluctuatorSpec FluctuatorConfig::build() const {
  const auto n = static_cast<Eigen::Index>(omegas.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  std::vector<PrecessionVector> w;
  for (const auto& a : omegas) w.push_back(to_vector(a));
  return FluctuatorSpec(m, std::move(w), labels);
}

Occupation OccupationConfig::build() const {
  if (kind == "stationary") return Occupation::stationary();
  if (kind == "custom") return Occupation::from_probabilities(Eigen::Map<const Eigen::VectorXd>(probabilities.data(),
                                                                                               static_cast<Eigen::Index>(probabilities.size())));
  return Occupation::ground_only();
}

CrossoverTemplate CrossoverConfig::build() const {
  CrossoverTemplate t;
  t.rate_ba = rate_ba;
  t.rate_ab = rate_ab;
  t.mean_omega = to_vector(mean_omega);
  t.direction = to_vector(direction);
  t.initial_spin = to_spin(initial_spin, "crossover.initial_spin");
  t.occupation = occupation.build();
  return t;
}

std::vector<double> CrossoverConfig::grid() const {
  if (!values.empty()) return values;
  std::vector<double> g;
  const double r = rate_ba + rate_ab;
  const double step = std::log(max_over_rate / min_over_rate) / (points - 1);
  for (int k = 0; k < points; ++k) g.push_back(r * min_over_rate * std::exp(step * k));
  g.back() = r * max_over_rate;
  return g;
}

EnsembleSpec Fig2Config::build(std::uint64_t seed) const {
  EnsembleSpec e;
  e.n_states = n_states;
  e.sigma_omega_ratio = sigma_omega_ratio;
  e.gamma_rad = gamma_rad;
  e.excitation_rate = excitation_rate;
  e.n_realizations = n_realizations;
  e.seed = seed;
  e.occupation = occupation.build();
  e.gamma0_offset = gamma0_offset;
  e.gamma_dark = gamma_dark;
  e.resample_per_point = resample_per_point;
  return e;
}

std::vector<double> Fig2Config::grid() const {
  if (!values.empty()) return values;
  std::vector<double> g;
  const double step = std::log(max_over_gamma / min_over_gamma) / (points - 1);
  for (int k = 0; k < points; ++k) g.push_back(gamma_rad * min_over_gamma * std::exp(step * k));
  g.back() = gamma_rad * max_over_gamma;
  return g;
}

RunConfig parse_config(const json& doc) {
  if (doc.is_object() && doc.contains("envelope_version")) {
    if (!doc.contains("config")) throw ConfigError("config", "result envelope has no echoed config");
    return parse_config(doc.at("config"));
  }
  Reader r(doc, "");
  RunConfig c;
  c.schema_version = static_cast<int>(r.integer("schema_version", kSchemaVersion, 0, 1000));
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(c.schema_version) + " (expected " +
                                            std::to_string(kSchemaVersion) + ")");
  const json* cmd = r.take("command");
  if (!cmd) throw ConfigError("command", "required");
  if (!cmd->is_string() || !parse_command(cmd->get<std::string>()))
    throw ConfigError("command", "expected one of simulate, crossover, fig2, mc-validate, sweetspot");
  c.command = *parse_command(cmd->get<std::string>());
  c.seed = r.unsigned64("seed", c.seed);
  c.workers = static_cast<unsigned>(r.integer("workers", 0, 0, 4096));
  if (auto out = r.object("output")) {
    c.out_dir = out->string("dir", c.out_dir);
    c.plot = out->boolean("plot", c.plot);
    out->finish();
  }

  const std::string section = section_name(c.command);
  const json empty = json::object();
  const json* body = r.take(section);
  Reader s(body ? *body : empty, section);
  switch (c.command) {
    case Command::Simulate:
      c.params = read_simulate(s);
      break;
    case Command::Crossover:
      c.params = read_crossover(s);
      break;
    case Command::Fig2:
      c.params = read_fig2(s);
      break;
    case Command::McValidate:
      c.params = read_mc_validate(s);
      break;
    case Command::Sweetspot:
      c.params = read_sweetspot(s);
      break;
  }
  s.finish();
  r.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  json doc;
  try {
    doc = json::parse(text.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json j = {{"schema_version", c.schema_version},
            {"command", command_name(c.command)},
            {"seed", c.seed},
            {"workers", c.workers},
            {"output", {{"dir", c.out_dir}, {"plot", c.plot}}}};
  json body;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SimulateConfig>) {
          body = {{"fluctuator", fluctuator_json(p.fluctuator)},
                  {"initial_spin", vec3_json(p.initial_spin)},
                  {"occupation", occupation_json(p.occupation)},
                  {"grid", grid_json(p.grid)}};
        } else if constexpr (std::is_same_v<T, CrossoverConfig>) {
          body = {{"rate_ba", p.rate_ba},
                  {"rate_ab", p.rate_ab},
                  {"mean_omega", vec3_json(p.mean_omega)},
                  {"direction", vec3_json(p.direction)},
                  {"initial_spin", vec3_json(p.initial_spin)},
                  {"occupation", occupation_json(p.occupation)},
                  {"min_over_rate", p.min_over_rate},
                  {"max_over_rate", p.max_over_rate},
                  {"points", p.points},
                  {"values", p.values}};
        } else if constexpr (std::is_same_v<T, Fig2Config>) {
          body = {{"n_states", p.n_states},
                  {"sigma_omega_ratio", p.sigma_omega_ratio},
                  {"gamma_rad", p.gamma_rad},
                  {"excitation_rate", p.excitation_rate},
                  {"n_realizations", p.n_realizations},
                  {"occupation", occupation_json(p.occupation)},
                  {"gamma0_offset", p.gamma0_offset},
                  {"gamma_dark", p.gamma_dark},
                  {"resample_per_point", p.resample_per_point},
                  {"min_over_gamma", p.min_over_gamma},
                  {"max_over_gamma", p.max_over_gamma},
                  {"points", p.points},
                  {"values", p.values}};
        } else if constexpr (std::is_same_v<T, McValidateConfig>) {
          body = {{"fluctuator", fluctuator_json(p.fluctuator)},
                  {"initial_spin", vec3_json(p.initial_spin)},
                  {"occupation", occupation_json(p.occupation)},
                  {"grid", grid_json(p.grid)},
                  {"trajectories", p.trajectories},
                  {"threshold_se", p.threshold_se}};
        } else {
          body = {{"fluctuator", fluctuator_json(p.fluctuator)}, {"occupation", occupation_json(p.occupation)}};
        }
      },
      c.params);
  j[section_name(c.command)] = body;
  return j;
}

}  // namespace fluxspin::cli
