#include "vacuum/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "vacuum/errors.hpp"

namespace vacuum {

namespace {

struct KeyInfo {
  const char* key;
  const char* section;
  const char* fallback;  // nullptr when required
  const char* help;
};

// clang-format off
constexpr KeyInfo kKeys[] = {
    {"name",               "experiment", "experiment",   "run name, letters/digits/_/-/."},
    {"output_dir",         "experiment", "out",          "directory for artifacts"},
    {"seed",               "experiment", "0",            "seed for randomized suites"},
    {"gamma",              "gas",        nullptr,        "adiabatic exponent, (1.001, 10]"},
    {"g",                  "gas",        nullptr,        "gravitational acceleration > 0"},
    {"M",                  "gas",        nullptr,        "total mass > 0"},
    {"n_cells",            "grid",       nullptr,        "number of cells >= 8"},
    {"spacing",            "grid",       "uniform",      "uniform | top_refined"},
    {"model",              "run",        "euler_damped", "euler_damped | darcy"},
    {"t_final",            "run",        "40",           "final time"},
    {"dt",                 "run",        "auto",         "time step or auto (90% of the stability limit)"},
    {"cfl_safety",         "run",        "0.5",          "stability safety factor in (0, 1]"},
    {"output_every",       "run",        "auto",         "steps between records or auto (every 0.1 time units)"},
    {"family",             "initial",    "sine_mode",    "sine_mode | polynomial_bump | custom_table"},
    {"amplitude",          "initial",    "1e-3",         "perturbation amplitude"},
    {"mode",               "initial",    "1",            "sine mode index k >= 1"},
    {"vel_amplitude",      "initial",    "0",            "initial velocity amplitude"},
    {"table",              "initial",    "",             "CSV of y,omega,v for custom_table"},
    {"decay_fit",          "analysis",   "true",         "fit exponential decay of E_total"},
    {"pointwise_bounds",   "analysis",   "true",         "report pointwise bound ratios"},
    {"darcy_compare",      "analysis",   "false",        "twin run against the Darcy model"},
    {"convergence_levels", "analysis",   "0",            "refinement levels for convergence (0 = off, >= 2)"},
    {"fit_t_lo",           "analysis",   "auto",         "fit window start (auto = 0.25 t_final)"},
    {"fit_t_hi",           "analysis",   "auto",         "fit window end (auto = 0.9 t_final)"},
    {"svg",                "output",     "false",        "also write energy.svg"},
    {"dims",               "identities", "2,3",          "dimensions for verify-identities"},
    {"samples",            "identities", "20",           "random fields per dimension"},
    {"points_per_dim",     "identities", "16",           "tensor grid size per dimension"},
    {"dt_probe",           "identities", "1e-2",         "time probe for the differentiated identity"},
    {"horizon",            "identities", "5",            "curl-transport horizon"},
};
// clang-format on

const KeyInfo* find_key(std::string_view key) {
  for (const auto& k : kKeys)
    if (key == k.key) return &k;
  return nullptr;
}

bool is_section(std::string_view name) {
  return std::any_of(std::begin(kKeys), std::end(kKeys),
                     [name](const KeyInfo& k) { return name == k.section; });
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return std::string(hash == std::string_view::npos ? line : line.substr(0, hash));
}

// Lookup helper that knows where each value came from.
class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  std::string text(const char* key) const {
    const auto it = raw_.find(key);
    if (it != raw_.end()) return it->second.value;
    const KeyInfo* info = find_key(key);
    if (info->fallback == nullptr) throw ConfigError(std::string("missing required key '") + key + "'", 0, key);
    return info->fallback;
  }

  bool is_auto(const char* key) const { return text(key) == "auto"; }

  [[noreturn]] void fail(const char* key, const std::string& why) const {
    const auto it = raw_.find(key);
    const int line = it == raw_.end() ? 0 : it->second.line;
    std::ostringstream msg;
    msg << "invalid value for '" << key << "'";
    if (line > 0) msg << " (line " << line << ")";
    msg << ": " << why;
    throw ConfigError(msg.str(), line, key);
  }

  double number(const char* key) const {
    const std::string s = text(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "'" + s + "' is not a number");
    return v;
  }

  long long integer(const char* key) const {
    const std::string s = text(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "'" + s + "' is not an integer");
    return v;
  }

  bool boolean(const char* key) const {
    const std::string s = text(key);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    fail(key, "'" + s + "' is not a boolean");
  }

  int line_of(const char* key) const {
    const auto it = raw_.find(key);
    return it == raw_.end() ? 0 : it->second.line;
  }

 private:
  const RawConfig& raw_;
};

bool filesystem_safe(const std::string& name) {
  if (name.empty() || name == "." || name == "..") return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

void load_table(const std::filesystem::path& path, InitialData& init) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open custom table '" + path.string() + "'", 0, "table");
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    std::vector<double> cols;
    std::stringstream ss(body);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      const std::string c = trim(cell);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        numeric = false;
        break;
      }
      cols.push_back(v);
    }
    if (!numeric && init.table_y.empty() && number == 1) continue;  // header row
    if (!numeric || cols.size() != 3) {
      std::ostringstream msg;
      msg << path.string() << ":" << number << ": expected three numbers y,omega,v";
      throw ConfigError(msg.str(), 0, "table");
    }
    init.table_y.push_back(cols[0]);
    init.table_omega.push_back(cols[1]);
    init.table_vel.push_back(cols[2]);
  }
}

IdentitySettings read_identity_settings(const Reader& r) {
  IdentitySettings ids;
  ids.dims.clear();
  {
    std::stringstream ss(r.text("dims"));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const std::string c = trim(cell);
      if (c != "2" && c != "3") r.fail("dims", "entries must be 2 or 3");
      ids.dims.push_back(c == "2" ? 2 : 3);
    }
    if (ids.dims.empty()) r.fail("dims", "must list at least one dimension");
  }
  const long long samples = r.integer("samples");
  if (samples < 1 || samples > 10000) r.fail("samples", "must be between 1 and 10000");
  ids.samples = static_cast<int>(samples);
  const long long ppd = r.integer("points_per_dim");
  if (ppd < 4 || ppd > 64) r.fail("points_per_dim", "must be between 4 and 64");
  ids.points_per_dim = static_cast<int>(ppd);
  ids.dt_probe = r.number("dt_probe");
  if (!(ids.dt_probe > 0.0 && ids.dt_probe < 1.0)) r.fail("dt_probe", "must lie in (0, 1)");
  ids.horizon = r.number("horizon");
  if (!(ids.horizon >= 0.0 && ids.horizon <= 100.0)) r.fail("horizon", "must lie in [0, 100]");

  return ids;
}

RawConfig merged_raw(std::string_view text, const std::map<std::string, std::string>& overrides) {
  RawConfig raw = parse_raw_config(text);
  for (const auto& [key, value] : overrides) {
    if (find_key(key) == nullptr) throw ConfigError("unknown key '" + key + "' in override", 0, key);
    raw[key] = RawEntry{value, 0};
  }
  return raw;
}

std::uint64_t read_seed(const Reader& r) {
  const long long seed = r.integer("seed");
  if (seed < 0) r.fail("seed", "must be non-negative");
  return static_cast<std::uint64_t>(seed);
}

}  // namespace

const char* to_string(Model model) {
  return model == Model::EulerDamped ? "euler_damped" : "darcy";
}

const char* to_string(Spacing spacing) {
  return spacing == Spacing::Uniform ? "uniform" : "top_refined";
}

const char* to_string(InitFamily family) {
  switch (family) {
    case InitFamily::SineMode: return "sine_mode";
    case InitFamily::PolynomialBump: return "polynomial_bump";
    case InitFamily::CustomTable: return "custom_table";
  }
  return "unknown";
}

double ExperimentSpec::fit_t_lo() const {
  return analyses.fit_t_lo >= 0.0 ? analyses.fit_t_lo : 0.25 * run_config.t_final;
}

double ExperimentSpec::fit_t_hi() const {
  return analyses.fit_t_hi >= 0.0 ? analyses.fit_t_hi : 0.9 * run_config.t_final;
}

RawConfig parse_raw_config(std::string_view text) {
  RawConfig raw;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;

    std::ostringstream where;
    where << "line " << line_no << ": ";
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where.str() + "unterminated section header", line_no);
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      if (!is_section(section))
        throw ConfigError(where.str() + "unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where.str() + "expected 'key = value', got '" + body + "'", line_no);
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(where.str() + "missing key before '='", line_no);
    const KeyInfo* info = find_key(key);
    if (info == nullptr) throw ConfigError(where.str() + "unknown key '" + key + "'", line_no, key);
    if (!section.empty() && section != info->section)
      throw ConfigError(where.str() + "key '" + key + "' belongs in [" + info->section + "], not [" +
                            section + "]",
                        line_no, key);
    if (raw.count(key) != 0) throw ConfigError(where.str() + "duplicate key '" + key + "'", line_no, key);
    if (value.empty()) throw ConfigError(where.str() + "empty value for '" + key + "'", line_no, key);
    raw[key] = RawEntry{value, line_no};
  }
  return raw;
}

ExperimentSpec parse_config(std::string_view text, const std::map<std::string, std::string>& overrides,
                            const std::filesystem::path& base_dir) {
  const RawConfig raw = merged_raw(text, overrides);
  const Reader r(raw);

  const std::string name = r.text("name");
  if (!filesystem_safe(name)) r.fail("name", "must be nonempty and use only letters, digits, '_', '-', '.'");

  GasParams params;
  try {
    params = derive_constants(r.number("gamma"), r.number("g"), r.number("M"));
  } catch (const DomainError& e) {
    const std::string what = e.what();
    const char* key = what.rfind("g ", 0) == 0 ? "g" : what.rfind("total_mass", 0) == 0 ? "M" : "gamma";
    r.fail(key, what);
  }

  const long long n_cells = r.integer("n_cells");
  if (n_cells < 8) r.fail("n_cells", "must be at least 8");
  if (n_cells > 1'000'000) r.fail("n_cells", "must be at most 1000000");
  Spacing spacing = Spacing::Uniform;
  const std::string spacing_s = r.text("spacing");
  if (spacing_s == "top_refined") spacing = Spacing::TopRefined;
  else if (spacing_s != "uniform") r.fail("spacing", "expected uniform or top_refined");

  InitialData init;
  const std::string family = r.text("family");
  if (family == "sine_mode") init.family = InitFamily::SineMode;
  else if (family == "polynomial_bump") init.family = InitFamily::PolynomialBump;
  else if (family == "custom_table") init.family = InitFamily::CustomTable;
  else r.fail("family", "expected sine_mode, polynomial_bump or custom_table");
  init.amplitude = r.number("amplitude");
  init.vel_amplitude = r.number("vel_amplitude");
  const long long mode = r.integer("mode");
  if (mode < 1 || mode > 10000) r.fail("mode", "must be a positive integer");
  init.mode = static_cast<int>(mode);
  if (init.family == InitFamily::CustomTable) {
    const std::string table = r.text("table");
    if (table.empty()) r.fail("table", "custom_table requires a table path");
    std::filesystem::path path(table);
    if (path.is_relative()) path = base_dir / path;
    load_table(path, init);
  }

  RunConfig run{.params = params, .grid = Grid1D(params, static_cast<int>(n_cells), spacing)};
  const std::string model = r.text("model");
  if (model == "euler_damped") run.model = Model::EulerDamped;
  else if (model == "darcy") run.model = Model::Darcy;
  else r.fail("model", "expected euler_damped or darcy");
  run.init = init;
  run.t_final = r.number("t_final");
  if (!(run.t_final > 0.0) || !std::isfinite(run.t_final)) r.fail("t_final", "must be positive");
  if (!r.is_auto("dt")) {
    run.dt = r.number("dt");
    if (!(run.dt > 0.0) || !std::isfinite(run.dt)) r.fail("dt", "must be positive or auto");
  }
  run.cfl_safety = r.number("cfl_safety");
  if (!(run.cfl_safety > 0.0 && run.cfl_safety <= 1.0)) r.fail("cfl_safety", "must lie in (0, 1]");
  if (!r.is_auto("output_every")) {
    const long long every = r.integer("output_every");
    if (every < 1) r.fail("output_every", "must be a positive integer or auto");
    run.output_every = static_cast<int>(std::min<long long>(every, 1'000'000'000));
  }

  // Reject data that fails the smallness or bottom gate now, as a config error.
  try {
    (void)make_initial_state(run.grid, run.init);
  } catch (const DomainError& e) {
    r.fail(init.family == InitFamily::CustomTable ? "table" : "amplitude", e.what());
  }

  AnalysisSet analyses;
  analyses.decay_fit = r.boolean("decay_fit");
  analyses.pointwise_bounds = r.boolean("pointwise_bounds");
  analyses.darcy_compare = r.boolean("darcy_compare");
  const long long levels = r.integer("convergence_levels");
  if (levels != 0 && (levels < 2 || levels > 6)) r.fail("convergence_levels", "must be 0 or between 2 and 6");
  analyses.convergence_levels = static_cast<int>(levels);
  if (!r.is_auto("fit_t_lo")) analyses.fit_t_lo = r.number("fit_t_lo");
  if (!r.is_auto("fit_t_hi")) analyses.fit_t_hi = r.number("fit_t_hi");

  const IdentitySettings ids = read_identity_settings(r);

  ExperimentSpec spec{name, std::move(run), analyses, ids, r.text("output_dir"), r.boolean("svg"),
                      read_seed(r)};
  const double lo = spec.fit_t_lo();
  const double hi = spec.fit_t_hi();
  if (!(lo >= 0.0 && lo < hi && hi <= spec.run_config.t_final))
    r.fail(analyses.fit_t_hi >= 0.0 ? "fit_t_hi" : "fit_t_lo", "fit window must satisfy 0 <= t_lo < t_hi <= t_final");
  return spec;
}

IdentityJob parse_identity_config(std::string_view text, const std::map<std::string, std::string>& overrides) {
  const RawConfig raw = merged_raw(text, overrides);
  const Reader r(raw);
  return IdentityJob{read_identity_settings(r), read_seed(r), r.text("output_dir")};
}

std::string config_reference() {
  std::ostringstream out;
  out << "Config keys (key = value, optional [section] headers, '#' comments):\n";
  std::string section;
  for (const auto& k : kKeys) {
    if (section != k.section) {
      section = k.section;
      out << "  [" << section << "]\n";
    }
    out << "    " << k.key;
    for (std::size_t pad = std::string_view(k.key).size(); pad < 20; ++pad) out << ' ';
    out << (k.fallback == nullptr ? "(required)" : std::string("default ") + (*k.fallback ? k.fallback : "-"))
        << "  " << k.help << '\n';
  }
  return out.str();
}

}  // namespace vacuum
