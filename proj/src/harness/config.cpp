#include "csaddle/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace csaddle::harness {

std::string ValidationError::join(const std::vector<std::string>& problems) {
  std::ostringstream os;
  os << "configuration invalid:";
  for (const auto& p : problems) os << "\n  - " << p;
  return os.str();
}

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

GridPtr ExperimentSpec::make_grid() const {
  if (std::holds_alternative<LandauBrazovskii2D>(model))
    return Grid::box(n, ny, extent, extent_y);
  return Grid::line(n, extent, bc);
}

ProblemKind ExperimentSpec::problem() const {
  if (std::holds_alternative<LandauBrazovskii2D>(model)) return ProblemKind::LB_Hm1;
  return metric == MetricKind::L2 ? ProblemKind::AC_L2 : ProblemKind::CH_Hm1;
}

StepperConfig ExperimentSpec::stepper_config() const {
  StepperConfig cfg;
  cfg.dt = dt;
  cfg.kind = scheme;
  cfg.problem = problem();
  cfg.relaxation = mode == Mode::Relax;
  return cfg;
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Parser {
  std::map<std::string, RawEntry> entries;
  std::vector<std::string> errors;

  bool has(const std::string& key) { return entries.count(key) != 0; }

  const std::string* get(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    it->second.used = true;
    return &it->second.value;
  }

  template <class Conv>
  auto typed(const std::string& key, auto fallback, Conv&& conv) {
    const std::string* raw = get(key);
    if (!raw) return fallback;
    try {
      return conv(*raw);
    } catch (const std::exception&) {
      errors.push_back("line " + std::to_string(entries[key].line) + ": key '" + key +
                       "' has malformed value '" + *raw + "'");
      return fallback;
    }
  }

  double number(const std::string& key, double fallback) {
    return typed(key, fallback, [](const std::string& s) {
      size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    });
  }
  long integer(const std::string& key, long fallback) {
    return typed(key, fallback, [](const std::string& s) {
      size_t used = 0;
      long v = std::stol(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    });
  }
  std::string word(const std::string& key, std::string fallback) {
    return typed(key, std::move(fallback), [](const std::string& s) { return s; });
  }

  void choice_error(const std::string& key, const std::string& value, const std::string& allowed) {
    errors.push_back("line " + std::to_string(entries[key].line) + ": key '" + key +
                     "' must be one of {" + allowed + "}, got '" + value + "'");
  }
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentSpec parse_config(const std::string& text, const std::string& origin) {
  Parser P;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      P.errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                         line + "'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      P.errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (P.entries.count(key))
      P.errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    else
      P.entries[key] = RawEntry{value, lineno, false};
  }

  ExperimentSpec spec;
  spec.name = P.word("name", origin);

  const std::string model = P.word("model", "gl1d");
  const bool lb = model == "lb2d";
  if (model != "gl1d" && model != "lb2d") P.choice_error("model", model, "gl1d, lb2d");

  if (lb) {
    LandauBrazovskii2D m;
    m.tau = P.number("tau", m.tau);
    m.xi = P.number("xi", m.xi);
    m.gamma = P.number("gamma", m.gamma);
    m.c_split = P.number("c", m.c_split);
    spec.model = m;
    spec.metric = MetricKind::Hminus1;
    spec.bc = Bc::Periodic;
    spec.n = static_cast<int>(P.integer("n", 100));
    spec.ny = static_cast<int>(P.integer("ny", spec.n));
    spec.extent = P.number("extent", 16.0 * M_PI / std::sqrt(3.0));
    spec.extent_y = P.number("extent_y", 8.0 * M_PI);
  } else {
    GinzburgLandau1D m;
    m.kappa = P.number("kappa", m.kappa);
    m.c_split = P.number("c", m.c_split);
    spec.model = m;
    spec.n = static_cast<int>(P.integer("n", 200));
    spec.extent = P.number("extent", 1.0);
  }

  const std::string metric = P.word("metric", lb ? "hm1" : "l2");
  if (metric == "l2") spec.metric = MetricKind::L2;
  else if (metric == "hm1") spec.metric = MetricKind::Hminus1;
  else P.choice_error("metric", metric, "l2, hm1");

  const std::string bc = P.word("bc", lb ? "periodic" : "neumann");
  if (bc == "neumann") spec.bc = Bc::Neumann;
  else if (bc == "periodic") spec.bc = Bc::Periodic;
  else P.choice_error("bc", bc, "neumann, periodic");

  using Kind = InitialCondition::Kind;
  static const std::map<std::string, Kind> kinds = {
      {"cos_pi_x", Kind::CosPiX},       {"cos_2pi_x", Kind::Cos2PiX},
      {"sin_2pi_x", Kind::Sin2PiX},     {"constant", Kind::Constant},
      {"tanh_layer", Kind::TanhLayer},  {"lamellar", Kind::Lamellar},
      {"cylinder_seed", Kind::CylinderSeed}, {"nucleus", Kind::Nucleus},
      {"file", Kind::File}};
  const std::string init = P.word("init", lb ? "lamellar" : "cos_pi_x");
  if (auto it = kinds.find(init); it != kinds.end()) spec.init.kind = it->second;
  else P.choice_error("init", init,
                      "cos_pi_x, cos_2pi_x, sin_2pi_x, constant, tanh_layer, lamellar, "
                      "cylinder_seed, nucleus, file");
  spec.init.m = P.number("init_m", spec.init.m);
  spec.init.width = P.number("init_width", spec.init.width);
  spec.init.radius = P.number("init_radius", spec.init.radius);
  spec.init.amp = P.number("init_amp", spec.init.amp);
  spec.init.k = static_cast<int>(P.integer("init_k", spec.init.k));
  spec.init.file = P.word("init_file", "");
  spec.init.perturb_amp = P.number("perturb_amp", 0.0);
  if (P.has("seed")) {
    spec.init.seed_given = true;
    spec.init.seed = static_cast<std::uint64_t>(P.integer("seed", 0));
  }

  const std::string mode = P.word("mode", "imf");
  if (mode == "imf") spec.mode = ExperimentSpec::Mode::Imf;
  else if (mode == "relax") spec.mode = ExperimentSpec::Mode::Relax;
  else P.choice_error("mode", mode, "imf, relax");

  const std::string scheme = P.word("scheme", "cs");
  if (scheme == "cs") spec.scheme = SchemeKind::CS;
  else if (scheme == "ncs") spec.scheme = SchemeKind::nCS;
  else P.choice_error("scheme", scheme, "cs, ncs");

  spec.dt = P.number("dt", spec.dt);

  const std::string stop = P.word("inner_stop", "tol");
  if (stop == "tol") spec.inner.mode = InnerStop::Mode::Tolerance;
  else if (stop == "cap") spec.inner.mode = InnerStop::Mode::Cap;
  else P.choice_error("inner_stop", stop, "tol, cap");
  spec.inner.tolerance = P.number("inner_tol", 1e-8);
  spec.inner.cap = static_cast<int>(P.integer("inner_cap", 100));
  spec.inner.hard_cap = P.integer("inner_hard_cap", 2000000);
  spec.guard_cap = static_cast<int>(P.integer("guard_cap", 100));

  spec.outer_tol = P.number("outer_tol", 1e-8);
  spec.max_cycles = static_cast<int>(P.integer("max_cycles", 500));
  spec.relax_max_steps = P.integer("relax_max_steps", 2000000);
  spec.eig_tol = P.number("eig_tol", 1e-9);
  spec.eig_max_iter = static_cast<int>(P.integer("eig_max_iter", 2000));
  const std::string deflate = P.word("deflate", "on");
  if (deflate == "on") spec.deflate = true;
  else if (deflate == "off") spec.deflate = false;
  else P.choice_error("deflate", deflate, "on, off");
  spec.deflate_angle_deg = P.number("deflate_angle_deg", 10.0);
  spec.spectrum_k = static_cast<int>(P.integer("spectrum_k", 3));
  spec.out_dir = P.word("out", ".");

  // unknown keys are fatal
  for (const auto& [key, entry] : P.entries)
    if (!entry.used)
      P.errors.push_back("line " + std::to_string(entry.line) + ": unknown key '" + key + "'");

  // semantic validation, all at once
  if (lb && bc == "neumann")
    P.errors.push_back("model lb2d is periodic-only (bc=neumann rejected)");
  if (lb && metric == "l2")
    P.errors.push_back("model lb2d is computed in the H^-1 metric (metric=l2 rejected)");
  if (spec.dt <= 0.0) P.errors.push_back("dt must be positive");
  if (spec.n < 2) P.errors.push_back("n must be at least 2");
  if (spec.inner.tolerance <= 0.0) P.errors.push_back("inner_tol must be positive");
  if (spec.inner.cap <= 0) P.errors.push_back("inner_cap must be positive");
  if (spec.outer_tol <= 0.0) P.errors.push_back("outer_tol must be positive");
  if (spec.eig_tol <= 0.0) P.errors.push_back("eig_tol must be positive");
  if (!(spec.deflate_angle_deg > 0.0 && spec.deflate_angle_deg < 90.0))
    P.errors.push_back("deflate_angle_deg must lie in (0, 90)");
  if (spec.spectrum_k < 1 || spec.spectrum_k > 10)
    P.errors.push_back("spectrum_k must lie in 1..10");
  if (spec.init.kind == InitialCondition::Kind::File && spec.init.file.empty())
    P.errors.push_back("init=file needs init_file=<path>");
  if (spec.init.perturb_amp > 0.0 && !spec.init.seed_given)
    P.errors.push_back("perturb_amp > 0 needs a seed");
  if (spec.init.seed_given && spec.init.perturb_amp <= 0.0)
    P.errors.push_back("seed given but perturb_amp is zero");
  if (spec.init.kind == InitialCondition::Kind::CosPiX && spec.bc == Bc::Periodic)
    P.errors.push_back("init=cos_pi_x is not periodic; use cos_2pi_x or sin_2pi_x");
  if (lb) {
    if (spec.init.kind == InitialCondition::Kind::CosPiX ||
        spec.init.kind == InitialCondition::Kind::Cos2PiX ||
        spec.init.kind == InitialCondition::Kind::Sin2PiX ||
        spec.init.kind == InitialCondition::Kind::TanhLayer)
      P.errors.push_back("1-D initial profiles are not defined for lb2d");
  } else if (spec.init.kind == InitialCondition::Kind::Lamellar ||
             spec.init.kind == InitialCondition::Kind::CylinderSeed ||
             spec.init.kind == InitialCondition::Kind::Nucleus) {
    P.errors.push_back("2-D initial profiles are not defined for gl1d");
  }

  if (!P.errors.empty()) throw ValidationError(std::move(P.errors));
  return spec;
}

ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open config file " + path});
  std::ostringstream buf;
  buf << in.rdbuf();
  auto base = path;
  const auto slash = base.find_last_of('/');
  if (slash != std::string::npos) base.erase(0, slash + 1);
  const auto dot = base.find_last_of('.');
  if (dot != std::string::npos) base.erase(dot);
  return parse_config(buf.str(), base);
}

}  // namespace csaddle::harness
