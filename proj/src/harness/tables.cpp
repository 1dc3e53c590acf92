#include "csaddle/harness/tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "csaddle/harness/initial.hpp"
#include "csaddle/io.hpp"
#include "csaddle/ops.hpp"

namespace csaddle::harness {

namespace {

// ---------------------------------------------------------------------------
// table catalog

enum class StopKind { GradTolerance, IterationCap };

struct TableDef {
  std::string id;
  ProblemKind problem;
  Bc bc;
  InitialCondition init;
  double kappa = 0.0;  // GL only
  std::vector<double> dts;
  StopKind stop;
  std::vector<double> tolerances;  // GradTolerance tables
  std::vector<int> caps;           // IterationCap tables
  double outer_tol = 1e-8;         // IterationCap tables
  long hard_cap = 400000;          // per-cell step budget (tolerance mode)
};

// Initial droplet profiles of the H^-1 runs. The parameters are calibrated
// so the first eigenvalues of the discrete H^-1 Hessian match the published
// values of the initial states ((-10.97, 3.45, 17.48) Neumann,
// (-27.13, -6.81, 44.98) periodic).
InitialCondition ch_neumann_init() {
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::TanhLayer;
  ic.m = 0.6;
  ic.width = 0.0976;
  ic.amp = 1.0;
  return ic;
}

InitialCondition ch_periodic_init() {
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::TanhLayer;
  ic.m = 0.6;
  ic.width = 0.0655;
  ic.radius = 0.115;
  ic.amp = 1.0;
  return ic;
}

InitialCondition lb_nucleus_init() {
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::Nucleus;
  ic.radius = 6.3;
  ic.width = 0.069;
  ic.amp = 1.0;
  return ic;
}

InitialCondition simple_init(InitialCondition::Kind kind) {
  InitialCondition ic;
  ic.kind = kind;
  return ic;
}

std::vector<TableDef> catalog() {
  std::vector<TableDef> defs;
  TableDef t1a{"T1a", ProblemKind::AC_L2, Bc::Neumann,
               simple_init(InitialCondition::Kind::CosPiX), 0.01,
               {0.01, 0.1, 5.0, 10.0}, StopKind::GradTolerance,
               {1e-4, 1e-6, 1e-8}, {}, 1e-8};
  defs.push_back(t1a);
  TableDef t1b = t1a;
  t1b.id = "T1b";
  t1b.bc = Bc::Periodic;
  t1b.init = simple_init(InitialCondition::Kind::Sin2PiX);
  defs.push_back(t1b);

  TableDef t2a{"T2a", ProblemKind::AC_L2, Bc::Neumann,
               simple_init(InitialCondition::Kind::CosPiX), 0.01,
               {0.01, 0.1, 5.0}, StopKind::IterationCap, {}, {50, 80, 100}, 1e-8};
  defs.push_back(t2a);
  TableDef t2b = t2a;
  t2b.id = "T2b";
  t2b.bc = Bc::Periodic;
  t2b.init = simple_init(InitialCondition::Kind::Sin2PiX);
  defs.push_back(t2b);

  TableDef t3a{"T3a", ProblemKind::CH_Hm1, Bc::Neumann, ch_neumann_init(), 0.04,
               {1e-3, 1e-2, 1e-1, 1.0}, StopKind::GradTolerance,
               {1e-4, 1e-5, 1e-6}, {}, 1e-8};
  defs.push_back(t3a);
  TableDef t3b = t3a;
  t3b.id = "T3b";
  t3b.bc = Bc::Periodic;
  t3b.init = ch_periodic_init();
  t3b.dts = {1e-3, 1e-2, 1e-1};
  defs.push_back(t3b);

  TableDef t4a{"T4a", ProblemKind::CH_Hm1, Bc::Neumann, ch_neumann_init(), 0.04,
               {1e-3, 1e-2, 1e-1}, StopKind::IterationCap, {}, {40, 50, 60}, 1e-8};
  defs.push_back(t4a);
  TableDef t4b = t4a;
  t4b.id = "T4b";
  t4b.bc = Bc::Periodic;
  t4b.init = ch_periodic_init();
  t4b.caps = {50, 80, 100};
  defs.push_back(t4b);

  TableDef t5a{"T5a", ProblemKind::LB_Hm1, Bc::Periodic, lb_nucleus_init(), 0.0,
               {0.1, 1.0, 10.0}, StopKind::GradTolerance, {1e-2, 1e-3, 2e-4}, {}, 1e-6,
               200000};
  defs.push_back(t5a);
  TableDef t5b = t5a;
  t5b.id = "T5b";
  t5b.stop = StopKind::IterationCap;
  t5b.caps = {500, 800, 1000};
  t5b.outer_tol = 1e-6;
  defs.push_back(t5b);
  return defs;
}

// ---------------------------------------------------------------------------
// reference data

struct RefKey {
  std::string table;
  std::string dt;
  std::string col;
  std::string scheme;
  bool operator<(const RefKey& o) const {
    return std::tie(table, dt, col, scheme) < std::tie(o.table, o.dt, o.col, o.scheme);
  }
};

struct RefValue {
  long value = -1;
  bool diverged = false;
  std::string source;
};

std::string dt_key(double dt) {
  std::ostringstream os;
  os << dt;
  return os.str();
}

std::map<RefKey, RefValue> load_reference(const std::string& data_dir) {
  const std::string path = data_dir + "/reference_values.csv";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("reference data not found: " + path);
  std::map<RefKey, RefValue> refs;
  std::string line;
  std::getline(in, line);  // header
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string table, dt, col, scheme, value, source;
    if (!std::getline(ls, table, ',') || !std::getline(ls, dt, ',') ||
        !std::getline(ls, col, ',') || !std::getline(ls, scheme, ',') ||
        !std::getline(ls, value, ',') || !std::getline(ls, source))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    RefValue rv;
    if (value == "diverged") rv.diverged = true;
    else rv.value = std::stol(value);
    rv.source = source;
    refs[RefKey{table, dt, col, scheme}] = rv;
  }
  return refs;
}

// ---------------------------------------------------------------------------
// runners

struct ProblemSetup {
  EnergyModel model;
  GridPtr grid;
  Metric metric;
  Field phi0;
};

Field lb_table_initial(const GridPtr& grid, const EnergyModel& model, const Metric& metric,
                       const std::string& cache_dir);

ProblemSetup make_setup(const TableDef& def, const std::string& cache_dir) {
  if (def.problem == ProblemKind::LB_Hm1) {
    const GridPtr grid = Grid::box(100, 100, 16.0 * M_PI / std::sqrt(3.0), 8.0 * M_PI);
    LandauBrazovskii2D lb;
    Metric metric = Metric::hminus1(grid);
    Field phi0 = lb_table_initial(grid, lb, metric, cache_dir);
    return ProblemSetup{lb, grid, metric, std::move(phi0)};
  }
  const GridPtr grid = Grid::line(200, 1.0, def.bc);
  GinzburgLandau1D gl;
  gl.kappa = def.kappa;
  Metric metric = def.problem == ProblemKind::AC_L2 ? Metric::l2(grid) : Metric::hminus1(grid);
  Field phi0 = build_initial(def.init, grid, metric.kind());
  return ProblemSetup{gl, grid, metric, std::move(phi0)};
}

EigPair table_min_mode(const ProblemSetup& s, double tol) {
  EigOptions eopts{s.metric};
  eopts.tolerance = tol;
  eopts.max_iterations = 20000;
  return min_mode(s.model, s.phi0, eopts);
}

/// First-cycle runner: one inner flow per (scheme, dt), recording the first
/// crossing of each tolerance.
std::vector<TableCell> run_first_cycle_table(const TableDef& def, const ProblemSetup& s) {
  const bool lb = def.problem == ProblemKind::LB_Hm1;
  EigPair mode = table_min_mode(s, lb ? 1e-7 : 1e-10);
  AuxProblem p = AuxProblem::make(s.model, s.metric, s.phi0, mode.v);

  const double tightest = *std::min_element(def.tolerances.begin(), def.tolerances.end());
  std::vector<TableCell> cells;
  for (SchemeKind scheme : {SchemeKind::CS, SchemeKind::nCS}) {
    for (double dt : def.dts) {
      StepperConfig cfg{dt, scheme, def.problem, false};
      auto stepper = make_stepper(cfg, p);
      Field phi = s.phi0;
      std::map<double, long> crossing;
      bool diverged = false;
      bool converged = false;
      double best_err = aux_grad_norm(p, phi);
      long best_iter = 0;
      for (double tol : def.tolerances)
        if (best_err <= tol) crossing[tol] = 0;
      for (long it = 1; it <= def.hard_cap && !converged; ++it) {
        Field next = stepper->step(phi);
        if (!next.all_finite() || next.max_abs() > 1e6) {
          diverged = true;
          break;
        }
        const double err = step_residual_norm(p.metric, phi, next, dt);
        phi = std::move(next);
        if (!std::isfinite(err)) {
          diverged = true;
          break;
        }
        for (double tol : def.tolerances)
          if (err <= tol && !crossing.count(tol)) crossing[tol] = it;
        converged = err <= tightest;
        if (err < best_err * (1.0 - 1e-3)) {
          best_err = err;
          best_iter = it;
        } else if (it - best_iter > std::max<long>(10000, it / 2)) {
          diverged = true;  // bounded wandering: the scheme fails here
          break;
        }
      }
      // a run that never converges has no meaningful counts: the whole row
      // is an "infinity" row
      if (!converged) {
        diverged = true;
        crossing.clear();
      }
      for (double tol : def.tolerances) {
        TableCell cell;
        cell.table = def.id;
        cell.dt = dt;
        std::ostringstream col;
        col << "err=" << tol;
        cell.col = col.str();
        cell.scheme = scheme;
        if (crossing.count(tol)) {
          cell.measured = crossing[tol];
        } else {
          cell.measured_diverged = diverged;
          cell.measured = -1;
        }
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

/// Cycle-count runner: full IMF runs with a fixed inner budget.
std::vector<TableCell> run_cycle_table(const TableDef& def, const ProblemSetup& s) {
  const bool lb = def.problem == ProblemKind::LB_Hm1;
  std::vector<TableCell> cells;
  for (SchemeKind scheme : {SchemeKind::CS, SchemeKind::nCS}) {
    for (double dt : def.dts) {
      for (int cap : def.caps) {
        ImfOptions opts{s.metric, StepperConfig{dt, scheme, def.problem, false}};
        opts.inner = InnerStop::capped(cap);
        opts.outer_tol = def.outer_tol;
        opts.max_cycles = 1200;
        opts.eig_tol = lb ? 1e-7 : 1e-10;
        opts.eig_max_iterations = 20000;
        auto [phi, reports] = run_imf(s.model, s.phi0, opts);
        bool diverged = false;
        for (const auto& r : reports) diverged = diverged || r.diverged;
        const double final_err = reports.empty() ? 0.0 : reports.back().outer_grad_F;
        const bool converged = !diverged && final_err <= def.outer_tol;

        TableCell cell;
        cell.table = def.id;
        cell.dt = dt;
        cell.col = "cap=" + std::to_string(cap);
        cell.scheme = scheme;
        if (converged) cell.measured = static_cast<long>(reports.size());
        else cell.measured_diverged = true;  // cycle budget exhausted or blow-up
        (void)diverged;
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// LB initial state: the published runs start from a state with
// ||Delta dF||_{H^-1} = 1e-2 next to the nucleation saddle; rebuild it as
// saddle + eps * min-mode with eps tuned to that gradient norm.

Field lb_table_initial(const GridPtr& grid, const EnergyModel& model, const Metric& metric,
                       const std::string& cache_dir) {
  namespace fs = std::filesystem;
  const std::string cache = cache_dir + "/lb_saddle.field";
  Field saddle;
  if (fs::exists(cache)) {
    saddle = load_field(cache);
    if (!saddle.grid().same_layout(*grid))
      throw std::runtime_error("lb_saddle.field cache does not match the table grid");
  } else {
    ImfOptions opts{metric, StepperConfig{10.0, SchemeKind::CS, ProblemKind::LB_Hm1, false}};
    opts.inner = InnerStop::capped(1000);
    opts.outer_tol = 1e-8;
    opts.max_cycles = 400;
    opts.eig_tol = 1e-7;
    opts.eig_max_iterations = 20000;
    Field phi0 = build_initial(lb_nucleus_init(), grid, MetricKind::Hminus1);
    auto [phi, reports] = run_imf(model, phi0, opts);
    const double err = metric.grad_norm(gradient_l2(model, phi));
    if (!(err <= 1e-6))
      throw std::runtime_error("LB saddle search did not converge (||dF|| = " +
                               std::to_string(err) + ")");
    saddle = phi;
    fs::create_directories(cache_dir);
    save_field(saddle, cache);
  }

  EigOptions eopts{metric};
  eopts.tolerance = 1e-7;
  eopts.max_iterations = 20000;
  EigPair mode = min_mode(model, saddle, eopts);
  Field v = mode.v;
  // deterministic sign
  int imax = 0;
  for (int i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (v[imax] < 0) v.values() = -v.values();

  const double target = 1e-2;
  double eps = 1e-2;
  Field probe = saddle;
  for (int pass = 0; pass < 8; ++pass) {
    probe = saddle.like(saddle.values() + eps * v.values());
    const double err = metric.grad_norm(gradient_l2(model, probe));
    if (std::abs(err - target) <= 1e-4 * target) break;
    eps *= target / err;
  }
  return probe;
}

TableCell::Status judge(const TableDef& def, const TableCell& cell,
                        const std::vector<TableCell>& all) {
  if (cell.reference_diverged || cell.measured_diverged || cell.measured < 0)
    return (cell.reference_diverged && cell.measured_diverged) ? TableCell::Status::Pass
                                                               : TableCell::Status::Fail;
  long band;
  if (def.stop == StopKind::GradTolerance)
    band = cell.reference <= 30
               ? 5
               : static_cast<long>(std::ceil(0.10 * static_cast<double>(cell.reference)));
  else
    band = cell.reference <= 6 ? 1 : 2;
  if (std::labs(cell.measured - cell.reference) <= band) return TableCell::Status::Pass;

  // soft failure: the numeric band missed but the monotone trend holds
  // (larger dt => fewer iterations within the same column and scheme)
  std::vector<std::pair<double, long>> column;
  for (const auto& c : all)
    if (c.col == cell.col && c.scheme == cell.scheme && !c.measured_diverged && c.measured >= 0)
      column.emplace_back(c.dt, c.measured);
  std::sort(column.begin(), column.end());
  bool monotone = true;
  for (size_t i = 0; i + 1 < column.size(); ++i)
    if (column[i + 1].second > column[i].second) monotone = false;
  return monotone ? TableCell::Status::Soft : TableCell::Status::Fail;
}

}  // namespace

const std::vector<std::string>& table_ids() {
  static const std::vector<std::string> ids = {"T1a", "T1b", "T2a", "T2b", "T3a",
                                               "T3b", "T4a", "T4b", "T5a", "T5b"};
  return ids;
}

std::string default_data_dir() {
  if (const char* env = std::getenv("CSADDLE_DATA_DIR")) return env;
  return CSADDLE_SOURCE_DATA_DIR;
}

TableResult reproduce_table(const std::string& id, const std::string& out_dir,
                            const std::string& data_dir) {
  const auto defs = catalog();
  const auto it = std::find_if(defs.begin(), defs.end(),
                               [&](const TableDef& d) { return d.id == id; });
  if (it == defs.end()) throw std::invalid_argument("unknown table id: " + id);
  const TableDef& def = *it;

  const std::string data = data_dir.empty() ? default_data_dir() : data_dir;
  auto refs = load_reference(data);

  std::filesystem::create_directories(out_dir);
  ProblemSetup setup = make_setup(def, out_dir);

  TableResult result;
  result.id = id;
  result.cells = def.stop == StopKind::GradTolerance ? run_first_cycle_table(def, setup)
                                                     : run_cycle_table(def, setup);

  for (auto& cell : result.cells) {
    RefKey key{def.id, dt_key(cell.dt), cell.col, cell.scheme == SchemeKind::CS ? "cs" : "ncs"};
    auto ref = refs.find(key);
    if (ref == refs.end())
      throw std::runtime_error("no reference value for " + def.id + " dt=" + key.dt + " " +
                               cell.col);
    cell.reference = ref->second.value;
    cell.reference_diverged = ref->second.diverged;
    cell.source = ref->second.source;
  }
  for (auto& cell : result.cells) {
    cell.status = judge(def, cell, result.cells);
    if (cell.status == TableCell::Status::Fail) ++result.hard_failures;
    if (cell.status == TableCell::Status::Soft) ++result.soft_failures;
  }

  std::ofstream csv(out_dir + "/" + id + ".csv");
  csv << "table,dt,stop,scheme,measured,reference,status,source\n";
  for (const auto& c : result.cells) {
    csv << c.table << "," << dt_key(c.dt) << "," << c.col << ","
        << (c.scheme == SchemeKind::CS ? "cs" : "ncs") << ",";
    if (c.measured_diverged) csv << "diverged";
    else if (c.measured < 0) csv << "unconverged";
    else csv << c.measured;
    csv << ",";
    if (c.reference_diverged) csv << "diverged";
    else csv << c.reference;
    const char* status = c.status == TableCell::Status::Pass
                             ? "pass"
                             : (c.status == TableCell::Status::Soft ? "soft" : "fail");
    csv << "," << status << "," << c.source << "\n";
  }
  return result;
}

}  // namespace csaddle::harness
