#include "cli_app.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <variant>

#include "hyperadia/adiabatic.hpp"
#include "hyperadia/asymptotics.hpp"
#include "hyperadia/errors.hpp"
#include "hyperadia/matrixmethod.hpp"
#include "hyperadia/phaseshift.hpp"

#ifndef HYPERADIA_REF_DATA_DEFAULT
#define HYPERADIA_REF_DATA_DEFAULT "data/reference_values.json"
#endif

namespace hyperadia::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot read " + what + " from '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot read " + what + " from '" + s + "'");
  }
}

Channel parse_channel(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 3) throw UsageError("channel must be l1,l2,l; got '" + s + "'");
  Channel ch{parse_int(parts[0], "l1"), parse_int(parts[1], "l2"), parse_int(parts[2], "l")};
  if (ch.l < 0) throw UsageError("channel radial index l must be >= 0");
  return ch;
}

struct KGrid {
  double lo = 0.0, hi = 0.0;
  int points = 0;
};

KGrid parse_k_grid(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw UsageError("k grid must be lo..hi or lo..hi:points; got '" + s + "'");
  KGrid g;
  g.lo = parse_double(s.substr(0, dots), "k grid lower end");
  std::string rest = s.substr(dots + 2);
  const auto colon = rest.find(':');
  if (colon != std::string::npos) {
    g.points = parse_int(rest.substr(colon + 1), "k grid points");
    rest = rest.substr(0, colon);
  }
  g.hi = parse_double(rest, "k grid upper end");
  if (!(g.lo > 0.0 && g.hi > g.lo)) throw UsageError("k grid needs 0 < lo < hi");
  if (g.points == 0) g.points = static_cast<int>(std::lround(4.0 * std::log10(g.hi / g.lo))) + 1;
  if (g.points < 2) throw UsageError("k grid needs at least two points");
  return g;
}

std::vector<double> k_values(const KGrid& g) { return make_grid(g.lo, g.hi, g.points, true); }

// ---------------------------------------------------------------- tables

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Check {
  std::string name;
  double value = NAN;
  double reference = NAN;
  double tol = NAN;
  bool pass = false;
  std::string note;
};

struct Outcome {
  Table table;
  std::vector<Check> checks;          // embedded reference checks; decide the exit code
  std::vector<Check> derived_checks;  // reported only
  std::vector<std::string> errors;
  std::vector<std::string> notes;
  json extra = json::object();
};

Check abs_check(std::string name, double value, double reference, double tol) {
  Check c{std::move(name), value, reference, tol, false, ""};
  c.pass = std::fabs(value - reference) <= tol;
  return c;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) {
    if (ch == '"') o += "\"\"";
    else if (ch == '\n' || ch == '\r') o += ' ';
    else o += ch;
  }
  return o + "\"";
}

std::string render_csv(const Table& t) {
  std::string o;
  for (std::size_t i = 0; i < t.columns.size(); ++i) o += (i ? "," : "") + t.columns[i];
  o += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) o += ",";
      if (const auto* d = std::get_if<double>(&row[i])) o += format_number(*d);
      else if (const auto* n = std::get_if<long>(&row[i])) o += std::to_string(*n);
      else o += csv_escape(std::get<std::string>(row[i]));
    }
    o += "\n";
  }
  return o;
}

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json render_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) {
      if (const auto* d = std::get_if<double>(&c)) r.push_back(number_json(*d));
      else if (const auto* n = std::get_if<long>(&c)) r.push_back(*n);
      else r.push_back(std::get<std::string>(c));
    }
    rows.push_back(r);
  }
  return {{"columns", t.columns}, {"rows", rows}};
}

json check_json(const Check& c) {
  json j = {{"name", c.name},          {"value", number_json(c.value)}, {"reference", number_json(c.reference)},
            {"abs_diff", number_json(std::fabs(c.value - c.reference))}, {"tol", number_json(c.tol)},
            {"pass", c.pass}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

// ---------------------------------------------------------------- config

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  for (const auto& [k, v] : cfg.tol_overrides) {
    if (k == "solver.residual_rel_tol") s.residual_rel_tol = parse_double(v, k);
    else if (k == "solver.scan_points") s.scan_points = parse_int(v, k);
    else if (k == "solver.scan_delta") s.scan_delta = parse_double(v, k);
    else if (k == "solver.refine_points") s.refine_points = parse_int(v, k);
    else if (k == "solver.max_iterations") s.max_iterations = parse_int(v, k);
  }
  return s;
}

PhaseShiftConfig phase_config(const RunConfig& cfg) {
  PhaseShiftConfig p;
  p.solver = solver_config(cfg);
  for (const auto& [k, v] : cfg.tol_overrides) {
    if (k == "phase.k_rho_max") p.k_rho_max = parse_double(v, k);
    else if (k == "phase.rho_switch") p.rho_switch = parse_double(v, k);
    else if (k == "phase.points_per_decade") p.points_per_decade = parse_int(v, k);
    else if (k == "phase.rel_tol") p.rel_tol = parse_double(v, k);
    else if (k == "phase.consistency_tol") p.consistency_tol = parse_double(v, k);
    else if (k == "phase.max_retries") p.max_retries = parse_int(v, k);
  }
  return p;
}

const char* const kOverrideKeys[] = {
    "solver.residual_rel_tol", "solver.scan_points", "solver.scan_delta",      "solver.refine_points",
    "solver.max_iterations",   "phase.k_rho_max",    "phase.rho_switch",       "phase.points_per_decade",
    "phase.rel_tol",           "phase.consistency_tol", "phase.max_retries"};

void validate_overrides(const RunConfig& cfg) {
  for (const auto& [k, v] : cfg.tol_overrides) {
    bool known = false;
    for (const char* name : kOverrideKeys) known = known || k == name;
    if (!known) throw UsageError("unknown --tol-override key '" + k + "'");
  }
  (void)solver_config(cfg);
  (void)phase_config(cfg);
}

// Fills in per-command defaults so the echoed configuration is complete.
RunConfig resolve(RunConfig cfg) {
  if (cfg.lambda_star && cfg.v0bar) throw UsageError("give either --lambda-star or --v0bar, not both");
  if (!cfg.lambda_star && !cfg.v0bar) cfg.lambda_star = 10.0;
  if (cfg.lambda_star && !(*cfg.lambda_star > 0.0)) throw UsageError("--lambda-star must be positive");
  if (cfg.v0bar && !(*cfg.v0bar >= 0.0)) throw UsageError("--v0bar must be nonnegative");
  if (cfg.format != "csv" && cfg.format != "json") throw UsageError("--format must be csv or json");
  if (cfg.jobs < 0) throw UsageError("--jobs must be >= 0");
  validate_overrides(cfg);

  const auto& c = cfg.command;
  auto default_channels = [&](std::vector<Channel> d) {
    if (cfg.channels.empty()) cfg.channels = std::move(d);
  };
  auto default_grid = [&](const char* g) {
    if (!cfg.rho_grid && cfg.rhos.empty()) cfg.rho_grid = GridSpec::parse(g);
  };
  if (c == "direct") {
    default_channels({{0, 0, 0}});
    if (cfg.rhos.empty() && !cfg.rho_grid) cfg.rhos = {5.0};
  } else if (c == "sweep") {
    default_channels({{0, 0, 0}});
    default_grid("1:100:50:log");
  } else if (c == "asym") {
    default_channels({{0, 0, 0}});
    default_grid("10:10000:31:log");
  } else if (c == "matrix") {
    default_channels({{0, 0, 0}});
    if (cfg.rhos.empty()) cfg.rhos = {5.0};
    if (cfg.n_max.empty()) cfg.n_max = {20, 40, 60, 80, 100};
  } else if (c == "fig2") {
    default_channels({{0, 0, 0}});
    default_grid("50:10000:40:log");
  } else if (c == "fig3") {
    default_channels({{1, 0, 0}, {2, 0, 0}});
    default_grid("10:1000:41:log");
  } else if (c == "phase") {
    if (!cfg.hard_disc) default_channels({{0, 0, 0}});
    if (cfg.k_grid.empty()) cfg.k_grid = "1e-6..1e-2:17";
    (void)parse_k_grid(cfg.k_grid);
    if (cfg.L < 0) throw UsageError("--L must be >= 0");
  } else if (c != "table1" && c != "table2" && c != "table3") {
    throw UsageError("unknown command '" + c + "'");
  }
  for (double r : cfg.rhos)
    if (!(r > 1.0 / std::sqrt(2.0))) throw UsageError("rho must exceed 1/sqrt(2)");
  if (cfg.rho_grid && !(cfg.rho_grid->min > 1.0 / std::sqrt(2.0)))
    throw UsageError("rho grid minimum must exceed 1/sqrt(2)");
  return cfg;
}

std::vector<double> rho_list(const RunConfig& cfg) {
  std::vector<double> r = cfg.rhos;
  if (cfg.rho_grid) {
    const auto g = cfg.rho_grid->values();
    r.insert(r.end(), g.begin(), g.end());
  }
  return r;
}

// ---------------------------------------------------------------- reference data

json load_reference() {
  const std::string path = reference_data_path();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open reference data '" + path + "' (set HYPERADIA_REF_DATA)");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("reference data '" + path + "' is not valid JSON: " + e.what());
  }
}

// Reference numbers only apply under the tabulated conditions.
bool conditions_match(const RunConfig& cfg, const json& ref, Outcome& o) {
  const double ref_v0 = StepPotential::from_lambda_star(ref["conditions"]["lambda_star"].get<double>()).v0bar;
  const double v0 = cfg.potential().v0bar;
  if (std::fabs(v0 - ref_v0) <= 1e-14 * ref_v0) return true;
  o.notes.push_back("reference checks skipped: potential differs from the tabulated lambda_star");
  return false;
}

template <class F>
void parallel_rows(long n, std::vector<std::string>& errors, F&& body) {
  std::vector<std::string> errs(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (const std::exception& e) {
      errs[i] = e.what();
    }
  }
  for (auto& e : errs)
    if (!e.empty()) errors.push_back(e);
}

std::vector<Cell> channel_cells(const Channel& ch) { return {long(ch.l1), long(ch.l2), long(ch.l)}; }

// ---------------------------------------------------------------- commands

Outcome cmd_direct(const RunConfig& cfg) {
  Outcome o;
  o.table.columns = {"l1", "l2", "l", "rho", "nu1", "nu1_offset", "lambda", "v_eff", "residual", "error"};
  const auto pot = cfg.potential();
  const auto solver = solver_config(cfg);
  const auto rhos = rho_list(cfg);
  const long n = static_cast<long>(cfg.channels.size() * rhos.size());
  o.table.rows.resize(n);
  std::vector<std::string> unused;
  parallel_rows(n, unused, [&](long i) {
    const Channel& ch = cfg.channels[i / rhos.size()];
    const double rho = rhos[i % rhos.size()];
    auto row = channel_cells(ch);
    row.push_back(rho);
    try {
      const auto s = solve(ch, pot, rho, solver);
      for (double v : {s.nu1, s.nu1_offset, s.lambda, s.v_eff, s.residual}) row.push_back(v);
      row.push_back(std::string());
    } catch (const std::exception& e) {
      for (int k = 0; k < 5; ++k) row.push_back(NAN);
      row.push_back(std::string(e.what()));
    }
    o.table.rows[i] = row;
  });
  for (const auto& row : o.table.rows)
    if (!std::get<std::string>(row.back()).empty()) o.errors.push_back(std::get<std::string>(row.back()));
  return o;
}

Outcome cmd_sweep(const RunConfig& cfg) {
  Outcome o;
  o.table.columns = {"l1", "l2", "l", "rho", "nu1", "nu1_offset", "lambda", "v_eff", "residual", "error"};
  const auto pot = cfg.potential();
  const auto rhos = rho_list(cfg);
  for (const auto& ch : cfg.channels) {
    const auto rep = sweep_parallel(ch, pot, rhos, solver_config(cfg));
    for (const auto& p : rep.points) {
      auto row = channel_cells(ch);
      row.push_back(p.rho);
      if (p.solution) {
        const auto& s = *p.solution;
        for (double v : {s.nu1, s.nu1_offset, s.lambda, s.v_eff, s.residual}) row.push_back(v);
      } else {
        for (int k = 0; k < 5; ++k) row.push_back(NAN);
        o.errors.push_back(p.error);
      }
      row.push_back(p.error);
      o.table.rows.push_back(row);
    }
  }
  return o;
}

void comparison_rows(const ModelComparison& cmp, Outcome& o) {
  for (const auto& r : cmp.rows) {
    auto row = channel_cells(cmp.channel);
    row.insert(row.end(), {r.rho, r.v_exact});
    if (cmp.log_class) {
      row.insert(row.end(), {r.v_kl, r.v_wider, r.v_best, r.err_kl, r.err_wider, r.err_best, NAN, NAN});
    } else {
      row.insert(row.end(), {NAN, NAN, NAN, NAN, NAN, NAN, r.v_power, r.err_power});
    }
    row.push_back(r.error);
    if (!r.error.empty()) o.errors.push_back(r.error);
    o.table.rows.push_back(row);
  }
}

json model_json(const AsymptoticModel& m) {
  json j = {{"l1", m.channel.l1}, {"l2", m.channel.l2}, {"l", m.channel.l}, {"kind", to_string(m.kind)}};
  if (m.kind == ModelKind::InversePower) {
    j["q"] = m.q;
  } else {
    j.update({{"A", m.A}, {"B", m.B}, {"A_star", m.A_star}, {"B_star", m.B_star}});
  }
  return j;
}

const std::vector<std::string> kComparisonColumns = {"l1",     "l2",       "l",        "rho",     "v_exact",
                                                     "v_kl",   "v_wider",  "v_best",   "err_kl",  "err_wider",
                                                     "err_best", "v_power", "err_power", "error"};

Outcome cmd_asym(const RunConfig& cfg) {
  Outcome o;
  o.table.columns = kComparisonColumns;
  const auto pot = cfg.potential();
  o.extra["models"] = json::array();
  for (const auto& ch : cfg.channels) {
    const auto cmp = compare_models(ch, pot, rho_list(cfg), solver_config(cfg));
    comparison_rows(cmp, o);
    o.extra["models"].push_back(model_json(cmp.model));
  }
  return o;
}

Outcome cmd_matrix(const RunConfig& cfg) {
  Outcome o;
  o.table.columns = {"l1", "l2", "l", "rho", "n_max", "v_ritz", "v_direct", "gap"};
  const auto pot = cfg.potential();
  for (const auto& ch : cfg.channels)
    for (double rho : cfg.rhos)
      for (const auto& r : convergence_study(ch, pot, rho, cfg.n_max)) {
        auto row = channel_cells(ch);
        row.insert(row.end(), {rho, long(r.n_max), r.v_ritz, r.v_direct, r.gap});
        o.table.rows.push_back(row);
      }
  return o;
}

Outcome cmd_table1(const RunConfig& cfg) {
  Outcome o;
  const json ref = load_reference();
  const json& t1 = ref["table1"];
  const Channel ch{t1["channel"]["l1"], t1["channel"]["l2"], t1["channel"]["l"]};
  const double rho = ref["conditions"]["rho"];
  const auto pot = cfg.potential();
  const bool check = conditions_match(cfg, ref, o);

  std::vector<int> n_max = cfg.n_max;
  if (n_max.empty())
    for (const auto& r : t1["ritz"]) n_max.push_back(r["n_max"]);
  const auto rows = convergence_study(ch, pot, rho, n_max);

  o.table.columns = {"n_max", "v_eff", "reference", "abs_diff"};
  auto ref_for = [&](int n) -> const json* {
    for (const auto& r : t1["ritz"])
      if (r["n_max"].get<int>() == n) return &r;
    return nullptr;
  };
  double prev = INFINITY;
  bool monotone = true;
  for (const auto& r : rows) {
    const json* rr = ref_for(r.n_max);
    const double refv = rr ? (*rr)["value"].get<double>() : NAN;
    o.table.rows.push_back({std::to_string(r.n_max), r.v_ritz, refv, std::fabs(r.v_ritz - refv)});
    if (check && rr) o.checks.push_back(abs_check("ritz_n" + std::to_string(r.n_max), r.v_ritz, refv, (*rr)["tol"]));
    monotone = monotone && r.v_ritz <= prev;
    prev = r.v_ritz;
  }
  const double direct = rows.empty() ? solve(ch, pot, rho, solver_config(cfg)).v_eff : rows.front().v_direct;
  const double refd = t1["direct"]["value"];
  o.table.rows.push_back({std::string("direct"), direct, refd, std::fabs(direct - refd)});
  if (check) {
    o.checks.push_back(abs_check("direct", direct, refd, t1["direct"]["tol"]));
    Check m{"ritz_monotone_non_increasing", monotone ? 1.0 : 0.0, 1.0, 0.0, monotone, ""};
    o.checks.push_back(m);
  }
  return o;
}

Outcome cmd_table2(const RunConfig& cfg) {
  Outcome o;
  const json ref = load_reference();
  const auto& rows = ref["table2"]["rows"];
  const double rho = ref["conditions"]["rho"];
  const auto pot = cfg.potential();
  const bool check = conditions_match(cfg, ref, o);
  if (cfg.n_max.size() > 1) throw UsageError("table2 takes at most one --n-max value (applied to every row)");
  if (cfg.n_max.empty())
    o.notes.push_back("matrix column uses the per-row n_max of the reference data (140 for even N, 100 for odd N)");

  o.table.columns = {"l",        "l1",         "l2",         "N",           "n_max",  "v_ritz", "ref_ritz",
                     "diff_ritz", "v_direct",  "ref_direct", "diff_direct", "error"};
  const long n = static_cast<long>(rows.size());
  o.table.rows.resize(n);
  std::vector<std::vector<Check>> checks(n);
  parallel_rows(n, o.errors, [&](long i) {
    const auto& r = rows[i];
    const Channel ch{r["l1"], r["l2"], r["l"]};
    const int nm = cfg.n_max.empty() ? r["n_max"].get<int>() : cfg.n_max.front();
    std::string err;
    double direct = NAN, ritz = NAN;
    try {
      direct = solve(ch, pot, rho, solver_config(cfg)).v_eff;
      ritz = ritz_v_eff({ch, nm, 0}, pot, rho);
    } catch (const std::exception& e) {
      err = e.what();
    }
    const double rd = r["direct"], rm = r["matrix"];
    const double td = 5.0 * std::pow(10.0, -r["direct_decimals"].get<int>());
    const double tm = 5.0 * std::pow(10.0, -r["matrix_decimals"].get<int>());
    o.table.rows[i] = {long(ch.l),   long(ch.l1),  long(ch.l2), long(ch.N()), long(nm),
                       ritz,         rm,           std::fabs(ritz - rm),       direct,
                       rd,           std::fabs(direct - rd),    err};
    if (check) {
      const std::string tag = "l" + std::to_string(ch.l) + "_l1_" + std::to_string(ch.l1) + "_l2_" + std::to_string(ch.l2);
      checks[i].push_back(abs_check("direct_" + tag, direct, rd, td));
      checks[i].push_back(abs_check("ritz_" + tag, ritz, rm, tm));
    }
    if (!err.empty()) throw std::runtime_error(err);
  });
  for (auto& c : checks) o.checks.insert(o.checks.end(), c.begin(), c.end());
  return o;
}

Outcome cmd_table3(const RunConfig& cfg) {
  Outcome o;
  const json ref = load_reference();
  const auto& t3 = ref["table3"];
  const auto pot = cfg.potential();
  const bool check = conditions_match(cfg, ref, o);
  const double tol = t3["tol"];
  o.table.columns = {"l1", "l", "l2", "N", "A", "A_star", "B", "ref_A", "ref_A_star", "diff_A", "diff_A_star"};
  for (const auto& r : t3["rows"]) {
    const Channel ch{r["l1"], r["l2"], r["l"]};
    const auto m = coefficients_log(ch, pot);
    const double ra = r["A"], rs = r["A_star"];
    o.table.rows.push_back({long(ch.l1), long(ch.l), long(ch.l2), long(ch.N()), m.A, m.A_star, m.B, ra, rs,
                            std::fabs(m.A - ra), std::fabs(m.A_star - rs)});
    if (check) {
      const std::string tag = ch.label();
      o.checks.push_back(abs_check("A" + tag, m.A, ra, tol));
      o.checks.push_back(abs_check("A_star" + tag, m.A_star, rs, tol));
      o.checks.push_back(abs_check("B" + tag, m.B, 1.0 / (2.0 * (ch.N() + 1)), 0.0));
    }
  }
  return o;
}

Outcome cmd_fig2(const RunConfig& cfg) {
  Outcome o;
  o.table.columns = kComparisonColumns;
  const auto pot = cfg.potential();
  for (const auto& ch : cfg.channels) {
    if (ch.abs_l1() != 0) throw UsageError("fig2 compares the logarithmic models; channel needs l1 = 0");
    const auto cmp = compare_models(ch, pot, rho_list(cfg), solver_config(cfg));
    comparison_rows(cmp, o);
    bool ordered = true;
    for (const auto& r : cmp.rows)
      ordered = ordered && r.error.empty() && r.err_best < r.err_wider && r.err_wider < r.err_kl;
    o.checks.push_back({"ordering_best_wider_kl" + ch.label(), ordered ? 1.0 : 0.0, 1.0, 0.0, ordered, ""});
    const double exact = solve(ch, pot, 1e3, solver_config(cfg)).v_eff;
    const double err = std::fabs(model_v_eff(cmp.model, 1e3) - exact) / exact;
    Check c{"best_rel_err_rho1000" + ch.label(), err, 0.0, 0.01, err < 0.01, "relative error must stay below tol"};
    o.checks.push_back(c);
    o.extra["models"].push_back(model_json(cmp.model));
  }
  return o;
}

Outcome cmd_fig3(const RunConfig& cfg) {
  Outcome o;
  const json ref = load_reference();
  const auto& f3 = ref["fig3"];
  const auto pot = cfg.potential();
  const bool check = conditions_match(cfg, ref, o);
  o.table.columns = {"l1", "l2", "l", "rho", "v_eff", "scaled", "q", "ratio", "error"};
  for (const auto& ch : cfg.channels) {
    if (ch.abs_l1() == 0) throw UsageError("fig3 shows the inverse-power class; channel needs l1 != 0");
    const double q = coefficient_q(ch, pot).q;
    const double p = 2.0 * ch.abs_l1() + 2.0;
    const auto rep = sweep_parallel(ch, pot, rho_list(cfg), solver_config(cfg));
    for (const auto& pt : rep.points) {
      auto row = channel_cells(ch);
      const double v = pt.solution ? pt.solution->v_eff : NAN;
      const double scaled = std::pow(pt.rho, p) * v;
      row.insert(row.end(), {pt.rho, v, scaled, q, scaled / q});
      row.push_back(pt.error);
      if (!pt.error.empty()) o.errors.push_back(pt.error);
      o.table.rows.push_back(row);
    }
    if (!check) continue;
    for (const auto& r : f3["rows"]) {
      const Channel rc{r["l1"], r["l2"], r["l"]};
      if (rc.abs_l1() != ch.abs_l1() || rc.abs_l2() != ch.abs_l2() || rc.l != ch.l) continue;
      o.checks.push_back(abs_check("q" + ch.label(), q, r["q"], f3["q_tol"]));
      const double rr = f3["ratio_rho"];
      const double ratio = std::pow(rr, p) * solve(ch, pot, rr, solver_config(cfg)).v_eff / r["q"].get<double>();
      const double lo = f3["ratio_band"][0], hi = f3["ratio_band"][1];
      o.checks.push_back({"scaled_ratio" + ch.label(), ratio, 1.0, hi - 1.0, ratio >= lo && ratio <= hi,
                          "rho^(2|l1|+2) V_eff / q at ratio_rho"});
    }
  }
  return o;
}

Outcome cmd_phase(const RunConfig& cfg) {
  Outcome o;
  const auto ks = k_values(parse_k_grid(cfg.k_grid));
  constexpr double pi = std::numbers::pi;
  json fits = json::array();
  if (cfg.hard_disc) {
    o.table.columns = {"L", "k_sigma", "delta", "delta_ln_k"};
    std::vector<double> d;
    for (double k : ks) {
      const double v = hard_disc_phase_shift(cfg.L, k);
      d.push_back(v);
      o.table.rows.push_back({long(cfg.L), k, v, v * std::log(k)});
    }
    json f = {{"L", cfg.L}};
    if (cfg.L == 0) {
      const double c = d.front() * std::log(ks.front());
      f.update({{"delta_ln_k_at_smallest_k", c}, {"law_constant", pi / 2}});
      Check ch{"hard_disc_delta_ln_k", c, pi / 2, 0.1 * pi / 2, std::fabs(c - pi / 2) <= 0.1 * pi / 2, "10% band"};
      o.derived_checks.push_back(ch);
    } else {
      const double s = fit_power_law(ks, d).exponent;
      f.update({{"slope", s}, {"law_exponent", 2 * cfg.L}});
      o.derived_checks.push_back(
          {"hard_disc_slope", s, 2.0 * cfg.L, 0.1 * cfg.L, std::fabs(s - 2.0 * cfg.L) <= 0.1 * cfg.L, "5% band"});
    }
    fits.push_back(f);
  } else {
    o.table.columns = {"l1", "l2", "l", "k", "delta", "delta_check", "delta_ln_k", "tail_correction", "rho_max"};
    o.notes.push_back(
        "single-channel adiabatic approximation: couplings between adiabatic channels are dropped");
    const auto pot = cfg.potential();
    for (const auto& ch : cfg.channels) {
      const auto rs = phase_shift_sweep(ch, pot, ks, phase_config(cfg));
      std::vector<double> d;
      for (const auto& r : rs) {
        d.push_back(r.delta);
        auto row = channel_cells(ch);
        row.insert(row.end(), {r.k, r.delta, r.delta_check, r.delta * std::log(r.k), r.tail_correction, r.rho_max});
        o.table.rows.push_back(row);
      }
      json f = {{"l1", ch.l1}, {"l2", ch.l2}, {"l", ch.l}};
      if (pot.v0bar == 0.0) {
        f["note"] = "free problem; no law to fit";
      } else if (ch.abs_l1() == 0) {
        const double B = 1.0 / (2.0 * (ch.N() + 1));
        const auto fit = fit_inverse_log(ks, d);
        const double target = pi / (4.0 * B);
        f.update({{"inverse_log_constant", fit.constant()},
                  {"inverse_log_intercept", fit.intercept},
                  {"delta_ln_k_at_smallest_k", d.front() * std::log(ks.front())},
                  {"law_constant", target},
                  {"ratio", fit.constant() / target}});
        o.derived_checks.push_back({"inverse_log_constant" + ch.label(), fit.constant(), target, 0.15 * target,
                                    std::fabs(fit.constant() - target) <= 0.15 * target, "15% band"});
      } else {
        const auto mm = mott_massey_criterion(ch);
        const double s = fit_power_law(ks, d).exponent;
        f.update({{"slope", s}, {"law_exponent", mm.exponent}, {"tail_exponent_s", mm.s},
                  {"tail_dominant", mm.tail_dominant}});
        o.derived_checks.push_back({"power_slope" + ch.label(), s, double(mm.exponent), 0.05 * mm.exponent,
                                    std::fabs(s - mm.exponent) <= 0.05 * mm.exponent, "5% band"});
      }
      fits.push_back(f);
    }
  }
  o.extra["fits"] = fits;
  return o;
}

Outcome dispatch(const RunConfig& cfg) {
  static const std::map<std::string, std::function<Outcome(const RunConfig&)>> table = {
      {"direct", cmd_direct}, {"sweep", cmd_sweep},   {"asym", cmd_asym},     {"matrix", cmd_matrix},
      {"table1", cmd_table1}, {"table2", cmd_table2}, {"table3", cmd_table3}, {"fig2", cmd_fig2},
      {"fig3", cmd_fig3},     {"phase", cmd_phase}};
  return table.at(cfg.command)(cfg);
}

bool write_file(const std::string& path, const std::string& text, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------- public

GridSpec GridSpec::parse(const std::string& text) {
  const auto p = split(text, ':');
  if (p.size() != 4) throw UsageError("rho grid must be min:max:points:log|lin; got '" + text + "'");
  GridSpec g{parse_double(p[0], "grid min"), parse_double(p[1], "grid max"), parse_int(p[2], "grid points"), true};
  if (p[3] == "lin") g.logarithmic = false;
  else if (p[3] != "log") throw UsageError("grid spacing must be log or lin");
  if (!(g.max >= g.min) || g.points < 1 || (g.points == 1 && g.max != g.min))
    throw UsageError("grid needs max >= min and at least one point");
  return g;
}

std::string GridSpec::str() const {
  return format_number(min) + ":" + format_number(max) + ":" + std::to_string(points) + ":" + (logarithmic ? "log" : "lin");
}

std::vector<double> GridSpec::values() const { return points == 1 ? std::vector<double>{min} : make_grid(min, max, points, logarithmic); }

StepPotential RunConfig::potential() const {
  return v0bar ? StepPotential::from_v0bar(*v0bar) : StepPotential::from_lambda_star(lambda_star.value_or(10.0));
}

json RunConfig::to_json() const {
  json j;
  j["command"] = command;
  j["lambda_star"] = lambda_star ? json(*lambda_star) : json(nullptr);
  j["v0bar"] = v0bar ? json(*v0bar) : json(nullptr);
  j["channels"] = json::array();
  for (const auto& c : channels) j["channels"].push_back({c.l1, c.l2, c.l});
  j["rhos"] = rhos;
  j["rho_grid"] = rho_grid ? json({{"min", rho_grid->min}, {"max", rho_grid->max}, {"points", rho_grid->points},
                                   {"spacing", rho_grid->logarithmic ? "log" : "lin"}})
                           : json(nullptr);
  j["n_max"] = n_max;
  j["k_grid"] = k_grid;
  j["hard_disc"] = hard_disc;
  j["L"] = L;
  j["format"] = format;
  j["out"] = out;
  j["jobs"] = jobs;
  j["tol_overrides"] = tol_overrides;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    if (!j.value("lambda_star", json(nullptr)).is_null()) c.lambda_star = j["lambda_star"].get<double>();
    if (!j.value("v0bar", json(nullptr)).is_null()) c.v0bar = j["v0bar"].get<double>();
    for (const auto& ch : j.value("channels", json::array())) c.channels.push_back({ch[0], ch[1], ch[2]});
    c.rhos = j.value("rhos", std::vector<double>{});
    if (!j.value("rho_grid", json(nullptr)).is_null()) {
      const auto& g = j["rho_grid"];
      c.rho_grid = GridSpec{g["min"], g["max"], g["points"], g["spacing"] == "log"};
    }
    c.n_max = j.value("n_max", std::vector<int>{});
    c.k_grid = j.value("k_grid", std::string());
    c.hard_disc = j.value("hard_disc", false);
    c.L = j.value("L", 0);
    c.format = j.value("format", std::string("csv"));
    c.out = j.value("out", std::string());
    c.jobs = j.value("jobs", 0);
    c.tol_overrides = j.value("tol_overrides", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed configuration: ") + e.what());
  }
  return c;
}

std::string reference_data_path() {
  if (const char* env = std::getenv("HYPERADIA_REF_DATA"); env && *env) return env;
  return HYPERADIA_REF_DATA_DEFAULT;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int run_config(const RunConfig& raw, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = resolve(raw);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);

  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = dispatch(cfg);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool all_pass = true;
  json checks = json::array(), derived = json::array();
  for (const auto& c : o.checks) {
    checks.push_back(check_json(c));
    all_pass = all_pass && c.pass;
  }
  for (const auto& c : o.derived_checks) derived.push_back(check_json(c));

  json side = {{"config", cfg.to_json()},       {"wall_time_s", wall},      {"checks", checks},
               {"derived_checks", derived},     {"all_checks_pass", all_pass}, {"errors", o.errors},
               {"partial", !o.errors.empty()}, {"notes", o.notes},         {"reference_data", reference_data_path()}};
  side.update(o.extra);

  const std::string body = cfg.format == "csv" ? render_csv(o.table) : render_json(o.table).dump(2) + "\n";
  if (cfg.out.empty()) {
    out << body;
  } else {
    if (!write_file(cfg.out, body, err)) return kUsage;
    if (!write_file(cfg.out + ".meta.json", side.dump(2) + "\n", err)) return kUsage;
  }
  for (const auto& c : o.checks)
    if (!c.pass)
      err << "check failed: " << c.name << " value=" << format_number(c.value)
          << " reference=" << format_number(c.reference) << " tol=" << format_number(c.tol) << "\n";
  for (const auto& e : o.errors) err << "row error: " << e << "\n";
  return (all_pass && o.errors.empty()) ? kOk : kCheckFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adiabatic effective potentials of the 2D step potential"};
  app.require_subcommand(0, 1);
  std::string config_path, out_override;
  app.add_option("--config", config_path, "Re-run the configuration echoed in a sidecar (.meta.json)");
  app.add_option("--out", out_override, "With --config: output path replacing the echoed one");

  RunConfig cfg;
  double lambda_star = NAN, v0bar = NAN;
  std::vector<std::string> channels, overrides;
  std::string rho_grid;
  int l1_shorthand = 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"direct", "Direct solve at the given rho values"},
      {"sweep", "Continuation sweep over a rho grid"},
      {"asym", "Exact effective potential against the asymptotic models"},
      {"matrix", "Truncated-matrix estimate against the direct solve for a list of n_max"},
      {"table1", "Truncated-matrix convergence at rho = 5 with reference checks"},
      {"table2", "Direct and truncated-matrix values for sixteen channels with reference checks"},
      {"table3", "Analytic log-model coefficients with reference checks"},
      {"fig2", "Logarithmic model comparison over a rho grid"},
      {"fig3", "Inverse-power scaling rho^(2|l1|+2) V_eff against q"},
      {"phase", "Low-energy phase shifts and fitted threshold laws"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--lambda-star", lambda_star, "Lambda* (default 10)");
    sub->add_option("--v0bar", v0bar, "Scaled step height, instead of --lambda-star");
    sub->add_option("--channel", channels, "l1,l2,l (repeatable)")->take_all()->allow_extra_args(false);
    sub->add_option("--rho", cfg.rhos, "rho value(s)")->delimiter(',');
    sub->add_option("--rho-grid", rho_grid, "min:max:points:log|lin");
    sub->add_option("--n-max", cfg.n_max, "n_max list, comma separated")->delimiter(',');
    sub->add_option("--k-grid", cfg.k_grid, "lo..hi or lo..hi:points (logarithmic)");
    sub->add_option("--format", cfg.format, "csv or json");
    sub->add_option("--out", cfg.out, "Output path; a .meta.json sidecar is written next to it");
    sub->add_option("--jobs", cfg.jobs, "Worker threads (0 = OpenMP default)");
    sub->add_option("--tol-override", overrides, "KEY=VAL (repeatable)");
    if (name == "phase") {
      sub->add_flag("--hard-disc", cfg.hard_disc, "Hard-disc reference instead of a channel");
      sub->add_option("--L", cfg.L, "Hard-disc partial wave");
    }
    if (name == "fig3") sub->add_option("--l1", l1_shorthand, "Shorthand for --channel l1,0,0");
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot open '" + config_path + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError(std::string("'") + config_path + "' is not valid JSON: " + e.what());
      }
      RunConfig c = RunConfig::from_json(j.contains("config") ? j["config"] : j);
      if (!out_override.empty()) c.out = out_override;
      return run_config(c, out, err);
    }
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
      out << app.help();
      return kUsage;
    }
    cfg.command = subs.front()->get_name();
    if (!std::isnan(lambda_star)) cfg.lambda_star = lambda_star;
    if (!std::isnan(v0bar)) cfg.v0bar = v0bar;
    for (const auto& c : channels) cfg.channels.push_back(parse_channel(c));
    if (l1_shorthand != 0) cfg.channels.push_back({l1_shorthand, 0, 0});
    if (!rho_grid.empty()) cfg.rho_grid = GridSpec::parse(rho_grid);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw UsageError("--tol-override expects KEY=VAL; got '" + o + "'");
      cfg.tol_overrides[o.substr(0, eq)] = o.substr(eq + 1);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return run_config(cfg, out, err);
}

}  // namespace hyperadia::cli
