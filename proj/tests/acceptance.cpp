// Acceptance runner. Prints one PASS/FAIL line per criterion, followed by
// indented detail lines. With an argument (1..7) only that criterion runs;
// the exit status is nonzero when any selected criterion fails.
//
// Published numbers come from the reference dataset (HYPERADIA_REF_DATA or
// the build-time default), never from literals in this file.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli_app.hpp"
#include "hyperadia/adiabatic.hpp"
#include "hyperadia/asymptotics.hpp"
#include "hyperadia/matrixmethod.hpp"
#include "hyperadia/phaseshift.hpp"
#include "hyperadia/specfun.hpp"

namespace {

using namespace hyperadia;
namespace sf = hyperadia::specfun;
using nlohmann::json;

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Collects named checks. Every failing check is kept as a detail line; the
// passing ones only contribute to the count unless they are diagnostics.
class Report {
 public:
  void check(bool ok, const std::string& what) {
    ++total_;
    if (!ok) {
      ++failed_;
      lines_.push_back("FAIL " + what);
    }
  }
  void note(const std::string& what) { lines_.push_back("note " + what); }
  void info(const std::string& what) { lines_.push_back(what); }
  bool pass() const { return failed_ == 0 && total_ > 0; }
  int total() const { return total_; }
  int failed() const { return failed_; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::vector<std::string> lines_;
};

json load_reference() {
  const auto path = cli::reference_data_path();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference data " + path);
  return json::parse(in);
}

StepPotential reference_potential(const json& ref) {
  return StepPotential::from_lambda_star(ref["conditions"]["lambda_star"].get<double>());
}

Channel channel_of(const json& row) { return {row["l1"].get<int>(), row["l2"].get<int>(), row["l"].get<int>()}; }

// ------------------------------------------------------------------ 1

void criterion1(const json& ref, Report& r) {
  const auto pot = reference_potential(ref);
  const double rho = ref["conditions"]["rho"];
  const auto& t = ref["table1"];
  const Channel ch = channel_of(t["channel"]);

  const double direct = solve(ch, pot, rho).v_eff;
  const double want = t["direct"]["value"], tol = t["direct"]["tol"];
  r.check(std::fabs(direct - want) <= tol, fmt("direct %.12g vs %.9f (tol %g)", direct, want, tol));
  r.info(fmt("direct %.12g, deviation %.2e", direct, direct - want));

  double prev = INFINITY;
  for (const auto& row : t["ritz"]) {
    const int n = row["n_max"];
    const double v = ritz_v_eff({ch, n, 0}, pot, rho);
    const double w = row["value"], tl = row["tol"];
    r.check(std::fabs(v - w) <= tl, fmt("ritz n_max=%d: %.12g vs %.9f (tol %g)", n, v, w, tl));
    r.check(v <= prev, fmt("ritz n_max=%d not monotone non-increasing (%.12g > %.12g)", n, v, prev));
    r.info(fmt("ritz n_max=%d %.12g, deviation %.2e", n, v, v - w));
    prev = v;
  }
}

// ------------------------------------------------------------------ 2

void criterion2(const json& ref, Report& r) {
  const auto pot = reference_potential(ref);
  const double rho = ref["conditions"]["rho"];
  int ritz_fail = 0, parity_fail = 0;
  for (const auto& row : ref["table2"]["rows"]) {
    const Channel ch = channel_of(row);
    const double direct = solve(ch, pot, rho).v_eff;
    const double dw = row["direct"];
    const double dtol = 5.0 * std::pow(10.0, -row["direct_decimals"].get<int>());
    r.check(std::fabs(direct - dw) <= dtol,
            fmt("direct %s: %.12g vs %.9g (tol %g)", ch.label().c_str(), direct, dw, dtol));

    const double mw = row["matrix"];
    const double mtol = 5.0 * std::pow(10.0, -row["matrix_decimals"].get<int>());
    const int n_stated = row["n_max_stated"];
    const double ritz = ritz_v_eff({ch, n_stated, 0}, pot, rho);
    const bool ok = std::fabs(ritz - mw) <= mtol;
    ritz_fail += !ok;
    r.check(ok, fmt("ritz %s n_max=%d: %.12g vs %.9g (off by %.2e, tol %g)", ch.label().c_str(), n_stated, ritz, mw,
                    ritz - mw, mtol));

    const int n_parity = row["n_max"];
    const double ritz_p = n_parity == n_stated ? ritz : ritz_v_eff({ch, n_parity, 0}, pot, rho);
    parity_fail += std::fabs(ritz_p - mw) > mtol;
  }
  r.note(fmt("%d of 16 Ritz rows miss at the stated truncation (100, or 140 for the first row)", ritz_fail));
  r.note(fmt("diagnostic: with n_max=140 for even N and 100 for odd N, %d of 16 rows miss", parity_fail));
}

// ------------------------------------------------------------------ 3

void criterion3(const json& ref, Report& r) {
  const auto pot = reference_potential(ref);
  const double tol = ref["table3"]["tol"];
  for (const auto& row : ref["table3"]["rows"]) {
    const Channel ch = channel_of(row);
    const auto m = coefficients_log(ch, pot);
    const double a = row["A"], as = row["A_star"];
    r.check(std::fabs(m.A - a) <= tol, fmt("A%s %.6f vs %.6g", ch.label().c_str(), m.A, a));
    r.check(std::fabs(m.A_star - as) <= tol, fmt("A*%s %.6f vs %.6g", ch.label().c_str(), m.A_star, as));
    r.check(m.B == 1.0 / (2.0 * (ch.N() + 1)), fmt("B%s = %.17g not 1/(2(N+1))", ch.label().c_str(), m.B));
    r.info(fmt("%s A %.6f  A* %.6f  B %.6f", ch.label().c_str(), m.A, m.A_star, m.B));
  }
}

// ------------------------------------------------------------------ 4

void criterion4(const json& ref, Report& r) {
  const auto pot = reference_potential(ref);
  const auto& f = ref["fig3"];
  const double qtol = f["q_tol"], rho = f["ratio_rho"];
  const double lo = f["ratio_band"][0], hi = f["ratio_band"][1];
  for (const auto& row : f["rows"]) {
    const Channel ch = channel_of(row);
    const double q = coefficient_q(ch, pot).q;
    const double want = row["q"];
    r.check(std::fabs(q - want) <= qtol, fmt("q%s %.8f vs %.6f", ch.label().c_str(), q, want));

    const auto rep = sweep_parallel(ch, pot, make_grid(10.0, rho, 9, true));
    if (!rep.ok() || rep.points.back().rho != rho) {
      r.check(false, fmt("sweep %s did not reach rho=%g", ch.label().c_str(), rho));
      continue;
    }
    const double v = rep.points.back().solution->v_eff;
    const double ratio = std::pow(rho, 2 * ch.abs_l1() + 2) * v / q;
    r.check(ratio >= lo && ratio <= hi, fmt("rho^(2|l1|+2) V_eff / q for %s is %.5f", ch.label().c_str(), ratio));
    r.info(fmt("%s q %.8f, scaled ratio at rho=%g %.5f", ch.label().c_str(), q, rho, ratio));
  }
}

// ------------------------------------------------------------------ 5

void criterion5(const json& ref, Report& r) {
  const auto pot = reference_potential(ref);
  const Channel ch{0, 0, 0};
  auto grid = make_grid(50.0, 1e4, 31, true);
  grid.push_back(1e3);
  std::sort(grid.begin(), grid.end());
  const auto cmp = compare_models(ch, pot, grid);
  for (const auto& row : cmp.rows) {
    if (!row.error.empty()) {
      r.check(false, fmt("exact solve failed at rho=%g: %s", row.rho, row.error.c_str()));
      continue;
    }
    r.check(row.err_best < row.err_wider && row.err_wider < row.err_kl,
            fmt("ordering at rho=%g: best %.3e wider %.3e KL %.3e", row.rho, row.err_best, row.err_wider, row.err_kl));
    if (row.rho == 1e3) {
      r.check(row.err_best < 0.01, fmt("best-model error at rho=1e3 is %.3e", row.err_best));
      r.info(fmt("rho=1e3 relative errors: best %.3e wider %.3e KL %.3e", row.err_best, row.err_wider, row.err_kl));
    }
  }
}

// ------------------------------------------------------------------ 6

void criterion6(const json& ref, Report& r) {
  const auto pot = reference_potential(ref);
  const auto free = StepPotential::from_v0bar(0.0);

  std::vector<Channel> table2;
  for (const auto& row : ref["table2"]["rows"]) table2.push_back(channel_of(row));
  const double rhos[] = {0.75, 1.0, 2.0, 5.0, 20.0, 100.0};

  double free_max = 0.0;
  for (const Channel ch : {Channel{0, 0, 0}, Channel{1, -2, 3}, Channel{-3, 0, 1}, Channel{2, 2, 2}})
    for (double rho : {0.71, 1.0, 5.0, 1e3}) free_max = std::max(free_max, std::fabs(solve(ch, free, rho).v_eff));
  for (int n : {20, 60}) {
    const auto s = ritz_eigenvalues({{1, 2, 0}, n, 0}, free, 3.0);
    for (int l = 0; l < 3; ++l) free_max = std::max(free_max, std::fabs(s.v_eff(l)));
  }
  r.check(free_max <= 1e-14, fmt("free limit: max |V_eff| %.3e", free_max));

  int bound_fail = 0;
  for (const auto& ch : table2)
    for (double rho : rhos) {
      const double v = solve(ch, pot, rho).v_eff;
      bound_fail += !(v > 0.0 && v <= pot.v0bar);
    }
  r.check(bound_fail == 0, fmt("variational bounds violated at %d points", bound_fail));

  int sym_fail = 0;
  for (double rho : {1.0, 5.0, 100.0})
    for (const Channel base : {Channel{1, 2, 1}, Channel{2, 1, 0}, Channel{1, 0, 2}}) {
      const auto a = solve(base, pot, rho);
      for (const Channel ch : {Channel{-base.l1, base.l2, base.l}, Channel{base.l1, -base.l2, base.l},
                               Channel{-base.l1, -base.l2, base.l}}) {
        const auto b = solve(ch, pot, rho);
        sym_fail += !(a.v_eff == b.v_eff && a.nu1_offset == b.nu1_offset);
      }
    }
  r.check(sym_fail == 0, fmt("sign symmetry broken in %d cases", sym_fail));

  double dual_max = 0.0;
  for (const auto& ch : table2)
    for (double rho : {1.0, 5.0, 20.0}) {
      const auto s = solve(ch, pot, rho);
      dual_max = std::max(dual_max, std::fabs(s.v_eff_by_subtraction(ch) - s.v_eff) / std::fabs(s.v_eff));
    }
  r.check(dual_max <= 1e-12, fmt("dual formula: max relative difference %.3e", dual_max));

  int ub_fail = 0, ub_total = 0;
  for (const Channel base : {Channel{0, 0, 0}, Channel{1, 1, 0}, Channel{0, 2, 0}})
    for (double rho : {1.0, 5.0, 20.0}) {
      std::vector<double> exact;
      for (int l = 0; l < 3; ++l) exact.push_back(solve({base.l1, base.l2, l}, pot, rho).lambda);
      for (int n : {20, 40, 80, 120}) {
        const auto s = ritz_eigenvalues({base, n, 0}, pot, rho);
        for (int l = 0; l < 3; ++l, ++ub_total) ub_fail += !(s.eigenvalues[l] > exact[l]);
      }
    }
  r.check(ub_fail == 0, fmt("Ritz upper bound violated in %d of %d cases", ub_fail, ub_total));

  {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> unu(-0.45, 3.7), ux(0.7, 0.8);
    std::uniform_int_distribution<int> ul(0, 4);
    sf::HypergeometricConfig force_conn;
    force_conn.x_switch = 0.65;
    double worst = 0.0;
    int n = 0;
    for (int i = 0; i < 400; ++i) {
      const int l1 = ul(gen), l2 = ul(gen);
      const int M = l1 + l2, c = l2 + 1;
      const double nu = unu(gen), x = ux(gen);
      const double series = sf::f1_series({nu * (nu + M + 1), M, c, x});
      if (std::fabs(series) < 1e-6) continue;
      const double conn = sf::f1_near_unit({-nu, nu + M + 1, M + 1 - c, 1.0 - x}, force_conn);
      worst = std::max(worst, std::fabs(series - conn) / std::fabs(series));
      ++n;
    }
    r.check(n > 100 && worst <= 1e-9, fmt("series vs connection: max relative difference %.3e over %d points", worst, n));
  }

  {
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> ut(-20.0, 8.0), uz(-0.95, 0.95);
    std::uniform_int_distribution<int> ul(0, 3);
    const double h = 1e-6;
    double worst = 0.0;
    int n = 0;
    for (int i = 0; i < 600 && n < 200; ++i) {
      const int l1 = ul(gen), l2 = ul(gen), M = l1 + l2;
      const double t = ut(gen), z = uz(gen);
      auto left = [&](double zz) { return sf::f1_symmetric(t, M, l1 + 1, {0.5 * (1 + zz), 0.5 * (1 - zz)}); };
      auto right = [&](double zz) { return sf::f1_symmetric(t, M, l2 + 1, {0.5 * (1 - zz), 0.5 * (1 + zz)}); };
      if (std::fabs(left(z)) < 1e-2 || std::fabs(right(z)) < 1e-2) continue;
      const auto d = sf::f1_log_derivative(t, M, l1 + 1, l2 + 1, z);
      auto fd = [&](auto f) { return (std::log(std::fabs(f(z + h))) - std::log(std::fabs(f(z - h)))) / (2 * h); };
      worst = std::max(worst, std::fabs(d.left - fd(left)) / (1 + std::fabs(d.left)));
      worst = std::max(worst, std::fabs(d.right - fd(right)) / (1 + std::fabs(d.right)));
      ++n;
    }
    r.check(n > 50 && worst <= 1e-6, fmt("log-derivative vs central difference: max error %.3e over %d points", worst, n));
  }

  {
    double worst = 0.0;
    for (int l1 = 0; l1 <= 3; ++l1)
      for (int l2 = 0; l2 <= 3; ++l2)
        for (int l = 0; l <= 10; ++l)
          for (double z : {-0.9, -0.4, 0.1, 0.6, 0.95}) {
            const int M = l1 + l2;
            const double want = sf::jacobi_polynomial(l, l2, l1, z) / sf::binomial(l + l2, l);
            const double got = sf::f1_symmetric(sf::SymmetricDegree::from_nu(l, M), M, l2 + 1,
                                                 sf::SeriesArgument::from_x(0.5 * (1.0 - z)));
            worst = std::max(worst, std::fabs(got - want) / std::max(1.0, std::fabs(want)));
          }
    r.check(worst <= 1e-12, fmt("Jacobi reduction: max error %.3e", worst));
  }

  double gram = 0.0;
  for (const Channel ch : {Channel{0, 0, 0}, Channel{1, 1, 0}, Channel{2, 3, 0}, Channel{4, 0, 0}})
    for (int n : {10, 100, 200}) {
      const auto g = basis_gram_matrix({ch, n, 0});
      gram = std::max(gram, (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    }
  r.check(gram <= 1e-12, fmt("Gram matrix: max |G - I| %.3e", gram));

  r.info(fmt("free %.1e, dual %.1e, Gram %.1e, Ritz bound cases %d", free_max, dual_max, gram, ub_total));
}

// ------------------------------------------------------------------ 7

void criterion7(const json& ref, Report& r) {
  const auto pot = reference_potential(ref);
  r.note("low-energy limits are not reachable at desk scale; these are trend checks at the stated k");

  const double ks = 1e-6;
  const double hd = hard_disc_phase_shift(0, ks) * std::log(ks);
  r.check(std::fabs(hd - kPi / 2) <= 0.10 * kPi / 2, fmt("hard disc: delta0 ln(k sigma) = %.5f, target pi/2", hd));
  r.info(fmt("hard disc delta0 ln(k sigma) at 1e-6: %.5f (ratio %.4f)", hd, hd / (kPi / 2)));

  const Channel s_wave{0, 0, 0};
  const double B = coefficients_log(s_wave, pot).B;
  const double target = kPi / (4.0 * B);
  const auto table = EffectivePotentialTable::build(s_wave, pot);
  const auto res = channel_phase_shift({.channel = s_wave, .potential = pot, .k = ks}, table);
  const double dl = res.delta * std::log(ks);
  r.check(std::fabs(dl - target) <= 0.15 * target,
          fmt("(0,0,0): delta ln k = %.5f, target pi/(4B) = %.5f (ratio %.4f)", dl, target, dl / target));

  std::vector<double> klog;
  for (int e = -6; e <= -2; ++e) klog.push_back(std::pow(10.0, e));
  const auto sweep_log = phase_shift_sweep(table, klog, {}, true);
  std::vector<double> dlog;
  for (const auto& p : sweep_log) dlog.push_back(p.delta);
  const double fitted = fit_inverse_log(klog, dlog).constant();
  r.note(fmt("diagnostic: inverse-log fit over k in [1e-6, 1e-2] gives constant %.5f vs %.5f", fitted, target));

  const Channel p_wave{1, 0, 0};
  const auto kp = make_grid(1e-4, 1e-2, 9, true);
  const auto sweep_p = phase_shift_sweep(p_wave, pot, kp);
  std::vector<double> dp;
  for (const auto& p : sweep_p) dp.push_back(p.delta);
  const double slope = fit_power_law(kp, dp).exponent;
  r.check(std::fabs(slope - 2.0) <= 0.05 * 2.0, fmt("(1,0,0): log-log slope %.5f, target 2", slope));
  r.info(fmt("(1,0,0) slope over [1e-4, 1e-2]: %.6f", slope));
}

const std::function<void(const json&, Report&)> kCriteria[] = {criterion1, criterion2, criterion3, criterion4,
                                                                  criterion5, criterion6, criterion7};
const char* const kTitles[] = {"convergence table (direct and Ritz at rho=5)",
                               "comparison table (16 channels, direct and Ritz)",
                               "asymptotic coefficients A, A*, B",
                               "inverse-power amplitudes q",
                               "asymptotic model ordering for (0,0,0)",
                               "property suite",
                               "phase-shift laws"};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int c = std::atoi(argv[i]);
    if (c < 1 || c > 7) {
      std::fprintf(stderr, "usage: %s [criterion 1..7 ...]\n", argv[0]);
      return 2;
    }
    which.push_back(c);
  }
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7};

  json ref;
  try {
    ref = load_reference();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }

  int failures = 0;
  for (int c : which) {
    Report rep;
    try {
      kCriteria[c - 1](ref, rep);
    } catch (const std::exception& e) {
      rep.check(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %d %s: %s (%d/%d checks)\n", c, rep.pass() ? "PASS" : "FAIL", kTitles[c - 1],
                rep.total() - rep.failed(), rep.total());
    for (const auto& line : rep.lines()) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    failures += !rep.pass();
  }
  return failures == 0 ? 0 : 1;
}
