// Release gate: every check below must hold at the stated tolerance before a
// build is considered shippable.  One line per criterion; exit 1 on any FAIL.
//
// With no arguments all seven criteria run in order.  A list of criterion
// numbers runs a subset (useful while bisecting a regression), e.g.
//   ./acceptance 1 4

#include <sys/resource.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dcpl/cutoffs.hpp"
#include "dcpl/decoupling.hpp"
#include "dcpl/envelope.hpp"
#include "dcpl/geom.hpp"
#include "dcpl/highlow.hpp"
#include "dcpl/pruning.hpp"
#include "dcpl/synth.hpp"

namespace {

double now_s() {
  auto t = std::chrono::steady_clock::now().time_since_epoch();
  return std::chrono::duration<double>(t).count();
}

// peak resident size of this process, in GB
double vmhwm_gb() {
  std::ifstream in("/proc/self/status");
  std::string key;
  while (in >> key) {
    if (key == "VmHWM:") {
      double kb = 0.0;
      in >> kb;
      return kb / (1024.0 * 1024.0);
    }
    in.ignore(4096, '\n');
  }
  return 0.0;
}

double children_rss_gb() {
  rusage ru{};
  getrusage(RUSAGE_CHILDREN, &ru);
  return static_cast<double>(ru.ru_maxrss) / (1024.0 * 1024.0);
}

void emit(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

const std::vector<std::string> kFamilies = {"flat", "random_phase", "gaussian"};

dcpl::FamilySpec spec_of(const std::string& name) {
  dcpl::FamilySpec fs;
  fs.kind = dcpl::family_kind_from_string(name);
  return fs;
}

// criteria 3 and 4 share the {family} x {256, 1024} x {quiet, active} cascade
// ensemble.  The quiet alpha sits in the superlevel range [1, sqrt(R)], where
// the Cp = 1e4 gauges keep essentially every tile; the active alpha is tuned
// so the gauges split the tile population and the discarded parts carry real
// mass, which is what the lemma ratios need to be non-vacuous.
std::vector<dcpl::Cascade>& ensemble() {
  static std::vector<dcpl::Cascade> ens;
  if (ens.empty()) {
    for (const auto& name : kFamilies)
      for (std::uint64_t R : {256ull, 1024ull}) {
        auto f = dcpl::make_family(spec_of(name), R,
                                   dcpl::substream(2026, "acc-" + name + "-" + std::to_string(R)));
        const double active = R == 256 ? 1e4 : 3e4;
        for (double alpha : {std::pow(static_cast<double>(R), 0.25), active}) {
          dcpl::CascadeConfig cc;
          cc.alpha = alpha;
          cc.Cp = 1e4;
          ens.push_back(dcpl::prune_cascade(f, cc));
        }
      }
  }
  return ens;
}

// wall time of the R=4096 scans, consumed by the resource criterion
double g_env4096_s = -1.0;
double g_dec4096_s = -1.0;

bool criterion1() {
  double t0 = now_s();
  const std::uint64_t R = 256;
  auto grid = dcpl::make_grid(R, 4);
  auto ladder = dcpl::build_scale_ladder(R);
  auto tree = dcpl::build_cap_tree(ladder);
  const auto& ground = tree.levels.back();

  double w_pl = 0.0, w_add = 0.0, w_tel = 0.0, w_low = 0.0;
  int low_draws = 0;
  std::vector<dcpl::Cascade> cascades;

  for (const auto& name : kFamilies)
    for (int rep = 0; rep < 2; ++rep) {
      auto f = dcpl::make_family(spec_of(name), R,
                                 dcpl::substream(2026, "acc1-" + name + "-" + std::to_string(rep)));
      auto F = dcpl::synthesize(f, grid);
      double e_grid = F.values.abs2().sum() * grid.cell_area();
      double e_coef = 0.0;
      for (const auto& e : f.entries) e_coef += std::norm(e.a);
      e_coef *= static_cast<double>(R) * static_cast<double>(R);
      w_pl = std::max(w_pl, std::fabs(e_grid / e_coef - 1.0));

      dcpl::CArray acc = dcpl::CArray::Zero(grid.M, grid.M);
      for (const auto& cap : ground) {
        auto part = dcpl::cap_component(f, cap);
        if (part.entries.empty()) continue;
        acc += dcpl::synthesize(part, grid).values;
      }
      double sup = F.values.abs().maxCoeff();
      w_add = std::max(w_add, (acc - F.values).abs().maxCoeff() / sup);

      dcpl::CascadeConfig cc;
      cc.alpha = 4.0;
      cc.Cp = 1e4;
      auto c = dcpl::prune_cascade(f, cc);
      auto inv = dcpl::cascade_invariants(c);
      w_tel = std::max(w_tel, inv.telescoping / c.f_sup);
      cascades.push_back(std::move(c));
    }

  double rN = ladder.scales.back();
  for (const auto& c : cascades)
    for (int s = 0; s <= 2; ++s)
      for (double r : {1.0 / rN, 0.5 / rN}) {
        auto rep = dcpl::low_lemma_residual(c, 2, 2, s, r);
        w_low = std::max(w_low, rep.ratio);
        ++low_draws;
      }

  double elapsed = now_s() - t0;
  bool ok = w_pl <= 1e-10 && w_add <= 1e-12 && w_tel <= 1e-12 && w_low <= 1e-6 &&
            low_draws >= 20 && elapsed <= 60.0;
  emit(1, "exact-model identities (R=256, sigma=4)", ok,
       "plancherel_rel=" + num(w_pl) + " cap_additivity=" + num(w_add) +
           " telescoping_rel=" + num(w_tel) + " low_residual=" + num(w_low) + " over " +
           std::to_string(low_draws) + " draws, elapsed=" + num(elapsed) + "s");
  return ok;
}

bool criterion2() {
  double dev = 0.0, minw = 0.0;
  for (std::uint64_t R : {256ull, 1024ull}) {
    auto ladder = dcpl::build_scale_ladder(R);
    auto tree = dcpl::build_cap_tree(ladder);
    dcpl::Rng rng(dcpl::substream(2026, "acc2-" + std::to_string(R)));
    for (int k = 1; k <= ladder.N; ++k) {
      const auto& lvl = tree.levels[static_cast<std::size_t>(k)];
      auto ps = dcpl::plate_tiling(lvl[lvl.size() / 2], ladder);
      for (int s = 0; s < 512; ++s) {
        double x1 = (rng.uniform() - 0.5) * 2.0 * static_cast<double>(R);
        double x2 = (rng.uniform() - 0.5) * 2.0 * static_cast<double>(R);
        dev = std::max(dev, std::fabs(dcpl::tile_partition_sum(ps, x1, x2) - 1.0));
        for (int a = -1; a <= 1; ++a)
          minw = std::min(minw, dcpl::tile_weight(ps, a, 0, x1, x2));
      }
    }
  }
  auto fit = dcpl::decay_fit(dcpl::filter_bank().profile());
  bool ok = dev <= 1e-8 && minw >= -1e-14 && fit.c > 0.0 && 1.0 - fit.r2 <= 0.05;
  emit(2, "cutoff system", ok,
       "partition_dev=" + num(dev) + " min_weight=" + num(minw) + " decay_c=" + num(fit.c) +
           " fit_r2=" + num(fit.r2) + " on x in [10,1e3]");
  return ok;
}

bool criterion3() {
  double w_mono = 0.0, w_leak = 0.0, w_repl = 0.0;
  for (const auto& c : ensemble()) {
    auto inv = dcpl::cascade_invariants(c);
    w_mono = std::max(w_mono, inv.monotonicity);
    w_leak = std::max(w_leak, inv.leak_outer);
    w_repl = std::max(w_repl, inv.replacement / inv.replacement_bound);
  }
  bool ok = w_mono <= 1e-12 && w_leak <= 1e-6 && w_repl <= 1.0;
  emit(3, "pruning lemmas ({flat,random_phase,gaussian} x {256,1024})", ok,
       "monotonicity=" + num(w_mono) + " leak_outer=" + num(w_leak) +
           " replacement/bound=" + num(w_repl) +
           " at Cp=1e4, alpha in {R^1/4, active}");
  return ok;
}

bool criterion4() {
  double w_excess = -100.0;
  bool finite = true;
  std::int64_t violations = 0, nodes = 0, nonvac = 0;
  for (const auto& c : ensemble()) {
    const int N = c.ladder.N;
    std::vector<dcpl::LemmaReport> reps;
    reps.push_back(dcpl::high_lemma_ratio(c, 'a', N, 1, 0));
    reps.push_back(dcpl::high_lemma_ratio(c, 'b', N, 1, 0));
    reps.push_back(dcpl::high_lemma_ratio(c, 'c', N, 1, 1));
    dcpl::ConstancyParams cp;
    cp.m = 2;
    cp.k = 1;
    cp.cap = c.tree.level_of_count(1) / 2;
    cp.r = c.ladder.scales[1] / static_cast<double>(c.R);
    reps.push_back(dcpl::constancy_ratio(c, dcpl::ConstancyKind::integrated_a, cp));
    cp.k = N;
    cp.cap = c.tree.level_of_count(N) / 2;
    reps.push_back(dcpl::constancy_ratio(c, dcpl::ConstancyKind::integrated_b, cp));
    reps.push_back(dcpl::weak_high_domination(c, 2, 0, 'a'));
    for (const auto& rep : reps) {
      if (rep.vacuous) continue;
      if (!std::isfinite(rep.ratio)) {
        finite = false;
        continue;
      }
      if (rep.ratio > 0.0) {
        ++nonvac;
        w_excess = std::max(w_excess, rep.log_exponent - rep.stated_power);
      }
    }
    auto sc = dcpl::dichotomy_scan(c, 2, 100, 1.0);
    violations += sc.violations;
    nodes += sc.nodes;
  }
  // a run where every ratio degenerates to zero would prove nothing, so the
  // gate also demands that the active-alpha cascades produced live reports
  bool ok = finite && nonvac > 0 && w_excess <= 0.5 && violations == 0;
  emit(4, "lemma log-exponents and narrow dichotomy", ok,
       "max(log_exp - stated)=" + num(w_excess) + " over " + std::to_string(nonvac) +
           " live ratios, dichotomy_violations=" + std::to_string(violations) + " over " +
           std::to_string(nodes) + " nodes" + (finite ? "" : " [non-finite ratio]"));
  return ok;
}

bool criterion5() {
  double worst = -100.0;
  int reports = 0;
  g_env4096_s = 0.0;
  for (const auto& name : kFamilies)
    for (std::uint64_t R : {256ull, 1024ull, 4096ull}) {
      double t0 = now_s();
      auto sc = dcpl::envelope_scan(spec_of(name), R,
                                    dcpl::substream(2026, "acc5-" + name + "-" + std::to_string(R)),
                                    1e4);
      if (R == 4096) g_env4096_s += now_s() - t0;
      worst = std::max(worst, sc.max_log_exponent);
      reports += static_cast<int>(sc.reports.size());
    }
  bool ok = worst <= 31.0;
  emit(5, "wave envelope gate (log-exponent <= 31)", ok,
       "max_log_exponent=" + num(worst) + " over " + std::to_string(reports) +
           " reports; informational target <=4: " + (worst <= 4.0 ? "met" : "exceeded"));
  return ok;
}

bool criterion6() {
  double t_all0 = now_s();
  double unit_dev = 0.0;
  for (std::uint64_t R : {256ull, 1024ull}) {
    dcpl::FamilySpec fs;
    fs.kind = dcpl::FamilyKind::single_cap;
    fs.beta = 0.5;
    auto f = dcpl::make_family(fs, R, dcpl::substream(2026, "acc6-single-" + std::to_string(R)));
    auto rep = dcpl::decoupling_ratio(f, {6.0, 6.0, 0.5});
    unit_dev = std::max(unit_dev, std::fabs(rep.d_emp - 1.0));
  }

  const std::vector<std::uint64_t> Rs = {256, 1024, 4096};
  const std::vector<dcpl::ExponentTriple> battery = {
      {6.0, 6.0, 1.0}, {4.0, 4.0, 0.5}, {6.0, 2.0, 0.5}};
  bool margins = true;
  double worst_margin = -1e9;
  std::string fam661 = "none", fam4405 = "none";
  double slope661 = 0.0, slope4405 = 0.0;
  for (const auto& t : battery)
    for (const auto& name : kFamilies) {
      auto fit = dcpl::exponent_fit(spec_of(name), t, Rs,
                                    dcpl::substream(2026, "acc6-" + name + "-p" + num(t.p) +
                                                              "q" + num(t.q) + "b" + num(t.beta)));
      for (const auto& rep : fit.reports) {
        margins = margins && rep.pass;
        worst_margin = std::max(worst_margin, rep.log_margin - rep.E1);
      }
      if (t.p == 6.0 && t.q == 6.0 && std::fabs(fit.slope - fit.predicted) <= 0.25 &&
          fam661 == "none") {
        fam661 = name;
        slope661 = fit.slope;
      }
      if (t.p == 4.0 && t.q == 4.0 && std::fabs(fit.slope - fit.predicted) <= 0.25 &&
          fam4405 == "none") {
        fam4405 = name;
        slope4405 = fit.slope;
      }
    }
  g_dec4096_s = now_s() - t_all0;

  bool ok = unit_dev <= 1e-10 && margins && fam661 != "none" && fam4405 != "none";
  emit(6, "decoupling gate and sharpness probe", ok,
       "single_cap_dev=" + num(unit_dev) + " max(log_margin-E1)=" + num(worst_margin) +
           " slope(6,6,1)=" + num(slope661) + " by " + fam661 + " (target 3+-0.25)" +
           " slope(4,4,1/2)=" + num(slope4405) + " by " + fam4405 + " (target 0.5+-0.25)");
  return ok;
}

bool criterion7() {
#ifndef DCPL_CLI_PATH
  emit(7, "resource envelope", false, "built without the CLI path");
  return false;
#else
  double t0 = now_s();
  std::string cli(DCPL_CLI_PATH);
  int rc = 0;
  for (const char* flag : {"--R 256", "--R 1024"}) {
    std::string cmd = cli + " suite " + flag + " --seed 2026 --out /dev/null";
    int st = std::system(cmd.c_str());
    rc |= WIFEXITED(st) ? WEXITSTATUS(st) : 1;
  }
  double t_suite = now_s() - t0;
  double suite_gb = children_rss_gb();

  // scan timings come from criteria 5/6 when they ran; probe otherwise
  if (g_env4096_s < 0.0) {
    double t1 = now_s();
    dcpl::envelope_scan(spec_of("random_phase"), 4096, dcpl::substream(2026, "acc7-env"), 1e4);
    g_env4096_s = now_s() - t1;
  }
  if (g_dec4096_s < 0.0) {
    double t1 = now_s();
    dcpl::exponent_fit(spec_of("random_phase"), {6.0, 6.0, 1.0}, {256, 1024, 4096},
                       dcpl::substream(2026, "acc7-dec"));
    g_dec4096_s = now_s() - t1;
  }
  double t_scan = g_env4096_s + g_dec4096_s;
  double self_gb = vmhwm_gb();

  bool ok = rc == 0 && t_suite <= 900.0 && suite_gb <= 4.0 && t_scan <= 3600.0 &&
            self_gb <= 16.0;
  emit(7, "resource envelope", ok,
       "suite(256+1024)=" + num(t_suite) + "s rss=" + num(suite_gb) + "GB exit=" +
           std::to_string(rc) + "; 4096 scans=" + num(t_scan) + "s peak=" + num(self_gb) +
           "GB ((4R)^2 grid nodes per sweep)");
  return ok;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));
  auto want = [&](int id) { return chosen.empty() || chosen.count(id) > 0; };

  bool all_ok = true;
  struct Entry {
    int id;
    const char* name;
    bool (*fn)();
  };
  const Entry entries[] = {
      {1, "exact-model identities (R=256, sigma=4)", criterion1},
      {2, "cutoff system", criterion2},
      {3, "pruning lemmas ({flat,random_phase,gaussian} x {256,1024})", criterion3},
      {4, "lemma log-exponents and narrow dichotomy", criterion4},
      {5, "wave envelope gate (log-exponent <= 31)", criterion5},
      {6, "decoupling gate and sharpness probe", criterion6},
      {7, "resource envelope", criterion7},
  };
  for (const auto& e : entries) {
    if (!want(e.id)) continue;
    try {
      all_ok = e.fn() && all_ok;
    } catch (const std::exception& ex) {
      emit(e.id, e.name, false, std::string("exception: ") + ex.what());
      all_ok = false;
    }
  }
  return all_ok ? 0 : 1;
}
