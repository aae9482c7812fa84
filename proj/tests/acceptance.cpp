// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Thresholds come from the
// "acceptance" section of the calibration file.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dla1d/dla1d.hpp"

using namespace dla1d;
namespace ex = dla1d::experiment;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

ex::SimulateResult run(double alpha, std::uint64_t n, std::uint64_t seed, const ex::ReplayOptions& ro = {}) {
  ex::SimulateConfig c;
  c.dist = {{"dist", "zeta"}, {"alpha", alpha}};
  c.particles = n;
  c.seed = seed;
  c.replay = ro;
  return ex::simulate(c);
}

// Criterion 1.
Outcome simple_exactness(const json& p) {
  const std::uint64_t n = p["particles"];
  ex::SimulateConfig c;
  c.dist = {{"dist", "simple"}};
  c.particles = n;
  const auto r = ex::simulate(c);
  const auto& rp = r.replay;
  bool ok = rp.hull.back().max - rp.hull.back().min == static_cast<std::int64_t>(n);
  ok = ok && rp.hull.back().min <= 0 && rp.hull.back().max >= 0;
  for (const auto& cp : rp.checkpoints) ok = ok && cp.diameter == static_cast<std::int64_t>(cp.n);
  for (auto j : rp.J) ok = ok && j == 0;
  ok = ok && rp.tree.leaf_count() == 2 && rp.tree.max_degree() <= 2;
  const auto d = make_simple();
  auto g = make_rng(1);
  for (std::int64_t y = 0; y <= 2000; ++y) ok = ok && sample_overshoot(d, y, g) == 1;
  for (std::int64_t y = 0; y <= 50; ++y) {
    try {
      ok = ok && sample_overshoot(d, y, g, WalkMode::raw, 100'000'000) == 1;
    } catch (const WalkerError&) {
    }
  }
  std::uint64_t strong_right = 0;
  for (const auto& cand : rp.renewal.candidates()) {
    if (cand.side != RenewalSide::right || cand.kind != RenewalKind::strong) continue;
    ++strong_right;
    ok = ok && cand.status == RenewalStatus::confirmed_at_horizon;
  }
  ok = ok && strong_right == rp.plus_side;
  return {ok, fmt("n=%llu D_n=%lld leaves=%zu maxJ=%lld strong_right=%llu plus_launches=%llu",
                  static_cast<unsigned long long>(n), static_cast<long long>(rp.hull.back().max - rp.hull.back().min),
                  static_cast<std::size_t>(rp.tree.leaf_count()), static_cast<long long>(*std::max_element(rp.J.begin(), rp.J.end())),
                  static_cast<unsigned long long>(strong_right), static_cast<unsigned long long>(rp.plus_side))};
}

// Criterion 2.
Outcome visits_identity(const json& p) {
  const auto rep = ex::run_check("visits-identity", {{"dist", "simple"}, {"z", p["z"]}, {"y", p["y"]}, {"trials", p["trials"]}});
  const auto& r = rep["report"];
  const double cf = p["closed_form"], k = p["sigmas"];
  const double l = r["lhs"]["estimate"], ls = r["lhs"]["stderr"], rr = r["rhs"]["estimate"], rs = r["rhs"]["stderr"];
  const bool ok = std::fabs(l - cf) <= k * ls && std::fabs(rr - cf) <= k * rs;
  return {ok, fmt("lhs=%.4f+-%.4f rhs=%.4f+-%.4f target=%.1f", l, ls, rr, rs, cf)};
}

// Criterion 3.
Outcome escape_product(const json& p) {
  const auto rep = ex::run_check("escape-product", {{"dist", "simple"}, {"x", p["x"]}, {"trials", p["trials"]}});
  const double cf = p["closed_form"], k = p["sigmas"];
  bool ok = true;
  std::string d;
  for (const auto& row : rep["report"]) {
    const double v = row["product"]["estimate"], s = row["product"]["stderr"];
    ok = ok && std::fabs(v - cf) <= k * s;
    d += fmt("x=%lld:%.4f+-%.4f ", row["x"].get<long long>(), v, s);
  }
  return {ok, d + fmt("target=%.2f", cf)};
}

struct HeavyRuns {
  std::vector<ex::SimulateResult> runs;
};

// Criterion 4.
Outcome diameter_exponent(const json& p, const HeavyRuns& h) {
  const double lo = p["fit_window"][0], hi = p["fit_window"][1];
  const double smin = p["slope_range"][0], smax = p["slope_range"][1], sdmax = p["max_seed_sd"];
  std::vector<double> mx, mn;
  bool ok = true;
  std::string d;
  for (const auto& r : h.runs) {
    const auto a = fit_loglog_slope(r.replay.series(false), lo, hi).slope;
    const auto b = fit_loglog_slope(r.replay.series(true), lo, hi).slope;
    mx.push_back(a);
    mn.push_back(b);
    ok = ok && a >= smin && a <= smax && b >= smin && b <= smax;
    d += fmt("(%.3f,%.3f) ", a, b);
  }
  ok = ok && sd(mx) < sdmax && sd(mn) < sdmax;
  return {ok, d + fmt("mean=(%.3f,%.3f) sd=(%.3f,%.3f) range=[%.2f,%.2f] sd<%.2f", mean(mx), mean(mn), sd(mx), sd(mn), smin,
                      smax, sdmax)};
}

// Criterion 5.
Outcome zero_density(const json& p, const HeavyRuns& h) {
  const double smax = p["occupancy_slope_max"], rmax = p["density_ratio_max"];
  bool ok = true;
  std::string d;
  for (const auto& r : h.runs) {
    const auto& prof = r.replay.final_profile;
    const double top = prof.back().first;
    const double slope = fit_loglog_slope(prof, top / 100.0, top).slope;
    const double ratio = r.replay.density_at(r.replay.n) / r.replay.density_at(r.replay.n / 10);
    ok = ok && slope <= smax && ratio < rmax;
    d += fmt("(slope=%.3f ratio=%.3f) ", slope, ratio);
  }
  return {ok, d + fmt("slope<=%.2f ratio<%.2f", smax, rmax)};
}

// Criterion 6.
Outcome positive_density(const json& p) {
  const double alpha = p["alpha"], rc = p["relative_change_max"], agree = p["seed_agreement"];
  const std::uint64_t n = p["particles"];
  std::vector<double> fin;
  bool ok = true;
  std::string d;
  for (const auto& s : p["seeds"]) {
    const auto r = run(alpha, n, s.get<std::uint64_t>());
    const double f = r.replay.density_at(n), half = r.replay.density_at(n / 2);
    const double change = std::fabs(f - half) / half;
    ok = ok && f > 0.0 && f < 1.0 && change <= rc;
    fin.push_back(f);
    d += fmt("(%.4f chg=%.3f) ", f, change);
  }
  const auto [lo, hi] = std::minmax_element(fin.begin(), fin.end());
  const double spread = (*hi - *lo) / mean(fin);
  ok = ok && spread <= agree;
  return {ok, d + fmt("spread=%.3f", spread)};
}

// Criterion 7.
Outcome renewal_contrast(const json& p, const ex::SimulateResult& light, const HeavyRuns& h) {
  const double rmin = p["strong_right_rate_min"];
  const std::uint64_t wmax = p["weak_right_second_half_max"];
  const auto& sr = light.replay.renewal_summary.strong_right_rate;
  bool ok = sr.value > rmin;
  std::string d = fmt("strong_right_rate(3.5)=%.4f weak_right_second_half(2.5)=", sr.value);
  for (const auto& r : h.runs) {
    const auto w = r.replay.renewal_summary.confirmed_second_half[0][0];
    ok = ok && w <= wmax;
    // Diagnostic only: confirmed candidates old enough to have faced 10% of the run.
    std::uint64_t aged = 0;
    for (const auto& c : r.replay.renewal.candidates())
      aged += c.side == RenewalSide::right && c.kind == RenewalKind::weak &&
              c.status == RenewalStatus::confirmed_at_horizon && c.time > r.replay.n / 2 && c.time <= 9 * r.replay.n / 10;
    d += fmt("%llu(before_0.9n=%llu) ", static_cast<unsigned long long>(w), static_cast<unsigned long long>(aged));
  }
  return {ok, d + fmt("rate>%.3f weak<=%llu", rmin, static_cast<unsigned long long>(wmax))};
}

// Criterion 8.
Outcome penetration_tail(const json& p, const ex::SimulateResult& light) {
  const double lo = p["window"][0], hi = p["window"][1], smax = p["slope_max"];
  const auto fit = survival_slope(light.replay.J, lo, hi);
  return {fit.slope <= smax, fmt("slope=%.3f+-%.3f points=%zu bound=%.2f", fit.slope, fit.stderr_, fit.points, smax)};
}

// Criterion 9.
Outcome ladder_overshoot(const json& p) {
  const json base = {{"dist", "zeta"}, {"alpha", p["alpha"]}, {"samples", p["samples"]}, {"y", p["y"]}};
  const auto lad = ex::run_check("ladder-tail", base);
  const auto ov = ex::run_check("overshoot-tail", base);
  const double p1lo = lad["p_minus_one"]["ci95"][0], ls = lad["survival_fit"]["slope"], os = ov["survival_fit"]["slope"];
  const double tv = ov["tv"]["tv"], sig = ov["tv"]["sigma"];
  const double pmin = p["p_minus_one_min"], lmax = p["ladder_slope_max"], omax = p["overshoot_slope_max"],
               slack = p["tv_slack"];
  const bool ok = p1lo > pmin && ls <= lmax && os <= omax && tv <= slack + 3.0 * sig;
  return {ok, fmt("P(L=-1) lo95=%.4f ladder_slope=%.3f overshoot_slope=%.3f tv=%.4f sigma=%.4f", p1lo, ls, os, tv, sig)};
}

// Criterion 10.
Outcome launch_stability(const json& p) {
  const auto sizes = p["sizes"].get<std::vector<std::uint64_t>>();
  const std::size_t launches = p["launches"];
  const double slack = p["tv_slack"];
  bool ok = true;
  std::string d;
  for (const auto& a : p["alphas"]) {
    const auto r = ex::stability_k(make_zeta(a.get<double>()), sizes, launches, 1, slack);
    ok = ok && r["pass"].get<bool>();
    for (const auto& row : r["aggregates"])
      d += fmt("a=%.1f/n=%llu:tv=%.4f(s=%.4f) ", a.get<double>(), row["size"].get<unsigned long long>(), row["tv"].get<double>(),
               row["sigma"].get<double>());
  }
  return {ok, d};
}

// Criterion 11. The seed-1 run is reused for criteria 7 and 8.
Outcome tree_behavior(const json& p, std::optional<ex::SimulateResult>& first) {
  const double alpha = p["alpha"];
  const std::uint64_t n = p["particles"];
  const int gmin = p["degree_growth_min_seeds"], emin = p["two_ends_min_seeds"];
  ex::ReplayOptions ro;
  ro.colors = p["colors"];
  ro.color_seed_time = p["color_seed_time"];
  int grew = 0, two = 0;
  std::string d;
  for (const auto& s : p["seeds"]) {
    auto r = run(alpha, n, s.get<std::uint64_t>(), ro);
    const auto& rp = r.replay;
    grew += rp.max_degree[n] > rp.max_degree[1000];
    const auto first_t = std::max(rp.tree.seed_time() + 1, 3 * n / 4 + 1);
    const auto surv = rp.tree.survivor_count(first_t, n);
    two += surv <= 2;
    d += fmt("(%u->%u,%zu) ", rp.max_degree[1000], rp.max_degree[n], static_cast<std::size_t>(surv));
    if (!first) first.emplace(std::move(r));
  }
  return {grew >= gmin && two >= emin, d + fmt("degree_growth=%d/%zu two_ends=%d/%zu", grew, p["seeds"].size(), two, p["seeds"].size())};
}

// Criterion 12.
Outcome eps_audit(const json& p, const HeavyRuns& h) {
  const double eps = p["eps"], frac = p["n0_max_fraction"];
  bool ok = true;
  std::string d;
  for (const auto& r : h.runs) {
    const auto& a = r.replay.eps_audit;
    ok = ok && r.replay.eps == eps && static_cast<double>(a.n0) <= frac * static_cast<double>(r.replay.n);
    d += fmt("(n0=%llu fail=%llu/%llu) ", static_cast<unsigned long long>(a.n0), static_cast<unsigned long long>(a.failures),
             static_cast<unsigned long long>(a.pairs));
  }
  return {ok, d + fmt("eps=%.2f n0<=%.2f*n", eps, frac)};
}

}  // namespace

int main() {
  const auto cal = ex::load_calibration();
  const json& acc = cal.constants.at("acceptance");
  std::cout << "calibration " << cal.path << " " << cal.hash << std::endl;
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << " [" << fmt("%.1fs", secs) << "] " << o.detail
              << std::endl;
  };

  report(1, "simple-walk-exactness", [&] { return simple_exactness(acc["simple_exactness"]); });
  report(2, "visits-identity", [&] { return visits_identity(acc["visits_identity"]); });
  report(3, "escape-product", [&] { return escape_product(acc["escape_product"]); });

  HeavyRuns heavy;
  const auto t0 = std::chrono::steady_clock::now();
  {
    const json& p = acc["diameter_exponent"];
    ex::ReplayOptions ro;
    ro.eps = acc["eps_density"]["eps"];
    for (const auto& s : p["seeds"]) heavy.runs.push_back(run(p["alpha"], p["particles"], s.get<std::uint64_t>(), ro));
  }
  std::cout << "# grew " << heavy.runs.size() << " zeta(2.5) aggregates in "
            << fmt("%.0fs", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) << std::endl;

  std::optional<ex::SimulateResult> light;
  report(4, "diameter-exponent", [&] { return diameter_exponent(acc["diameter_exponent"], heavy); });
  report(5, "zero-density", [&] { return zero_density(acc["zero_density"], heavy); });
  report(6, "positive-density", [&] { return positive_density(acc["positive_density"]); });
  report(11, "tree-behavior", [&] { return tree_behavior(acc["tree"], light); });
  report(7, "renewal-contrast", [&] { return renewal_contrast(acc["renewal"], light.value(), heavy); });
  report(8, "penetration-tail", [&] { return penetration_tail(acc["penetration"], light.value()); });
  report(9, "ladder-overshoot", [&] { return ladder_overshoot(acc["ladder_overshoot"]); });
  report(10, "launch-stability", [&] { return launch_stability(acc["launch_stability"]); });
  report(12, "eps-density-audit", [&] { return eps_audit(acc["eps_density"], heavy); });

  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " failing criteria" << std::endl;
  return failures ? 1 : 0;
}
