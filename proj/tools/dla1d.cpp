#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dla1d/dla1d.hpp"

namespace ex = dla1d::experiment;
using nlohmann::json;

namespace {

int fail(const std::string& kind, const std::string& message, int code = 2) {
  std::cout << json{{"error", {{"type", kind}, {"message", message}}}}.dump() << std::endl;
  return code;
}

json dist_params(const std::string& dist, double alpha, std::int64_t cutoff) {
  json p = {{"dist", dist}};
  if (dist == "zeta") {
    p["alpha"] = alpha;
    p["cutoff"] = cutoff;
  }
  return p;
}

void add_policy_flags(CLI::App* app, dla1d::LaunchPolicy& pol, bool& raw, bool& stationary) {
  app->add_option("--offset-scale", pol.offset_scale, "K = scale*(diam+1) + const");
  app->add_option("--offset-const", pol.offset_const, "K = scale*(diam+1) + const");
  app->add_option("--budget", pol.step_budget, "step budget per attempt");
  app->add_flag("--raw", raw, "step every jump instead of resolving excursions");
  app->add_flag("--stationary", stationary, "launch from the stationary entry law");
}

void finish_policy(dla1d::LaunchPolicy& pol, bool raw, bool stationary) {
  pol.mode = raw ? dla1d::WalkMode::raw : dla1d::WalkMode::exact;
  pol.stationary = stationary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-dimensional long-range DLA simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DLA1D_VERSION);

  // simulate
  auto* sim = app.add_subcommand("simulate", "grow one aggregate and write a run directory");
  std::string dist = "zeta", out_dir;
  double alpha = 2.5;
  std::int64_t cutoff = dla1d::StepDistribution::kDefaultCutoff;
  std::uint64_t particles = 10000, seed = 1;
  dla1d::LaunchPolicy pol;
  bool raw = false, stationary = false;
  ex::ReplayOptions ropt;
  sim->add_option("--dist", dist, "zeta | simple | pm12")->check(CLI::IsMember({"zeta", "simple", "pm12"}));
  sim->add_option("--alpha", alpha, "tail index");
  sim->add_option("--cutoff", cutoff, "alias table cutoff");
  sim->add_option("--particles", particles, "particle count");
  sim->add_option("--seed", seed, "seed");
  sim->add_option("--out", out_dir, "run directory (default $DLA1D_OUTPUT_ROOT/<dist>-<seed>)");
  sim->add_option("--colors", ropt.colors, "competition palette size (0 disables)");
  sim->add_option("--color-seed-time", ropt.color_seed_time, "particle count at which colours are seeded");
  sim->add_option("--eps", ropt.eps, "eps for the density audit");
  add_policy_flags(sim, pol, raw, stationary);

  // sweep
  auto* sw = app.add_subcommand("sweep", "replicas over alphas and seeds");
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  unsigned threads = 0;
  std::string sweep_out;
  sw->add_option("--alphas", alphas, "tail indices")->required()->delimiter(',');
  sw->add_option("--seeds", seeds, "seeds")->delimiter(',');
  sw->add_option("--particles", particles, "particles per replica");
  sw->add_option("--threads", threads, "worker threads (default $DLA1D_THREADS or cores)");
  sw->add_option("--out", sweep_out, "write the report here as well as to stdout");
  add_policy_flags(sw, pol, raw, stationary);

  // check
  auto* chk = app.add_subcommand("check", "run one oracle check");
  std::string check_name, check_params = "{}";
  std::uint64_t trials = 0;
  chk->add_option("name", check_name, "visits-identity | escape-product | hit-distribution | avoid-set | "
                                      "overshoot-tail | ladder-tail | stability-K")
      ->required();
  chk->add_option("--dist", dist, "zeta | simple | pm12");
  chk->add_option("--alpha", alpha, "tail index");
  chk->add_option("--trials", trials, "trial count");
  chk->add_option("--seed", seed, "seed");
  chk->add_option("--params", check_params, "extra parameters as a JSON object");

  // analyze
  auto* an = app.add_subcommand("analyze", "recompute statistics from a run directory");
  std::string run_dir, svg;
  an->add_option("dir", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  an->add_option("--svg", svg, "write a log-log plot of max A_n, -min A_n and D_n");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "recompute oracle regression constants");
  std::string cal_out;
  cal->add_option("--out", cal_out, "calibration file to update (default: the active one)");
  cal->add_option("--seed", seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("UsageError", e.what());
  }

  try {
    if (*sim) {
      finish_policy(pol, raw, stationary);
      ex::SimulateConfig c;
      c.dist = dist_params(dist, alpha, cutoff);
      c.particles = particles;
      c.seed = seed;
      c.policy = pol;
      c.replay = ropt;
      const auto res = ex::simulate(c);
      const ex::fs::path dir = out_dir.empty() ? ex::output_root() / (dist + "-" + std::to_string(seed)) : ex::fs::path(out_dir);
      ex::write_run(dir, res);
      std::cout << json{{"run_dir", dir.string()}, {"report", res.report}}.dump(2) << std::endl;
      for (const auto& w : res.manifest["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    } else if (*sw) {
      finish_policy(pol, raw, stationary);
      ex::SweepConfig c;
      c.alphas = alphas;
      c.seeds = seeds;
      c.particles = particles;
      c.threads = threads;
      c.policy = pol;
      const json rep = ex::run_sweep(c);
      if (!sweep_out.empty()) ex::write_text(sweep_out, rep.dump(2) + "\n");
      std::cout << rep.dump(2) << std::endl;
      if (!rep["failures"].empty()) return 1;
    } else if (*chk) {
      json p = json::parse(check_params);
      if (!p.is_object()) return fail("ConfigError", "--params must be a JSON object");
      if (chk->count("--dist")) p["dist"] = dist;
      if (chk->count("--alpha")) p["alpha"] = alpha;
      if (trials) {
        p["trials"] = trials;
        p["samples"] = trials;
        p["launches"] = trials;
      }
      p["seed"] = seed;
      const json rep = ex::run_check(check_name, p);
      std::cout << rep.dump(2) << std::endl;
      return rep["verdict"] == "pass" ? 0 : 1;
    } else if (*an) {
      const ex::fs::path dir = run_dir;
      json manifest;
      if (std::ifstream mf(dir / "manifest.json"); mf) manifest = json::parse(mf);
      ex::ReplayOptions o;
      if (manifest.contains("radii")) o.radii = manifest["radii"].get<std::vector<std::int64_t>>();
      if (manifest.contains("eps")) o.eps = manifest["eps"].get<double>();
      if (manifest.contains("competition")) {
        o.colors = manifest["competition"]["colors"];
        o.color_seed_time = manifest["competition"]["seed_time"];
      }
      const auto rp = ex::replay(ex::read_records(dir / "records.jsonl"), o);
      const json rep = ex::replay_report(rp);
      if (!svg.empty()) {
        dla1d::Series d;
        for (const auto& c : rp.checkpoints)
          if (c.diameter > 0) d.emplace_back(static_cast<double>(c.n), static_cast<double>(c.diameter));
        ex::write_text(svg, dla1d::loglog_svg({{"max A_n", rp.series(false)}, {"-min A_n", rp.series(true)}, {"D_n", d}},
                                              "hull growth"));
      }
      std::cout << rep.dump(2) << std::endl;
    } else if (*cal) {
      const auto path = cal_out.empty() ? ex::calibration_path() : ex::fs::path(cal_out);
      json constants = ex::load_calibration(path).constants;
      constants["oracle"] = ex::calibrate_oracle(seed);
      ex::write_text(path, constants.dump(2) + "\n");
      std::cout << constants["oracle"].dump(2) << std::endl;
    }
  } catch (const ex::UnknownCheck& e) {
    return fail("UnknownCheck", e.what());
  } catch (const ex::ConfigError& e) {
    return fail("ConfigError", e.what());
  } catch (const json::exception& e) {
    return fail("ConfigError", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("InvalidArgument", e.what());
  } catch (const std::exception& e) {
    return fail("RuntimeError", e.what(), 1);
  }
  return 0;
}
