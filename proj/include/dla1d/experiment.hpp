#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dla1d/aggregate.hpp"
#include "dla1d/analysis.hpp"
#include "dla1d/oracle.hpp"
#include "dla1d/renewal.hpp"
#include "dla1d/tree.hpp"

#ifndef DLA1D_VERSION
#define DLA1D_VERSION "0.0.0"
#endif
#ifndef DLA1D_DATA_DIR
#define DLA1D_DATA_DIR "data"
#endif

namespace dla1d::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnknownCheck : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------- environment

inline std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline fs::path output_root() {
  if (const char* e = std::getenv("DLA1D_OUTPUT_ROOT"); e && *e) return e;
  return "runs";
}

inline unsigned thread_count(unsigned requested = 0) {
  if (requested) return requested;
  if (const char* e = std::getenv("DLA1D_THREADS"); e && *e) {
    const long v = std::strtol(e, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline fs::path calibration_path() {
  if (const char* e = std::getenv("DLA1D_CALIBRATION"); e && *e) return e;
  return fs::path(DLA1D_DATA_DIR) / "calibration.json";
}

struct Calibration {
  json constants = json::object();
  std::string hash = "none";
  std::string path;
};

inline Calibration load_calibration(const fs::path& p = calibration_path()) {
  Calibration c;
  c.path = p.string();
  std::ifstream in(p, std::ios::binary);
  if (!in) return c;
  std::ostringstream ss;
  ss << in.rdbuf();
  c.hash = "fnv1a64:" + hex64(fnv1a(ss.str()));
  c.constants = json::parse(ss.str());
  return c;
}

// ---------------------------------------------------------------- distributions

/// Builds a step law from CLI-style parameters: {"dist": "zeta"|"simple"|"pm12"|"table", ...}.
inline StepDistribution dist_from_params(const json& p) {
  const std::string kind = p.value("dist", std::string("zeta"));
  if (kind == "zeta") return make_zeta(p.value("alpha", 2.5), p.value("cutoff", StepDistribution::kDefaultCutoff));
  if (kind == "simple") return make_simple();
  if (kind == "pm12") return make_table({{-2, 0.25}, {-1, 0.25}, {1, 0.25}, {2, 0.25}});
  if (kind == "table") return StepDistribution::from_json({{"kind", "table"}, {"pmf", p.at("pmf")}});
  throw ConfigError("unknown distribution '" + kind + "'");
}

// ---------------------------------------------------------------- run summary

struct ReplayOptions {
  std::vector<std::int64_t> radii = default_radii();
  double eps = 0.3;
  std::uint32_t colors = 3;
  std::uint64_t color_seed_time = 100;
};

/// Everything derived from a record stream. Built by replaying the glue
/// sequence, so a saved records.jsonl reproduces it exactly.
struct Replay {
  std::uint64_t n = 0;
  std::vector<Checkpoint> checkpoints;
  std::vector<Hull> hull;                 // hull[k] after k particles
  std::vector<std::uint32_t> max_degree;  // max tree degree after k particles
  std::vector<std::int64_t> J;
  RenewalTracker renewal;
  RenewalSummary renewal_summary;
  AggregationTree tree;
  EpsDensityAudit::Result eps_audit;
  double eps = 0.3;
  Series final_profile;  // (r, |A ∩ [-r, r]|) on a geometric radius grid
  std::uint64_t restarts = 0;
  std::uint64_t steps = 0;
  std::uint64_t excursions = 0;
  std::uint64_t plus_side = 0;

  double density_at(std::uint64_t k) const {
    const auto d = hull.at(k).max - hull.at(k).min;
    return d > 0 ? static_cast<double>(k) / static_cast<double>(d) : 0.0;
  }

  Series series(bool negative_min) const {
    Series s;
    for (const auto& c : checkpoints) {
      const double v = negative_min ? -static_cast<double>(c.min) : static_cast<double>(c.max);
      if (v > 0.0) s.emplace_back(static_cast<double>(c.n), v);
    }
    return s;
  }
};

inline Replay replay(const std::vector<ParticleRecord>& recs, const ReplayOptions& opt = {}) {
  Replay r;
  r.n = recs.size();
  r.eps = opt.eps;
  OccupancySet occ{0};
  EpsDensityAudit audit(opt.eps);
  const auto grid = checkpoint_grid(std::max<std::uint64_t>(r.n, 1));
  std::size_t gi = 0;
  r.hull.reserve(r.n + 1);
  r.hull.push_back({0, 0});
  r.max_degree.reserve(r.n + 1);
  r.max_degree.push_back(0);
  r.J.reserve(r.n);
  const bool competition = opt.colors > 0 && r.n > opt.color_seed_time && opt.colors <= opt.color_seed_time + 1;
  if (competition && opt.color_seed_time == 0) r.tree.seed_colors(0, opt.colors);
  for (const auto& rec : recs) {
    const Hull before = r.hull.back();
    r.renewal.observe(rec, before);
    r.tree.add_particle_edge(rec);
    if (!occ.insert(rec.glue)) throw std::logic_error("replay: duplicate glue point");
    r.hull.push_back({occ.min(), occ.max()});
    r.max_degree.push_back(r.tree.max_degree());
    r.J.push_back(static_cast<std::int64_t>(rec.J));
    r.restarts += rec.restarts;
    r.steps += rec.steps;
    r.excursions += rec.excursions;
    r.plus_side += rec.side == Side::plus_inf;
    if (competition && rec.index == opt.color_seed_time) r.tree.seed_colors(opt.color_seed_time, opt.colors);
    if (gi < grid.size() && grid[gi] == rec.index) {
      Checkpoint c;
      c.n = rec.index;
      c.min = occ.min();
      c.max = occ.max();
      c.diameter = c.max - c.min;
      c.counts = occupancy_profile(occ, opt.radii);
      r.checkpoints.push_back(std::move(c));
      audit.record(rec.index, occ);
      ++gi;
    }
  }
  r.renewal_summary = r.renewal.summarize(r.n);
  r.eps_audit = audit.result();
  const std::int64_t reach = std::max<std::int64_t>({1, occ.max(), -occ.min()});
  for (std::int64_t rad = 1;; rad = std::max(rad + 1, static_cast<std::int64_t>(std::ceil(static_cast<double>(rad) * 1.2)))) {
    const std::int64_t rr = std::min(rad, reach);
    r.final_profile.emplace_back(static_cast<double>(rr), static_cast<double>(occ.count_in(-rr, rr)));
    if (rr == reach) break;
  }
  return r;
}

template <class F>
json try_fit(F&& f) {
  try {
    return f().to_json();
  } catch (const AnalysisError& e) {
    return {{"error", e.what()}};
  }
}

/// Statistics report shared by `simulate` and `analyze`.
inline json replay_report(const Replay& r) {
  json j;
  j["particles"] = r.n;
  j["hull"] = {{"min", r.hull.back().min}, {"max", r.hull.back().max}};
  j["plus_side_fraction"] = r.n ? static_cast<double>(r.plus_side) / static_cast<double>(r.n) : 0.0;
  j["restart_fraction"] = r.n ? static_cast<double>(r.restarts) / static_cast<double>(r.n) : 0.0;
  j["restart_flag"] = r.n && static_cast<double>(r.restarts) / static_cast<double>(r.n) > 1e-4;
  j["mean_raw_steps"] = r.n ? static_cast<double>(r.steps) / static_cast<double>(r.n) : 0.0;
  j["mean_excursions"] = r.n ? static_cast<double>(r.excursions) / static_cast<double>(r.n) : 0.0;
  j["fits"]["max"] = try_fit([&] { return fit_loglog_slope(r.series(false)); });
  j["fits"]["neg_min"] = try_fit([&] { return fit_loglog_slope(r.series(true)); });
  j["fits"]["occupancy"] = try_fit([&] { return fit_loglog_slope(r.final_profile); });
  if (r.n >= 2) {
    j["density"]["final"] = r.density_at(r.n);
    j["density"]["half"] = r.density_at(r.n / 2);
    j["density"]["tenth"] = r.n >= 10 ? r.density_at(r.n / 10) : 0.0;
    const double h = r.density_at(r.n / 2);
    j["density"]["relative_change"] = h > 0 ? std::fabs(r.density_at(r.n) - h) / h : 0.0;
  }
  json ds = json::array();
  for (const auto& [n, v] : density_series(r.checkpoints)) ds.push_back({n, v});
  j["density"]["series"] = ds;
  j["penetration"]["mean"] = r.n ? std::accumulate(r.J.begin(), r.J.end(), 0.0) / static_cast<double>(r.n) : 0.0;
  j["penetration"]["max"] = r.J.empty() ? 0 : *std::max_element(r.J.begin(), r.J.end());
  if (!r.J.empty()) j["penetration"]["survival_fit"] = try_fit([&] { return survival_slope(r.J, 10, 100); });
  j["renewal"] = r.renewal_summary.to_json();
  j["eps_audit"] = {{"eps", r.eps}, {"n0", r.eps_audit.n0}, {"pairs", r.eps_audit.pairs}, {"failures", r.eps_audit.failures}};
  j["tree"]["max_degree"] = r.tree.max_degree();
  j["tree"]["leaves"] = r.tree.leaf_count();
  if (r.n >= 1000) j["tree"]["max_degree_at_1000"] = r.max_degree[1000];
  if (r.tree.seeded() && r.n >= 4) {
    const std::uint64_t first = std::max(r.tree.seed_time() + 1, 3 * r.n / 4 + 1);
    j["tree"]["competition"] = {{"colors", r.tree.palette()},
                                {"seed_time", r.tree.seed_time()},
                                {"window", {first, r.n}},
                                {"survivors", r.tree.survivor_count(first, r.n)}};
  }
  return j;
}

// ---------------------------------------------------------------- simulate

struct SimulateConfig {
  json dist = {{"dist", "zeta"}, {"alpha", 2.5}};
  std::uint64_t particles = 10000;
  std::uint64_t seed = 1;
  LaunchPolicy policy;
  ReplayOptions replay;
};

inline json record_json(const ParticleRecord& r) {
  return {{"i", r.index},           {"side", to_string(r.side)}, {"glue", r.glue},       {"attach", r.attach},
          {"path_min", r.path_min}, {"path_max", r.path_max},    {"J", r.J},             {"steps", r.steps},
          {"excursions", r.excursions}, {"restarts", r.restarts}, {"launch_start", r.launch_start}};
}

inline ParticleRecord record_from_json(const json& j) {
  ParticleRecord r;
  r.index = j.at("i").get<std::uint64_t>();
  r.side = j.at("side").get<std::string>() == "+inf" ? Side::plus_inf : Side::minus_inf;
  r.glue = j.at("glue");
  r.attach = j.at("attach");
  r.path_min = j.at("path_min");
  r.path_max = j.value("path_max", r.glue);
  r.J = j.value("J", std::uint64_t{0});
  r.steps = j.value("steps", std::uint64_t{0});
  r.excursions = j.value("excursions", std::uint64_t{0});
  r.restarts = j.value("restarts", std::uint64_t{0});
  r.launch_start = j.value("launch_start", std::int64_t{0});
  return r;
}

struct SimulateResult {
  Process process;
  Replay replay;
  json manifest;
  json report;
};

inline void validate(const SimulateConfig& c, const StepDistribution& d, json& warnings) {
  if (c.particles < 1) throw ConfigError("particle count must be >= 1");
  c.policy.validate();
  if (d.kind() == StepKind::zeta && d.alpha() <= 2.0)
    warnings.push_back("alpha <= 2 lies outside the regime covered by the shipped claims");
  for (const auto& w : d.warnings()) warnings.push_back(w);
}

inline SimulateResult simulate(const SimulateConfig& c) {
  const StepDistribution d = dist_from_params(c.dist);
  json warnings = json::array();
  validate(c, d, warnings);
  const Calibration cal = load_calibration();
  const std::string started = iso_now();
  Process p(d, c.seed, c.policy);
  grow(p, c.particles);
  Replay rp = replay(p.records(), c.replay);
  json m;
  m["version"] = DLA1D_VERSION;
  m["distribution"] = d.to_json();
  m["particles"] = c.particles;
  m["seed"] = c.seed;
  m["policy"] = c.policy.to_json();
  m["checkpoints"] = checkpoint_grid(c.particles);
  m["radii"] = c.replay.radii;
  m["eps"] = c.replay.eps;
  m["competition"] = {{"colors", c.replay.colors}, {"seed_time", c.replay.color_seed_time}};
  m["started"] = started;
  m["finished"] = iso_now();
  m["restart_fraction"] = static_cast<double>(p.total_restarts()) / static_cast<double>(c.particles);
  m["calibration"] = {{"path", cal.path}, {"hash", cal.hash}};
  m["warnings"] = warnings;
  json report = replay_report(rp);
  return {std::move(p), std::move(rp), std::move(m), std::move(report)};
}

inline void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

inline void write_run(const fs::path& dir, const SimulateResult& r) {
  fs::create_directories(dir);
  write_text(dir / "manifest.json", r.manifest.dump(2) + "\n");
  write_text(dir / "report.json", r.report.dump(2) + "\n");
  {
    std::ofstream out(dir / "records.jsonl", std::ios::binary);
    for (const auto& rec : r.process.records()) out << record_json(rec).dump() << '\n';
  }
  {
    std::ofstream out(dir / "series.csv", std::ios::binary);
    out << "n,min,max,D_n";
    for (auto rad : r.manifest["radii"]) out << ",count_r" << rad.get<std::int64_t>();
    out << '\n';
    for (const auto& c : r.replay.checkpoints) {
      out << c.n << ',' << c.min << ',' << c.max << ',' << c.diameter;
      for (auto v : c.counts) out << ',' << v;
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "renewal.csv", std::ios::binary);
    out << "time,position,side,kind,status,violated_by\n";
    for (const auto& c : r.replay.renewal.candidates()) {
      out << c.time << ',' << c.position << ',' << to_string(c.side) << ',' << to_string(c.kind) << ','
          << to_string(c.status) << ',';
      if (c.violated_by) out << *c.violated_by;
      out << '\n';
    }
  }
  write_text(dir / "renewal_summary.json", r.replay.renewal_summary.to_json().dump(2) + "\n");
  {
    std::ofstream out(dir / "tree.csv", std::ios::binary);
    out << "particle,attach,glue,color\n";
    for (const auto& e : r.replay.tree.edges()) {
      out << e.particle << ',' << e.attach << ',' << e.glue << ',';
      if (auto col = r.replay.tree.color(e.glue)) out << *col;
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "degrees.csv", std::ios::binary);
    out << "position,degree\n";
    for (const auto& [x, d] : r.replay.tree.degrees()) out << x << ',' << d << '\n';
  }
}

inline std::vector<ParticleRecord> read_records(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::vector<ParticleRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(record_from_json(json::parse(line)));
  return out;
}

// ---------------------------------------------------------------- sweep

struct SweepConfig {
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  std::uint64_t particles = 10000;
  unsigned threads = 0;
  LaunchPolicy policy;
};

inline json summary_row(double alpha, const std::vector<json>& rows) {
  RunningStats smax, smin, dens;
  for (const auto& r : rows) {
    if (r["fits"]["max"].contains("slope")) smax.add(r["fits"]["max"]["slope"].get<double>());
    if (r["fits"]["neg_min"].contains("slope")) smin.add(r["fits"]["neg_min"]["slope"].get<double>());
    if (r.contains("density")) dens.add(r["density"]["final"].get<double>());
  }
  auto stat = [](const RunningStats& s) { return json{{"mean", s.mean()}, {"sd", s.stddev()}, {"count", s.count()}}; };
  return {{"alpha", alpha}, {"replicas", rows.size()}, {"max_slope", stat(smax)}, {"neg_min_slope", stat(smin)},
          {"final_density", stat(dens)}, {"beta", alpha > 2.0 && alpha < 3.0 ? json(2.0 / (alpha - 1.0)) : json(nullptr)}};
}

/// Independent replicas on a thread pool; each replica owns its process and
/// seed stream, and rows are merged after all workers finish.
inline json run_sweep(const SweepConfig& c) {
  if (c.alphas.empty()) throw ConfigError("sweep needs at least one alpha");
  if (c.seeds.size() < 2) throw ConfigError("sweep needs at least two seeds per alpha");
  struct Job {
    double alpha;
    std::uint64_t seed;
    json row;
    std::string error;
  };
  std::vector<Job> jobs;
  for (double a : c.alphas)
    for (auto s : c.seeds) jobs.push_back({a, s, json(), ""});
  for (double a : c.alphas) HalfLineExit::for_distribution(make_zeta(a));  // build tables once, up front
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      auto& job = jobs[i];
      try {
        SimulateConfig sc;
        sc.dist = {{"dist", "zeta"}, {"alpha", job.alpha}};
        sc.particles = c.particles;
        sc.seed = job.seed;
        sc.policy = c.policy;
        auto res = simulate(sc);
        job.row = std::move(res.report);
        job.row.erase("density");
        job.row["density"] = {{"final", res.replay.density_at(c.particles)}};
        job.row["alpha"] = job.alpha;
        job.row["seed"] = job.seed;
      } catch (const std::exception& e) {
        job.error = e.what();
      }
    }
  };
  const unsigned nt = std::min<unsigned>(thread_count(c.threads), static_cast<unsigned>(jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  json out;
  out["particles"] = c.particles;
  out["replicas"] = json::array();
  out["failures"] = json::array();
  out["summary"] = json::array();
  for (double a : c.alphas) {
    std::vector<json> rows;
    for (const auto& j : jobs) {
      if (j.alpha != a) continue;
      if (!j.error.empty()) {
        out["failures"].push_back({{"alpha", j.alpha}, {"seed", j.seed}, {"error", j.error}});
        continue;
      }
      json row = {{"alpha", j.alpha}, {"seed", j.seed}, {"fits", j.row["fits"]}, {"density", j.row["density"]},
                  {"restart_fraction", j.row["restart_fraction"]}, {"eps_audit", j.row["eps_audit"]}};
      out["replicas"].push_back(row);
      rows.push_back(row);
    }
    out["summary"].push_back(summary_row(a, rows));
  }
  return out;
}

// ---------------------------------------------------------------- checks

inline oracle::PointSet point_set(const json& j, std::initializer_list<std::int64_t> def) {
  oracle::PointSet s(def);
  if (!j.is_null()) s = j.get<std::set<std::int64_t>>();
  return s;
}

inline json with_default_dist(const json& params, const char* dist) {
  json p = params;
  if (!p.contains("dist")) p["dist"] = dist;
  return p;
}

inline bool within(double est, double se, double target, double k = 3.0) {
  return std::fabs(est - target) <= k * se + 1e-12;
}

/// Glue samples for one launch policy against a frozen aggregate.
template <class Gen>
std::vector<std::int64_t> glue_samples(const OccupancySet& occ, const StepDistribution& d, const LaunchPolicy& pol,
                                       std::size_t count, Gen& g) {
  std::vector<std::int64_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(launch_from_infinity(occ, Side::plus_inf, d, pol, g).glue);
  return out;
}

/// Doubling-K stability of the glue law on aggregates grown to each size.
inline json stability_k(const StepDistribution& d, const std::vector<std::uint64_t>& sizes, std::size_t launches,
                        std::uint64_t seed, double slack) {
  json out = json::array();
  bool all = true;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Process p(d, derive_seed(seed, 100 + i));
    grow(p, sizes[i]);
    LaunchPolicy k1, k2;
    k2.offset_scale = 2 * k1.offset_scale;
    k2.offset_const = 2 * k1.offset_const;
    Rng g1 = make_rng(seed, 200 + 2 * i), g2 = make_rng(seed, 201 + 2 * i);
    const auto a = glue_samples(p.occupancy(), d, k1, launches, g1);
    const auto b = glue_samples(p.occupancy(), d, k2, launches, g2);
    const auto tv = total_variation(a, b, 0.02, 64, derive_seed(seed, 300 + i));
    const bool pass = tv.tv <= slack + 3.0 * tv.sigma;
    all = all && pass;
    out.push_back({{"size", sizes[i]},
                   {"K", k1.offset(p.hull().max - p.hull().min)},
                   {"tv", tv.tv},
                   {"sigma", tv.sigma},
                   {"null_mean", tv.null_mean},
                   {"bins", tv.bins},
                   {"pass", pass}});
  }
  return {{"aggregates", out}, {"pass", all}};
}

inline json run_check(const std::string& name, const json& raw_params) {
  const json params = raw_params.is_null() ? json::object() : raw_params;
  if (!params.is_object()) throw ConfigError("check parameters must be a JSON object");
  const std::uint64_t seed = params.value("seed", std::uint64_t{1});
  Rng g = make_rng(seed, 0);
  const Calibration cal = load_calibration();
  json rep;
  rep["check"] = name;
  rep["inputs"] = params;
  if (name == "visits-identity") {
    const json p = with_default_dist(params, "simple");
    const auto d = dist_from_params(p);
    const auto a = point_set(params.value("A", json()), {0});
    const std::int64_t z = params.value("z", 5), y = params.value("y", 100);
    const auto r = oracle::visits_identity(a, z, y, d, params.value("trials", std::uint64_t{100000}), g);
    rep["report"] = r.to_json();
    bool pass = std::fabs(r.z_score) < 3.0;
    if (d.kind() == StepKind::simple && a == oracle::PointSet{0} && z > 0 && y >= z) {
      const double cf = 2.0 * static_cast<double>(z);  // P_y(T_z < T_0) = 1, P_z(T_0 < T_z^+) = 1/(2z)
      rep["closed_form"] = cf;
      pass = pass && within(r.lhs.value, r.lhs.stderr_, cf) && within(r.rhs.value, r.rhs.stderr_, cf);
    }
    rep["verdict"] = pass ? "pass" : "fail";
  } else if (name == "escape-product") {
    const json p = with_default_dist(params, "simple");
    const auto d = dist_from_params(p);
    const auto a = point_set(params.value("A", json()), {0});
    const auto xs = params.value("x", std::vector<std::int64_t>{1, 10, 100});
    const std::uint64_t trials = params.value("trials", std::uint64_t{100000});
    std::optional<std::pair<double, double>> band;
    if (d.kind() == StepKind::zeta) {
      const auto& b = cal.constants["oracle"]["escape_band"];
      if (b.is_array()) band = std::make_pair(b[0].get<double>(), b[1].get<double>());
    }
    bool pass = true;
    json rows = json::array();
    for (auto x : xs) {
      auto r = oracle::escape_product(a, x, d, trials, g, band);
      if (d.kind() == StepKind::simple && a == oracle::PointSet{0}) {
        r.closed_form = 0.5;
        pass = pass && within(r.product.value, r.product.stderr_, 0.5);
      }
      pass = pass && r.in_band;
      json row = r.to_json();
      row["x"] = x;
      rows.push_back(row);
    }
    rep["report"] = rows;
    rep["verdict"] = pass ? "pass" : "fail";
  } else if (name == "hit-distribution") {
    const json p = with_default_dist(params, "pm12");
    const auto d = dist_from_params(p);
    const auto a = point_set(params.value("A", json()), {0, 5});
    const std::string side = params.value("side", std::string("+inf"));
    const auto start = side == "-inf" ? oracle::Start(Side::minus_inf) : oracle::Start(Side::plus_inf);
    const auto h = oracle::mc_hit_distribution(a, start, d, params.value("trials", std::uint64_t{1000000}), g);
    rep["report"] = h.to_json();
    bool pass = true;
    if (d.bounded()) {
      LaunchPolicy pol;
      const std::int64_t k = pol.offset(*a.rbegin() - *a.begin());
      const auto ex = oracle::exact_hit_distribution(a, side == "-inf" ? *a.begin() - k : *a.rbegin() + k, d);
      json exact;
      for (const auto& [x, v] : ex.attach) {
        exact[std::to_string(x)] = v;
        const auto pr = h.attach_probability(x);
        pass = pass && within(pr.value, std::max(pr.stderr_, 1e-9), v, 4.0);
      }
      rep["exact_attach"] = exact;
    }
    rep["verdict"] = pass ? "pass" : "fail";
  } else if (name == "avoid-set") {
    const json p = with_default_dist(params, "pm12");
    const auto d = dist_from_params(p);
    const std::uint64_t trials = params.value("trials", std::uint64_t{200000});
    if (d.kind() == StepKind::zeta) {
      const auto a0 = point_set(params.value("A", json()), {0, 10, 20, 30, 40});
      const auto b0 = point_set(params.value("B", json()), {100, 110, 120, 130, 140});
      json rows = json::array();
      double lo = 1e300, hi = 0.0;
      for (std::int64_t f : {1, 2, 4}) {
        oracle::PointSet a, b;
        for (auto x : a0) a.insert(f * x);
        for (auto x : b0) b.insert(f * x);
        const auto r = oracle::avoid_set_prob(a, b, Side::plus_inf, d, trials, g);
        json row = r.to_json();
        row["dilation"] = f;
        rows.push_back(row);
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
      }
      rep["report"] = rows;
      rep["ratio_spread"] = lo > 0 ? hi / lo : 0.0;
      rep["verdict"] = lo > 0 && hi / lo <= 3.0 ? "pass" : "fail";
    } else {
      const auto a = point_set(params.value("A", json()), {0});
      const auto b = point_set(params.value("B", json()), {10});
      const auto r = oracle::avoid_set_prob(a, b, Side::plus_inf, d, trials, g);
      rep["report"] = r.to_json();
      const bool nn = d.kind() == StepKind::simple;
      rep["verdict"] = (nn ? r.hits_a.value == 0.0 : r.hits_a.lo95() > 0.0) ? "pass" : "fail";
    }
  } else if (name == "overshoot-tail") {
    const auto d = dist_from_params(params);
    const std::int64_t y = params.value("y", 10000);
    const std::size_t n = params.value("samples", std::size_t{100000});
    std::vector<std::int64_t> z1, z2;
    for (std::size_t i = 0; i < n; ++i) z1.push_back(sample_overshoot(d, y, g));
    for (std::size_t i = 0; i < n; ++i) z2.push_back(sample_overshoot(d, 2 * y, g));
    const double alpha = d.alpha();
    const auto fit = survival_slope(z1, 10, 1000);
    const auto tv = total_variation(z1, z2, 0.02, 64, derive_seed(seed, 9));
    rep["survival_fit"] = fit.to_json();
    rep["slope_bound"] = 2.0 - alpha + 0.3;
    rep["tv"] = {{"tv", tv.tv}, {"sigma", tv.sigma}, {"null_mean", tv.null_mean}, {"bins", tv.bins}};
    rep["verdict"] = fit.slope <= 2.0 - alpha + 0.3 && tv.tv <= 0.02 + 3 * tv.sigma ? "pass" : "fail";
  } else if (name == "ladder-tail") {
    const auto d = dist_from_params(params);
    const std::size_t n = params.value("samples", std::size_t{100000});
    const auto ls = ladder_steps(d, g, n);
    std::vector<std::int64_t> mag;
    std::uint64_t ones = 0;
    for (auto v : ls.values) {
      mag.push_back(-v);
      ones += v == -1;
    }
    const auto p1 = proportion(ones, n);
    const auto fit = survival_slope(mag, 10, 1000);
    rep["p_minus_one"] = {{"p", p1.value}, {"ci95", {p1.lo95(), p1.hi95()}}};
    rep["p_minus_one_exact"] = HalfLineExit::for_distribution(d)->ladder_pmf(1);
    rep["survival_fit"] = fit.to_json();
    rep["verdict"] = p1.lo95() > 0.05 && fit.slope <= -1.2 ? "pass" : "fail";
  } else if (name == "stability-K") {
    const auto d = dist_from_params(params);
    const auto sizes = params.value("sizes", std::vector<std::uint64_t>{10, 100, 1000});
    rep["report"] = stability_k(d, sizes, params.value("launches", std::size_t{100000}), seed, 0.02);
    rep["verdict"] = rep["report"]["pass"].get<bool>() ? "pass" : "fail";
  } else {
    throw UnknownCheck("unknown check '" + name + "'");
  }
  rep["calibration_hash"] = cal.hash;
  return rep;
}

/// Oracle regression constants, recomputed by `dla1d calibrate`.
inline json calibrate_oracle(std::uint64_t seed) {
  json out;
  Rng g = make_rng(seed, 77);
  const auto pm12 = make_table({{-2, 0.25}, {-1, 0.25}, {1, 0.25}, {2, 0.25}});
  {
    const oracle::PointSet a{0, 5};
    const auto h = oracle::mc_hit_distribution(a, Side::plus_inf, pm12, 1000000, g);
    const auto ex = oracle::exact_hit_distribution(a, 5 + LaunchPolicy{}.offset(5), pm12);
    for (auto x : a) {
      const auto p = h.attach_probability(x);
      out["hit_pm12_0_5"][std::to_string(x)] = {{"mc", p.value}, {"ci95", {p.lo95(), p.hi95()}}, {"exact", ex.attach.at(x)}};
    }
  }
  {
    const auto r = oracle::avoid_set_prob({0}, {10}, Side::plus_inf, pm12, 1000000, g);
    out["avoid_pm12_0_10"] = {{"hits_a", r.hits_a.value}, {"ci95", {r.hits_a.lo95(), r.hits_a.hi95()}}};
  }
  {
    const auto z = make_zeta(2.5);
    double lo = 1e300, hi = 0.0;
    json pilot = json::array();
    for (std::int64_t x : {10, 100, 1000}) {
      const auto r = oracle::escape_product({0}, x, z, 100000, g);
      pilot.push_back({{"x", x}, {"product", r.product.value}, {"stderr", r.product.stderr_}});
      lo = std::min(lo, r.product.lo95());
      hi = std::max(hi, r.product.hi95());
    }
    out["escape_pilot_zeta2.5"] = pilot;
    // Band: the pilot range widened by a factor 2 on each side.
    out["escape_band"] = {lo / 2.0, 2.0 * hi};
  }
  {
    const auto z = make_zeta(2.5);
    const auto ls = ladder_steps(z, g, 100000);
    std::uint64_t ones = 0;
    for (auto v : ls.values) ones += v == -1;
    const auto p = proportion(ones, ls.values.size());
    out["ladder_p1_zeta2.5"] = {{"mc", p.value}, {"ci95", {p.lo95(), p.hi95()}},
                                {"tables", HalfLineExit::for_distribution(z)->ladder_pmf(1)}};
  }
  return out;
}

}  // namespace dla1d::experiment
