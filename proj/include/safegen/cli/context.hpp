#pragma once

// State shared by every subcommand: effective config, output directory and
// the manifest being assembled.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "safegen/cli/csv.hpp"
#include "safegen/cli/seeds.hpp"
#include "safegen/parallel.hpp"
#include "safegen/sysgen.hpp"

namespace safegen::cli {

inline constexpr const char* kToolVersion = "1.0.0";

struct CellRecord {
  std::string id;
  std::uint64_t seed = 0;
  std::string status = "ok";
  double seconds = 0.0;
};

struct RunContext {
  std::string command;
  std::vector<std::string> argv;
  std::string preset;
  Config cfg;
  std::string out_dir;
  bool json = false;
  int jobs = 1;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  std::vector<CellRecord> cells;
  std::vector<std::string> outputs;

  std::uint64_t master_seed() const {
    const long s = cfg.integer("run", "seed", 0);
    if (s < 0) throw ConfigError("[run] seed must be non-negative");
    return static_cast<std::uint64_t>(s);
  }

  std::string path(const std::string& name) const { return (std::filesystem::path(out_dir) / name).string(); }

  void write_text(const std::string& name, const std::string& content) {
    write_file(path(name), content);
    outputs.push_back(name);
  }

  void write_csv(const std::string& name, const CsvTable& t) {
    write_text(name, t.text());
    if (json) write_text(name.substr(0, name.rfind('.')) + ".json", t.to_json().dump(2) + "\n");
  }
};

inline nlohmann::json manifest_json(const RunContext& ctx, double wall_seconds) {
  nlohmann::json m;
  m["tool"] = "safegen";
  m["version"] = kToolVersion;
  m["command"] = ctx.command;
  m["argv"] = ctx.argv;
  m["preset"] = ctx.preset;
  m["config"] = ctx.cfg.text();
  m["master_seed"] = ctx.master_seed();
  m["json"] = ctx.json;
  m["jobs"] = ctx.jobs;
  // Training and synthesis are single-threaded per cell and cells are emitted
  // in sorted order, so outputs do not depend on the worker count.
  m["bitwise_deterministic"] = true;
  m["wall_clock_seconds"] = wall_seconds;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["finished_at"] = stamp;
  nlohmann::json cells = nlohmann::json::array();
  for (const CellRecord& c : ctx.cells)
    cells.push_back({{"id", c.id}, {"seed", c.seed}, {"status", c.status}, {"seconds", c.seconds}});
  m["cells"] = cells;
  m["outputs"] = ctx.outputs;
  return m;
}

inline const std::set<std::string> kSystemKeys = {"system", "dim",   "a",     "b",     "d",        "r",    "A", "B",
                                                  "D",      "R",     "normA", "normB", "normD",    "normRinv",
                                                  "alpha"};

inline Matrix parse_square(const Config& cfg, const std::string& section, const std::string& key, int dim) {
  const std::vector<double> v = cfg.nums(section, key);
  if (static_cast<int>(v.size()) != dim * dim)
    throw ConfigError(cfg.entry(section, key).origin + ": [" + section + "] " + key + ": expected " +
                      std::to_string(dim * dim) + " row-major entries, got " + std::to_string(v.size()));
  return unflatten_row_major(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())), dim, dim);
}

/// System described by the `system` key of `section`:
///   scalar         a, b, d, r
///   matrices       dim, A, B, D, R (row-major lists)
///   commuting      dim, normA, normB, normD, normRinv, alpha
///   unconstrained  dim, normA, normB, normRinv
///   lq             dim
/// Random kinds draw from a stream derived from the master seed.
inline LinearSystem build_system(const Config& cfg, const std::string& section, std::uint64_t master) {
  const std::string kind = cfg.str(section, "system");
  Rng rng(derive_seed(master, {hash_label("system")}));
  auto dim = [&] {
    const long d = cfg.integer(section, "dim");
    if (d < 1 || d > 64) throw ConfigError("[" + section + "] dim must be in 1..64");
    return static_cast<int>(d);
  };
  try {
    if (kind == "scalar")
      return LinearSystem::scalar(cfg.num(section, "a"), cfg.num(section, "b"), cfg.num(section, "d"),
                                  cfg.num(section, "r"));
    if (kind == "matrices") {
      const int n = dim();
      return LinearSystem(parse_square(cfg, section, "A", n), parse_square(cfg, section, "B", n),
                          parse_square(cfg, section, "D", n), parse_square(cfg, section, "R", n));
    }
    if (kind == "commuting")
      return gen_system_commuting(dim(), cfg.num(section, "normA"), cfg.num(section, "normB"),
                                  cfg.num(section, "normD"), cfg.num(section, "normRinv"), cfg.num(section, "alpha"),
                                  rng);
    if (kind == "unconstrained")
      return gen_system_unconstrained(dim(), cfg.num(section, "normA"), cfg.num(section, "normB"),
                                      cfg.num(section, "normRinv"), rng);
    if (kind == "lq") return gen_system_lq_experiments(dim(), rng);
  } catch (const InvalidInput& e) {
    throw ConfigError("[" + section + "] system: " + e.what());
  } catch (const GenerationError& e) {
    throw ConfigError("[" + section + "] system: " + e.what());
  }
  throw ConfigError(cfg.entry(section, "system").origin + ": [" + section + "] system: unknown kind '" + kind +
                    "' (scalar, matrices, commuting, unconstrained, lq)");
}

struct Stats {
  double mean = std::nan(""), stddev = std::nan("");
  int n = 0;
};

/// Mean and sample standard deviation (0 for a single value); non-finite
/// values are skipped.
inline Stats stats(const std::vector<double>& v) {
  Stats s;
  double sum = 0.0;
  for (double x : v)
    if (std::isfinite(x)) sum += x, ++s.n;
  if (s.n == 0) return s;
  s.mean = sum / s.n;
  double ss = 0.0;
  for (double x : v)
    if (std::isfinite(x)) ss += (x - s.mean) * (x - s.mean);
  s.stddev = s.n > 1 ? std::sqrt(ss / (s.n - 1)) : 0.0;
  return s;
}

}  // namespace safegen::cli
