#pragma once

// Entry point shared by the executable and the tests.

#include <CLI11.hpp>

#include "safegen/cli/check.hpp"
#include "safegen/cli/figure1.hpp"
#include "safegen/cli/presets.hpp"
#include "safegen/cli/selftest.hpp"
#include "safegen/cli/synth.hpp"
#include "safegen/cli/table1.hpp"

namespace safegen::cli {

inline int dispatch(RunContext& ctx) {
  if (ctx.command == "synth") return run_synth(ctx);
  if (ctx.command == "figure1") return run_figure1(ctx);
  if (ctx.command == "table1") return run_table1(ctx);
  if (ctx.command == "check") return run_check(ctx);
  if (ctx.command == "selftest") return run_selftest(ctx);
  throw ConfigError("unknown command " + ctx.command);
}

/// Runs the command and writes manifest.json and effective.cfg next to its
/// outputs. Configuration errors give exit code 2.
inline int execute(RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    std::filesystem::create_directories(ctx.out_dir);
    code = dispatch(ctx);
  } catch (const ConfigError& e) {
    *ctx.err << "safegen " << ctx.command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    *ctx.err << "safegen " << ctx.command << ": " << e.what() << "\n";
    code = 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(ctx.path("effective.cfg"), ctx.cfg.text());
  write_file(ctx.path("manifest.json"), manifest_json(ctx, wall).dump(2) + "\n");
  return code;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"safegen: LQR and H-infinity controller synthesis, Lipschitz separation and imitation experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<long> seed;
  std::vector<std::string> sets;
  bool json = false, desk = false, paper = false;
  int jobs = 1;
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"synth", "LQR and H-infinity gains for one system and a task list"},
      {"figure1", "Lipschitz ratio sweep over system norms"},
      {"table1", "imitation experiments with safe and unsafe teachers"},
      {"check", "report assumption checks and bound constants for one system"},
      {"selftest", "quick numerical self-checks"}};
  for (const auto& [name, help] : commands) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "key = value config file with [section]s");
    s->add_option("--seed", seed, "master seed (overrides [run] seed)");
    s->add_option("--out-dir", out_dir, "output directory (default safegen-out/<command>)");
    s->add_flag("--json", json, "mirror CSV outputs as JSON");
    s->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* d = s->add_flag("--desk", desk, "desk-scale preset (default)");
    auto* p = s->add_flag("--paper", paper, "paper-scale preset");
    d->excludes(p);
    s->add_option("--set", sets, "override one key: section.key=value (repeatable)");
    subs.push_back(s);
  }
  std::string manifest_path;
  CLI::App* replay = app.add_subcommand("replay", "re-run a command from its manifest.json");
  replay->add_option("manifest", manifest_path, "manifest.json written by an earlier run")->required();
  replay->add_option("--out-dir", out_dir, "output directory (default <manifest dir>/replay)");
  replay->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  RunContext ctx;
  ctx.argv = args;
  ctx.out = &out;
  ctx.err = &err;
  ctx.jobs = jobs;
  try {
    if (replay->parsed()) {
      const nlohmann::json m = nlohmann::json::parse(read_file(manifest_path));
      ctx.command = m.at("command").get<std::string>();
      ctx.preset = m.at("preset").get<std::string>();
      ctx.json = m.value("json", false);
      ctx.cfg = Config::parse(m.at("config").get<std::string>(), manifest_path + ":config");
      ctx.out_dir = out_dir.empty()
                        ? (std::filesystem::path(manifest_path).parent_path() / "replay").string()
                        : out_dir;
      return execute(ctx);
    }
    for (CLI::App* s : subs)
      if (s->parsed()) ctx.command = s->get_name();
    ctx.preset = paper ? "paper" : "desk";
    const std::set<std::string> relevant = {"run", ctx.command};
    ctx.cfg = Config::parse(paper ? kPaperPreset : kDeskPreset, "preset " + ctx.preset).section_only(relevant);
    if (!config_path.empty())
      ctx.cfg.merge(Config::parse(read_file(config_path), config_path).section_only(relevant));
    for (const std::string& s : sets) {
      const std::string section = s.substr(0, s.find('.'));
      if (!relevant.count(section))
        throw ConfigError("--set " + s + ": section must be [run] or [" + ctx.command + "]");
      ctx.cfg.set_override(s, "--set");
    }
    if (seed) {
      if (*seed < 0) throw ConfigError("--seed must be non-negative");
      ctx.cfg.set("run", "seed", std::to_string(*seed), "--seed");
    }
    ctx.json = json;
    ctx.out_dir = out_dir.empty() ? "safegen-out/" + ctx.command : out_dir;
  } catch (const ConfigError& e) {
    err << "safegen: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "safegen: bad manifest: " << e.what() << "\n";
    return 2;
  }
  return execute(ctx);
}

}  // namespace safegen::cli
