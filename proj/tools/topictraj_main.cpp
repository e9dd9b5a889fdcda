// Command-line front end for the topic trajectory pipeline. Subcommands run
// individual stages against a shared output directory; `all` runs the whole
// pipeline with manifest-based skipping of up-to-date stages.

#include <CLI11.hpp>
#include <iostream>
#include <set>
#include <sstream>

#include "topictraj/pipeline.hpp"
#include "topictraj/version.hpp"

namespace {

std::set<topictraj::Stage> parse_stage_list(const std::string& list) {
  std::set<topictraj::Stage> stages;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    const auto stage = topictraj::parse_stage(name);
    if (!stage) throw CLI::ValidationError("--stages", "unknown stage '" + name + "'");
    stages.insert(*stage);
  }
  if (stages.empty()) throw CLI::ValidationError("--stages", "no stages given");
  return stages;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic trajectory mapping for short-text corpora"};
  app.set_version_flag("--version", std::string("topictraj ") + topictraj::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string stage_list;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  std::size_t threads_override = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t v) { seed_override = v; seed_given = true; },
           "override the master seed");
    cmd->add_option("--threads", threads_override,
                    "worker threads (1 guarantees run-to-run determinism)");
  };

  struct Command {
    CLI::App* app;
    std::set<topictraj::Stage> stages;
  };
  std::vector<Command> commands;
  for (topictraj::Stage stage : topictraj::all_stages()) {
    CLI::App* cmd = app.add_subcommand(topictraj::stage_name(stage),
                                       "run the " + topictraj::stage_name(stage) + " stage");
    add_common(cmd);
    commands.push_back({cmd, {stage}});
  }
  CLI::App* all_cmd = app.add_subcommand("all", "run the full pipeline");
  add_common(all_cmd);
  all_cmd->add_option("--stages", stage_list, "comma-separated subset of stages to run");

  CLI::App* init_cmd = app.add_subcommand("init-config", "write a default configuration file");
  std::string init_path = "topictraj.json";
  init_cmd->add_option("path", init_path, "where to write the configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (init_cmd->parsed()) {
      topictraj::PipelineConfig defaults;
      defaults.input = "corpus.jsonl";
      defaults.save(init_path);
      std::cout << "wrote " << init_path << '\n';
      return 0;
    }

    topictraj::PipelineConfig config = topictraj::PipelineConfig::load(config_path);
    if (seed_given) config.master_seed = seed_override;
    if (threads_override > 0) config.threads = threads_override;

    std::set<topictraj::Stage> stages;
    if (all_cmd->parsed()) {
      if (!stage_list.empty()) {
        stages = parse_stage_list(stage_list);
      } else {
        for (topictraj::Stage s : topictraj::all_stages()) stages.insert(s);
      }
    } else {
      for (const auto& cmd : commands)
        if (cmd.app->parsed()) stages = cmd.stages;
    }

    topictraj::run_pipeline(config, stages);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
