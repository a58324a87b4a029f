// sarcasm <command> [--config FILE] [--<key> VALUE ...]
//
// Every config key doubles as a flag; flags override the file.
// Exit status: 0 success, 1 runtime or data error, 2 usage or config error.

#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "sarcasm/sarcasm.hpp"

namespace {

using sarcasm::pipeline::PipelineConfig;

struct Command {
  const char* name;
  const char* help;
  std::function<std::string(const PipelineConfig&)> run;
};

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

const std::vector<Command>& commands() {
  namespace p = sarcasm::pipeline;
  static const std::vector<Command> all = {
      {"ingest", "load and validate dataset and histories", [](const auto& c) { return dump(p::cmd_ingest(c)); }},
      {"split", "user-stratified train/valid/test manifest", [](const auto& c) { return dump(p::cmd_split(c)); }},
      {"embed", "fit an embedding method and embed every history",
       [](const auto& c) { return dump(p::cmd_embed(c)); }},
      {"train-eval", "train a model and score the test split",
       [](const auto& c) { return dump(p::cmd_train_eval(c)); }},
      {"analyze", "tag/label disagreement and hashtag relabeling",
       [](const auto& c) { return dump(p::cmd_analyze(c)); }},
      {"table", "collect results rows into a table", [](const auto& c) { return p::cmd_table(c); }},
      {"synth", "write a synthetic corpus", [](const auto& c) { return dump(p::cmd_synth(c)); }},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual sarcasm detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress logging");

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::map<CLI::App*, const Command*> by_app;
  for (const auto& command : commands()) {
    CLI::App* sub = app.add_subcommand(command.name, command.help);
    sub->add_option("--config", config_path, "config file")->check(CLI::ExistingFile);
    for (const auto& key : sarcasm::pipeline::config_keys()) {
      sub->add_option_function<std::string>(
          std::string("--") + key.name, [&overrides, name = key.name](const std::string& v) { overrides[name] = v; },
          std::string(key.help) + (key.fallback[0] ? std::string(" [") + key.fallback + "]" : ""));
    }
    by_app[sub] = &command;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  sarcasm::log::set_quiet(quiet);

  const Command* command = nullptr;
  for (auto* sub : app.get_subcommands()) command = by_app.at(sub);

  try {
    PipelineConfig config = config_path.empty() ? PipelineConfig() : PipelineConfig::from_file(config_path);
    for (const auto& [key, value] : overrides) config.set(key, value);
    std::cout << command->run(config);
    return 0;
  } catch (const sarcasm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
