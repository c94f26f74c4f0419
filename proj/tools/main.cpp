#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dstgat/app/commands.hpp"
#include "dstgat/graph/topology.hpp"

using namespace dstgat;

int main(int argc, char** argv) {
  CLI::App cli{"Graph-enhanced dialogue state tracking"};
  cli.require_subcommand(1);

  std::string config_path;
  // One slot per subcommand so each keeps its own default.
  std::map<const CLI::App*, std::string> out_dirs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  auto common = [&](CLI::App* sub, std::string default_out) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "Seed for the model, training and synthesis");
    sub->add_option("--out", out_dirs[sub], "Output directory")->default_val(default_out);
    sub->add_option("--set", overrides, "Override a config key, e.g. --set train.epochs=4");
  };
  auto* synth = cli.add_subcommand("synth", "Generate a synthetic ontology and corpus splits");
  common(synth, "data");
  auto* train = cli.add_subcommand("train", "Train a tracker and write a checkpoint");
  common(train, "runs/default");
  auto* eval = cli.add_subcommand("eval", "Predict every test turn and write metric reports");
  common(eval, "runs/default");
  auto* analyze = cli.add_subcommand("analyze", "Jaccard dependency analysis of two prediction dumps");
  common(analyze, "runs/analysis");
  std::string model_dump, baseline_dump;
  analyze->add_option("--model", model_dump, "predictions.jsonl of the model");
  analyze->add_option("--baseline", baseline_dump, "predictions.jsonl of the baseline");
  auto* selftest = cli.add_subcommand("selftest", "Run the built-in correctness suites");
  std::string fault;
  selftest->add_option("--inject-fault", fault, "Deliberate fault: attention-sign")
      ->check(CLI::IsMember({"attention-sign"}));
  selftest->add_option("--seed", seed, "Seed for the random instances");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? app::kSuccess : app::kDataError;
  }

  try {
    if (selftest->parsed()) {
      app::SelftestOptions options;
      options.attention_sign_fault = fault == "attention-sign";
      options.seed = seed.value_or(0);
      return app::run_selftest(options, std::cout) ? app::kSuccess : app::kInternalError;
    }
    if (!model_dump.empty()) overrides.push_back("analyze.model_predictions=\"" + model_dump + "\"");
    if (!baseline_dump.empty()) {
      overrides.push_back("analyze.baseline_predictions=\"" + baseline_dump + "\"");
    }
    const app::RunConfig config = app::load_run_config(config_path, overrides, seed);
    if (synth->parsed()) app::cmd_synth(config, out_dirs[synth], std::cout);
    if (train->parsed()) app::cmd_train(config, out_dirs[train], std::cout);
    if (eval->parsed()) app::cmd_eval(config, out_dirs[eval], std::cout);
    if (analyze->parsed()) app::cmd_analyze(config, out_dirs[analyze], std::cout);
    return app::kSuccess;
  } catch (const data::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kDataError;
  } catch (const graph::TopologyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kDataError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return app::kInternalError;
  }
}
