// qclab command line: one subcommand per pipeline stage.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qclab/error.hpp"
#include "qclab/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--seed", o.seed, "overrides the config seed");
}

void add_checkpoint(CLI::App* cmd, Options& o, const char* default_name) {
  cmd->add_option("--checkpoint", o.checkpoint,
                  std::string("input checkpoint (default: <out>/") + default_name + ")");
}

fs::path checkpoint_or(const Options& o, const char* default_name) {
  return o.checkpoint.empty() ? fs::path(o.out) / default_name : fs::path(o.checkpoint);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational quantum classifiers: training, continual learning and universal attacks"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "train the first task and write model_a.qadv");
  auto* continual = app.add_subcommand("continual", "EWC training on the second task, writes model_merged.qadv");
  auto* attack = app.add_subcommand("attack", "universal qBIM attack on both tasks");
  auto* gen_spt = app.add_subcommand("gen-spt", "cluster-Ising ground-state dataset");
  auto* eval = app.add_subcommand("eval", "test-set metrics of a checkpoint");
  auto* export_images = app.add_subcommand("export-images", "PGM pairs from the last attack");
  for (auto* cmd : {train, continual, attack, gen_spt, eval, export_images}) add_common(cmd, o);
  add_checkpoint(continual, o, qclab::kModelA);
  add_checkpoint(attack, o, qclab::kModelMerged);
  add_checkpoint(eval, o, qclab::kModelMerged);

  CLI11_PARSE(app, argc, argv);

  try {
    const qclab::Experiment e =
        qclab::Experiment::from_config(qclab::Config::load(o.config), o.out, o.seed);
    std::ostream* log = &std::cerr;
    if (train->parsed()) {
      qclab::cmd_train(e, log);
    } else if (continual->parsed()) {
      qclab::cmd_continual(e, checkpoint_or(o, qclab::kModelA), log);
    } else if (attack->parsed()) {
      qclab::cmd_attack(e, checkpoint_or(o, qclab::kModelMerged), log);
    } else if (gen_spt->parsed()) {
      qclab::cmd_gen_spt(e, log);
    } else if (eval->parsed()) {
      qclab::cmd_eval(e, checkpoint_or(o, qclab::kModelMerged), log);
    } else if (export_images->parsed()) {
      qclab::cmd_export_images(e, log);
    }
  } catch (const qclab::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 0;
}
