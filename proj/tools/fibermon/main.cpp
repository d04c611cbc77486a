// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include "fibermon/error.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>

namespace {

using namespace fibermon;
using namespace fibermon::cli;

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)");
  cmd->add_option("--seed", o.seed, "Seed; overrides the config");
  cmd->add_option("--out", o.out, "Output path");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "csv", "json-lines"}));
  cmd->add_flag("-q,--quiet", o.quiet, "No progress output on stderr");
}

int run(const std::function<void()>& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const ShapeError& e) {
    std::cerr << "contract error: " << e.what() << '\n';
    return kExitContract;
  } catch (const ContractError& e) {
    std::cerr << "contract error: " << e.what() << '\n';
    return kExitContract;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fiber fault detection and diagnosis on OTDR sequences"};
  app.require_subcommand(1);
  Options o;
  Streams io{std::cout, std::cerr, std::cin};

  auto* gen = app.add_subcommand("generate", "Generate a synthetic JSON-lines dataset and its manifest");
  add_common(gen, o);

  auto* tae = app.add_subcommand("train-ae", "Train the detection autoencoder on normal sequences");
  add_common(tae, o);
  tae->add_option("--data", o.data, "Dataset (JSON lines)");

  auto* tdg = app.add_subcommand("train-diag", "Train the diagnosis model on faulty sequences");
  add_common(tdg, o);
  tdg->add_option("--data", o.data, "Dataset (JSON lines)");

  auto* cal = app.add_subcommand("calibrate", "Select the detection threshold on the validation split");
  add_common(cal, o);
  cal->add_option("--model", o.model, "Autoencoder model file");
  cal->add_option("--data", o.data, "Dataset (JSON lines)");

  auto* ev = app.add_subcommand("eval", "Evaluate models on the test split and write report files");
  add_common(ev, o);
  ev->add_option("--ae-model", o.ae_model, "Calibrated autoencoder model file");
  ev->add_option("--diag-model", o.diag_model, "Diagnosis model file");
  ev->add_option("--data", o.data, "Dataset (JSON lines)");

  auto* det = app.add_subcommand("detect", "Detect, classify and locate faults in sequences");
  add_common(det, o);
  det->add_option("--ae-model", o.ae_model, "Calibrated autoencoder model file");
  det->add_option("--diag-model", o.diag_model, "Diagnosis model file");
  det->add_option("--data", o.data, "Sequences (JSON lines); '-' or absent reads stdin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::pair<CLI::App*, void (*)(const Options&, Streams)> commands[] = {
      {gen, cmd_generate}, {tae, cmd_train_ae}, {tdg, cmd_train_diag},
      {cal, cmd_calibrate}, {ev, cmd_eval},      {det, cmd_detect}};
  for (const auto& [cmd, fn] : commands) {
    if (cmd->parsed()) return run([&] { fn(o, io); });
  }
  return kExitConfig;
}
