#include "tvcs/experiment.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("TVCS_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string text(raw);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw tvcs::cli::ValidationError("TVCS_SEED='" + text + "' is not an unsigned integer");
  }
  return value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Total-variation reconstruction from random projections (FTVCS / IADM)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run an experiment described by a key = value config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--output-dir", output_dir, "Directory for recon/trace/summary files");
  run->add_option("--seed", seed, "Seed (overrides TVCS_SEED and the config file)");

  std::string trace_path;
  auto* trace = app.add_subcommand("trace", "Summarize a trace CSV written by 'run'");
  trace->add_option("csv", trace_path, "Trace CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) {
      tvcs::cli::ExperimentSpec spec = tvcs::cli::load_config(config_path);
      if (const auto env = seed_from_env()) spec.seed = *env;
      if (seed) spec.seed = *seed;
      if (!output_dir.empty()) spec.output_dir = output_dir;
      tvcs::cli::run_experiment(spec, &std::cout);
      std::cout << "wrote results to " << spec.output_dir.string() << '\n';
    } else if (*trace) {
      std::cout << tvcs::cli::print_trace_summary(trace_path);
    }
  } catch (const tvcs::cli::ValidationError& e) {
    std::cerr << "tvcs: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "tvcs: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
