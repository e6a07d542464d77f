#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "risbound/sweep.hpp"

namespace {

namespace fs = std::filesystem;

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;  // negative = keep the configured list
  std::string regime = "near";
  int parallel = 1;
};

risbound::ExperimentConfig resolve_config(const CliOptions& options) {
  risbound::ExperimentConfig config = options.config_path.empty()
                                          ? risbound::default_config()
                                          : risbound::load_config(options.config_path);
  if (options.seed >= 0) config.seeds = {static_cast<std::uint64_t>(options.seed)};
  risbound::validate_config(config);
  return config;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string joined_command(int argc, char** argv) {
  std::string command = "risbound";
  for (int i = 1; i < argc; ++i) {
    command += ' ';
    command += argv[i];
  }
  return command;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-information error bounds for RIS-aided kinematic sensing"};
  app.require_subcommand(1);

  CliOptions options;
  auto add_common = [&](CLI::App* sub, bool with_regime) {
    sub->add_option("--config", options.config_path, "JSON configuration file");
    sub->add_option("--seed", options.seed,
                    "override the configured seed list with a single seed");
    sub->add_option("--out", options.out_dir, "output directory (default: out)");
    sub->add_option("--parallel", options.parallel, "worker threads")
        ->check(CLI::PositiveNumber);
    if (with_regime) {
      sub->add_option("--regime", options.regime, "propagation regime")
          ->check(CLI::IsMember({"near", "far"}));
    }
  };

  CLI::App* fraunhofer =
      app.add_subcommand("fraunhofer", "near/far boundary over aperture size");
  add_common(fraunhofer, false);
  CLI::App* scenario1 =
      app.add_subcommand("scenario1", "orientation bounds with limbs at rest");
  add_common(scenario1, true);
  CLI::App* scenario2 =
      app.add_subcommand("scenario2", "position and orientation bounds during exercise");
  add_common(scenario2, true);
  CLI::App* validate = app.add_subcommand("validate", "run the self-check suite");
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const risbound::ExperimentConfig config = resolve_config(options);
    const fs::path out_dir(options.out_dir);
    fs::create_directories(out_dir);
    std::vector<std::string> outputs;
    bool suite_passed = true;

    if (fraunhofer->parsed()) {
      const std::vector<risbound::FraunhoferRow> rows =
          risbound::run_fraunhofer_curve(config);
      write_text(out_dir / "fraunhofer.csv", risbound::fraunhofer_csv(rows));
      outputs.push_back("fraunhofer.csv");
    } else if (scenario1->parsed()) {
      const risbound::Regime regime =
          options.regime == "far" ? risbound::Regime::far : risbound::Regime::near;
      const std::vector<risbound::BoundReport> reports =
          risbound::run_scenario1_sweep(config, regime, options.parallel);
      const std::string name = std::string("scenario1_") + options.regime + ".csv";
      write_text(out_dir / name, risbound::scenario1_csv(reports));
      outputs.push_back(name);
    } else if (scenario2->parsed()) {
      if (options.regime == "far") {
        throw risbound::ConfigError(
            "config: scenario2 requires the near-field regime (position derivatives "
            "vanish from the far-field model)");
      }
      const std::vector<risbound::BoundReport> reports =
          risbound::run_scenario2_sweep(config, options.parallel);
      write_text(out_dir / "scenario2_near.csv", risbound::scenario2_csv(reports));
      outputs.push_back("scenario2_near.csv");
    } else {
      const risbound::ValidationReport report = risbound::run_validation_suite(config);
      const std::string rendered = report.render();
      std::cout << rendered;
      write_text(out_dir / "validation.txt", rendered);
      outputs.push_back("validation.txt");
      suite_passed = report.passed();
    }

    if (!config.reference_curves.empty()) {
      write_text(out_dir / "reference_curves.csv",
                 risbound::reference_curves_csv(config));
      outputs.push_back("reference_curves.csv");
    }

    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    write_text(out_dir / "manifest.json",
               risbound::make_manifest(config, joined_command(argc, argv), outputs, wall_ms)
                       .dump(2) +
                   "\n");
    return suite_passed ? 0 : 1;
  } catch (const risbound::ConfigError& err) {
    std::cerr << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
