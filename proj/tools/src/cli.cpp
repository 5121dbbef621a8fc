#include <exception>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "compsum_cli/commands.hpp"

namespace compsum::cli {

namespace {

std::string key_table(const std::vector<KeyInfo>& keys) {
  std::ostringstream os;
  for (const auto& k : keys) {
    os << "  " << k.name << " = " << (k.default_value.empty() ? "(unset)" : k.default_value)
       << "\n      " << k.help << "\n";
  }
  return os.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"compsum: comp-sum losses, consistency transforms, bound verification and training"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions opts;
  std::uint64_t seed = 0;
  app.add_option("--config", opts.config_path, "config file of 'key = value' lines");
  app.add_option("--out", opts.out, "output path (train: file prefix)");
  auto* seed_opt = app.add_option("--seed", seed, "seed, overrides the config key");
  app.add_option("--threads", opts.threads, "worker threads for evaluation")
      ->check(CLI::PositiveNumber);

  auto* transform = app.add_subcommand("transform-table", "T, T_tilde, Gamma and Gamma_tilde grids");
  transform->footer("Config keys:\n" + key_table(command_keys("transform-table")));

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a verification suite; exit 2 on violations");
  verify->add_option("suite", suite, "bounds, tightness, gaps, lemmas or adversarial")
      ->required()
      ->check(CLI::IsMember(verify_suites()));
  std::string verify_footer = "Config keys per suite:\n";
  for (const auto& s : verify_suites()) verify_footer += s + ":\n" + key_table(command_keys("verify", s));
  verify->footer(verify_footer);

  auto* gaps = app.add_subcommand("gaps", "minimizability gaps of a finite distribution");
  gaps->footer("Config keys:\n" + key_table(command_keys("gaps")));
  auto* train = app.add_subcommand("train", "train on a synthetic task; writes metrics and checkpoint");
  train->footer("Config keys:\n" + key_table(command_keys("train")));
  auto* evaluate = app.add_subcommand("evaluate", "clean and robust accuracy of a checkpoint");
  evaluate->footer("Config keys:\n" + key_table(command_keys("evaluate")));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Config cfg = opts.config_path.empty() ? Config{} : Config::parse_file(opts.config_path);
    cfg.check_keys(command_keys(command, suite));
    if (seed_opt->count() > 0) {
      opts.seed = seed;
      cfg.set("seed", std::to_string(seed));
    }
    if (command == "transform-table") return cmd_transform_table(cfg, opts, out);
    if (command == "verify") return cmd_verify(suite, cfg, opts, out);
    if (command == "gaps") return cmd_gaps(cfg, opts, out);
    if (command == "train") return cmd_train(cfg, opts, out);
    return cmd_evaluate(cfg, opts, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace compsum::cli
