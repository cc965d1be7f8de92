#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dpnls/experiment.hpp"

namespace {

using Command = std::function<int(const dpnls::ExperimentConfig&, const dpnls::RunOptions&)>;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool no_timestamp = false;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory (overrides output_dir)");
  sub->add_option("--seed", f.seed, "random seed (overrides seed)");
  sub->add_flag("--no-timestamp", f.no_timestamp, "omit the generation time from summary.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states, stability classification and blowup for the double-power NLS"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Command>> commands = {
      {"groundstate", {"solve and certify one ground state", dpnls::cmd_groundstate}},
      {"classify", {"classify ground states over an omega sweep", dpnls::cmd_classify}},
      {"blowup", {"evolve scaled ground states and audit blowup", dpnls::cmd_blowup}},
      {"verify-lemma", {"sign suite and key-estimate sampling", dpnls::cmd_verify_lemma}},
  };
  std::map<std::string, CommonFlags> flags;
  for (const auto& [name, entry] : commands) add_common(app.add_subcommand(name, entry.first), flags[name]);

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const auto& f = flags.at(name);
  try {
    auto cfg = dpnls::load_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    dpnls::RunOptions opt{f.out.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(f.out),
                          !f.no_timestamp};
    return commands.at(name).second(cfg, opt);
  } catch (const dpnls::Error& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return e.kind() == dpnls::ErrorKind::validation ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return 1;
  }
}
