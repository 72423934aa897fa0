// frugal: run label-frugal optimization experiments and rank the results.
//
//   frugal run  --data a.csv --data b.csv --out runs/x [--synth mock|remote ...]
//   frugal rank runs/x

#include <cstdlib>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frugal/chat_client.hpp"
#include "frugal/experiment.hpp"
#include "frugal/report.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kPartialFailure = 1;
constexpr int kConfigError = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_run(frugal::RunConfig cfg, const std::string& treatments, const std::string& budgets,
            const std::string& synth) {
  using namespace frugal;
  if (!treatments.empty()) {
    cfg.arms.clear();
    for (const auto& t : split_list(treatments)) {
      auto arm = parse_arm(t);
      if (!arm) {
        std::cerr << "frugal: unknown treatment '" << t << "'\n";
        return kConfigError;
      }
      cfg.arms.push_back(*arm);
    }
  }
  if (!budgets.empty()) {
    cfg.budgets.clear();
    for (const auto& b : split_list(budgets)) {
      try {
        cfg.budgets.push_back(std::stoul(b));
      } catch (const std::exception&) {
        std::cerr << "frugal: bad budget '" << b << "'\n";
        return kConfigError;
      }
    }
  }
  if (synth == "mock") cfg.synth = SynthKind::Mock;
  else if (synth == "remote") cfg.synth = SynthKind::Remote;
  else {
    std::cerr << "frugal: --synth must be mock or remote\n";
    return kConfigError;
  }
  if (auto problem = cfg.validate(); !problem.empty()) {
    std::cerr << "frugal: " << problem << '\n';
    return kConfigError;
  }

  std::vector<Dataset> datasets;
  for (const auto& path : cfg.data) {
    try {
      datasets.push_back(Dataset::load(std::filesystem::path(path)));
    } catch (const std::exception& ex) {
      std::cerr << "frugal: " << path << ": " << ex.what() << '\n';
      return kConfigError;
    }
  }

  SynthFactory factory = [] { return std::make_unique<MockSynthesizer>(); };
  if (cfg.synth == SynthKind::Remote) {
    std::shared_ptr<ChatClient> client;
    try {
      std::filesystem::create_directories(cfg.out);
      auto log = std::make_shared<TranscriptLog>(std::filesystem::path(cfg.out) / "transcript_http.jsonl");
      client = std::make_shared<ChatClient>(cfg.chat, log);
    } catch (const std::exception& ex) {
      std::cerr << "frugal: " << ex.what() << '\n';
      return kConfigError;
    }
    factory = [client] { return make_remote_synthesizer(client); };
  }

  RunSummary s;
  try {
    s = execute(cfg, datasets, factory);
  } catch (const std::exception& ex) {
    std::cerr << "frugal: " << ex.what() << '\n';
    return kConfigError;
  }
  std::cout << "ran " << s.jobs << " jobs into " << s.dir.string();
  if (s.failures) std::cout << " (" << s.failures << " failed, see errors.log)";
  std::cout << '\n';
  return s.failures ? kPartialFailure : kOk;
}

int cmd_rank(const std::string& dir, const frugal::RunConfig& cfg) {
  frugal::ScottKnottOptions opt;
  opt.delta_small = cfg.delta_small;
  opt.bootstrap.n_boot = cfg.boots;
  opt.bootstrap.conf = cfg.conf;
  try {
    const auto s = frugal::write_reports(dir, opt);
    std::cout << "ranked " << s.tables << " datasets into " << s.dir.string() << '\n';
  } catch (const std::exception& ex) {
    std::cerr << "frugal: " << ex.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-frugal multi-objective optimization experiments"};
  app.require_subcommand(1);

  frugal::RunConfig cfg;
  std::string treatments, budgets, synth = "mock";

  auto* run = app.add_subcommand("run", "Run the (dataset x treatment x budget x repeat) grid");
  run->add_option("--data", cfg.data, "MOOT-format CSV files")->required();
  run->add_option("--treatments", treatments, "Comma list, e.g. llm/exploit,random/ucb,random,baseline");
  run->add_option("--budgets", budgets, "Comma list of total label budgets (default 10,15,20,25,30)");
  run->add_option("--repeats", cfg.repeats, "Repeats per treatment and budget")->capture_default_str();
  run->add_option("--warm-size", cfg.b0, "Initial labels (B0)")->capture_default_str();
  run->add_option("--seed", cfg.seed, "Base seed")->capture_default_str();
  run->add_option("--synth", synth, "Warm-start synthesizer: mock or remote")->capture_default_str();
  run->add_option("--endpoint", cfg.chat.endpoint, "Chat completion URL (remote)");
  run->add_option("--model", cfg.chat.model, "Model identifier (remote)");
  run->add_option("--key-env", cfg.chat.key_env, "Environment variable holding the API key")->capture_default_str();
  run->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  run->add_option("--jobs", cfg.jobs, "Parallel workers")->capture_default_str();
  run->add_option("--kappa", cfg.kappa, "UCB exploration weight")->capture_default_str();
  run->add_option("--epsilon", cfg.epsilon, "PI/EI improvement margin")->capture_default_str();
  run->add_option("--delta-small", cfg.delta_small, "Cliff's delta threshold")->capture_default_str();
  run->add_option("--boots", cfg.boots, "Bootstrap draws")->capture_default_str();
  run->add_option("--conf", cfg.conf, "Bootstrap confidence")->capture_default_str();
  run->add_flag("--literal-mapping", cfg.literal_mapping,
                "Map synthetic rows to their nearest already-labeled row instead of the pool");

  std::string results_dir;
  auto* rank = app.add_subcommand("rank", "Rank a results directory and write reports");
  rank->add_option("dir", results_dir, "Results directory written by 'run'")->required();
  rank->add_option("--delta-small", cfg.delta_small, "Cliff's delta threshold")->capture_default_str();
  rank->add_option("--boots", cfg.boots, "Bootstrap draws")->capture_default_str();
  rank->add_option("--conf", cfg.conf, "Bootstrap confidence")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (*run) return cmd_run(cfg, treatments, budgets, synth);
  return cmd_rank(results_dir, cfg);
}
