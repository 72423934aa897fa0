#pragma once

// Experiment grid: (dataset x treatment x budget x repeat) jobs, run in
// parallel, written as line-delimited JSON in a fixed job order.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "frugal/chat_client.hpp"
#include "frugal/engine.hpp"

namespace frugal {

inline constexpr const char* kVersion = "0.3.1";

enum class SynthKind { Mock, Remote };

struct Arm {
  Start start = Start::Random;
  Acquire acquire = Acquire::Exploit;
  bool operator==(const Arm&) const = default;
};

/// "llm/exploit", "random/ucb", "random", "baseline", ...
inline std::optional<Arm> parse_arm(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    auto a = parse_acquire(text);
    if (!a || is_active(*a)) return std::nullopt;
    return Arm{Start::None, *a};
  }
  auto s = parse_start(text.substr(0, slash));
  auto a = parse_acquire(text.substr(slash + 1));
  if (!s || !a || *s == Start::None || !is_active(*a)) return std::nullopt;
  return Arm{*s, *a};
}

inline std::string arm_name(const Arm& a) { return Treatment{a.start, a.acquire, 0}.arm(); }

/// The nine default arms: LLM/{exploit,explore}, random/{exploit,explore,
/// ucb,pi,ei}, random selection and the baseline.
inline std::vector<Arm> default_arms() {
  return {{Start::Llm, Acquire::Exploit},  {Start::Llm, Acquire::Explore},  {Start::Random, Acquire::Exploit},
          {Start::Random, Acquire::Explore}, {Start::Random, Acquire::Ucb}, {Start::Random, Acquire::Pi},
          {Start::Random, Acquire::Ei},    {Start::None, Acquire::Random},  {Start::None, Acquire::Baseline}};
}

struct RunConfig {
  std::vector<std::string> data;
  std::vector<Arm> arms = default_arms();
  std::vector<std::size_t> budgets{10, 15, 20, 25, 30};
  std::size_t repeats = 20;
  std::size_t b0 = 4;
  std::uint64_t seed = 1;
  SynthKind synth = SynthKind::Mock;
  ChatConfig chat;
  std::string out = "runs";
  std::size_t jobs = 1;
  double kappa = 2.0;
  double epsilon = 0.01;
  double delta_small = 0.147;
  std::size_t boots = 512;
  double conf = 0.95;
  bool literal_mapping = false;

  /// Empty when valid, else the first problem found.
  std::string validate() const {
    if (data.empty()) return "no data files given";
    if (repeats < 1) return "repeats must be >= 1";
    if (b0 < 2) return "warm-size must be >= 2";
    if (budgets.empty()) return "no budgets given";
    for (auto b : budgets)
      if (b <= b0) return "budget " + std::to_string(b) + " must exceed warm-size " + std::to_string(b0);
    if (arms.empty()) return "no treatments given";
    if (jobs < 1) return "jobs must be >= 1";
    if (!(conf > 0 && conf < 1)) return "conf must be in (0,1)";
    if (boots < 1) return "boots must be >= 1";
    return {};
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& a : c.arms) arms.push_back(arm_name(a));
  return {{"data", c.data},
          {"treatments", arms},
          {"budgets", c.budgets},
          {"repeats", c.repeats},
          {"warm_size", c.b0},
          {"seed", c.seed},
          {"synth", c.synth == SynthKind::Mock ? "mock" : "remote"},
          {"endpoint", c.chat.endpoint},
          {"model", c.chat.model},
          {"key_env", c.chat.key_env},
          {"kappa", c.kappa},
          {"epsilon", c.epsilon},
          {"delta_small", c.delta_small},
          {"boots", c.boots},
          {"conf", c.conf},
          {"literal_mapping", c.literal_mapping}};
}

struct Job {
  std::size_t dataset = 0;  // index into the loaded datasets
  Treatment treatment;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
};

/// Repeats share a seed across treatments and budgets, so every arm of
/// repeat r starts from the same random rows.
inline std::uint64_t job_seed(std::uint64_t base, const std::string& dataset, std::size_t repeat) {
  return SeedMixer(base).add(dataset).add(static_cast<std::uint64_t>(repeat)).value();
}

inline std::vector<Job> plan_jobs(const RunConfig& cfg, const std::vector<Dataset>& datasets) {
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (const auto& arm : cfg.arms) {
      if (arm.acquire == Acquire::Baseline) {
        jobs.push_back({d, {Start::None, Acquire::Baseline, datasets[d].size()}, 0, 0});
        continue;
      }
      for (auto b : cfg.budgets)
        for (std::size_t r = 0; r < cfg.repeats; ++r)
          jobs.push_back({d, {arm.start, arm.acquire, b}, r, job_seed(cfg.seed, datasets[d].name(), r)});
    }
  }
  return jobs;
}

inline nlohmann::json result_line(const RunResult& r) {
  return {{"dataset", r.dataset},
          {"start", to_string(r.treatment.start)},
          {"acquire", to_string(r.treatment.acquire)},
          {"budget", r.treatment.budget},
          {"repeat", r.repeat},
          {"seed", r.seed},
          {"best", r.best_chebyshev},
          {"evals", r.evaluations_used},
          {"fallback", r.warm_fallback}};
}

inline RunResult parse_result_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  RunResult r;
  r.dataset = j.at("dataset").get<std::string>();
  auto s = parse_start(j.at("start").get<std::string>());
  auto a = parse_acquire(j.at("acquire").get<std::string>());
  if (!s || !a) throw std::runtime_error("result line has an unknown treatment: " + line);
  r.treatment = {*s, *a, j.at("budget").get<std::size_t>()};
  r.repeat = j.at("repeat").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.best_chebyshev = j.at("best").get<double>();
  r.evaluations_used = j.at("evals").get<std::size_t>();
  r.warm_fallback = j.at("fallback").get<bool>();
  return r;
}

/// Per-file facts the reports need without reloading the data.
inline nlohmann::json dataset_line(const Dataset& ds) {
  const auto all = all_chebyshev(ds);
  const auto s = Dataset::summarize(all);
  return {{"dataset", ds.name()}, {"rows", ds.size()},   {"x", ds.x_columns().size()}, {"y", ds.y_columns().size()},
          {"dims", to_string(ds.dims())}, {"mean", s.mean}, {"lo", s.lo},  {"median", s.median},
          {"sd", s.sd},           {"chebyshev", all}};
}

/// Records every synthesizer exchange of one job; written out in job order.
class RecordingSynthesizer final : public Synthesizer {
 public:
  RecordingSynthesizer(Synthesizer& inner, nlohmann::json& records, nlohmann::json tag)
      : inner_(inner), records_(records), tag_(std::move(tag)) {}

  std::vector<SyntheticRow> synthesize(const SynthesisRequest& request) override {
    nlohmann::json rec = tag_;
    rec["messages"] = nlohmann::json::array();
    for (const auto& [role, content] : request.prompt.messages())
      rec["messages"].push_back({{"role", role}, {"content", content}});
    try {
      auto rows = inner_.synthesize(request);
      rec["response"] = render_response(request.ds, rows);
      records_.push_back(std::move(rec));
      return rows;
    } catch (const std::exception& ex) {
      rec["error"] = ex.what();
      records_.push_back(std::move(rec));
      throw;
    }
  }

 private:
  Synthesizer& inner_;
  nlohmann::json& records_;
  nlohmann::json tag_;
};

struct JobOutcome {
  std::optional<RunResult> result;
  std::string error;
  nlohmann::json transcript = nlohmann::json::array();
};

inline EngineOptions engine_options(const RunConfig& cfg) {
  EngineOptions opt;
  opt.b0 = cfg.b0;
  opt.gp_params.kappa = cfg.kappa;
  opt.gp_params.epsilon = cfg.epsilon;
  opt.warm.literal_mapping = cfg.literal_mapping;
  return opt;
}

/// Factory for one synthesizer per job (the mock is stateless; the remote
/// client is shared and internally rate limited).
using SynthFactory = std::function<std::unique_ptr<Synthesizer>()>;

inline JobOutcome run_job(const Job& job, const Dataset& ds, const RunConfig& cfg, const SynthFactory& make_synth) {
  JobOutcome out;
  try {
    std::unique_ptr<Synthesizer> base;
    std::optional<RecordingSynthesizer> rec;
    Synthesizer* synth = nullptr;
    if (job.treatment.start == Start::Llm) {
      base = make_synth();
      rec.emplace(*base, out.transcript,
                  nlohmann::json{{"dataset", ds.name()}, {"budget", job.treatment.budget}, {"repeat", job.repeat},
                                 {"acquire", to_string(job.treatment.acquire)}});
      synth = &*rec;
    }
    auto r = run_treatment(ds, job.treatment, synth, job.seed, engine_options(cfg));
    r.repeat = job.repeat;
    r.seed = job.seed;
    out.result = std::move(r);
  } catch (const std::exception& ex) {
    out.error = ex.what();
  }
  return out;
}

/// Runs every job on `threads` workers; outcomes come back in job order.
inline std::vector<JobOutcome> run_jobs(const std::vector<Job>& jobs, const std::vector<Dataset>& datasets,
                                        const RunConfig& cfg, const SynthFactory& make_synth, std::size_t threads) {
  std::vector<JobOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();)
      outcomes[i] = run_job(jobs[i], datasets[jobs[i].dataset], cfg, make_synth);
  };
  threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  return outcomes;
}

struct RunSummary {
  std::size_t jobs = 0;
  std::size_t failures = 0;
  std::filesystem::path dir;
};

/// Executes the grid and writes results.jsonl, datasets.jsonl,
/// transcript.jsonl, errors.log and manifest.json into cfg.out.
inline RunSummary execute(const RunConfig& cfg, const std::vector<Dataset>& datasets, const SynthFactory& make_synth) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out);
  fs::create_directories(dir);

  const auto jobs = plan_jobs(cfg, datasets);
  const auto outcomes = run_jobs(jobs, datasets, cfg, make_synth, cfg.jobs);

  RunSummary summary{jobs.size(), 0, dir};
  std::ofstream results(dir / "results.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream transcript(dir / "transcript.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream errors(dir / "errors.log", std::ios::binary | std::ios::trunc);
  nlohmann::json manifest_jobs = nlohmann::json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    const auto& o = outcomes[i];
    manifest_jobs.push_back({{"dataset", datasets[job.dataset].name()},
                             {"treatment", job.treatment.arm()},
                             {"budget", job.treatment.budget},
                             {"repeat", job.repeat},
                             {"seed", job.seed}});
    for (const auto& rec : o.transcript) transcript << rec.dump() << '\n';
    if (o.result) {
      results << result_line(*o.result).dump() << '\n';
      for (const auto& msg : o.result->log)
        errors << datasets[job.dataset].name() << ' ' << job.treatment.arm() << ' ' << job.treatment.budget << " #"
               << job.repeat << ": note: " << msg << '\n';
    } else {
      ++summary.failures;
      errors << datasets[job.dataset].name() << ' ' << job.treatment.arm() << ' ' << job.treatment.budget << " #"
             << job.repeat << ": error: " << o.error << '\n';
    }
  }

  std::ofstream dsout(dir / "datasets.jsonl", std::ios::binary | std::ios::trunc);
  for (const auto& ds : datasets) dsout << dataset_line(ds).dump() << '\n';

  nlohmann::json manifest{{"version", kVersion},
                          {"config", to_json(cfg)},
                          {"seed_rule", "seed = mix(base seed, dataset name, repeat); shared by all treatments"},
                          {"jobs", manifest_jobs}};
  std::ofstream(dir / "manifest.json", std::ios::binary | std::ios::trunc) << manifest.dump(2) << '\n';
  return summary;
}

/// Re-runs one job listed in a manifest (mock synthesizer).
inline RunResult replay(const nlohmann::json& manifest, std::size_t job_index, const Dataset& ds) {
  const auto& cfgj = manifest.at("config");
  RunConfig cfg;
  cfg.b0 = cfgj.at("warm_size").get<std::size_t>();
  cfg.kappa = cfgj.at("kappa").get<double>();
  cfg.epsilon = cfgj.at("epsilon").get<double>();
  cfg.literal_mapping = cfgj.at("literal_mapping").get<bool>();
  const auto& j = manifest.at("jobs").at(job_index);
  if (j.at("dataset").get<std::string>() != ds.name()) throw std::invalid_argument("replay: dataset mismatch");
  auto arm = parse_arm(j.at("treatment").get<std::string>());
  if (!arm) throw std::invalid_argument("replay: unknown treatment");
  Job job{0, {arm->start, arm->acquire, j.at("budget").get<std::size_t>()}, j.at("repeat").get<std::size_t>(),
          j.at("seed").get<std::uint64_t>()};
  MockSynthesizer mock;
  auto r = run_treatment(ds, job.treatment, &mock, job.seed, engine_options(cfg));
  r.repeat = job.repeat;
  r.seed = job.seed;
  return r;
}

}  // namespace frugal
