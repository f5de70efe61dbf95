#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "fairrec/claims.hpp"
#include "fairrec/error.hpp"
#include "fairrec/experiment.hpp"
#include "oracle_check.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
};

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment configuration (key = value lines)");
  cmd->add_option("--seed", f.seed, "run a single seed instead of the configured list");
  cmd->add_option("--workers", f.workers, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory");
}

fairrec::ExperimentConfig Resolve(const CommonFlags& f) {
  fairrec::ExperimentConfig c = f.config.empty() ? fairrec::ExperimentConfig{} : fairrec::LoadExperimentConfig(f.config);
  if (f.seed) c.seeds = {*f.seed};
  if (f.workers) c.workers = *f.workers;
  if (f.out) c.out = *f.out;
  c.Validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit the fairness of causal algorithmic recourse on synthetic structural causal models."};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* generate = app.add_subcommand("generate", "sample training and test sets for every seed");
  auto* train = app.add_subcommand("train", "fit recourse SCMs and train classifiers on generated data");
  auto* recourse = app.add_subcommand("recourse", "solve IMF and causal recourse for sampled negatives");
  auto* metrics = app.add_subcommand("metrics", "compute fairness metrics, tables and the manifest");
  auto* societal = app.add_subcommand("societal", "sweep subsidy policies and write societal.csv");
  auto* run = app.add_subcommand("run", "full pipeline: generate, train, metrics");
  auto* claims = app.add_subcommand("reproduce-claims", "run the fixed claim suite and print one line per claim");
  auto* schema = app.add_subcommand("schema", "print every configuration key with its default");
  for (auto* cmd : {generate, train, recourse, metrics, societal, run, claims}) AddCommon(cmd, flags);
  std::vector<int> only;
  claims->add_option("--only", only, "claim ids to run, e.g. 1,5 (default: all)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (schema->parsed()) {
      std::cout << fairrec::ConfigSchema();
      return 0;
    }
    if (claims->parsed()) {
      fairrec::ClaimOptions o;
      o.workers = flags.workers.value_or(1);
      o.scratch = flags.out.value_or("claims-scratch");
      o.only.insert(only.begin(), only.end());
      o.solver_equivalence = [] { return fairrec::testing::CompareSolverWithOracle(); };
      fairrec::CheckWritable(o.scratch);
      bool all = true;
      fairrec::ReproduceClaims(o, [&](const fairrec::ClaimResult& r) {
        all = all && r.pass();
        std::cout << fairrec::FormatClaim(r) << std::endl;
      });
      return all ? 0 : 1;
    }
    const fairrec::ExperimentConfig config = Resolve(flags);
    if (generate->parsed()) fairrec::RunGenerateStage(config);
    if (train->parsed()) fairrec::RunTrainStage(config);
    if (recourse->parsed()) fairrec::RunRecourseStage(config);
    if (societal->parsed()) std::cout << fairrec::RunSocietalStage(config);
    if (metrics->parsed() || run->parsed()) {
      const fairrec::ExperimentResult r =
          run->parsed() ? fairrec::RunExperiment(config) : fairrec::RunMetricsStage(config);
      std::cout << fairrec::ResultsTableMarkdown(config, r) << "\nconfig hash " << fairrec::HashHex(r.hash) << ", "
                << r.files.size() << " files under " << config.out.generic_string() << '\n';
    }
  } catch (const fairrec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
