#include <iostream>

#include "CLI11.hpp"
#include "agrisk/engine.hpp"
#include "agrisk/io.hpp"
#include "commands.hpp"

namespace {

using namespace agrisk::cli;

void add_workload_flags(CLI::App& cmd, WorkloadFlags& w) {
  cmd.add_option("--seed", w.seed, "Generator seed")->capture_default_str();
  cmd.add_option("--trials", w.trials, "Number of trials")->capture_default_str();
  cmd.add_option("--events-min", w.events_min, "Minimum events per trial")->capture_default_str();
  cmd.add_option("--events-max", w.events_max, "Maximum events per trial")->capture_default_str();
  cmd.add_option("--catalog", w.catalog, "Event catalog size")->capture_default_str();
  cmd.add_option("--elts", w.elts, "ELTs covered by the single layer")->capture_default_str();
  cmd.add_option("--elt-entries", w.elt_entries, "Entries per ELT")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aggregate risk analysis: YET x ELTs x financial terms -> YLT, plus tail metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "agrisk 0.1.0");

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic YET, ELTs and portfolio config");
  add_workload_flags(*gen_cmd, gen.workload);
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->capture_default_str();

  ValidateFlags val;
  auto* val_cmd = app.add_subcommand("validate", "Check a YET file and/or portfolio config");
  val_cmd->add_option("--yet", val.yet, "Binary YET file");
  val_cmd->add_option("--portfolio", val.portfolio, "Portfolio JSON config");
  val_cmd->add_option("--events-min", val.events_min, "Minimum events per trial")
      ->capture_default_str();
  val_cmd->add_option("--events-max", val.events_max, "Maximum events per trial (0: none)")
      ->capture_default_str();

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Run the analysis and write YLT CSVs");
  run_cmd->add_option("--yet", run.yet, "Binary YET file")->required();
  run_cmd->add_option("--portfolio", run.portfolio, "Portfolio JSON config")->required();
  run_cmd->add_option("--workers", run.workers, "Parallel trial blocks")->capture_default_str();
  run_cmd->add_option("--threads-per-slot", run.threads_per_slot, "Threads per worker slot")
      ->capture_default_str();
  run_cmd->add_option("--chunk", run.chunk, "Events per processing block")->capture_default_str();
  run_cmd->add_option("--precision", run.precision, "wide | narrow")->capture_default_str();
  run_cmd->add_option("--layout", run.layout, "direct | combined | sorted | hash")
      ->capture_default_str();
  run_cmd->add_flag("--checked", run.checked, "Verify per-event and per-trial bounds");
  run_cmd->add_option("--out", run.out_dir, "Output directory for YLT CSVs")
      ->capture_default_str();

  MetricsFlags met;
  auto* met_cmd = app.add_subcommand("metrics", "EP curve, RPL and VaR/TVaR of a YLT CSV");
  met_cmd->add_option("--ylt", met.ylt, "YLT CSV file")->required();
  met_cmd->add_option("--return-periods", met.return_periods, "Comma-separated return periods")
      ->delimiter(',');
  met_cmd->add_option("--alphas", met.alphas, "Comma-separated VaR/TVaR levels")->delimiter(',');
  met_cmd->add_flag("--no-curve", met.no_curve, "Omit the exceedance curve table");
  met_cmd->add_option("--out", met.out, "Write tables here instead of standard output");

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark experiment");
  bench_cmd
      ->add_option("--experiment", bench.experiment,
                   "scaling | oversubscription | layouts | chunks | precision | latency")
      ->required();
  add_workload_flags(*bench_cmd, bench.workload);
  bench_cmd->add_option("--workers", bench.workers, "Worker counts (scaling)")->delimiter(',');
  bench_cmd->add_option("--slots", bench.slots, "Threads per slot (oversubscription)")
      ->delimiter(',');
  bench_cmd->add_option("--kinds", bench.kinds, "Layouts (layouts)")->delimiter(',');
  bench_cmd->add_option("--chunks", bench.chunks, "Chunk sizes (chunks)")->delimiter(',');
  bench_cmd->add_option("--entries", bench.entries, "ELT entry counts (latency)")->delimiter(',');
  bench_cmd->add_option("--probes", bench.probes, "Lookups per repetition (latency)")
      ->capture_default_str();
  bench_cmd->add_option("--base-workers", bench.base_workers,
                        "Workers for non-scaling experiments (0: physical cores)")
      ->capture_default_str();
  bench_cmd->add_option("--precision", bench.precision, "wide | narrow")->capture_default_str();
  bench_cmd->add_option("--layout", bench.layout, "Layout for non-layout experiments")
      ->capture_default_str();
  bench_cmd->add_option("--repetitions", bench.repetitions, "Timed runs per row (>= 3)")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "CSV report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, std::cout);
    if (*val_cmd) return cmd_validate(val, std::cout);
    if (*run_cmd) return cmd_run(run, std::cout);
    if (*met_cmd) return cmd_metrics(met, std::cout);
    if (*bench_cmd) return cmd_bench(bench, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const agrisk::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const agrisk::ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    for (const auto& v : e.violations()) {
      std::cerr << "  trial " << v.trial_id << ": " << agrisk::to_string(v.rule) << ": "
                << v.detail << "\n";
    }
    return kExitData;
  } catch (const agrisk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
