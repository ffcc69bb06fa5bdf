#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>

#include "agrisk/bench.hpp"
#include "agrisk/datagen.hpp"
#include "agrisk/engine.hpp"
#include "agrisk/io.hpp"
#include "agrisk/metrics.hpp"

namespace agrisk::cli {

namespace fs = std::filesystem;

namespace {

template <class T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "," : "") << xs[i];
  return out.str();
}

GenSpec to_spec(const WorkloadFlags& w) {
  GenSpec spec;
  spec.seed = w.seed;
  spec.num_trials = w.trials;
  spec.events_min = w.events_min;
  spec.events_max = w.events_max;
  spec.catalog_size = w.catalog;
  spec.elt_entry_count = w.elt_entries;
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (w.elts < 1 || w.elts > kMaxEltsPerLayer) {
    throw UsageError("--elts must be in [1, " + std::to_string(kMaxEltsPerLayer) + "]");
  }
  return spec;
}

void print_workload(const WorkloadFlags& w, std::ostream& log, std::string_view prefix) {
  log << prefix << "seed=" << w.seed << " trials=" << w.trials << " events=" << w.events_min
      << ".." << w.events_max << " catalog=" << w.catalog << " elts=" << w.elts
      << " elt_entries=" << w.elt_entries << "\n";
}

RunConfig to_run_config(unsigned workers, unsigned slots, std::size_t chunk,
                        const std::string& precision, const std::string& layout, bool checked) {
  RunConfig config;
  try {
    config.workers = workers;
    config.threads_per_worker_slot = slots;
    config.chunk_size = chunk;
    config.precision = parse_precision(precision);
    config.layout = parse_layout(layout);
    config.checked = checked;
    config.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return config;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

std::string ylt_file_name(const YltScope& scope) {
  if (scope.portfolio_total) return "ylt_total.csv";
  return "ylt_p" + std::to_string(scope.program_id) + "_l" + std::to_string(scope.layer_id) +
         ".csv";
}

// Reads a YET without validating so every violation can be listed.
YearEventTable read_yet_unchecked(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  YetReader reader(in);
  YearEventTable yet(reader.header().catalog_size);
  yet.reserve(reader.header().num_trials, reader.header().events_total);
  TrialView trial;
  while (reader.next(trial)) yet.add_trial(trial.trial_id, trial.events, trial.timestamps);
  return yet;
}

}  // namespace

int cmd_gen(const GenFlags& flags, std::ostream& log) {
  const GenSpec spec = to_spec(flags.workload);
  const fs::path out = flags.out_dir;
  log << "gen: out_dir=" << out.string() << "\n";
  print_workload(flags.workload, log, "gen: ");

  ensure_dir(out);
  GeneratedPortfolio gp = generate_portfolio(spec, 1, 1, flags.workload.elts);
  const YearEventTable yet = generate_yet(spec);
  write_yet_file(yet, out / "yet.bin");

  PortfolioConfig config;
  config.portfolio = gp.portfolio;
  for (const auto& elt : gp.elts) {
    const std::string name = "elt_" + std::to_string(elt.id()) + ".csv";
    std::ofstream file(out / name);
    if (!file) throw IoError("cannot open " + (out / name).string() + " for writing");
    write_elt_csv(elt, file);
    config.elts.push_back({elt.id(), name, elt.terms()});
  }
  {
    std::ofstream file(out / "portfolio.json");
    if (!file) throw IoError("cannot open " + (out / "portfolio.json").string() + " for writing");
    write_portfolio_config(config, file);
  }

  log << "wrote " << yet.num_trials() << " trials (" << yet.events_total() << " events) to "
      << (out / "yet.bin").string() << "\n";
  log << "wrote " << gp.elts.size() << " ELTs x " << spec.elt_entry_count
      << " entries and portfolio.json\n";
  return kExitOk;
}

int cmd_validate(const ValidateFlags& flags, std::ostream& log) {
  if (flags.yet.empty() && flags.portfolio.empty()) {
    throw UsageError("validate needs --yet and/or --portfolio");
  }
  TrialLengthBounds bounds;
  bounds.min = flags.events_min;
  if (flags.events_max > 0) bounds.max = flags.events_max;
  if (bounds.min > bounds.max) throw UsageError("--events-min exceeds --events-max");
  log << "validate: yet=" << (flags.yet.empty() ? "-" : flags.yet)
      << " portfolio=" << (flags.portfolio.empty() ? "-" : flags.portfolio)
      << " events=" << flags.events_min << ".."
      << (flags.events_max > 0 ? std::to_string(flags.events_max) : "inf") << "\n";

  int status = kExitOk;
  std::uint32_t catalog = 0;
  if (!flags.yet.empty()) {
    const YearEventTable yet = read_yet_unchecked(flags.yet);
    catalog = yet.catalog_size();
    const auto violations = validate_yet(yet, bounds);
    for (const auto& v : violations) {
      log << "trial " << v.trial_id << ": " << to_string(v.rule) << ": " << v.detail << "\n";
    }
    log << "YET: " << yet.num_trials() << " trials, " << yet.events_total() << " events, catalog "
        << yet.catalog_size() << ", " << violations.size() << " violation(s)\n";
    if (!violations.empty()) status = kExitData;
  }
  if (!flags.portfolio.empty()) {
    const fs::path path = flags.portfolio;
    const PortfolioConfig config = read_portfolio_config_file(path);
    const auto elts = load_elts(config, path.parent_path());
    std::size_t entries = 0;
    for (const auto& elt : elts) {
      entries += elt.size();
      if (catalog > 0 && elt.max_event() > catalog) {
        log << "ELT " << elt.id() << ": event " << elt.max_event() << " beyond catalog size "
            << catalog << "\n";
        status = kExitData;
      }
    }
    log << "portfolio: " << config.portfolio.programs.size() << " program(s), " << elts.size()
        << " ELT(s), " << entries << " entries\n";
  }
  log << (status == kExitOk ? "valid\n" : "invalid\n");
  return status;
}

int cmd_run(const RunFlags& flags, std::ostream& log) {
  const RunConfig config = to_run_config(flags.workers, flags.threads_per_slot, flags.chunk,
                                         flags.precision, flags.layout, flags.checked);
  log << "run: yet=" << flags.yet << " portfolio=" << flags.portfolio
      << " workers=" << config.workers << " threads_per_slot=" << config.threads_per_worker_slot
      << " chunk=" << config.chunk_size << " precision=" << to_string(config.precision)
      << " layout=" << to_string(config.layout) << " checked=" << (config.checked ? 1 : 0)
      << " out_dir=" << flags.out_dir << "\n";

  const auto read_start = std::chrono::steady_clock::now();
  const fs::path portfolio_path = flags.portfolio;
  const PortfolioConfig pc = read_portfolio_config_file(portfolio_path);
  const auto elts = load_elts(pc, portfolio_path.parent_path());
  const YearEventTable yet = read_yet_file(flags.yet);
  const double read_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - read_start).count();

  const AnalysisResult result = run_analysis(pc.portfolio, yet, elts, config);

  const fs::path out = flags.out_dir;
  ensure_dir(out);
  for (const auto& ylt : result.layers) write_ylt_file(ylt, out / ylt_file_name(ylt.scope));
  write_ylt_file(result.total, out / ylt_file_name(result.total.scope));

  log << "read:    " << read_seconds << " s\n";
  log << "load:    " << result.timing.load_seconds << " s (lookup construction)\n";
  log << "compute: " << result.timing.compute_seconds << " s\n";
  log << "throughput: " << result.timing.events_per_second() << " events/s over "
      << result.timing.trial_events << " trial-events\n";
  log << "wrote " << result.layers.size() << " layer YLT(s) and ylt_total.csv to " << out.string()
      << "\n";
  return kExitOk;
}

int cmd_metrics(const MetricsFlags& flags, std::ostream& log) {
  for (double rp : flags.return_periods) {
    if (!(rp > 1.0)) throw UsageError("--return-periods values must be > 1");
  }
  for (double a : flags.alphas) {
    if (!(a > 0.0 && a < 1.0)) throw UsageError("--alphas values must be in (0, 1)");
  }

  std::ofstream file;
  if (!flags.out.empty()) {
    file.open(flags.out);
    if (!file) throw IoError("cannot open " + flags.out + " for writing");
  }
  std::ostream& out = flags.out.empty() ? log : file;

  out << "# metrics: ylt=" << flags.ylt << " return_periods=" << join(flags.return_periods)
      << " alphas=" << join(flags.alphas) << " curve=" << (flags.no_curve ? 0 : 1) << "\n";
  const YearLossTable ylt = read_ylt_file(flags.ylt);
  if (ylt.empty()) throw InvalidArgument("YLT " + flags.ylt + " has no rows");
  out << "# trials=" << ylt.size() << "\n";

  // Computed before anything is written so a bad period leaves no partial table.
  const auto rows = rpl_report(ylt, flags.return_periods);
  std::vector<std::pair<double, double>> tail;
  for (double a : flags.alphas) tail.emplace_back(var(ylt, a), tvar(ylt, a));

  if (!flags.no_curve) {
    out << "\n# exceedance_curve\nloss,probability\n";
    for (const auto& p : exceedance_curve(ylt).points) {
      out << format_real(p.loss) << "," << format_real(p.probability) << "\n";
    }
  }
  out << "\n# rpl\nreturn_period,loss\n";
  for (const auto& r : rows) out << format_real(r.return_period) << "," << format_real(r.loss) << "\n";
  out << "\n# var_tvar\nalpha,var,tvar\n";
  for (std::size_t i = 0; i < flags.alphas.size(); ++i) {
    out << format_real(flags.alphas[i]) << "," << format_real(tail[i].first) << ","
        << format_real(tail[i].second) << "\n";
  }
  if (!out) throw IoError("write failure on metrics output");
  if (!flags.out.empty()) log << "wrote metrics to " << flags.out << "\n";
  return kExitOk;
}

int cmd_bench(const BenchFlags& flags, std::ostream& log) {
  const auto& names = kExperimentNames;
  if (std::find(std::begin(names), std::end(names), flags.experiment) == std::end(names)) {
    std::string valid;
    for (const char* n : names) valid += std::string(valid.empty() ? "" : ", ") + n;
    throw UsageError("unknown experiment \"" + flags.experiment + "\"; valid: " + valid);
  }
  const GenSpec spec = to_spec(flags.workload);
  const MachineInfo machine = detect_machine();

  BenchOptions options;
  options.repetitions = flags.repetitions;
  const unsigned base_workers = flags.base_workers > 0 ? flags.base_workers : machine.physical_cores;
  options.base = to_run_config(base_workers, 1, kDefaultChunkSize, flags.precision, flags.layout,
                               false);
  if (options.repetitions < 3) throw UsageError("--repetitions must be >= 3");

  log << "bench: experiment=" << flags.experiment << " repetitions=" << options.repetitions
      << " base_workers=" << base_workers << " precision=" << flags.precision
      << " layout=" << flags.layout << "\n";
  print_workload(flags.workload, log, "bench: ");

  BenchReport report;
  const std::string& e = flags.experiment;
  if (e == "latency") {
    log << "bench: entries=" << join(flags.entries) << " probes=" << flags.probes << "\n";
    report = bench_lookup_latency(spec.catalog_size, flags.entries, options.base.layout,
                                  flags.probes, options, spec.seed);
  } else {
    std::vector<LayoutKind> kinds;
    for (const auto& k : flags.kinds) {
      try {
        kinds.push_back(parse_layout(k));
      } catch (const InvalidArgument& err) {
        throw UsageError(err.what());
      }
    }
    if (e == "scaling") log << "bench: workers=" << join(flags.workers) << "\n";
    if (e == "oversubscription") log << "bench: slots=" << join(flags.slots) << "\n";
    if (e == "layouts") log << "bench: kinds=" << join(flags.kinds) << "\n";
    if (e == "chunks") log << "bench: chunks=" << join(flags.chunks) << "\n";

    const Workload w = make_workload(spec, flags.workload.elts);
    if (e == "scaling") report = bench_scaling(w, flags.workers, options);
    if (e == "oversubscription") report = bench_oversubscription(w, flags.slots, options);
    if (e == "layouts") report = bench_layouts(w, kinds, options);
    if (e == "chunks") report = bench_chunk_sweep(w, flags.chunks, options);
    if (e == "precision") report = bench_precision(w, options);
  }

  write_report_table(report, log);
  if (e == "oversubscription") {
    log << "any configuration beats 1 thread/slot by >5%: "
        << (report.any_beats_baseline() ? "yes" : "no") << "\n";
  }
  if (!flags.out.empty()) {
    std::ofstream file(flags.out);
    if (!file) throw IoError("cannot open " + flags.out + " for writing");
    write_report_csv(report, file);
    if (!file) throw IoError("write failure on " + flags.out);
    log << "wrote report to " << flags.out << "\n";
  }
  return kExitOk;
}

}  // namespace agrisk::cli
