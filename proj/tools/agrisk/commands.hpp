#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace agrisk::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitData = 4;

/// Flag values that parse but are not acceptable.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorkloadFlags {
  std::uint64_t seed = 7;
  std::size_t trials = 100'000;
  std::size_t events_min = 800;
  std::size_t events_max = 1500;
  std::uint32_t catalog = 1'000'000;
  std::size_t elts = 16;
  std::size_t elt_entries = 10'000;
};

struct GenFlags {
  WorkloadFlags workload;
  std::string out_dir = ".";
};

struct ValidateFlags {
  std::string yet;
  std::string portfolio;
  std::size_t events_min = 1;
  std::size_t events_max = 0;  // 0 = unbounded
};

struct RunFlags {
  std::string yet;
  std::string portfolio;
  unsigned workers = 1;
  unsigned threads_per_slot = 1;
  std::size_t chunk = 256;
  std::string precision = "wide";
  std::string layout = "direct";
  bool checked = false;
  std::string out_dir = ".";
};

struct MetricsFlags {
  std::string ylt;
  std::vector<double> return_periods;
  std::vector<double> alphas;
  bool no_curve = false;
  std::string out;  // empty = standard output
};

struct BenchFlags {
  std::string experiment;
  WorkloadFlags workload{7, 10'000};
  std::vector<unsigned> workers{1, 2, 4};
  std::vector<unsigned> slots{1, 2, 4};
  std::vector<std::string> kinds{"direct", "combined", "sorted", "hash"};
  std::vector<std::size_t> chunks{1, 64, 256, 1024};
  std::vector<std::size_t> entries{1'000, 10'000, 100'000};
  std::size_t probes = 4'000'000;
  unsigned base_workers = 0;  // 0 = physical cores
  std::string precision = "wide";
  std::string layout = "direct";
  unsigned repetitions = 3;
  std::string out;  // CSV report path; empty = none
};

// Each command prints its resolved configuration to `log` before running
// and returns an exit code. Library errors propagate to the caller.
int cmd_gen(const GenFlags& flags, std::ostream& log);
int cmd_validate(const ValidateFlags& flags, std::ostream& log);
int cmd_run(const RunFlags& flags, std::ostream& log);
int cmd_metrics(const MetricsFlags& flags, std::ostream& log);
int cmd_bench(const BenchFlags& flags, std::ostream& log);

}  // namespace agrisk::cli
