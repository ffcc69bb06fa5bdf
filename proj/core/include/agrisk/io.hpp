#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "agrisk/model.hpp"

namespace agrisk {

// Binary YET layout (all integers little-endian):
//
//   header  magic "AGRKYET1" (8) | version u32 | num_trials u64 |
//           catalog_size u32 | events_total u64                  = 32 bytes
//   trial   trial_id u64 | event_count u32                       = 12 bytes
//   event   event_id u32 | timestamp f32 (IEEE-754 binary32)     =  8 bytes
inline constexpr std::array<char, 8> kYetMagic{'A', 'G', 'R', 'K', 'Y', 'E', 'T', '1'};
inline constexpr std::uint32_t kYetVersion = 1;
inline constexpr std::size_t kYetHeaderBytes = 32;
inline constexpr std::size_t kYetTrialHeaderBytes = 12;
inline constexpr std::size_t kYetEventBytes = 8;

struct YetFileHeader {
  std::uint32_t version = kYetVersion;
  std::uint64_t num_trials = 0;
  std::uint32_t catalog_size = 0;
  std::uint64_t events_total = 0;
};

/// Read or write failure of the underlying stream or file.
class IoError : public Error {
 public:
  using Error::Error;
};

class YetFormatError : public Error {
 public:
  enum class Kind { bad_magic, version_mismatch, truncated, count_mismatch };

  YetFormatError(Kind kind, std::uint64_t offset, const std::string& what);
  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  /// Byte offset in the file where the problem was detected.
  [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

class CsvError : public Error {
 public:
  CsvError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  /// The message without the line prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what);
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Writes `yet` in the binary layout above; returns bytes written.
/// Rejects tables that fail validate_yet() (including an empty table).
std::uint64_t write_yet(const YearEventTable& yet, std::ostream& sink);
void write_yet_file(const YearEventTable& yet, const std::filesystem::path& path);

/// Streaming reader: holds at most one trial plus a fixed decode block.
class YetReader {
 public:
  explicit YetReader(std::istream& source);

  [[nodiscard]] const YetFileHeader& header() const noexcept { return header_; }
  /// Decodes the next trial into internal buffers; false after the last trial.
  /// The returned view stays valid until the next call.
  bool next(TrialView& out);
  [[nodiscard]] std::uint64_t bytes_consumed() const noexcept { return offset_; }
  [[nodiscard]] std::size_t buffer_capacity_bytes() const noexcept;

 private:
  void read_exact(char* dst, std::size_t n, const char* what);

  std::istream& in_;
  YetFileHeader header_;
  std::uint64_t offset_ = 0;
  std::uint64_t trials_read_ = 0;
  std::uint64_t events_read_ = 0;
  std::vector<std::uint32_t> events_;
  std::vector<float> timestamps_;
};

/// Reads a whole YET and validates it; throws YetFormatError for layout
/// problems and ValidationError for invariant violations.
[[nodiscard]] YearEventTable read_yet(std::istream& source);
[[nodiscard]] YearEventTable read_yet_file(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
[[nodiscard]] std::string format_real(double value);

/// ELT CSV: header "event_id,loss", one row per entry. Terms are not part
/// of the CSV; they come from the portfolio config.
void write_elt_csv(const EventLossTable& elt, std::ostream& sink);
[[nodiscard]] EventLossTable read_elt_csv(std::istream& source, std::uint32_t elt_id,
                                          EltTerms terms = {});

/// YLT CSV: header "trial_id,loss", one row per trial in trial order.
void write_ylt_csv(const YearLossTable& ylt, std::ostream& sink);
void write_ylt_file(const YearLossTable& ylt, const std::filesystem::path& path);
/// A header-only file yields an empty table.
[[nodiscard]] YearLossTable read_ylt_csv(std::istream& source);
[[nodiscard]] YearLossTable read_ylt_file(const std::filesystem::path& path);

/// Where an ELT referenced by the portfolio lives and the FT1 terms it carries.
struct EltSource {
  std::uint32_t elt_id = 0;
  std::string file;
  EltTerms terms;
  friend bool operator==(const EltSource&, const EltSource&) = default;
};

struct PortfolioConfig {
  Portfolio portfolio;
  std::vector<EltSource> elts;  // unique by elt_id, first-reference order
  friend bool operator==(const PortfolioConfig&, const PortfolioConfig&) = default;
};

/// JSON portfolio config:
///
///   { "portfolio": 1,
///     "programs": [ { "id": 1,
///       "layers": [ { "id": 1,
///         "elt_files": [ { "id": 1, "file": "elt_1.csv",
///                          "terms": { "retention": 0, "limit": "inf" } } ],
///         "occurrence": { "retention": 0, "limit": 5e6 },
///         "aggregate":  { "retention": 0, "limit": "inf" } } ] } ] }
///
/// "terms" is optional (identity). Limits accept a number or "inf".
[[nodiscard]] PortfolioConfig read_portfolio_config(std::istream& source);
[[nodiscard]] PortfolioConfig read_portfolio_config_file(const std::filesystem::path& path);
void write_portfolio_config(const PortfolioConfig& config, std::ostream& sink);

/// Loads every ELT of `config`, resolving file names against `base_dir`.
[[nodiscard]] std::vector<EventLossTable> load_elts(const PortfolioConfig& config,
                                                    const std::filesystem::path& base_dir);

}  // namespace agrisk
