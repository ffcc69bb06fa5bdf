#include "agrisk/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace agrisk {

namespace {

// Little-endian helpers, independent of host byte order.
template <class UInt>
void put_le(char* dst, UInt v) noexcept {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    dst[i] = static_cast<char>(static_cast<unsigned char>(v >> (8 * i)));
  }
}

template <class UInt>
UInt get_le(const char* src) noexcept {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    v |= static_cast<UInt>(static_cast<unsigned char>(src[i])) << (8 * i);
  }
  return v;
}

// Events are decoded through a fixed block so the reader never holds a raw
// copy of a whole trial next to the decoded one.
constexpr std::size_t kDecodeBlockEvents = 512;

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

// Reads lines, tracking 1-based line numbers. Returns false at end of input.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool next(std::string& line) {
    if (!std::getline(in_, line)) {
      if (in_.bad()) throw IoError("read failure after line " + std::to_string(line_));
      return false;
    }
    ++line_;
    return true;
  }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

void expect_header(LineReader& lines, std::string_view expected) {
  std::string line;
  if (!lines.next(line)) throw CsvError(1, "missing header line \"" + std::string(expected) + "\"");
  if (trim(line) != expected) {
    throw CsvError(1, "expected header \"" + std::string(expected) + "\", got \"" + line + "\"");
  }
}

void check_sink(const std::ostream& sink, const char* what) {
  if (!sink) throw IoError(std::string("write failure: ") + what);
}

}  // namespace

YetFormatError::YetFormatError(Kind kind, std::uint64_t offset, const std::string& what)
    : Error(what + " (byte offset " + std::to_string(offset) + ")"), kind_(kind), offset_(offset) {}

CsvError::CsvError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

ConfigError::ConfigError(std::string path, const std::string& what)
    : Error(path + ": " + what), path_(std::move(path)) {}

std::uint64_t write_yet(const YearEventTable& yet, std::ostream& sink) {
  if (yet.empty()) throw InvalidArgument("write_yet: a YET needs at least one trial");
  if (auto violations = validate_yet(yet); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }

  char header[kYetHeaderBytes];
  std::copy(kYetMagic.begin(), kYetMagic.end(), header);
  put_le<std::uint32_t>(header + 8, kYetVersion);
  put_le<std::uint64_t>(header + 12, yet.num_trials());
  put_le<std::uint32_t>(header + 20, yet.catalog_size());
  put_le<std::uint64_t>(header + 24, yet.events_total());
  sink.write(header, sizeof header);
  std::uint64_t written = sizeof header;

  std::vector<char> block(kDecodeBlockEvents * kYetEventBytes);
  for (std::size_t i = 0; i < yet.num_trials(); ++i) {
    const TrialView t = yet.trial(i);
    char trial_header[kYetTrialHeaderBytes];
    put_le<std::uint64_t>(trial_header, t.trial_id);
    put_le<std::uint32_t>(trial_header + 8, static_cast<std::uint32_t>(t.size()));
    sink.write(trial_header, sizeof trial_header);
    for (std::size_t k = 0; k < t.size(); k += kDecodeBlockEvents) {
      const std::size_t n = std::min(kDecodeBlockEvents, t.size() - k);
      for (std::size_t j = 0; j < n; ++j) {
        put_le<std::uint32_t>(block.data() + j * 8, t.events[k + j]);
        put_le<std::uint32_t>(block.data() + j * 8 + 4, std::bit_cast<std::uint32_t>(t.timestamps[k + j]));
      }
      sink.write(block.data(), static_cast<std::streamsize>(n * kYetEventBytes));
    }
    written += kYetTrialHeaderBytes + t.size() * kYetEventBytes;
  }
  check_sink(sink, "YET stream");
  return written;
}

void write_yet_file(const YearEventTable& yet, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_yet(yet, out);
  out.flush();
  check_sink(out, path.string().c_str());
}

YetReader::YetReader(std::istream& source) : in_(source) {
  char header[kYetHeaderBytes];
  read_exact(header, sizeof header, "header");
  if (!std::equal(kYetMagic.begin(), kYetMagic.end(), header)) {
    throw YetFormatError(YetFormatError::Kind::bad_magic, 0, "not a YET file: bad magic");
  }
  header_.version = get_le<std::uint32_t>(header + 8);
  if (header_.version != kYetVersion) {
    throw YetFormatError(YetFormatError::Kind::version_mismatch, 8,
                         "unsupported YET version " + std::to_string(header_.version));
  }
  header_.num_trials = get_le<std::uint64_t>(header + 12);
  header_.catalog_size = get_le<std::uint32_t>(header + 20);
  header_.events_total = get_le<std::uint64_t>(header + 24);
  if (header_.num_trials == 0) {
    throw YetFormatError(YetFormatError::Kind::count_mismatch, 12,
                         "header declares zero trials");
  }
}

void YetReader::read_exact(char* dst, std::size_t n, const char* what) {
  in_.read(dst, static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got != n) {
    if (in_.bad()) throw IoError("read failure in YET " + std::string(what));
    throw YetFormatError(YetFormatError::Kind::truncated, offset_ + got,
                         std::string("truncated YET while reading ") + what);
  }
  offset_ += n;
}

bool YetReader::next(TrialView& out) {
  if (trials_read_ == header_.num_trials) {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw YetFormatError(YetFormatError::Kind::count_mismatch, offset_,
                           "trailing bytes after the declared " +
                               std::to_string(header_.num_trials) + " trials");
    }
    if (events_read_ != header_.events_total) {
      throw YetFormatError(YetFormatError::Kind::count_mismatch, offset_,
                           "header declares " + std::to_string(header_.events_total) +
                               " events, body holds " + std::to_string(events_read_));
    }
    return false;
  }

  char trial_header[kYetTrialHeaderBytes];
  const std::uint64_t trial_offset = offset_;
  read_exact(trial_header, sizeof trial_header, "trial header");
  const auto trial_id = get_le<std::uint64_t>(trial_header);
  const auto count = get_le<std::uint32_t>(trial_header + 8);
  if (events_read_ + count > header_.events_total) {
    throw YetFormatError(YetFormatError::Kind::count_mismatch, trial_offset,
                         "trial " + std::to_string(trial_id) + " exceeds declared events_total");
  }

  events_.resize(count);
  timestamps_.resize(count);
  char block[kDecodeBlockEvents * kYetEventBytes];
  for (std::size_t k = 0; k < count; k += kDecodeBlockEvents) {
    const std::size_t n = std::min<std::size_t>(kDecodeBlockEvents, count - k);
    read_exact(block, n * kYetEventBytes, "event records");
    for (std::size_t j = 0; j < n; ++j) {
      events_[k + j] = get_le<std::uint32_t>(block + j * 8);
      timestamps_[k + j] = std::bit_cast<float>(get_le<std::uint32_t>(block + j * 8 + 4));
    }
  }
  ++trials_read_;
  events_read_ += count;
  out = TrialView{trial_id, events_, timestamps_};
  return true;
}

std::size_t YetReader::buffer_capacity_bytes() const noexcept {
  return events_.capacity() * sizeof(std::uint32_t) + timestamps_.capacity() * sizeof(float);
}

YearEventTable read_yet(std::istream& source) {
  YetReader reader(source);
  const auto& h = reader.header();
  YearEventTable yet(h.catalog_size);
  // Header counts are untrusted until the body confirms them.
  constexpr std::uint64_t kReserveCap = std::uint64_t{1} << 24;
  yet.reserve(std::min(h.num_trials, kReserveCap), std::min(h.events_total, kReserveCap));
  TrialView t;
  while (reader.next(t)) yet.add_trial(t.trial_id, t.events, t.timestamps);
  if (auto violations = validate_yet(yet); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  return yet;
}

YearEventTable read_yet_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_yet(in);
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_elt_csv(const EventLossTable& elt, std::ostream& sink) {
  sink << "event_id,loss\n";
  for (const auto& e : elt.entries()) sink << e.event << ',' << format_real(e.loss) << '\n';
  check_sink(sink, "ELT CSV");
}

EventLossTable read_elt_csv(std::istream& source, std::uint32_t elt_id, EltTerms terms) {
  LineReader lines(source);
  expect_header(lines, "event_id,loss");
  std::vector<EventLoss> entries;
  std::unordered_map<std::uint32_t, std::size_t> first_line;
  std::string line;
  while (lines.next(line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    EventLoss row;
    if (fields.size() != 2 || !parse_int(fields[0], row.event) || !parse_real(fields[1], row.loss)) {
      throw CsvError(lines.line(), "malformed row \"" + line + "\"");
    }
    if (row.event == 0) throw CsvError(lines.line(), "event_id must be >= 1");
    if (!(row.loss > 0.0) || !std::isfinite(row.loss)) {
      throw CsvError(lines.line(), "loss must be positive and finite");
    }
    if (auto [it, inserted] = first_line.emplace(row.event, lines.line()); !inserted) {
      throw CsvError(lines.line(), "duplicate event_id " + std::to_string(row.event) +
                                       " (first seen on line " + std::to_string(it->second) + ")");
    }
    entries.push_back(row);
  }
  return EventLossTable(elt_id, std::move(entries), terms);
}

void write_ylt_csv(const YearLossTable& ylt, std::ostream& sink) {
  if (ylt.empty()) throw InvalidArgument("write_ylt_csv: empty YLT");
  if (ylt.trial_ids.size() != ylt.losses.size()) {
    throw InvalidArgument("write_ylt_csv: trial_ids and losses differ in length");
  }
  std::string out = "trial_id,loss\n";
  out.reserve(out.size() + ylt.size() * 24);
  char buf[64];
  for (std::size_t i = 0; i < ylt.size(); ++i) {
    auto r = std::to_chars(buf, buf + sizeof buf, ylt.trial_ids[i]);
    *r.ptr++ = ',';
    r = std::to_chars(r.ptr, buf + sizeof buf, ylt.losses[i]);
    *r.ptr++ = '\n';
    out.append(buf, r.ptr);
  }
  sink << out;
  check_sink(sink, "YLT CSV");
}

void write_ylt_file(const YearLossTable& ylt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_ylt_csv(ylt, out);
  out.flush();
  check_sink(out, path.string().c_str());
}

YearLossTable read_ylt_csv(std::istream& source) {
  LineReader lines(source);
  expect_header(lines, "trial_id,loss");
  YearLossTable ylt;
  std::string line;
  while (lines.next(line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    std::uint64_t id = 0;
    double loss = 0.0;
    if (fields.size() != 2 || !parse_int(fields[0], id) || !parse_real(fields[1], loss)) {
      throw CsvError(lines.line(), "malformed row \"" + line + "\"");
    }
    if (!(loss >= 0.0) || !std::isfinite(loss)) {
      throw CsvError(lines.line(), "loss must be finite and >= 0");
    }
    ylt.trial_ids.push_back(id);
    ylt.losses.push_back(loss);
  }
  return ylt;
}

YearLossTable read_ylt_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_ylt_csv(in);
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key, "missing key");
  return *it;
}

std::uint32_t read_id(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0 ||
      v.get<std::uint64_t>() > 0xffffffffULL) {
    throw ConfigError(path, "expected a positive integer id");
  }
  return v.get<std::uint32_t>();
}

double read_amount(const json& v, const std::string& path, bool allow_inf) {
  if (allow_inf && v.is_string() && v.get<std::string>() == "inf") return kUnlimited;
  if (!v.is_number()) {
    throw ConfigError(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
  }
  return v.get<double>();
}

template <class Terms>
Terms read_terms(const json& obj, const std::string& path) {
  Terms t;
  t.retention = read_amount(require(obj, "retention", path), path + ".retention", false);
  t.limit = read_amount(require(obj, "limit", path), path + ".limit", true);
  if (!(t.retention >= 0.0)) throw ConfigError(path + ".retention", "must be >= 0");
  if (!(t.limit > 0.0)) throw ConfigError(path + ".limit", "must be > 0");
  return t;
}

template <class Terms>
json write_terms(const Terms& t) {
  json out = json::object();
  out["retention"] = t.retention;
  out["limit"] = std::isinf(t.limit) ? json("inf") : json(t.limit);
  return out;
}

const json& require_array(const json& obj, const char* key, const std::string& path,
                          std::size_t max_size) {
  const json& arr = require(obj, key, path);
  const std::string apath = path + "." + key;
  if (!arr.is_array()) throw ConfigError(apath, "expected an array");
  if (arr.empty()) throw ConfigError(apath, "must not be empty");
  if (arr.size() > max_size) {
    throw ConfigError(apath, "has " + std::to_string(arr.size()) + " entries, at most " +
                                 std::to_string(max_size) + " allowed");
  }
  return arr;
}

}  // namespace

PortfolioConfig read_portfolio_config(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  PortfolioConfig config;
  config.portfolio.portfolio_id = read_id(require(doc, "portfolio", "$"), "$.portfolio");
  std::unordered_map<std::uint32_t, std::size_t> elt_index;

  const json& programs = require_array(doc, "programs", "$", kMaxProgramsPerPortfolio);
  for (std::size_t p = 0; p < programs.size(); ++p) {
    const std::string ppath = "$.programs[" + std::to_string(p) + "]";
    Program program;
    program.program_id = read_id(require(programs[p], "id", ppath), ppath + ".id");
    const json& layers = require_array(programs[p], "layers", ppath, SIZE_MAX);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string lpath = ppath + ".layers[" + std::to_string(l) + "]";
      Layer layer;
      layer.layer_id = read_id(require(layers[l], "id", lpath), lpath + ".id");
      const json& files = require_array(layers[l], "elt_files", lpath, kMaxEltsPerLayer);
      for (std::size_t j = 0; j < files.size(); ++j) {
        const std::string epath = lpath + ".elt_files[" + std::to_string(j) + "]";
        EltSource src;
        src.elt_id = read_id(require(files[j], "id", epath), epath + ".id");
        const json& file = require(files[j], "file", epath);
        if (!file.is_string()) throw ConfigError(epath + ".file", "expected a string");
        src.file = file.get<std::string>();
        if (auto it = files[j].find("terms"); it != files[j].end()) {
          src.terms = read_terms<EltTerms>(*it, epath + ".terms");
        }
        if (auto it = elt_index.find(src.elt_id); it != elt_index.end()) {
          if (!(config.elts[it->second] == src)) {
            throw ConfigError(epath, "ELT " + std::to_string(src.elt_id) +
                                         " is referenced with a different file or terms");
          }
        } else {
          elt_index.emplace(src.elt_id, config.elts.size());
          config.elts.push_back(src);
        }
        layer.elt_refs.push_back(src.elt_id);
      }
      layer.occurrence = read_terms<OccurrenceTerms>(require(layers[l], "occurrence", lpath),
                                                     lpath + ".occurrence");
      layer.aggregate = read_terms<AggregateTerms>(require(layers[l], "aggregate", lpath),
                                                   lpath + ".aggregate");
      program.layers.push_back(std::move(layer));
    }
    config.portfolio.programs.push_back(std::move(program));
  }
  try {
    validate_portfolio(config.portfolio);
  } catch (const InvalidArgument& e) {
    throw ConfigError("$", e.what());
  }
  return config;
}

PortfolioConfig read_portfolio_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_portfolio_config(in);
}

void write_portfolio_config(const PortfolioConfig& config, std::ostream& sink) {
  std::unordered_map<std::uint32_t, const EltSource*> by_id;
  for (const auto& e : config.elts) by_id.emplace(e.elt_id, &e);

  json doc = json::object();
  doc["portfolio"] = config.portfolio.portfolio_id;
  json programs = json::array();
  for (const auto& program : config.portfolio.programs) {
    json layers = json::array();
    for (const auto& layer : program.layers) {
      json files = json::array();
      for (auto ref : layer.elt_refs) {
        auto it = by_id.find(ref);
        if (it == by_id.end()) {
          throw InvalidArgument("write_portfolio_config: no EltSource for ELT " +
                                std::to_string(ref));
        }
        files.push_back({{"id", ref}, {"file", it->second->file},
                         {"terms", write_terms(it->second->terms)}});
      }
      layers.push_back({{"id", layer.layer_id}, {"elt_files", files},
                        {"occurrence", write_terms(layer.occurrence)},
                        {"aggregate", write_terms(layer.aggregate)}});
    }
    programs.push_back({{"id", program.program_id}, {"layers", layers}});
  }
  doc["programs"] = programs;
  sink << doc.dump(2) << '\n';
  check_sink(sink, "portfolio config");
}

std::vector<EventLossTable> load_elts(const PortfolioConfig& config,
                                      const std::filesystem::path& base_dir) {
  std::vector<EventLossTable> elts;
  elts.reserve(config.elts.size());
  for (const auto& src : config.elts) {
    const auto path = base_dir / src.file;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ELT file " + path.string());
    try {
      elts.push_back(read_elt_csv(in, src.elt_id, src.terms));
    } catch (const CsvError& e) {
      throw CsvError(e.line(), path.string() + ": " + e.detail());
    }
  }
  return elts;
}

}  // namespace agrisk
