#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "agrisk/model.hpp"

namespace agrisk {

enum class Precision { wide, narrow };  // double / float

[[nodiscard]] std::string_view to_string(Precision p) noexcept;
/// Parses "wide" / "narrow"; throws InvalidArgument otherwise.
[[nodiscard]] Precision parse_precision(std::string_view name);

/// The four event-loss layouts of one layer.
///  direct   - one dense array per ELT, indexed by event id
///  combined - one dense row-major [catalog+1] x [num_elts] matrix
///  sorted   - per-ELT sorted (event, loss) arrays, binary search
///  hash     - per-ELT open-addressing table, linear probing
enum class LayoutKind { direct, combined, sorted, hash };

[[nodiscard]] std::string_view to_string(LayoutKind k) noexcept;
[[nodiscard]] LayoutKind parse_layout(std::string_view name);
inline constexpr LayoutKind kAllLayouts[] = {LayoutKind::direct, LayoutKind::combined,
                                            LayoutKind::sorted, LayoutKind::hash};

/// Shared bookkeeping: catalog size and the FT1 terms of each covered ELT,
/// in the order the layer references them.
template <std::floating_point Real>
class LookupBase {
 public:
  [[nodiscard]] std::uint32_t catalog_size() const noexcept { return catalog_size_; }
  [[nodiscard]] std::size_t num_elts() const noexcept { return terms_.size(); }
  [[nodiscard]] std::span<const ClampTerms<Real>> terms() const noexcept { return terms_; }
  [[nodiscard]] std::span<const EltTerms> source_terms() const noexcept { return source_terms_; }

 protected:
  LookupBase(std::span<const EventLossTable* const> elts, std::uint32_t catalog_size);

  std::uint32_t catalog_size_ = 0;
  std::vector<ClampTerms<Real>> terms_;
  std::vector<EltTerms> source_terms_;
};

/// Independent dense tables: table j has catalog_size + 1 slots, slot 0
/// unused, and 0 marks an absent event. One memory access per lookup.
template <std::floating_point Real>
class DirectAccessTable : public LookupBase<Real> {
 public:
  DirectAccessTable(std::span<const EventLossTable* const> elts, std::uint32_t catalog_size);

  [[nodiscard]] Real loss(std::uint32_t event, std::size_t elt) const noexcept {
    return tables_[elt][event];
  }
  [[nodiscard]] std::span<const Real> table(std::size_t elt) const noexcept { return tables_[elt]; }
  /// num_elts * (catalog_size + 1) * sizeof(Real)
  [[nodiscard]] std::size_t footprint_bytes() const noexcept;
  /// Zero slots over valid ids [1, catalog_size], summed across ELTs.
  [[nodiscard]] std::size_t absent_entry_count() const noexcept;

 private:
  std::vector<std::vector<Real>> tables_;
};

/// All ELTs of the layer in one matrix; row e holds event e's loss in every
/// ELT, so one trial event touches one contiguous row.
template <std::floating_point Real>
class CombinedTable : public LookupBase<Real> {
 public:
  CombinedTable(std::span<const EventLossTable* const> elts, std::uint32_t catalog_size);

  [[nodiscard]] Real loss(std::uint32_t event, std::size_t elt) const noexcept {
    return cells_[static_cast<std::size_t>(event) * this->num_elts() + elt];
  }
  [[nodiscard]] std::span<const Real> row(std::uint32_t event) const noexcept {
    return std::span<const Real>(cells_).subspan(static_cast<std::size_t>(event) * this->num_elts(),
                                                 this->num_elts());
  }
  /// (catalog_size + 1) * num_elts * sizeof(Real)
  [[nodiscard]] std::size_t footprint_bytes() const noexcept { return cells_.size() * sizeof(Real); }

 private:
  std::vector<Real> cells_;
};

/// Compact per-ELT arrays of ascending event ids with parallel losses.
template <std::floating_point Real>
class SortedArrayTable : public LookupBase<Real> {
 public:
  SortedArrayTable(std::span<const EventLossTable* const> elts, std::uint32_t catalog_size);

  [[nodiscard]] Real loss(std::uint32_t event, std::size_t elt) const noexcept;
  /// sum over ELTs of entries * (sizeof(uint32) + sizeof(Real))
  [[nodiscard]] std::size_t footprint_bytes() const noexcept;

 private:
  struct Column {
    std::vector<std::uint32_t> events;
    std::vector<Real> losses;
  };
  std::vector<Column> columns_;
};

/// Per-ELT open-addressing hash map. Capacity is the smallest power of two
/// holding entries at load factor <= 1/2; key 0 marks an empty slot.
template <std::floating_point Real>
class HashTable : public LookupBase<Real> {
 public:
  HashTable(std::span<const EventLossTable* const> elts, std::uint32_t catalog_size);

  [[nodiscard]] Real loss(std::uint32_t event, std::size_t elt) const noexcept;
  /// sum over ELTs of capacity * (sizeof(uint32) + sizeof(Real))
  [[nodiscard]] std::size_t footprint_bytes() const noexcept;

 private:
  struct Bucket {
    std::vector<std::uint32_t> keys;
    std::vector<Real> values;
    std::uint32_t mask = 0;
  };
  static std::uint32_t slot_of(std::uint32_t key, std::uint32_t mask) noexcept {
    return (key * 0x9e3779b1u) & mask;
  }
  std::vector<Bucket> buckets_;
};

template <std::floating_point Real>
using LossLookupOf = std::variant<DirectAccessTable<Real>, CombinedTable<Real>,
                                  SortedArrayTable<Real>, HashTable<Real>>;

/// A built layout at a given precision.
class LossLookup {
 public:
  using Wide = LossLookupOf<double>;
  using Narrow = LossLookupOf<float>;

  explicit LossLookup(Wide table) : table_(std::move(table)) {}
  explicit LossLookup(Narrow table) : table_(std::move(table)) {}

  [[nodiscard]] LayoutKind kind() const noexcept;
  [[nodiscard]] Precision precision() const noexcept {
    return std::holds_alternative<Wide>(table_) ? Precision::wide : Precision::narrow;
  }
  [[nodiscard]] std::size_t num_elts() const noexcept;
  [[nodiscard]] std::uint32_t catalog_size() const noexcept;

  [[nodiscard]] const std::variant<Wide, Narrow>& variant() const noexcept { return table_; }

 private:
  std::variant<Wide, Narrow> table_;
};

/// Builds `kind` over `elts` (in the given order) for events [1, catalog_size].
/// Throws InvalidArgument for an empty list, catalog_size 0, or an ELT
/// holding an event beyond the catalog.
[[nodiscard]] LossLookup build_layout(std::span<const EventLossTable> elts,
                                      std::uint32_t catalog_size, LayoutKind kind,
                                      Precision precision = Precision::wide);
[[nodiscard]] LossLookup build_layout(std::span<const EventLossTable* const> elts,
                                      std::uint32_t catalog_size, LayoutKind kind,
                                      Precision precision = Precision::wide);

/// Raw (pre-FT1) loss of `event` in ELT `elt_index`, 0 when absent.
/// Throws std::out_of_range for an event outside [1, catalog_size] or a bad index.
[[nodiscard]] double lookup_loss(const LossLookup& table, EventId event, std::size_t elt_index);

/// Exact payload bytes of the layout's arrays (see each layout's formula).
[[nodiscard]] std::size_t memory_footprint(const LossLookup& table) noexcept;

}  // namespace agrisk
