#include "agrisk/lookup.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace agrisk {

std::string_view to_string(Precision p) noexcept {
  return p == Precision::wide ? "wide" : "narrow";
}

Precision parse_precision(std::string_view name) {
  if (name == "wide" || name == "double") return Precision::wide;
  if (name == "narrow" || name == "float") return Precision::narrow;
  throw InvalidArgument("unknown precision \"" + std::string(name) + "\" (expected wide|narrow)");
}

std::string_view to_string(LayoutKind k) noexcept {
  switch (k) {
    case LayoutKind::direct: return "direct";
    case LayoutKind::combined: return "combined";
    case LayoutKind::sorted: return "sorted";
    case LayoutKind::hash: return "hash";
  }
  return "unknown";
}

LayoutKind parse_layout(std::string_view name) {
  for (auto k : kAllLayouts) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown layout \"" + std::string(name) +
                        "\" (expected direct|combined|sorted|hash)");
}

template <std::floating_point Real>
LookupBase<Real>::LookupBase(std::span<const EventLossTable* const> elts,
                             std::uint32_t catalog_size)
    : catalog_size_(catalog_size) {
  if (catalog_size == 0) throw InvalidArgument("build_layout: catalog_size must be >= 1");
  if (elts.empty()) throw InvalidArgument("build_layout: no ELTs given");
  terms_.reserve(elts.size());
  for (const auto* elt : elts) {
    if (elt->max_event() > catalog_size) {
      throw InvalidArgument("build_layout: ELT " + std::to_string(elt->id()) + " holds event " +
                            std::to_string(elt->max_event()) + " beyond catalog size " +
                            std::to_string(catalog_size));
    }
    terms_.emplace_back(elt->terms());
    source_terms_.push_back(elt->terms());
  }
}

template <std::floating_point Real>
DirectAccessTable<Real>::DirectAccessTable(std::span<const EventLossTable* const> elts,
                                           std::uint32_t catalog_size)
    : LookupBase<Real>(elts, catalog_size) {
  tables_.reserve(elts.size());
  for (const auto* elt : elts) {
    std::vector<Real> dense(static_cast<std::size_t>(catalog_size) + 1, Real{0});
    for (const auto& e : elt->entries()) dense[e.event] = static_cast<Real>(e.loss);
    tables_.push_back(std::move(dense));
  }
}

template <std::floating_point Real>
std::size_t DirectAccessTable<Real>::footprint_bytes() const noexcept {
  return tables_.size() * (static_cast<std::size_t>(this->catalog_size_) + 1) * sizeof(Real);
}

template <std::floating_point Real>
std::size_t DirectAccessTable<Real>::absent_entry_count() const noexcept {
  std::size_t zeros = 0;
  for (const auto& t : tables_) {
    zeros += static_cast<std::size_t>(std::count(t.begin() + 1, t.end(), Real{0}));
  }
  return zeros;
}

template <std::floating_point Real>
CombinedTable<Real>::CombinedTable(std::span<const EventLossTable* const> elts,
                                   std::uint32_t catalog_size)
    : LookupBase<Real>(elts, catalog_size) {
  const std::size_t n = elts.size();
  cells_.assign((static_cast<std::size_t>(catalog_size) + 1) * n, Real{0});
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& e : elts[j]->entries()) {
      cells_[static_cast<std::size_t>(e.event) * n + j] = static_cast<Real>(e.loss);
    }
  }
}

template <std::floating_point Real>
SortedArrayTable<Real>::SortedArrayTable(std::span<const EventLossTable* const> elts,
                                         std::uint32_t catalog_size)
    : LookupBase<Real>(elts, catalog_size) {
  columns_.reserve(elts.size());
  for (const auto* elt : elts) {
    Column c;
    c.events.reserve(elt->size());
    c.losses.reserve(elt->size());
    for (const auto& e : elt->entries()) {  // entries are already ascending
      c.events.push_back(e.event);
      c.losses.push_back(static_cast<Real>(e.loss));
    }
    columns_.push_back(std::move(c));
  }
}

template <std::floating_point Real>
Real SortedArrayTable<Real>::loss(std::uint32_t event, std::size_t elt) const noexcept {
  const Column& c = columns_[elt];
  const auto it = std::lower_bound(c.events.begin(), c.events.end(), event);
  if (it == c.events.end() || *it != event) return Real{0};
  return c.losses[static_cast<std::size_t>(it - c.events.begin())];
}

template <std::floating_point Real>
std::size_t SortedArrayTable<Real>::footprint_bytes() const noexcept {
  std::size_t bytes = 0;
  for (const auto& c : columns_) bytes += c.events.size() * (sizeof(std::uint32_t) + sizeof(Real));
  return bytes;
}

template <std::floating_point Real>
HashTable<Real>::HashTable(std::span<const EventLossTable* const> elts, std::uint32_t catalog_size)
    : LookupBase<Real>(elts, catalog_size) {
  buckets_.reserve(elts.size());
  for (const auto* elt : elts) {
    Bucket b;
    const std::size_t capacity = std::bit_ceil(std::max<std::size_t>(2 * elt->size(), 2));
    b.mask = static_cast<std::uint32_t>(capacity - 1);
    b.keys.assign(capacity, 0);
    b.values.assign(capacity, Real{0});
    for (const auto& e : elt->entries()) {
      std::uint32_t s = slot_of(e.event, b.mask);
      while (b.keys[s] != 0) s = (s + 1) & b.mask;
      b.keys[s] = e.event;
      b.values[s] = static_cast<Real>(e.loss);
    }
    buckets_.push_back(std::move(b));
  }
}

template <std::floating_point Real>
Real HashTable<Real>::loss(std::uint32_t event, std::size_t elt) const noexcept {
  const Bucket& b = buckets_[elt];
  std::uint32_t s = slot_of(event, b.mask);
  while (true) {
    const std::uint32_t key = b.keys[s];
    if (key == event) return b.values[s];
    if (key == 0) return Real{0};
    s = (s + 1) & b.mask;
  }
}

template <std::floating_point Real>
std::size_t HashTable<Real>::footprint_bytes() const noexcept {
  std::size_t bytes = 0;
  for (const auto& b : buckets_) bytes += b.keys.size() * (sizeof(std::uint32_t) + sizeof(Real));
  return bytes;
}

template class LookupBase<double>;
template class LookupBase<float>;
template class DirectAccessTable<double>;
template class DirectAccessTable<float>;
template class CombinedTable<double>;
template class CombinedTable<float>;
template class SortedArrayTable<double>;
template class SortedArrayTable<float>;
template class HashTable<double>;
template class HashTable<float>;

namespace {

template <std::floating_point Real>
LossLookupOf<Real> build_typed(std::span<const EventLossTable* const> elts,
                               std::uint32_t catalog_size, LayoutKind kind) {
  switch (kind) {
    case LayoutKind::direct: return DirectAccessTable<Real>(elts, catalog_size);
    case LayoutKind::combined: return CombinedTable<Real>(elts, catalog_size);
    case LayoutKind::sorted: return SortedArrayTable<Real>(elts, catalog_size);
    case LayoutKind::hash: return HashTable<Real>(elts, catalog_size);
  }
  throw InvalidArgument("build_layout: unknown layout kind");
}

template <class F>
decltype(auto) visit_any(const LossLookup& t, F&& f) {
  return std::visit([&](const auto& typed) -> decltype(auto) { return std::visit(f, typed); },
                    t.variant());
}

}  // namespace

LayoutKind LossLookup::kind() const noexcept {
  // Alternatives are declared in LayoutKind order.
  const std::size_t index = std::visit([](const auto& typed) { return typed.index(); }, table_);
  return kAllLayouts[index];
}

std::size_t LossLookup::num_elts() const noexcept {
  return visit_any(*this, [](const auto& t) { return t.num_elts(); });
}

std::uint32_t LossLookup::catalog_size() const noexcept {
  return visit_any(*this, [](const auto& t) { return t.catalog_size(); });
}

LossLookup build_layout(std::span<const EventLossTable* const> elts, std::uint32_t catalog_size,
                        LayoutKind kind, Precision precision) {
  if (precision == Precision::wide) return LossLookup(build_typed<double>(elts, catalog_size, kind));
  return LossLookup(build_typed<float>(elts, catalog_size, kind));
}

LossLookup build_layout(std::span<const EventLossTable> elts, std::uint32_t catalog_size,
                        LayoutKind kind, Precision precision) {
  std::vector<const EventLossTable*> ptrs;
  ptrs.reserve(elts.size());
  for (const auto& e : elts) ptrs.push_back(&e);
  return build_layout(std::span<const EventLossTable* const>(ptrs), catalog_size, kind, precision);
}

double lookup_loss(const LossLookup& table, EventId event, std::size_t elt_index) {
  if (event.value == 0 || event.value > table.catalog_size()) {
    throw std::out_of_range("lookup_loss: event " + std::to_string(event.value) +
                            " outside [1, " + std::to_string(table.catalog_size()) + "]");
  }
  if (elt_index >= table.num_elts()) {
    throw std::out_of_range("lookup_loss: ELT index " + std::to_string(elt_index) +
                            " >= " + std::to_string(table.num_elts()));
  }
  return visit_any(table, [&](const auto& t) -> double { return t.loss(event.value, elt_index); });
}

std::size_t memory_footprint(const LossLookup& table) noexcept {
  return visit_any(table, [](const auto& t) { return t.footprint_bytes(); });
}

}  // namespace agrisk
