#include <gtest/gtest.h>

#include <stdexcept>

#include "agrisk/datagen.hpp"
#include "agrisk/lookup.hpp"
#include "test_support.hpp"

namespace {

using namespace agrisk;
using agrisk::testing::linear_scan_loss;
using agrisk::testing::small_spec;

std::vector<EventLossTable> mixed_density_elts(std::uint32_t catalog) {
  std::vector<EventLossTable> elts;
  const std::size_t entries[] = {1, catalog / 100, catalog / 10, catalog / 2, catalog};
  std::uint32_t id = 1;
  for (std::size_t n : entries) {
    elts.push_back(generate_elt(small_spec(id * 13, 1, 1, catalog, n), id));
    ++id;
  }
  return elts;
}

TEST(Lookup, SingleEltExample) {
  const EventLossTable elt(1, {{42, 100.5}});
  for (auto kind : kAllLayouts) {
    const auto table = build_layout(std::span<const EventLossTable>(&elt, 1), 100, kind);
    EXPECT_EQ(table.kind(), kind);
    EXPECT_EQ(table.precision(), Precision::wide);
    EXPECT_EQ(lookup_loss(table, EventId{42}, 0), 100.5) << to_string(kind);
    EXPECT_EQ(lookup_loss(table, EventId{43}, 0), 0.0) << to_string(kind);
  }
}

// Every layout, both precisions, against a linear scan on every (e, j).
TEST(Lookup, ExhaustiveCrossLayoutSweep) {
  constexpr std::uint32_t kCatalog = 3000;
  const auto elts = mixed_density_elts(kCatalog);
  std::vector<std::vector<double>> expected(elts.size(), std::vector<double>(kCatalog + 1));
  for (std::size_t j = 0; j < elts.size(); ++j) {
    for (std::uint32_t e = 1; e <= kCatalog; ++e) expected[j][e] = linear_scan_loss(elts[j], e);
  }
  for (auto precision : {Precision::wide, Precision::narrow}) {
    for (auto kind : kAllLayouts) {
      const auto table = build_layout(elts, kCatalog, kind, precision);
      ASSERT_EQ(table.num_elts(), elts.size());
      ASSERT_EQ(table.catalog_size(), kCatalog);
      for (std::size_t j = 0; j < elts.size(); ++j) {
        for (std::uint32_t e = 1; e <= kCatalog; ++e) {
          const double want = precision == Precision::wide
                                  ? expected[j][e]
                                  : static_cast<double>(static_cast<float>(expected[j][e]));
          ASSERT_EQ(lookup_loss(table, EventId{e}, j), want)
              << to_string(kind) << " " << to_string(precision) << " e=" << e << " j=" << j;
        }
      }
    }
  }
}

TEST(Lookup, TermsCarriedInReferenceOrder) {
  auto elts = mixed_density_elts(200);
  elts[2].set_terms(EltTerms{5.0, 50.0});
  const std::vector<const EventLossTable*> reversed = {&elts[2], &elts[0]};
  const DirectAccessTable<double> t(reversed, 200);
  ASSERT_EQ(t.terms().size(), 2u);
  EXPECT_EQ(t.terms()[0].retention, 5.0);
  EXPECT_EQ(t.terms()[0].limit, 50.0);
  EXPECT_EQ(t.source_terms()[1], elts[0].terms());
}

TEST(Lookup, DenseInvariants) {
  const auto elts = mixed_density_elts(500);
  std::vector<const EventLossTable*> ptrs;
  for (const auto& e : elts) ptrs.push_back(&e);
  const DirectAccessTable<double> direct(ptrs, 500);
  const CombinedTable<double> combined(ptrs, 500);
  for (std::size_t j = 0; j < elts.size(); ++j) {
    EXPECT_EQ(direct.table(j)[0], 0.0);
    EXPECT_EQ(direct.table(j).size(), 501u);
    for (std::uint32_t e = 1; e <= 500; ++e) {
      ASSERT_EQ(direct.table(j)[e] > 0.0, elts[j].find(e).has_value());
      ASSERT_EQ(combined.row(e)[j], direct.table(j)[e]);
    }
  }
}

TEST(Lookup, FootprintFormulas) {
  const auto elt = generate_elt(small_spec(7, 1, 1, 100'000, 10'000), 1);
  const std::span<const EventLossTable> one(&elt, 1);
  EXPECT_EQ(memory_footprint(build_layout(one, 100'000, LayoutKind::direct)), 100'001u * 8);
  EXPECT_EQ(memory_footprint(build_layout(one, 100'000, LayoutKind::direct, Precision::narrow)),
            100'001u * 4);
  EXPECT_EQ(memory_footprint(build_layout(one, 100'000, LayoutKind::sorted)), 10'000u * (4 + 8));
  // 10,000 entries at load <= 1/2 need 2^15 slots.
  EXPECT_EQ(memory_footprint(build_layout(one, 100'000, LayoutKind::hash)), 32'768u * (4 + 8));

  const auto elts = mixed_density_elts(1000);
  std::size_t direct_sum = 0;
  for (const auto& e : elts) {
    direct_sum += memory_footprint(build_layout(std::span<const EventLossTable>(&e, 1), 1000,
                                                LayoutKind::direct));
  }
  EXPECT_EQ(memory_footprint(build_layout(elts, 1000, LayoutKind::combined)), direct_sum);
  EXPECT_EQ(memory_footprint(build_layout(elts, 1000, LayoutKind::direct)), direct_sum);
}

TEST(Lookup, HashSmallerThanDirectAtOnePercentDensity) {
  const auto elt = generate_elt(small_spec(7, 1, 1, 1'000'000, 10'000), 1);
  const std::span<const EventLossTable> one(&elt, 1);
  EXPECT_LT(memory_footprint(build_layout(one, 1'000'000, LayoutKind::hash)),
            memory_footprint(build_layout(one, 1'000'000, LayoutKind::direct)));
}

TEST(Lookup, AbsentEntriesForSixteenElts) {
  std::vector<EventLossTable> elts;
  for (std::uint32_t id = 1; id <= 16; ++id) {
    elts.push_back(generate_elt(small_spec(7, 1, 1, 1'000'000, 10'000), id));
  }
  std::vector<const EventLossTable*> ptrs;
  for (const auto& e : elts) ptrs.push_back(&e);
  const DirectAccessTable<double> table(ptrs, 1'000'000);
  EXPECT_EQ(table.absent_entry_count(), 15'840'000u);
  EXPECT_EQ(table.footprint_bytes(), 16u * 1'000'001u * 8u);
}

TEST(Lookup, BuildErrors) {
  const EventLossTable elt(1, {{42, 1.0}});
  const std::span<const EventLossTable> one(&elt, 1);
  EXPECT_THROW((void)build_layout(one, 0, LayoutKind::direct), InvalidArgument);
  EXPECT_THROW((void)build_layout(std::span<const EventLossTable>{}, 100, LayoutKind::hash),
               InvalidArgument);
  EXPECT_THROW((void)build_layout(one, 41, LayoutKind::sorted), InvalidArgument);
}

TEST(Lookup, LookupBoundsChecked) {
  const EventLossTable elt(1, {{42, 1.0}});
  const auto table = build_layout(std::span<const EventLossTable>(&elt, 1), 100, LayoutKind::direct);
  EXPECT_THROW((void)lookup_loss(table, EventId{0}, 0), std::out_of_range);
  EXPECT_THROW((void)lookup_loss(table, EventId{101}, 0), std::out_of_range);
  EXPECT_THROW((void)lookup_loss(table, EventId{42}, 1), std::out_of_range);
  EXPECT_EQ(lookup_loss(table, EventId{100}, 0), 0.0);
}

TEST(Lookup, NamesParse) {
  for (auto k : kAllLayouts) EXPECT_EQ(parse_layout(to_string(k)), k);
  EXPECT_THROW((void)parse_layout("btree"), InvalidArgument);
  EXPECT_EQ(parse_precision("wide"), Precision::wide);
  EXPECT_EQ(parse_precision("narrow"), Precision::narrow);
  EXPECT_THROW((void)parse_precision("half"), InvalidArgument);
}

}  // namespace
