#include <gtest/gtest.h>

#include <algorithm>

#include "anovagp/anova_index.hpp"

using namespace anovagp;

TEST(AnovaIndex, SortsAndRejectsDuplicates) {
  const AnovaIndex t{3, 0, 2};
  EXPECT_EQ(t.coords(), (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_THROW(AnovaIndex({1, 1}), std::invalid_argument);
}

TEST(AnovaIndex, OneBasedRoundTrip) {
  const auto t = AnovaIndex::from_one_based({1, 3});
  EXPECT_EQ(t, (AnovaIndex{0, 2}));
  EXPECT_EQ(t.to_string(), "{1,3}");
  EXPECT_EQ(AnovaIndex{}.to_string(), "{}");
  EXPECT_THROW(AnovaIndex::from_one_based({0}), std::invalid_argument);
}

TEST(IndexOrder, OrderBeforeLexicographic) {
  // {2} before {1,2}
  EXPECT_TRUE(index_order(AnovaIndex::from_one_based({2}), AnovaIndex::from_one_based({1, 2})) < 0);
  // {1,3} before {1,4}
  EXPECT_TRUE(index_order(AnovaIndex::from_one_based({1, 3}), AnovaIndex::from_one_based({1, 4})) < 0);
  EXPECT_TRUE(index_order(AnovaIndex{0, 1}, AnovaIndex{0, 1}) == 0);
  EXPECT_TRUE(index_order(AnovaIndex{}, AnovaIndex{5}) < 0);
  EXPECT_TRUE(index_order(AnovaIndex{1, 2}, AnovaIndex{0, 3}) > 0);
}

TEST(IndexOrder, IsTotalOrderOnAllSubsets) {
  std::vector<AnovaIndex> all = AnovaIndex{0, 1, 2, 3}.subsets();
  ASSERT_EQ(all.size(), 16u);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end(), IndexLess{}));
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = 0; b < all.size(); ++b) {
      EXPECT_EQ(index_order(all[a], all[b]) == 0, a == b);
      EXPECT_EQ(index_order(all[a], all[b]) < 0, a < b);
    }
  }
}

TEST(AnovaIndex, SubsetsInIndexOrder) {
  const auto subs = AnovaIndex{1, 4}.subsets();
  ASSERT_EQ(subs.size(), 4u);
  EXPECT_EQ(subs[0], AnovaIndex{});
  EXPECT_EQ(subs[1], AnovaIndex{1});
  EXPECT_EQ(subs[2], AnovaIndex{4});
  EXPECT_EQ(subs[3], (AnovaIndex{1, 4}));
}

TEST(AnovaIndex, WithWithoutContains) {
  const AnovaIndex t{2, 5};
  EXPECT_TRUE(t.contains(5));
  EXPECT_FALSE(t.contains(3));
  EXPECT_EQ(t.with(3), (AnovaIndex{2, 3, 5}));
  EXPECT_EQ(t.without(2), AnovaIndex{5});
  EXPECT_EQ(t.span(), 6u);
  EXPECT_EQ(t[0], 2u);
  EXPECT_EQ(t.order(), 2u);
}
