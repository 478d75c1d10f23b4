#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace anovagp {

/// A set of input coordinates t. Coordinates are stored zero-based and
/// strictly increasing; `to_string` renders them one-based, e.g. "{1,3}".
/// The empty index is the anchored constant term.
class AnovaIndex {
 public:
  AnovaIndex() = default;

  /// Sorts and validates; throws std::invalid_argument on duplicates.
  explicit AnovaIndex(std::vector<std::size_t> coords);
  AnovaIndex(std::initializer_list<std::size_t> coords)
      : AnovaIndex(std::vector<std::size_t>(coords)) {}

  /// Builds an index from one-based coordinates.
  static AnovaIndex from_one_based(const std::vector<std::size_t>& coords);

  std::size_t order() const { return coords_.size(); }
  bool empty() const { return coords_.empty(); }
  const std::vector<std::size_t>& coords() const { return coords_; }
  std::size_t operator[](std::size_t k) const { return coords_[k]; }

  bool contains(std::size_t coord) const;
  /// Largest coordinate + 1, or 0 for the empty index.
  std::size_t span() const { return coords_.empty() ? 0 : coords_.back() + 1; }

  AnovaIndex with(std::size_t coord) const;
  AnovaIndex without(std::size_t coord) const;

  /// All subsets of this index ordered by index_order, including
  /// the empty set and the index itself.
  std::vector<AnovaIndex> subsets() const;

  std::string to_string() const;

  bool operator==(const AnovaIndex&) const = default;

 private:
  std::vector<std::size_t> coords_;
};

/// Alphabetical term ordering: lower order first, then lexicographic on
/// the sorted coordinates.
std::strong_ordering index_order(const AnovaIndex& a, const AnovaIndex& b);

struct IndexLess {
  bool operator()(const AnovaIndex& a, const AnovaIndex& b) const {
    return index_order(a, b) < 0;
  }
};

}  // namespace anovagp
