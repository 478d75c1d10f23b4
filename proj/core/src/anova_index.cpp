#include "anovagp/anova_index.hpp"

#include <algorithm>
#include <stdexcept>

namespace anovagp {

AnovaIndex::AnovaIndex(std::vector<std::size_t> coords) : coords_(std::move(coords)) {
  std::sort(coords_.begin(), coords_.end());
  if (std::adjacent_find(coords_.begin(), coords_.end()) != coords_.end()) {
    throw std::invalid_argument("AnovaIndex: duplicate coordinate");
  }
}

AnovaIndex AnovaIndex::from_one_based(const std::vector<std::size_t>& coords) {
  std::vector<std::size_t> zero_based;
  zero_based.reserve(coords.size());
  for (std::size_t c : coords) {
    if (c == 0) throw std::invalid_argument("AnovaIndex: one-based coordinate 0");
    zero_based.push_back(c - 1);
  }
  return AnovaIndex(std::move(zero_based));
}

bool AnovaIndex::contains(std::size_t coord) const {
  return std::binary_search(coords_.begin(), coords_.end(), coord);
}

AnovaIndex AnovaIndex::with(std::size_t coord) const {
  std::vector<std::size_t> c = coords_;
  c.push_back(coord);
  return AnovaIndex(std::move(c));
}

AnovaIndex AnovaIndex::without(std::size_t coord) const {
  std::vector<std::size_t> c;
  c.reserve(coords_.size());
  for (std::size_t x : coords_) {
    if (x != coord) c.push_back(x);
  }
  AnovaIndex out;
  out.coords_ = std::move(c);
  return out;
}

std::vector<AnovaIndex> AnovaIndex::subsets() const {
  const std::size_t n = coords_.size();
  std::vector<AnovaIndex> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    AnovaIndex s;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) s.coords_.push_back(coords_[k]);
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), IndexLess{});
  return out;
}

std::string AnovaIndex::to_string() const {
  std::string s = "{";
  for (std::size_t k = 0; k < coords_.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(coords_[k] + 1);
  }
  s += '}';
  return s;
}

std::strong_ordering index_order(const AnovaIndex& a, const AnovaIndex& b) {
  if (auto c = a.order() <=> b.order(); c != 0) return c;
  return a.coords() <=> b.coords();
}

}  // namespace anovagp
