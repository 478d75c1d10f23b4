#pragma once

#include <cstddef>
#include <cstdint>
#include <future>
#include <map>
#include <mutex>
#include <vector>

#include <Eigen/Core>

#include "anovagp/simulator.hpp"

namespace anovagp {

/// Memoizes simulator outputs by input point. Keys are the bit patterns of
/// the coordinates with -0.0 folded into 0.0. Concurrent requests for the same
/// point trigger a single evaluation and all observe its result.
class SimCache {
 public:
  explicit SimCache(SimulatorPtr simulator);

  /// Output at `xi`; evaluates on a miss. Simulator exceptions are rethrown
  /// as SimulatorError carrying `xi`, and the failed entry is dropped.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& xi);

  const Simulator& simulator() const { return *simulator_; }
  const SimulatorPtr& simulator_ptr() const { return simulator_; }

  /// Number of simulator evaluations performed (distinct keys requested).
  std::size_t misses() const;
  std::size_t hits() const;
  std::size_t size() const;

 private:
  using Key = std::vector<std::uint64_t>;
  static Key make_key(const Eigen::VectorXd& xi);

  SimulatorPtr simulator_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_future<Eigen::VectorXd>> entries_;
  std::size_t misses_ = 0;
  std::size_t hits_ = 0;
};

}  // namespace anovagp
