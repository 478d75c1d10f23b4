#include "anovagp/sim_cache.hpp"

#include <bit>
#include <exception>
#include <stdexcept>

#include "anovagp/errors.hpp"

namespace anovagp {

SimCache::SimCache(SimulatorPtr simulator) : simulator_(std::move(simulator)) {
  if (!simulator_) throw std::invalid_argument("SimCache: null simulator");
}

SimCache::Key SimCache::make_key(const Eigen::VectorXd& xi) {
  Key key(static_cast<std::size_t>(xi.size()));
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double v = xi(i) == 0.0 ? 0.0 : xi(i);
    key[static_cast<std::size_t>(i)] = std::bit_cast<std::uint64_t>(v);
  }
  return key;
}

Eigen::VectorXd SimCache::evaluate(const Eigen::VectorXd& xi) {
  Key key = make_key(xi);
  std::promise<Eigen::VectorXd> promise;
  std::shared_future<Eigen::VectorXd> result;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      result = it->second;
    } else {
      ++misses_;
      result = promise.get_future().share();
      entries_.emplace(key, result);
      owner = true;
    }
  }
  if (owner) {
    try {
      promise.set_value(simulator_->evaluate(xi));
    } catch (const std::exception& e) {
      {
        std::lock_guard lock(mutex_);
        entries_.erase(key);
      }
      promise.set_exception(std::make_exception_ptr(
          SimulatorError(simulator_->name() + " failed: " + e.what(), xi)));
    }
  }
  return result.get();
}

std::size_t SimCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

std::size_t SimCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t SimCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace anovagp
