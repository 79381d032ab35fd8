#pragma once

#include <atomic>
#include <cstdint>

namespace ffbt {

/// Version word with an embedded exclusive-lock bit, as used by optimistic
/// lock coupling. Bit 0 is the lock; the remaining bits count committed writes.
class VersionLock {
 public:
  static constexpr std::uint64_t kLockBit = 1;

  static constexpr bool is_locked(std::uint64_t word) noexcept { return (word & kLockBit) != 0; }

  std::uint64_t load() const noexcept { return word_.load(std::memory_order_acquire); }

  /// Number of committed write phases that touched this node.
  std::uint64_t counter() const noexcept { return load() >> 1; }

  /// True iff nothing was committed or locked since `observed` was loaded.
  bool validate(std::uint64_t observed) const noexcept {
    std::atomic_thread_fence(std::memory_order_acquire);
    return word_.load(std::memory_order_relaxed) == observed;
  }

  /// Locks only if the word still equals `observed` (which must be unlocked).
  bool try_upgrade(std::uint64_t observed) noexcept {
    if (is_locked(observed)) return false;
    return word_.compare_exchange_strong(observed, observed | kLockBit, std::memory_order_acquire,
                                         std::memory_order_relaxed);
  }

  /// Releases the lock and bumps the version.
  void unlock_committed() noexcept { word_.fetch_add(kLockBit, std::memory_order_release); }

  /// Releases the lock without bumping the version (nothing was modified).
  void unlock_unchanged() noexcept { word_.fetch_sub(kLockBit, std::memory_order_release); }

 private:
  std::atomic<std::uint64_t> word_{0};
};

}  // namespace ffbt
