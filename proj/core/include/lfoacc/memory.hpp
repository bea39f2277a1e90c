#pragma once

#include <atomic>
#include <cstddef>
#include <new>
#include <vector>

namespace lfoacc {

/// Process-wide byte counter for the buffers the cost constructors allocate.
/// Only containers using AccountedAllocator are tracked; this is how the
/// benchmark reports peak auxiliary memory without relying on OS RSS.
class AllocationAccount {
 public:
  static AllocationAccount& global() noexcept;

  void on_allocate(std::size_t bytes) noexcept;
  void on_deallocate(std::size_t bytes) noexcept;

  std::size_t current_bytes() const noexcept {
    return current_.load(std::memory_order_relaxed);
  }
  std::size_t peak_bytes() const noexcept {
    return peak_.load(std::memory_order_relaxed);
  }
  /// Forget history: the peak restarts from the currently live bytes.
  void reset_peak() noexcept;

 private:
  std::atomic<std::size_t> current_{0};
  std::atomic<std::size_t> peak_{0};
};

template <class T>
struct AccountedAllocator {
  using value_type = T;

  AccountedAllocator() noexcept = default;
  template <class U>
  AccountedAllocator(const AccountedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    auto* p = static_cast<T*>(::operator new(n * sizeof(T)));
    AllocationAccount::global().on_allocate(n * sizeof(T));
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    AllocationAccount::global().on_deallocate(n * sizeof(T));
    ::operator delete(p);
  }

  template <class U>
  bool operator==(const AccountedAllocator<U>&) const noexcept { return true; }
};

template <class T>
using AccountedVector = std::vector<T, AccountedAllocator<T>>;

/// Measures the peak of accounted bytes allocated above the level live at
/// construction.
class PeakScope {
 public:
  PeakScope() noexcept
      : baseline_(AllocationAccount::global().current_bytes()) {
    AllocationAccount::global().reset_peak();
  }
  std::size_t peak_above_baseline() const noexcept {
    const auto peak = AllocationAccount::global().peak_bytes();
    return peak > baseline_ ? peak - baseline_ : 0;
  }

 private:
  std::size_t baseline_;
};

}  // namespace lfoacc
