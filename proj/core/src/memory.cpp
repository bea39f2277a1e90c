#include "lfoacc/memory.hpp"

#include "lfoacc/error.hpp"

namespace lfoacc {

AllocationAccount& AllocationAccount::global() noexcept {
  static AllocationAccount account;
  return account;
}

void AllocationAccount::on_allocate(std::size_t bytes) noexcept {
  const auto now = current_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  auto peak = peak_.load(std::memory_order_relaxed);
  while (now > peak && !peak_.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void AllocationAccount::on_deallocate(std::size_t bytes) noexcept {
  current_.fetch_sub(bytes, std::memory_order_relaxed);
}

void AllocationAccount::reset_peak() noexcept {
  peak_.store(current_.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::precondition: return "precondition violated";
    case ErrorCode::format: return "malformed input";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::missing_file: return "missing file";
    case ErrorCode::shape_mismatch: return "shape mismatch";
    case ErrorCode::verification: return "verification failed";
  }
  return "unknown error";
}

}  // namespace lfoacc
