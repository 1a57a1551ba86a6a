#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <iterator>

namespace lockctl {

inline constexpr int kMaxLocks = 64;

// Set of lock indices, packed in a 64-bit word.
class LockSet {
public:
  class iterator {
  public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = int;
    using difference_type = std::ptrdiff_t;
    using pointer = const int*;
    using reference = int;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}
    constexpr int operator*() const { return std::countr_zero(rest_); }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    constexpr bool operator==(const iterator&) const = default;

  private:
    std::uint64_t rest_ = 0;
  };

  constexpr LockSet() = default;
  static constexpr LockSet from_bits(std::uint64_t bits) { return LockSet(bits); }
  static constexpr LockSet single(int lock) { return LockSet(std::uint64_t{1} << lock); }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int lock) const { return (bits_ >> lock) & 1U; }
  constexpr bool subset_of(LockSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(LockSet other) const { return (bits_ & other.bits_) != 0; }
  // Smallest member, or -1.
  constexpr int first() const { return bits_ ? std::countr_zero(bits_) : -1; }

  constexpr LockSet& insert(int lock) {
    bits_ |= std::uint64_t{1} << lock;
    return *this;
  }
  constexpr LockSet& erase(int lock) {
    bits_ &= ~(std::uint64_t{1} << lock);
    return *this;
  }

  constexpr LockSet operator|(LockSet o) const { return LockSet(bits_ | o.bits_); }
  constexpr LockSet operator&(LockSet o) const { return LockSet(bits_ & o.bits_); }
  constexpr LockSet operator-(LockSet o) const { return LockSet(bits_ & ~o.bits_); }
  constexpr LockSet& operator|=(LockSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr LockSet& operator&=(LockSet o) {
    bits_ &= o.bits_;
    return *this;
  }
  constexpr LockSet& operator-=(LockSet o) {
    bits_ &= ~o.bits_;
    return *this;
  }

  constexpr iterator begin() const { return iterator(bits_); }
  constexpr iterator end() const { return iterator(0); }

  constexpr auto operator<=>(const LockSet&) const = default;

private:
  constexpr explicit LockSet(std::uint64_t bits) : bits_(bits) {}
  std::uint64_t bits_ = 0;
};

}  // namespace lockctl
