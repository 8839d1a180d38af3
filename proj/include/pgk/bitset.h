/**
 * bitset.h
 *
 * Copyright 2026. All Rights Reserved.
 */

#ifndef PGK_BITSET_H_
#define PGK_BITSET_H_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pgk {

/**
 * Runtime-sized bit vector. Bits past size() are kept zero so that word-wise
 * comparison and hashing are well defined.
 */
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  size_t size() const { return size_; }

  bool test(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

  void set(size_t i, bool value = true) {
    const uint64_t bit = uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= bit;
    } else {
      words_[i >> 6] &= ~bit;
    }
  }

  void reset(size_t i) { set(i, false); }
  void flip(size_t i) { words_[i >> 6] ^= uint64_t{1} << (i & 63); }

  size_t count() const {
    size_t n = 0;
    for (uint64_t w : words_) n += std::popcount(w);
    return n;
  }

  bool any() const {
    for (uint64_t w : words_) {
      if (w != 0) return true;
    }
    return false;
  }
  bool none() const { return !any(); }

  bool intersects(const Bitset& other) const {
    CheckSize(other);
    for (size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] & other.words_[i]) return true;
    }
    return false;
  }

  bool is_subset_of(const Bitset& other) const {
    CheckSize(other);
    for (size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] & ~other.words_[i]) return false;
    }
    return true;
  }

  Bitset& operator|=(const Bitset& other) {
    CheckSize(other);
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }

  Bitset& operator&=(const Bitset& other) {
    CheckSize(other);
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }

  // Set difference.
  Bitset& operator-=(const Bitset& other) {
    CheckSize(other);
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
  }

  Bitset operator~() const {
    Bitset out(size_);
    for (size_t i = 0; i < words_.size(); ++i) out.words_[i] = ~words_[i];
    out.TrimTail();
    return out;
  }

  friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
  friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
  friend Bitset operator-(Bitset a, const Bitset& b) { return a -= b; }

  bool operator==(const Bitset& other) const = default;

  // Calls f(i) for every set bit in increasing order.
  template <typename F>
  void for_each(F&& f) const {
    for (size_t w = 0; w < words_.size(); ++w) {
      uint64_t bits = words_[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        f(w * 64 + static_cast<size_t>(b));
        bits &= bits - 1;
      }
    }
  }

  std::vector<size_t> indices() const {
    std::vector<size_t> out;
    out.reserve(count());
    for_each([&out](size_t i) { out.push_back(i); });
    return out;
  }

  size_t hash() const {
    uint64_t h = 0x9e3779b97f4a7c15ULL ^ size_;
    for (uint64_t w : words_) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<size_t>(h);
  }

  std::span<const uint64_t> words() const { return words_; }

 private:
  void CheckSize(const Bitset& other) const {
    if (other.size_ != size_) {
      throw std::invalid_argument("Bitset: size mismatch.");
    }
  }

  void TrimTail() {
    if (size_ % 64 != 0 && !words_.empty()) {
      words_.back() &= (uint64_t{1} << (size_ % 64)) - 1;
    }
  }

  size_t size_ = 0;
  std::vector<uint64_t> words_;
};

struct BitsetHash {
  size_t operator()(const Bitset& b) const { return b.hash(); }
};

}  // namespace pgk

#endif  // PGK_BITSET_H_
