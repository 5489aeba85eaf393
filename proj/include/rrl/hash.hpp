#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "rrl/mdp.hpp"

namespace rrl {

/**
 * FNV-1a 64-bit running hash over a canonical byte feed.
 *
 * Doubles are fed as IEEE-754 bit patterns (with -0.0 normalized to +0.0),
 * so two results hash identically exactly when their values are identical.
 * Variable-length fields are length-prefixed to keep the feed prefix-free.
 */
class ContentHash {
 public:
  void mix_bytes(const void* data, std::size_t len);
  void mix_u64(std::uint64_t v);
  void mix_double(double v);
  void mix_string(std::string_view s);
  void mix_doubles(std::span<const double> values);

  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 14695981039346656037ull;
};

std::uint64_t hash_qtable(const QTable& q);
std::uint64_t hash_policy(const Policy& policy);

/// Lower-case 16-digit hex rendering of a 64-bit hash.
std::string hex64(std::uint64_t v);

}  // namespace rrl
