#include "rrl/hash.hpp"

#include <cstring>

namespace rrl {

namespace {
constexpr std::uint64_t kPrime = 1099511628211ull;
}

void ContentHash::mix_bytes(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h_ ^= p[i];
    h_ *= kPrime;
  }
}

void ContentHash::mix_u64(std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  mix_bytes(bytes, 8);
}

void ContentHash::mix_double(double v) {
  if (v == 0.0) v = 0.0;  // collapse -0.0 and +0.0
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  mix_u64(bits);
}

void ContentHash::mix_string(std::string_view s) {
  mix_u64(s.size());
  mix_bytes(s.data(), s.size());
}

void ContentHash::mix_doubles(std::span<const double> values) {
  mix_u64(values.size());
  for (double v : values) mix_double(v);
}

std::uint64_t hash_qtable(const QTable& q) {
  ContentHash h;
  h.mix_u64(q.size());
  for (const auto& row : q) h.mix_doubles(row);
  return h.digest();
}

std::uint64_t hash_policy(const Policy& policy) {
  ContentHash h;
  h.mix_u64(policy.size());
  for (int a : policy) h.mix_u64(static_cast<std::uint64_t>(a));
  return h.digest();
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace rrl
