#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrl::rand {

// 32-byte root key of a stream tree.
using Seed = std::array<std::uint8_t, 32>;

// Parses a seed given verbatim on the command line, either decimal ("42") or
// hex with 0x prefix ("0x2a"). Throws std::invalid_argument on malformed input.
std::uint64_t parse_seed(const std::string& text);

// Expands a numeric seed plus a role tag ("internal", "sample", ...) into a
// root key. Different roles yield unrelated trees even for equal numbers.
Seed expand_seed(std::uint64_t value, std::string_view role);

// One (label, index) component of a stream address.
struct PathElem {
  std::string label;
  std::uint64_t index = 0;

  PathElem(std::string_view l, std::uint64_t i) : label(l), index(i) {}
  bool operator==(const PathElem&) const = default;
};

using StreamPath = std::vector<PathElem>;

// Counter-based generator: 128-bit key, 256-bit counter, Philox-style 4x64
// with 10 rounds. A stream is a pure function of (root seed, path); how much
// one stream is consumed never affects any other stream.
class Stream {
 public:
  Stream(const std::array<std::uint64_t, 2>& key,
         const std::array<std::uint64_t, 2>& nonce);

  std::uint64_t next_u64();

  // Uniform on [0, 1) built from the top 53 bits of one 64-bit word, so the
  // value is identical on every platform with IEEE-754 doubles.
  double uniform01();
  double uniform(double lo, double hi);

  // Unbiased integer on [0, n); requires n >= 1.
  std::uint64_t uniform_int(std::uint64_t n);

  // Draws an index with probability proportional to its non-negative weight.
  // The cumulative sum is walked in ascending index order so a given uniform
  // draw maps to the same outcome everywhere.
  std::size_t categorical(std::span<const double> weights);

  // Exact binomial sampler: CDF inversion for small n*p, BTPE rejection
  // otherwise. Deterministic given the stream state.
  std::uint64_t binomial(std::uint64_t n, double p);

  // Multinomial counts via conditional binomials in ascending index order.
  // Distributed exactly as the counts of n i.i.d. categorical draws.
  void multinomial(std::uint64_t n, std::span<const double> weights,
                   std::span<std::uint64_t> out);

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_;
  int pos_;
};

// Derives independent substreams from a root seed by hashing the injectively
// serialized path (SHA-256). Derivation is pure, so it is independent of
// call order and of which thread performs it.
class StreamTree {
 public:
  explicit StreamTree(const Seed& root) : root_(root) {}
  StreamTree(std::uint64_t seed, std::string_view role)
      : StreamTree(expand_seed(seed, role)) {}

  Stream derive(std::span<const PathElem> path) const;
  Stream derive(const StreamPath& path) const {
    return derive(std::span<const PathElem>(path));
  }
  Stream derive(std::initializer_list<PathElem> path) const {
    return derive(std::span<const PathElem>(path.begin(), path.size()));
  }

  const Seed& root() const { return root_; }

 private:
  Seed root_;
};

}  // namespace rrl::rand
