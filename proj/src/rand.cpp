#include "rrl/rand.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace rrl::rand {

namespace {

// Philox 4x64 round constants (multipliers and Weyl key increments).
constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void philox_round(std::array<std::uint64_t, 4>& c,
                         const std::array<std::uint64_t, 2>& k) {
  const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * c[0];
  const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * c[2];
  const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
  const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
  const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
  const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

std::array<std::uint64_t, 4> philox_block(std::array<std::uint64_t, 4> counter,
                                          std::array<std::uint64_t, 2> key) {
  philox_round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    philox_round(counter, key);
  }
  return counter;
}

std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len) {
  std::array<std::uint8_t, 32> digest{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, digest.data(), &out_len, EVP_sha256(), nullptr) != 1 ||
      out_len != 32) {
    throw std::runtime_error("sha256 failed");
  }
  return digest;
}

inline void put_u32le(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64le(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t read_u64le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::uint64_t parse_seed(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("seed: empty string");
  int base = 10;
  std::size_t start = 0;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    start = 2;
  }
  std::uint64_t value = 0;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (base == 16 && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (base == 16 && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    else throw std::invalid_argument("seed: invalid character in '" + text + "'");
    const std::uint64_t next = value * base + static_cast<std::uint64_t>(digit);
    if (next / base != value) throw std::invalid_argument("seed: out of 64-bit range");
    value = next;
  }
  if (start == text.size()) throw std::invalid_argument("seed: no digits");
  return value;
}

Seed expand_seed(std::uint64_t value, std::string_view role) {
  std::vector<std::uint8_t> buf;
  const std::string_view tag = "rrl.tree.v1";
  buf.insert(buf.end(), tag.begin(), tag.end());
  buf.push_back(0);
  buf.insert(buf.end(), role.begin(), role.end());
  buf.push_back(0);
  put_u64le(buf, value);
  return sha256(buf.data(), buf.size());
}

Stream::Stream(const std::array<std::uint64_t, 2>& key,
               const std::array<std::uint64_t, 2>& nonce)
    : key_(key), counter_{0, 0, nonce[0], nonce[1]}, block_{}, pos_(4) {}

void Stream::refill() {
  block_ = philox_block(counter_, key_);
  if (++counter_[0] == 0) ++counter_[1];
  pos_ = 0;
}

std::uint64_t Stream::next_u64() {
  if (pos_ == 4) refill();
  return block_[pos_++];
}

double Stream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("uniform: requires lo < hi");
  return lo + (hi - lo) * uniform01();
}

std::uint64_t Stream::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be >= 1");
  // Lemire's multiply-and-reject method: unbiased, few rejections.
  std::uint64_t x = next_u64();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<unsigned __int128>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::size_t Stream::categorical(std::span<const double> weights) {
  double total = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w >= 0.0)) throw std::invalid_argument("categorical: negative weight");
    total += w;
    if (w > 0.0) last_positive = i;
  }
  if (last_positive == weights.size() || !(total > 0.0)) {
    throw std::invalid_argument("categorical: no positive weight");
  }
  const double x = uniform01() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i <= last_positive; ++i) {
    cum += weights[i];
    if (x < cum) return i;
  }
  return last_positive;
}

namespace {

// Binomial via CDF inversion; intended for n*p below ~30.
std::uint64_t binomial_inversion(Stream& s, std::uint64_t n, double p) {
  const double q = 1.0 - p;
  const double ratio = p / q;
  const double a = (static_cast<double>(n) + 1.0) * ratio;
  const double pmf0 = std::exp(static_cast<double>(n) * std::log(q));
  for (;;) {
    double u = s.uniform01();
    double pmf = pmf0;
    std::uint64_t x = 0;
    bool overrun = false;
    while (u > pmf) {
      u -= pmf;
      ++x;
      if (x > n) {  // floating-point leakage past the support; retry
        overrun = true;
        break;
      }
      pmf *= (a / static_cast<double>(x) - ratio);
    }
    if (!overrun) return x;
  }
}

// BTPE rejection sampler (triangle / parallelogram / exponential tails) for
// n*p >= ~30 with p <= 0.5. Exact, uses only uniform draws from the stream.
std::uint64_t binomial_btpe(Stream& s, std::uint64_t n, double p) {
  const double nd = static_cast<double>(n);
  const double r = p;
  const double q = 1.0 - r;
  const double fm = nd * r + r;
  const double m = std::floor(fm);
  const double npq = nd * r * q;
  const double p1 = std::floor(2.195 * std::sqrt(npq) - 4.6 * q) + 0.5;
  const double xm = m + 0.5;
  const double xl = xm - p1;
  const double xr = xm + p1;
  const double c = 0.134 + 20.5 / (15.3 + m);
  double a = (fm - xl) / (fm - xl * r);
  const double laml = a * (1.0 + 0.5 * a);
  a = (xr - fm) / (xr * q);
  const double lamr = a * (1.0 + 0.5 * a);
  const double p2 = p1 * (1.0 + 2.0 * c);
  const double p3 = p2 + c / laml;
  const double p4 = p3 + c / lamr;

  for (;;) {
    const double u = s.uniform01() * p4;
    double v = s.uniform01();
    double y;

    if (u <= p1) {  // triangular region: immediate accept
      y = std::floor(xm - p1 * v + u);
      return static_cast<std::uint64_t>(y);
    }
    if (u <= p2) {  // parallelogram region
      const double x = xl + (u - p1) / c;
      v = v * c + 1.0 - std::fabs(m - x + 0.5) / p1;
      if (v > 1.0) continue;
      y = std::floor(x);
    } else if (u <= p3) {  // left exponential tail
      y = std::floor(xl + std::log(v) / laml);
      if (y < 0.0) continue;
      v = v * (u - p2) * laml;
    } else {  // right exponential tail
      y = std::floor(xr - std::log(v) / lamr);
      if (y > nd) continue;
      v = v * (u - p3) * lamr;
    }

    const double k = std::fabs(y - m);
    if (k <= 20.0 || k >= npq / 2.0 - 1.0) {
      // Evaluate the pmf ratio f(y)/f(m) explicitly.
      const double ratio = r / q;
      const double aa = ratio * (nd + 1.0);
      double f = 1.0;
      if (m < y) {
        for (double i = m + 1.0; i <= y; i += 1.0) f *= (aa / i - ratio);
      } else if (m > y) {
        for (double i = y + 1.0; i <= m; i += 1.0) f /= (aa / i - ratio);
      }
      if (v <= f) return static_cast<std::uint64_t>(y);
      continue;
    }

    // Squeeze test on log f(y)/f(m).
    const double rho =
        (k / npq) * ((k * (k / 3.0 + 0.625) + 1.0 / 6.0) / npq + 0.5);
    const double t = -k * k / (2.0 * npq);
    const double log_v = std::log(v);
    if (log_v < t - rho) return static_cast<std::uint64_t>(y);
    if (log_v > t + rho) continue;

    // Final test with Stirling-series-corrected log pmf ratio.
    const double x1 = y + 1.0;
    const double f1 = m + 1.0;
    const double z = nd + 1.0 - m;
    const double w = nd - y + 1.0;
    const double z2 = z * z;
    const double x2 = x1 * x1;
    const double f2 = f1 * f1;
    const double w2 = w * w;
    const double bound =
        xm * std::log(f1 / x1) + (nd - m + 0.5) * std::log(z / w) +
        (y - m) * std::log(w * r / (x1 * q)) +
        (13860.0 - (462.0 - (132.0 - (99.0 - 140.0 / f2) / f2) / f2) / f2) / f1 / 166320.0 +
        (13860.0 - (462.0 - (132.0 - (99.0 - 140.0 / z2) / z2) / z2) / z2) / z / 166320.0 +
        (13860.0 - (462.0 - (132.0 - (99.0 - 140.0 / x2) / x2) / x2) / x2) / x1 / 166320.0 +
        (13860.0 - (462.0 - (132.0 - (99.0 - 140.0 / w2) / w2) / w2) / w2) / w / 166320.0;
    if (log_v <= bound) return static_cast<std::uint64_t>(y);
  }
}

}  // namespace

std::uint64_t Stream::binomial(std::uint64_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p outside [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const bool flipped = p > 0.5;
  const double ps = flipped ? 1.0 - p : p;
  const std::uint64_t draw = (static_cast<double>(n) * ps < 30.0)
                                 ? binomial_inversion(*this, n, ps)
                                 : binomial_btpe(*this, n, ps);
  return flipped ? n - draw : draw;
}

void Stream::multinomial(std::uint64_t n, std::span<const double> weights,
                         std::span<std::uint64_t> out) {
  if (out.size() != weights.size()) {
    throw std::invalid_argument("multinomial: output size mismatch");
  }
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("multinomial: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("multinomial: no positive weight");

  std::uint64_t remaining = n;
  double mass_left = total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (remaining == 0 || weights[i] == 0.0) {
      out[i] = 0;
      if (weights[i] > 0.0) mass_left -= weights[i];
      continue;
    }
    if (i + 1 == weights.size() || weights[i] >= mass_left) {
      out[i] = remaining;
      remaining = 0;
      mass_left -= weights[i];
      continue;
    }
    const double prob = std::min(1.0, weights[i] / mass_left);
    const std::uint64_t k = binomial(remaining, prob);
    out[i] = k;
    remaining -= k;
    mass_left -= weights[i];
  }
  // Floating-point drift can leave a residue when trailing weights are zero;
  // assign it to the last positive-weight bucket to conserve the total.
  if (remaining > 0) {
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) {
        out[i] += remaining;
        break;
      }
    }
  }
}

Stream StreamTree::derive(std::span<const PathElem> path) const {
  std::vector<std::uint8_t> buf;
  buf.reserve(64 + path.size() * 24);
  buf.insert(buf.end(), root_.begin(), root_.end());
  put_u32le(buf, static_cast<std::uint32_t>(path.size()));
  for (const PathElem& e : path) {
    put_u32le(buf, static_cast<std::uint32_t>(e.label.size()));
    buf.insert(buf.end(), e.label.begin(), e.label.end());
    put_u64le(buf, e.index);
  }
  const auto digest = sha256(buf.data(), buf.size());
  const std::array<std::uint64_t, 2> key{read_u64le(digest.data()),
                                         read_u64le(digest.data() + 8)};
  const std::array<std::uint64_t, 2> nonce{read_u64le(digest.data() + 16),
                                           read_u64le(digest.data() + 24)};
  return Stream(key, nonce);
}

}  // namespace rrl::rand
