#pragma once

#include <cstdint>

#include "cm/normal.hpp"

namespace cm {

// Counter-based substream RNG. Each (base seed, stream labels, counter)
// tuple yields one 64-bit word through splitmix64 mixing, so draws are
// reproducible independently of evaluation order or thread count.
struct Seed {
  std::uint64_t base = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Derives a child seed labelled by up to three stream indices
// (e.g. replication, firm, date).
inline Seed derive(Seed s, std::uint64_t a, std::uint64_t b = 0,
                   std::uint64_t c = 0) {
  std::uint64_t x = detail::splitmix64(s.base ^ detail::splitmix64(a));
  x = detail::splitmix64(x ^ detail::splitmix64(b + 0x632be59bd9b4e019ULL));
  x = detail::splitmix64(x ^ detail::splitmix64(c + 0xd6e8feb86659fd93ULL));
  return Seed{x};
}

// Stateless uniform in (0,1): word `k` of the stream rooted at `s`.
inline double uniform_at(Seed s, std::uint64_t k) {
  std::uint64_t w = detail::splitmix64(s.base + k * 0x9e3779b97f4a7c15ULL);
  // 53-bit mantissa, shifted to (0,1) so the normal inverse is finite.
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal draw via quantile inversion.
inline double normal_at(Seed s, std::uint64_t k) {
  return norm_quantile(uniform_at(s, k));
}

// Sequential convenience wrapper over the counter-based stream.
class Stream {
 public:
  explicit Stream(Seed s) : seed_(s) {}
  double uniform() { return uniform_at(seed_, counter_++); }
  double normal() { return normal_at(seed_, counter_++); }

 private:
  Seed seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace cm
