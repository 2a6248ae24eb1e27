#include "qreadout/rng.hpp"

#include <cmath>

namespace qreadout {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t acc = 0x51ad0e7ULL;
  for (std::uint64_t p : parts) acc = splitmix64(acc ^ p);
  return acc;
}

double Rng::exponential(double rate) {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  return -std::log(1.0 - uniform()) / rate;
}

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

}  // namespace qreadout
