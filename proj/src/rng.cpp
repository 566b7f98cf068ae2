#include "broad/rng.hpp"

#include <algorithm>

namespace broad {

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

std::size_t Rng::index(std::size_t n) {
  if (n <= 1) return 0;
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

Rng rng_stream(std::uint64_t master_seed, std::uint64_t replication, Substream substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(replication >> 32),
                    static_cast<std::uint32_t>(substream),
                    0x62726f61u};
  return Rng(seq);
}

}  // namespace broad
