#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace dtse {

using Rng = std::mt19937_64;

/// Independent stream for (master seed, stream tags...). Streams depend only
/// on the tags, never on evaluation order, so parallel callers stay
/// reproducible.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * tags.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto t : tags) push(t);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

// Stream tags.
namespace stream {
inline constexpr std::uint64_t kArrivals = 1;
inline constexpr std::uint64_t kCvFlags = 2;
inline constexpr std::uint64_t kDawdle = 3;
inline constexpr std::uint64_t kMeasurement = 4;
inline constexpr std::uint64_t kSubset = 5;
}  // namespace stream

}  // namespace dtse
