#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcqforge/error.hpp"
#include "mcqforge/model.hpp"
#include "mcqforge/rng.hpp"

namespace mcqforge {

inline constexpr std::string_view kUnknownStratum = "unknown";

/// Items that go to half_a out of a stratum of n: ceil(ratio * n). The
/// epsilon keeps products such as 0.3 * 10 from rounding up to 4.
inline std::size_t half_a_quota(double ratio, std::size_t n) {
  const double raw = ratio * static_cast<double>(n) - 1e-9;
  return std::min(n, static_cast<std::size_t>(std::max(0.0, std::ceil(raw))));
}

/// Splits items into two halves per stratum. Within each stratum the ids are
/// sorted, shuffled by a stream keyed on (seed, stratum) and the first
/// ceil(ratio * n) go to half_a. Both halves come back sorted by id.
template <typename Item, typename IdFn, typename StratumFn>
DatasetSplit stratified_split(const std::vector<Item>& items, double ratio, std::int64_t seed, IdFn id_of,
                              StratumFn stratum_of) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::ConfigError, "split ratio must be in (0, 1)");
  std::map<std::string, std::vector<std::string>> strata;
  for (const auto& item : items) strata[std::string(stratum_of(item))].push_back(std::string(id_of(item)));

  DatasetSplit split;
  split.seed = seed;
  for (auto& [stratum, ids] : strata) {
    std::sort(ids.begin(), ids.end());
    auto rng = SplitMix64::keyed(seed, stratum);
    shuffle(std::span<std::string>(ids), rng);
    const std::size_t quota = half_a_quota(ratio, ids.size());
    split.half_a.insert(split.half_a.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(quota));
    split.half_b.insert(split.half_b.end(), ids.begin() + static_cast<std::ptrdiff_t>(quota), ids.end());
  }
  std::sort(split.half_a.begin(), split.half_a.end());
  std::sort(split.half_b.begin(), split.half_b.end());
  return split;
}

template <typename Item>
DatasetSplit stratified_split(const std::vector<Item>& items, double ratio, std::int64_t seed) {
  return stratified_split(
      items, ratio, seed, [](const Item& item) -> const std::string& { return item.id; },
      [](const Item& item) -> std::string { return item.country.value_or(std::string(kUnknownStratum)); });
}

}  // namespace mcqforge
