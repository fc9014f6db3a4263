// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "projdens/density_model.hpp"

#include <cstdint>
#include <vector>

namespace projdens {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for replication `replication` of an experiment with base seed `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication) noexcept;

/// Counter-based 64-bit generator: output i is splitmix64 of the i-th
/// increment of the seed by the golden-ratio constant.
class Rng {
public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
  std::uint64_t state_;
};

/// Rejection sampler for a DensityModel with the flat envelope
/// 1 + sqrt2 * sum_{k>=2} |c_k|. Single owner; the model must outlive it.
class SampleStream {
public:
  static constexpr std::uint64_t kMaxConsecutiveRejections = 1'000'000;

  SampleStream(const DensityModel &model, std::uint64_t seed);

  double next();
  std::vector<double> draw(std::size_t n);

  double envelope_bound() const noexcept { return envelope_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Proposals consumed so far, accepted or not.
  std::uint64_t proposals() const noexcept { return proposals_; }

private:
  const DensityModel *model_;
  Rng rng_;
  std::uint64_t seed_;
  double envelope_;
  std::uint64_t proposals_ = 0;
};

} // namespace projdens
