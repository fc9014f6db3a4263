// SPDX-License-Identifier: Apache-2.0
#include "projdens/sampling.hpp"

#include "projdens/error.hpp"

#include <cmath>

namespace projdens {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication) noexcept {
  return splitmix64(base ^ splitmix64(replication));
}

std::uint64_t Rng::next() noexcept {
  const std::uint64_t out = splitmix64(state_);
  state_ += kGolden;
  return out;
}

SampleStream::SampleStream(const DensityModel &model, std::uint64_t seed)
    : model_(&model), rng_(seed), seed_(seed), envelope_(model.envelope_bound()) {
  if (!model.has_pointwise())
    throw Error(Errc::model, "cannot sample from a model without pointwise representation");
  if (!std::isfinite(envelope_)) throw Error(Errc::model, "envelope bound is not finite");
}

double SampleStream::next() {
  const auto &basis = model_->basis();
  const auto &series = model_->series();
  for (std::uint64_t tries = 0; tries < kMaxConsecutiveRejections; ++tries) {
    ++proposals_;
    const double x = rng_.uniform();
    const double v = rng_.uniform() * envelope_;
    if (v <= basis.series(x, series)) return x;
  }
  throw Error(Errc::model, "rejection sampler exceeded 1e6 consecutive rejections");
}

std::vector<double> SampleStream::draw(std::size_t n) {
  std::vector<double> out(n);
  for (auto &x : out) x = next();
  return out;
}

} // namespace projdens
