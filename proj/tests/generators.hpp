#pragma once

// Random frames and BOEs for property tests. Seeds are fixed per test.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "horizon/belief.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline horizon::FramePtr frame(std::size_t n, const std::string& id = "f") {
  std::vector<std::string> props;
  for (std::size_t i = 0; i < n; ++i) props.push_back("p" + std::to_string(i));
  return horizon::make_frame(id, std::move(props));
}

inline horizon::Subset nonempty_subset(Rng& rng, std::size_t n) {
  const std::uint64_t full = (n == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  std::uint64_t m = 0;
  while (m == 0) m = std::uniform_int_distribution<std::uint64_t>(1, full)(rng);
  return horizon::Subset::from_mask(n, m);
}

// Up to `max_focal` random non-empty focal sets; masses normalized to 1.
// With `with_theta`, Θ always carries some mass so every commonality is
// positive.
inline horizon::Boe boe(Rng& rng, const horizon::FramePtr& f, std::size_t max_focal, bool with_theta = false,
                        const std::string& id = "b") {
  const std::size_t k = pick(rng, 1, max_focal);
  std::vector<horizon::FocalElement> elems;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double m = uniform(rng, 0.05, 1.0);
    elems.push_back({nonempty_subset(rng, f->size()), m});
    total += m;
  }
  if (with_theta) {
    const double m = uniform(rng, 0.05, 1.0);
    elems.push_back({f->full(), m});
    total += m;
  }
  for (auto& e : elems) e.mass /= total;
  return horizon::Boe::from_focal(id, f, std::move(elems), {}, horizon::BoeKind::initial);
}

}  // namespace gen
