#pragma once

// Seeded synthetic workload with the shape of a large classification run:
// BOEs on frames of 8..352 propositions, a batch of discounts, translations
// and fusions. Generation uses only fixed-width integer arithmetic on
// mt19937_64 output, so a seed yields the same workload on every platform.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "horizon/belief.hpp"
#include "horizon/compat.hpp"
#include "horizon/evidence_ops.hpp"

namespace horizon::bench {

struct WorkloadSpec {
  std::size_t boes = 35;
  // Frame sizes, cycled over when BOEs are assigned to frames.
  std::vector<std::size_t> frame_sizes{211, 180, 240, 8, 352, 120, 280, 300};
  std::size_t max_focal = 64;
  std::size_t discounts = 25;
  std::size_t translations = 29;
  std::size_t fusions = 35;
  std::uint64_t seed = 1997;
};

// Deterministic draws; std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do x = engine_(); while (x >= limit);
    return x % n;
  }
  // Uniform in (0, 1] with 53 random bits.
  double unit() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

struct DiscountOp {
  std::size_t boe;
  double rate;
};
struct TranslateOp {
  std::size_t boe;
  std::string target;
};
struct FuseOp {
  std::size_t left;
  std::size_t right;
};

struct Workload {
  FrameGallery gallery;
  std::vector<Boe> boes;
  std::vector<DiscountOp> discounts;
  std::vector<TranslateOp> translations;
  std::vector<FuseOp> fusions;
  std::uint64_t digest = 0;
  double mean_frame_size = 0.0;
};

namespace detail {

class Fnv {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffU;
      h_ *= 1099511628211ULL;
    }
  }
  void add(double d) { add(std::bit_cast<std::uint64_t>(d)); }
  void add(const std::string& s) {
    for (unsigned char c : s) {
      h_ ^= c;
      h_ *= 1099511628211ULL;
    }
    add(std::uint64_t{s.size()});
  }
  void add(const Subset& s) {
    add(std::uint64_t{s.universe()});
    s.for_each_member([&](std::size_t i) { add(std::uint64_t{i}); });
  }
  void add(const Boe& b) {
    add(b.frame().id());
    for (const auto& fe : b.focal()) {
      add(fe.set);
      add(fe.mass);
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

inline Subset random_subset(Rng& rng, std::size_t n) {
  // Sizes skew small, as real reports name a handful of candidates.
  const std::size_t max_size = std::max<std::size_t>(1, n / 4);
  const std::size_t size = 1 + rng.below(max_size);
  Subset s(n);
  for (std::size_t k = 0; k < size; ++k) s.set(rng.below(n));
  return s;
}

}  // namespace detail

inline Workload generate(const WorkloadSpec& spec) {
  Rng rng(spec.seed);
  Workload w;
  detail::Fnv fnv;
  const std::size_t nframes = spec.frame_sizes.size();
  for (std::size_t f = 0; f < nframes; ++f) {
    std::vector<std::string> props;
    props.reserve(spec.frame_sizes[f]);
    for (std::size_t i = 0; i < spec.frame_sizes[f]; ++i) props.push_back("p" + std::to_string(i));
    w.gallery.add_frame(make_frame("f" + std::to_string(f), std::move(props)));
    fnv.add(std::uint64_t{spec.frame_sizes[f]});
  }
  // A chain over all frames plus a few chords.
  auto relate = [&](std::size_t a, std::size_t b) {
    const FramePtr& fa = w.gallery.frame("f" + std::to_string(a));
    const FramePtr& fb = w.gallery.frame("f" + std::to_string(b));
    std::set<CompatibilityRelation::IndexPair> pairs;
    for (std::size_t i = 0; i < fa->size(); ++i) {
      const std::size_t fan = 1 + rng.below(2);
      for (std::size_t k = 0; k < fan; ++k) pairs.emplace(i, rng.below(fb->size()));
    }
    for (auto [i, j] : pairs) {
      fnv.add(std::uint64_t{i});
      fnv.add(std::uint64_t{j});
    }
    w.gallery.put_relation(std::make_shared<const CompatibilityRelation>(fa, fb, std::move(pairs)));
  };
  for (std::size_t f = 0; f + 1 < nframes; ++f) relate(f, f + 1);
  for (std::size_t f = 0; f + 3 < nframes; f += 3) relate(f, f + 3);

  double size_sum = 0.0;
  for (std::size_t i = 0; i < spec.boes; ++i) {
    const FramePtr& frame = w.gallery.frame("f" + std::to_string(i % nframes));
    const std::size_t n = frame->size();
    const std::size_t focal = 1 + rng.below(spec.max_focal);
    std::vector<FocalElement> elems;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < focal; ++k) {
      const double m = rng.unit();
      elems.push_back({detail::random_subset(rng, n), m});
      total += m;
    }
    const double theta = rng.unit();
    elems.push_back({frame->full(), theta});
    total += theta;
    for (auto& e : elems) e.mass /= total;
    Boe b = Boe::from_focal("b" + std::to_string(i), frame, std::move(elems), {}, BoeKind::initial);
    fnv.add(b);
    size_sum += static_cast<double>(n);
    w.boes.push_back(std::move(b));
  }
  w.mean_frame_size = spec.boes ? size_sum / static_cast<double>(spec.boes) : 0.0;

  for (std::size_t k = 0; k < spec.discounts && spec.boes; ++k) {
    DiscountOp d{rng.below(spec.boes), static_cast<double>(1 + rng.below(50)) / 100.0};
    fnv.add(std::uint64_t{d.boe});
    fnv.add(d.rate);
    w.discounts.push_back(d);
  }
  for (std::size_t k = 0; k < spec.translations && spec.boes; ++k) {
    const std::size_t b = rng.below(spec.boes);
    std::size_t target = rng.below(nframes);
    if ("f" + std::to_string(target) == w.boes[b].frame().id()) target = (target + 1) % nframes;
    TranslateOp t{b, "f" + std::to_string(target)};
    fnv.add(std::uint64_t{t.boe});
    fnv.add(t.target);
    w.translations.push_back(std::move(t));
  }
  for (std::size_t k = 0; k < spec.fusions && spec.boes > 1; ++k) {
    const std::size_t a = rng.below(spec.boes);
    std::size_t b = rng.below(spec.boes - 1);
    if (b >= a) ++b;
    fnv.add(std::uint64_t{a});
    fnv.add(std::uint64_t{b});
    w.fusions.push_back({a, b});
  }
  w.digest = fnv.value();
  return w;
}

struct PhaseTimes {
  double discount_ms = 0.0;
  double translate_ms = 0.0;
  double fuse_ms = 0.0;
  double total_ms() const { return discount_ms + translate_ms + fuse_ms; }
};

struct BenchResult {
  PhaseTimes times;
  std::uint64_t workload_digest = 0;
  std::uint64_t result_digest = 0;
  std::size_t total_conflicts = 0;  // fusions that fell back to the unnormalized rule
  std::size_t max_fused_focal = 0;
  double mean_frame_size = 0.0;
};

// Each fusion translates the right BOE onto the left BOE's frame, then applies
// Dempster's rule; a total conflict falls back to the unnormalized rule.
inline BenchResult run(const Workload& w) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  BenchResult r;
  r.workload_digest = w.digest;
  r.mean_frame_size = w.mean_frame_size;
  detail::Fnv fnv;

  auto t0 = clock::now();
  for (const auto& d : w.discounts) fnv.add(discount(w.boes[d.boe], d.rate));
  r.times.discount_ms = ms_since(t0);

  t0 = clock::now();
  for (const auto& t : w.translations) fnv.add(translate_to(w.boes[t.boe], w.gallery, t.target));
  r.times.translate_ms = ms_since(t0);

  t0 = clock::now();
  for (const auto& f : w.fusions) {
    const Boe& left = w.boes[f.left];
    const Boe pair[2] = {left, translate_to(w.boes[f.right], w.gallery, left.frame().id())};
    Boe fused = Boe::vacuous(left.frame_ptr());
    try {
      fused = fuse_dempster(pair).boe;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::total_conflict) throw;
      ++r.total_conflicts;
      fused = fuse_smets(pair);
    }
    r.max_fused_focal = std::max(r.max_fused_focal, fused.focal().size());
    fnv.add(fused);
  }
  r.times.fuse_ms = ms_since(t0);
  r.result_digest = fnv.value();
  return r;
}

}  // namespace horizon::bench
