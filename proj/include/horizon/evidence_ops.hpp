#pragma once

// Discounting, credibility-driven auto-discounting, and the three fusion
// rules: Dempster (normalized conjunctive), Smets (unnormalized conjunctive,
// conflict kept on the empty set) and the dependent-evidence mean.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "horizon/belief.hpp"
#include "horizon/error.hpp"

namespace horizon {

// Intermediate combinations larger than this raise resource_exhausted.
inline constexpr std::size_t kMaxFocalSets = 100000;

struct AutoDiscountConfig {
  double rate_certain = 0.00;
  double rate_probable = 0.20;
  double rate_possible = 0.40;
  bool enabled = true;

  double rate_for(Confidence c) const {
    switch (c) {
      case Confidence::certain: return rate_certain;
      case Confidence::probable: return rate_probable;
      case Confidence::possible: return rate_possible;
    }
    return rate_probable;
  }

  bool operator==(const AutoDiscountConfig&) const = default;
};

enum class FusionRule { dempster, smets, dependent };

constexpr std::string_view to_string(FusionRule r) {
  switch (r) {
    case FusionRule::dempster: return "dempster";
    case FusionRule::smets: return "smets";
    case FusionRule::dependent: return "dependent";
  }
  return "dempster";
}

inline FusionRule parse_fusion_rule(std::string_view s) {
  if (s == "dempster") return FusionRule::dempster;
  if (s == "smets" || s == "least_commitment") return FusionRule::smets;
  if (s == "dependent") return FusionRule::dependent;
  fail(ErrorCode::invalid_argument, "unknown fusion rule '" + std::string(s) + "'");
}

inline void check_rate(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0))
    fail(ErrorCode::invalid_rate, "discount rate must lie in [0, 1]");
}

// Moves a fraction `rate` of every mass onto Θ.
inline Boe discount(const Boe& boe, double rate) {
  check_rate(rate);
  if (boe.is_open_world())
    fail(ErrorCode::open_world_input, "cannot discount open-world BOE '" + boe.id() + "'");
  const double keep = 1.0 - rate;
  std::vector<FocalElement> out;
  out.reserve(boe.focal().size() + 1);
  bool has_theta = false;
  for (const auto& fe : boe.focal()) {
    if (fe.set.is_full()) {
      out.push_back({fe.set, keep * fe.mass + rate});
      has_theta = true;
    } else {
      out.push_back({fe.set, keep * fe.mass});
    }
  }
  if (!has_theta) out.push_back({boe.frame().full(), rate});
  return Boe::from_focal(boe.id(), boe.frame_ptr(), std::move(out), boe.source(), BoeKind::secondary)
      .with_translation_loss(boe.translation_loss());
}

inline Boe auto_discount(const Boe& boe, const AutoDiscountConfig& cfg) {
  if (!cfg.enabled) return boe;
  return discount(boe, cfg.rate_for(boe.source().confidence));
}

namespace detail {

inline void check_same_frame(std::span<const Boe> boes, std::size_t min_count) {
  if (boes.size() < min_count)
    fail(ErrorCode::insufficient_inputs, "fusion needs at least " + std::to_string(min_count) + " BOEs");
  const Frame& f = boes.front().frame();
  for (const auto& b : boes)
    if (!(b.frame() == f))
      fail(ErrorCode::frame_mismatch,
           "BOE '" + b.id() + "' is on frame '" + b.frame().id() + "', expected '" + f.id() + "'");
}

inline void check_closed(std::span<const Boe> boes) {
  for (const auto& b : boes)
    if (b.is_open_world())
      fail(ErrorCode::open_world_input, "BOE '" + b.id() + "' is open-world; this rule needs closed-world input");
}

inline SourceMeta fused_source(FusionRule rule) {
  SourceMeta s;
  s.name = "fusion:" + std::string(to_string(rule));
  s.confidence = Confidence::certain;
  return s;
}

}  // namespace detail

// Unnormalized conjunctive combination of two mass functions. Products are
// accumulated in (left focal, right focal) order so the result does not depend
// on hashing.
inline Boe combine_conjunctive(const Boe& left, const Boe& right) {
  if (!(left.frame() == right.frame()))
    fail(ErrorCode::frame_mismatch, "cannot combine BOEs on frames '" + left.frame().id() + "' and '" +
                                        right.frame().id() + "'");
  std::unordered_map<Subset, std::size_t, SubsetHash> slot;
  std::vector<FocalElement> acc;
  slot.reserve(left.focal().size() * right.focal().size());
  for (const auto& l : left.focal()) {
    for (const auto& r : right.focal()) {
      Subset inter = l.set & r.set;
      const double m = l.mass * r.mass;
      auto [it, inserted] = slot.try_emplace(inter, acc.size());
      if (inserted) {
        acc.push_back({std::move(inter), m});
        if (acc.size() > kMaxFocalSets)
          fail(ErrorCode::resource_exhausted,
               "combination exceeds " + std::to_string(kMaxFocalSets) + " focal sets");
      } else {
        acc[it->second].mass += m;
      }
    }
  }
  return Boe::from_focal({}, left.frame_ptr(), std::move(acc), {}, BoeKind::secondary);
}

// Smets' rule. Open-world inputs are accepted because the conjunctive rule is
// closed under them, which keeps the rule associative.
inline Boe fuse_smets(std::span<const Boe> boes) {
  detail::check_same_frame(boes, 2);
  Boe acc = boes.front();
  for (std::size_t i = 1; i < boes.size(); ++i) acc = combine_conjunctive(acc, boes[i]);
  return acc.with_source(detail::fused_source(FusionRule::smets)).with_kind(BoeKind::secondary).with_id({});
}

struct DempsterResult {
  Boe boe;
  // 1 minus the surviving (non-empty) mass of the full unnormalized product.
  double conflict = 0.0;
};

inline DempsterResult fuse_dempster(std::span<const Boe> boes) {
  detail::check_same_frame(boes, 2);
  detail::check_closed(boes);
  Boe product = boes.front();
  for (std::size_t i = 1; i < boes.size(); ++i) product = combine_conjunctive(product, boes[i]);
  double surviving = 0.0;
  for (const auto& fe : product.focal())
    if (!fe.set.empty()) surviving += fe.mass;
  if (!(surviving > 0.0))
    fail(ErrorCode::total_conflict, "the BOEs are in total conflict (K = 1); Dempster's rule is undefined");
  std::vector<FocalElement> out;
  out.reserve(product.focal().size());
  for (const auto& fe : product.focal())
    if (!fe.set.empty()) out.push_back({fe.set, fe.mass / surviving});
  // Rounding can push the surviving mass a hair above one.
  const double k = std::max(0.0, 1.0 - surviving);
  Boe fused = Boe::from_focal({}, product.frame_ptr(), std::move(out),
                              detail::fused_source(FusionRule::dempster), BoeKind::secondary)
                  .with_conflict(k);
  return {std::move(fused), k};
}

// Focal-set-wise mean of the inputs. Per-set contributions are summed in
// sorted order, which makes the rule exactly commutative.
inline Boe fuse_dependent(std::span<const Boe> boes) {
  detail::check_same_frame(boes, 2);
  detail::check_closed(boes);
  std::unordered_map<Subset, std::vector<double>, SubsetHash> parts;
  for (const auto& b : boes)
    for (const auto& fe : b.focal()) parts[fe.set].push_back(fe.mass);
  const double count = static_cast<double>(boes.size());
  std::vector<FocalElement> out;
  out.reserve(parts.size());
  for (auto& [set, masses] : parts) {
    std::sort(masses.begin(), masses.end());
    double sum = 0.0;
    for (double m : masses) sum += m;
    out.push_back({set, sum / count});
  }
  return Boe::from_focal({}, boes.front().frame_ptr(), std::move(out),
                         detail::fused_source(FusionRule::dependent), BoeKind::secondary);
}

// Dispatch on the rule; returns the fused BOE with conflict recorded for Dempster.
inline Boe fuse(std::span<const Boe> boes, FusionRule rule) {
  switch (rule) {
    case FusionRule::dempster: return fuse_dempster(boes).boe;
    case FusionRule::smets: {
      detail::check_closed(boes);
      return fuse_smets(boes);
    }
    case FusionRule::dependent: return fuse_dependent(boes);
  }
  fail(ErrorCode::invalid_argument, "unknown fusion rule");
}

struct ZadehComparison {
  DempsterResult plain;
  DempsterResult discounted;
  std::vector<Boe> discounted_inputs;
};

// Dempster fusion of the same evidence with and without auto-discounting, for
// checking that discounting keeps a near-zero proposition in one source from
// vetoing support found in the others.
inline ZadehComparison zadeh_guard_demo(std::span<const Boe> boes, AutoDiscountConfig cfg = {}) {
  cfg.enabled = true;
  ZadehComparison out{fuse_dempster(boes), {Boe::vacuous(boes.front().frame_ptr()), 0.0}, {}};
  out.discounted_inputs.reserve(boes.size());
  for (const auto& b : boes) out.discounted_inputs.push_back(auto_discount(b, cfg));
  out.discounted = fuse_dempster(out.discounted_inputs);
  return out;
}

}  // namespace horizon
