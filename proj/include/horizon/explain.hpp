#pragma once

// Influence of each contributing BOE on a conclusion, based on the additive
// measure of information I(bel) = -sum log2 q(a). Under the unnormalized
// conjunctive rule commonalities multiply, so I of the combination is the sum
// of the standalone I values whenever every commonality is positive.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "horizon/belief.hpp"
#include "horizon/error.hpp"
#include "horizon/evidence_ops.hpp"

namespace horizon {

// Union-closure above this size raises resource_exhausted.
inline constexpr std::size_t kMaxRestrictedLattice = 1u << 16;

struct InfluenceEntry {
  std::string boe_id;
  double influence = 0.0;
  double share = 0.0;
  // I(all) - I(all but this one); agrees with `influence` for the conjunctive
  // rules when every commonality is positive. Empty when the reduced
  // combination was too large to form.
  std::optional<double> leave_one_out;
  bool vacuous = false;
};

enum class InfluenceMethod { standalone, leave_one_out };

struct InfluenceReport {
  std::string conclusion_id;
  std::vector<InfluenceEntry> entries;
  std::string most_influential;
  std::string least_influential;
  bool exact = true;
  InfluenceMethod method = InfluenceMethod::standalone;
};

namespace detail {

// Influences closer than 1e-9 bits rank as ties; symmetric sources otherwise
// split on rounding noise.
inline double tie_key(double influence) { return std::round(influence * 1e9); }

// All unions of nonempty focal sets across the contributions.
inline std::vector<Subset> union_closure(std::span<const Boe> boes) {
  std::unordered_set<Subset, SubsetHash> seen;
  std::vector<Subset> all;
  for (const auto& b : boes)
    for (const auto& fe : b.focal())
      if (!fe.set.empty() && seen.insert(fe.set).second) all.push_back(fe.set);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      Subset u = all[i] | all[j];
      if (seen.insert(u).second) {
        all.push_back(std::move(u));
        if (all.size() > kMaxRestrictedLattice)
          fail(ErrorCode::resource_exhausted, "restricted explanation lattice grew beyond " +
                                                  std::to_string(kMaxRestrictedLattice) + " sets");
      }
    }
  }
  std::sort(all.begin(), all.end());
  return all;
}

class InfoEvaluator {
 public:
  InfoEvaluator(std::span<const Boe> boes, std::size_t cap)
      : exact_(boes.front().frame().size() <= cap), cap_(cap) {
    if (!exact_) lattice_ = union_closure(boes);
  }

  bool exact() const { return exact_; }

  double operator()(const Boe& b) const {
    return exact_ ? info_measure(b, cap_) : info_measure_over(b, lattice_);
  }

 private:
  bool exact_;
  std::size_t cap_;
  std::vector<Subset> lattice_;
};

inline Boe fuse_for_explanation(std::span<const Boe> boes, FusionRule rule) {
  if (boes.size() == 1) return boes.front();
  if (rule == FusionRule::dependent) return fuse_dependent(boes);
  Boe acc = boes.front();
  for (std::size_t i = 1; i < boes.size(); ++i) acc = combine_conjunctive(acc, boes[i]);
  return acc;
}

}  // namespace detail

// Ranks the BOEs that entered a fusion (after discounting and translation).
// Conjunctive rules rank by standalone I(bel_i); the dependent rule, where
// additivity does not hold, ranks by leave-one-out change in I.
inline InfluenceReport influence(std::span<const Boe> contributions, FusionRule rule = FusionRule::dempster,
                                 std::size_t cap = kExplanationFrameCap, std::string conclusion_id = {}) {
  if (contributions.empty())
    fail(ErrorCode::insufficient_inputs, "influence needs at least one contribution");
  detail::check_same_frame(contributions, 1);

  InfluenceReport rep;
  rep.conclusion_id = std::move(conclusion_id);
  rep.method = rule == FusionRule::dependent ? InfluenceMethod::leave_one_out : InfluenceMethod::standalone;
  const detail::InfoEvaluator info(contributions, cap);
  rep.exact = info.exact();

  const std::size_t k = contributions.size();
  std::optional<double> info_all;
  if (k > 1) {
    try {
      info_all = info(detail::fuse_for_explanation(contributions, rule));
    } catch (const Error& err) {
      if (err.code() != ErrorCode::resource_exhausted || rep.method == InfluenceMethod::leave_one_out) throw;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    InfluenceEntry e;
    e.boe_id = contributions[i].id();
    e.vacuous = contributions[i].is_vacuous();
    const double standalone = info(contributions[i]);
    if (k > 1 && info_all) {
      std::vector<Boe> rest;
      rest.reserve(k - 1);
      for (std::size_t j = 0; j < k; ++j)
        if (j != i) rest.push_back(contributions[j]);
      try {
        e.leave_one_out = *info_all - info(detail::fuse_for_explanation(rest, rule));
      } catch (const Error& err) {
        if (err.code() != ErrorCode::resource_exhausted || rep.method == InfluenceMethod::leave_one_out) throw;
      }
    } else if (k == 1) {
      e.leave_one_out = standalone;
    }
    if (rep.method == InfluenceMethod::standalone) {
      e.influence = standalone;
    } else {
      e.influence = e.vacuous ? 0.0 : std::abs(*e.leave_one_out);
    }
    rep.entries.push_back(std::move(e));
  }

  std::stable_sort(rep.entries.begin(), rep.entries.end(), [](const InfluenceEntry& x, const InfluenceEntry& y) {
    const double kx = detail::tie_key(x.influence), ky = detail::tie_key(y.influence);
    if (kx != ky) return kx > ky;
    if (x.vacuous != y.vacuous) return !x.vacuous;
    return x.boe_id < y.boe_id;
  });

  double total = 0.0;
  for (const auto& e : rep.entries) total += e.influence;
  for (auto& e : rep.entries) e.share = total > 0.0 ? e.influence / total : 1.0 / static_cast<double>(k);
  rep.most_influential = rep.entries.front().boe_id;
  rep.least_influential = rep.entries.back().boe_id;
  return rep;
}

namespace detail {

inline std::string percent(double share) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", share * 100.0);
  return buf;
}

inline std::string name_of(const std::map<std::string, std::string>& names, const std::string& id) {
  auto it = names.find(id);
  return it == names.end() || it->second.empty() ? id : it->second;
}

inline std::string join_names(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += (i + 1 == parts.size()) ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

}  // namespace detail

// One-paragraph summary naming the most and least influential sources.
inline std::string explanation_text(const InfluenceReport& report,
                                    const std::map<std::string, std::string>& names) {
  if (report.entries.empty()) return {};
  const auto& entries = report.entries;
  std::string text;
  if (entries.size() == 1) {
    text = detail::name_of(names, entries.front().boe_id) +
           " is the only contribution; the conclusion rests on one source.";
  } else {
    auto tied_with = [&](double value) {
      std::vector<std::string> out;
      for (const auto& e : entries)
        if (detail::tie_key(e.influence) == detail::tie_key(value)) out.push_back(detail::name_of(names, e.boe_id));
      return out;
    };
    const auto top = tied_with(entries.front().influence);
    const auto bottom = tied_with(entries.back().influence);
    if (top.size() == entries.size()) {
      text = detail::join_names(top) + " had equal influence on the conclusion (" +
             detail::percent(entries.front().share) + " each); ties are listed in BOE id order.";
    } else {
      if (top.size() == 1) {
        text = top.front() + " had the most influence on the conclusion (" +
               detail::percent(entries.front().share) + " of the information).";
      } else {
        text = detail::join_names(top) + " tied for the most influence on the conclusion (" +
               detail::percent(entries.front().share) + " each; ties are listed in BOE id order).";
      }
      if (bottom.size() == 1) {
        text += " " + bottom.front() + " had the least influence (" + detail::percent(entries.back().share) + ").";
      } else {
        text += " " + detail::join_names(bottom) + " tied for the least influence (" +
                detail::percent(entries.back().share) + " each).";
      }
    }
  }
  if (!report.exact)
    text += " Computed over the union-closure of the focal sets because the frame exceeds the exact lattice cap.";
  if (report.method == InfluenceMethod::leave_one_out)
    text += " Influence for the dependent rule is the change in information when each source is left out.";
  return text;
}

}  // namespace horizon
