#pragma once

// Frames of discernment, bodies of evidence, and the set functions over them
// (belief, plausibility, commonality, measure of information).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "horizon/error.hpp"
#include "horizon/subset.hpp"

namespace horizon {

inline constexpr double kMassTolerance = 1e-9;
// Largest frame on which the full 2^n lattice is enumerated.
inline constexpr std::size_t kExplanationFrameCap = 20;

class Frame {
 public:
  static Frame make(std::string id, std::vector<std::string> propositions, std::string label = {}) {
    if (id.empty()) fail(ErrorCode::invalid_argument, "frame id must be nonempty");
    if (propositions.empty())
      fail(ErrorCode::empty_frame, "frame '" + id + "' must list at least one proposition");
    Frame f;
    f.id_ = std::move(id);
    f.label_ = label.empty() ? f.id_ : std::move(label);
    f.index_.reserve(propositions.size());
    for (std::size_t i = 0; i < propositions.size(); ++i) {
      const std::string& p = propositions[i];
      if (p.empty())
        fail(ErrorCode::invalid_argument, "frame '" + f.id_ + "' has an empty proposition label");
      if (!f.index_.emplace(p, i).second)
        fail(ErrorCode::duplicate_label, "frame '" + f.id_ + "' repeats proposition '" + p + "'");
    }
    f.propositions_ = std::move(propositions);
    return f;
  }

  const std::string& id() const noexcept { return id_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return propositions_.size(); }
  const std::vector<std::string>& propositions() const noexcept { return propositions_; }

  std::optional<std::size_t> index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Subset full() const { return Subset::full(size()); }

  Subset subset_of(std::span<const std::string> labels) const {
    Subset s(size());
    for (const auto& l : labels) {
      auto i = index_of(l);
      if (!i) fail(ErrorCode::unknown_label, "frame '" + id_ + "' has no proposition '" + l + "'");
      s.set(*i);
    }
    return s;
  }

  std::vector<std::string> labels_of(const Subset& s) const {
    std::vector<std::string> out;
    s.for_each_member([&](std::size_t i) { out.push_back(propositions_[i]); });
    return out;
  }

  // "{A,B}" with members in frame order; the full set prints as "Θ".
  std::string describe(const Subset& s) const {
    if (s.is_full() && size() > 1) return "Θ";
    std::string out = "{";
    bool first = true;
    s.for_each_member([&](std::size_t i) {
      if (!first) out += ',';
      out += propositions_[i];
      first = false;
    });
    return out + "}";
  }

  bool operator==(const Frame& o) const {
    return id_ == o.id_ && label_ == o.label_ && propositions_ == o.propositions_;
  }

 private:
  Frame() = default;

  std::string id_;
  std::string label_;
  std::vector<std::string> propositions_;
  std::unordered_map<std::string, std::size_t> index_;
};

using FramePtr = std::shared_ptr<const Frame>;

inline FramePtr make_frame(std::string id, std::vector<std::string> propositions,
                           std::string label = {}) {
  return std::make_shared<const Frame>(
      Frame::make(std::move(id), std::move(propositions), std::move(label)));
}

struct PropSet {
  std::string frame_id;
  Subset members;

  static PropSet of(const Frame& f, std::span<const std::string> labels) {
    return {f.id(), f.subset_of(labels)};
  }
  static PropSet of(const Frame& f, std::initializer_list<std::string> labels) {
    return of(f, std::span<const std::string>(labels.begin(), labels.size()));
  }
  static PropSet theta(const Frame& f) { return {f.id(), f.full()}; }
  static PropSet none(const Frame& f) { return {f.id(), Subset(f.size())}; }

  bool is_empty() const noexcept { return members.empty(); }
  bool operator==(const PropSet&) const = default;
};

enum class Confidence { certain, probable, possible };
enum class EntryPath { static_kb, automated_feed, manual };

constexpr std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::certain: return "certain";
    case Confidence::probable: return "probable";
    case Confidence::possible: return "possible";
  }
  return "probable";
}

constexpr std::string_view to_string(EntryPath p) {
  switch (p) {
    case EntryPath::static_kb: return "static_kb";
    case EntryPath::automated_feed: return "automated_feed";
    case EntryPath::manual: return "manual";
  }
  return "manual";
}

inline Confidence parse_confidence(std::string_view s) {
  if (s == "certain") return Confidence::certain;
  if (s == "probable") return Confidence::probable;
  if (s == "possible") return Confidence::possible;
  fail(ErrorCode::invalid_argument, "unknown confidence level '" + std::string(s) + "'");
}

inline EntryPath parse_entry_path(std::string_view s) {
  if (s == "static_kb") return EntryPath::static_kb;
  if (s == "automated_feed") return EntryPath::automated_feed;
  if (s == "manual") return EntryPath::manual;
  fail(ErrorCode::invalid_argument, "unknown entry path '" + std::string(s) + "'");
}

struct SourceMeta {
  std::string name;
  Confidence confidence = Confidence::probable;
  // Operator's screening judgment that this evidence shares no observations
  // with other evidence it is fused with.
  bool independent = true;
  EntryPath entry_path = EntryPath::manual;
  std::optional<std::string> timestamp;  // ISO-8601 when known

  bool operator==(const SourceMeta&) const = default;
};

enum class BoeKind { initial, secondary };

struct FocalElement {
  Subset set;
  double mass = 0.0;

  bool operator==(const FocalElement&) const = default;
};

// A body of evidence: a sparse mass function over subsets of one frame.
// Focal elements are kept sorted by subset order and all carry mass > 0.
// A BOE holding mass on the empty set is open-world; only the unnormalized
// conjunctive rule produces those.
class Boe {
 public:
  // Builds from already-validated internal data: zero masses are dropped,
  // duplicate sets merged in input order, then sorted.
  static Boe from_focal(std::string id, FramePtr frame, std::vector<FocalElement> focal,
                        SourceMeta source = {}, BoeKind kind = BoeKind::secondary) {
    Boe b;
    b.id_ = std::move(id);
    b.frame_ = std::move(frame);
    b.source_ = std::move(source);
    b.kind_ = kind;
    std::stable_sort(focal.begin(), focal.end(),
                     [](const FocalElement& x, const FocalElement& y) { return x.set < y.set; });
    for (auto& fe : focal) {
      if (!(fe.mass > 0.0)) continue;
      if (!b.focal_.empty() && b.focal_.back().set == fe.set)
        b.focal_.back().mass += fe.mass;
      else
        b.focal_.push_back(std::move(fe));
    }
    return b;
  }

  static Boe vacuous(FramePtr frame, std::string id = {}, SourceMeta source = {}) {
    Subset theta = frame->full();
    return from_focal(std::move(id), std::move(frame), {{std::move(theta), 1.0}},
                      std::move(source), BoeKind::initial);
  }

  const std::string& id() const noexcept { return id_; }
  const Frame& frame() const noexcept { return *frame_; }
  const FramePtr& frame_ptr() const noexcept { return frame_; }
  const std::vector<FocalElement>& focal() const noexcept { return focal_; }
  const SourceMeta& source() const noexcept { return source_; }
  BoeKind kind() const noexcept { return kind_; }

  // Dempster conflict recorded by the fusion that produced this BOE.
  double conflict() const noexcept { return conflict_; }
  // Mass that found no compatible proposition during translation.
  double translation_loss() const noexcept { return translation_loss_; }

  double mass_of(const Subset& s) const {
    auto it = std::lower_bound(focal_.begin(), focal_.end(), s,
                               [](const FocalElement& fe, const Subset& k) { return fe.set < k; });
    return (it != focal_.end() && it->set == s) ? it->mass : 0.0;
  }

  double empty_mass() const { return mass_of(Subset(frame_->size())); }
  bool is_open_world() const { return !focal_.empty() && focal_.front().set.empty(); }
  bool is_vacuous() const { return focal_.size() == 1 && focal_.front().set.is_full(); }

  double total_mass() const {
    double s = 0.0;
    for (const auto& fe : focal_) s += fe.mass;
    return s;
  }

  Boe with_id(std::string id) const {
    Boe b = *this;
    b.id_ = std::move(id);
    return b;
  }
  Boe with_source(SourceMeta source) const {
    Boe b = *this;
    b.source_ = std::move(source);
    return b;
  }
  Boe with_kind(BoeKind kind) const {
    Boe b = *this;
    b.kind_ = kind;
    return b;
  }
  Boe with_conflict(double k) const {
    Boe b = *this;
    b.conflict_ = k;
    return b;
  }
  Boe with_translation_loss(double loss) const {
    Boe b = *this;
    b.translation_loss_ = loss;
    return b;
  }

  // Value equality on the evidence itself (frame and masses, bit-exact).
  bool same_masses(const Boe& o) const { return *frame_ == *o.frame_ && focal_ == o.focal_; }

 private:
  Boe() = default;

  std::string id_;
  FramePtr frame_;
  std::vector<FocalElement> focal_;
  SourceMeta source_;
  BoeKind kind_ = BoeKind::initial;
  double conflict_ = 0.0;
  double translation_loss_ = 0.0;
};

struct Assignment {
  PropSet set;
  double mass = 0.0;
};

// Validated entry path for operator- or file-supplied masses. Any deficit
// below one is uncommitted belief and goes to the full frame.
inline Boe make_boe(FramePtr frame, std::span<const Assignment> assignments, SourceMeta source,
                    std::string id = {}) {
  std::vector<FocalElement> focal;
  focal.reserve(assignments.size() + 1);
  double sum = 0.0;
  for (const auto& a : assignments) {
    if (a.set.frame_id != frame->id())
      fail(ErrorCode::frame_mismatch,
           "set belongs to frame '" + a.set.frame_id + "', not '" + frame->id() + "'");
    if (a.set.members.universe() != frame->size())
      fail(ErrorCode::frame_mismatch, "set width does not match frame '" + frame->id() + "'");
    if (!std::isfinite(a.mass) || a.mass < 0.0)
      fail(ErrorCode::invalid_mass, "mass must be a finite value >= 0");
    if (a.mass == 0.0) continue;
    if (a.set.members.empty())
      fail(ErrorCode::empty_focal_set, "the empty set cannot carry mass in an entered BOE");
    sum += a.mass;
    focal.push_back({a.set.members, a.mass});
  }
  if (sum > 1.0 + kMassTolerance) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", sum);
    fail(ErrorCode::mass_sum_exceeded, "masses sum to " + std::string(buf) + " > 1");
  }
  // Deficits below 1e-12 are summation noise, not uncommitted belief.
  if (1.0 - sum > 1e-12) focal.push_back({frame->full(), 1.0 - sum});
  return Boe::from_focal(std::move(id), std::move(frame), std::move(focal), std::move(source),
                         BoeKind::initial);
}

inline Boe make_boe(FramePtr frame, std::initializer_list<Assignment> assignments,
                    SourceMeta source = {}, std::string id = {}) {
  return make_boe(std::move(frame), std::span<const Assignment>(assignments.begin(), assignments.size()),
                  std::move(source), std::move(id));
}

namespace detail {

inline void check_frame(const Boe& boe, const PropSet& a) {
  if (a.frame_id != boe.frame().id() || a.members.universe() != boe.frame().size())
    fail(ErrorCode::frame_mismatch, "set belongs to frame '" + a.frame_id + "' but the BOE is on '" +
                                        boe.frame().id() + "'");
}

}  // namespace detail

inline double belief(const Boe& boe, const PropSet& a) {
  detail::check_frame(boe, a);
  double s = 0.0;
  for (const auto& fe : boe.focal())
    if (!fe.set.empty() && fe.set.is_subset_of(a.members)) s += fe.mass;
  return s;
}

inline double plausibility(const Boe& boe, const PropSet& a) {
  detail::check_frame(boe, a);
  double s = 0.0;
  for (const auto& fe : boe.focal())
    if (fe.set.intersects(a.members)) s += fe.mass;
  return s;
}

inline double commonality(const Boe& boe, const PropSet& a) {
  detail::check_frame(boe, a);
  double s = 0.0;
  for (const auto& fe : boe.focal())
    if (a.members.is_subset_of(fe.set)) s += fe.mass;
  return s;
}

// Commonality of every subset of a frame with n <= 30, indexed by bit mask.
// Superset-sum (zeta) transform over the dense lattice.
inline std::vector<double> commonality_table(const Boe& boe) {
  const std::size_t n = boe.frame().size();
  if (n > 30) fail(ErrorCode::frame_too_large, "dense commonality table needs n <= 30");
  std::vector<double> q(std::size_t{1} << n, 0.0);
  for (const auto& fe : boe.focal()) q[fe.set.low_mask()] += fe.mass;
  for (std::size_t bit = 0; bit < n; ++bit) {
    const std::size_t b = std::size_t{1} << bit;
    for (std::size_t mask = 0; mask < q.size(); ++mask)
      if ((mask & b) == 0) q[mask] += q[mask | b];
  }
  return q;
}

// I(bel) = -sum over subsets a of log2 q(a), skipping q(a) = 0 terms.
inline double info_measure(const Boe& boe, std::size_t cap = kExplanationFrameCap) {
  const std::size_t n = boe.frame().size();
  if (n > cap)
    fail(ErrorCode::frame_too_large,
         "frame '" + boe.frame().id() + "' has " + std::to_string(n) +
             " propositions, beyond the exact lattice cap of " + std::to_string(cap) +
             "; use the restricted influence computation");
  if (boe.is_vacuous()) return 0.0;
  const auto q = commonality_table(boe);
  double info = 0.0;
  for (double v : q)
    if (v > 0.0) info -= std::log2(v);
  return info == 0.0 ? 0.0 : info;  // avoid -0.0
}

// Same sum restricted to an explicit list of subsets.
inline double info_measure_over(const Boe& boe, std::span<const Subset> lattice) {
  double info = 0.0;
  for (const auto& a : lattice) {
    double q = 0.0;
    for (const auto& fe : boe.focal())
      if (a.is_subset_of(fe.set)) q += fe.mass;
    if (q > 0.0) info -= std::log2(q);
  }
  return info == 0.0 ? 0.0 : info;
}

struct ConclusionRow {
  PropSet statement;
  std::string label;
  double support = 0.0;
  double uncertainty = 0.0;
  double against = 0.0;
};

struct ConclusionReport {
  std::string boe_id;
  std::string frame_id;
  std::vector<ConclusionRow> rows;
  double conflict = 0.0;
  double unknown_mass = 0.0;
  double translation_loss = 0.0;
  // True when the best non-Θ statement beats its best disjoint rival by less than the margin.
  bool inconclusive = false;
};

inline constexpr double kInconclusiveMargin = 0.05;

// Support / uncertainty / against for every focal set of the BOE and for the
// atoms inside them, keeping only statements with nonzero mass or support.
// Open-world BOEs are reported on their conditionally normalized closed part.
inline ConclusionReport conclusion_report(const Boe& boe,
                                          double inconclusive_margin = kInconclusiveMargin) {
  ConclusionReport rep;
  rep.boe_id = boe.id();
  rep.frame_id = boe.frame().id();
  rep.conflict = boe.conflict();
  rep.translation_loss = boe.translation_loss();

  const Frame& frame = boe.frame();
  Boe closed = boe;
  if (boe.is_open_world()) {
    rep.unknown_mass = boe.empty_mass();
    const double keep = 1.0 - rep.unknown_mass;
    std::vector<FocalElement> rest;
    if (keep > 0.0) {
      for (const auto& fe : boe.focal())
        if (!fe.set.empty()) rest.push_back({fe.set, fe.mass / keep});
    }
    closed = Boe::from_focal(boe.id(), boe.frame_ptr(), std::move(rest), boe.source(), boe.kind());
  }

  std::vector<Subset> candidates;
  for (const auto& fe : closed.focal()) {
    candidates.push_back(fe.set);
    if (fe.set.count() > 1)
      fe.set.for_each_member([&](std::size_t i) { candidates.push_back(Subset::singleton(frame.size(), i)); });
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (auto& c : candidates) {
    PropSet ps{frame.id(), c};
    const double bel = belief(closed, ps);
    const double mass = closed.mass_of(c);
    if (!(bel > 0.0) && !(mass > 0.0)) continue;
    const double pl = plausibility(closed, ps);
    const double against = belief(closed, PropSet{frame.id(), c.complement()});
    rep.rows.push_back({ps, frame.describe(c), bel, pl - bel, against});
  }
  std::stable_sort(rep.rows.begin(), rep.rows.end(), [](const ConclusionRow& x, const ConclusionRow& y) {
    if (x.support != y.support) return x.support > y.support;
    const auto cx = x.statement.members.count(), cy = y.statement.members.count();
    if (cx != cy) return cx < cy;
    return x.statement.members < y.statement.members;
  });

  // The runner-up is the best rival: a statement disjoint from the top one.
  // Supersets of the top statement always score at least as high, so they
  // are refinements rather than competitors.
  const ConclusionRow* top = nullptr;
  for (const auto& r : rep.rows)
    if (!r.statement.members.is_full() && (!top || r.support > top->support)) top = &r;
  double best = 0.0, runner = 0.0;
  if (top) {
    best = top->support;
    for (const auto& r : rep.rows)
      if (!r.statement.members.intersects(top->statement.members)) runner = std::max(runner, r.support);
  }
  rep.inconclusive = (best - runner) < inconclusive_margin;
  return rep;
}

}  // namespace horizon
