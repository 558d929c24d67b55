#pragma once

// Frame gallery: frames linked by compatibility relations, translation of
// evidence across a relation, and shortest-route translation between frames.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "horizon/belief.hpp"
#include "horizon/error.hpp"

namespace horizon {

enum class Direction { a_to_b, b_to_a };

// Crisp element-level pairing between two frames. A pair (i, j) states that
// proposition i of frame a and proposition j of frame b can be true together.
class CompatibilityRelation {
 public:
  using IndexPair = std::pair<std::size_t, std::size_t>;

  CompatibilityRelation(FramePtr a, FramePtr b, std::set<IndexPair> pairs)
      : a_(std::move(a)), b_(std::move(b)), pairs_(std::move(pairs)) {
    if (a_->id() == b_->id())
      fail(ErrorCode::invalid_argument, "a relation needs two distinct frames ('" + a_->id() + "')");
    a_to_b_.assign(a_->size(), Subset(b_->size()));
    b_to_a_.assign(b_->size(), Subset(a_->size()));
    for (auto [i, j] : pairs_) {
      if (i >= a_->size() || j >= b_->size())
        fail(ErrorCode::invalid_argument, "pair index out of range in relation " + a_->id() + "<->" + b_->id());
      a_to_b_[i].set(j);
      b_to_a_[j].set(i);
    }
  }

  static CompatibilityRelation from_labels(FramePtr a, FramePtr b,
                                           const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::set<IndexPair> idx;
    for (const auto& [la, lb] : pairs) {
      auto i = a->index_of(la);
      if (!i) fail(ErrorCode::unknown_label, "frame '" + a->id() + "' has no proposition '" + la + "'");
      auto j = b->index_of(lb);
      if (!j) fail(ErrorCode::unknown_label, "frame '" + b->id() + "' has no proposition '" + lb + "'");
      idx.emplace(*i, *j);
    }
    return CompatibilityRelation(std::move(a), std::move(b), std::move(idx));
  }

  const Frame& frame_a() const noexcept { return *a_; }
  const Frame& frame_b() const noexcept { return *b_; }
  const FramePtr& frame_a_ptr() const noexcept { return a_; }
  const FramePtr& frame_b_ptr() const noexcept { return b_; }
  const std::set<IndexPair>& pairs() const noexcept { return pairs_; }

  std::vector<std::pair<std::string, std::string>> label_pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(pairs_.size());
    for (auto [i, j] : pairs_) out.emplace_back(a_->propositions()[i], b_->propositions()[j]);
    return out;
  }

  const Frame& source(Direction d) const { return d == Direction::a_to_b ? *a_ : *b_; }
  const FramePtr& target_ptr(Direction d) const { return d == Direction::a_to_b ? b_ : a_; }

  // Direction that starts on the given frame id.
  Direction direction_from(const std::string& frame_id) const {
    if (frame_id == a_->id()) return Direction::a_to_b;
    if (frame_id == b_->id()) return Direction::b_to_a;
    fail(ErrorCode::frame_mismatch,
         "frame '" + frame_id + "' is not part of relation " + a_->id() + "<->" + b_->id());
  }

  Subset image_bits(const Subset& s, Direction d) const {
    const auto& adj = d == Direction::a_to_b ? a_to_b_ : b_to_a_;
    Subset out(target_ptr(d)->size());
    s.for_each_member([&](std::size_t i) { out |= adj[i]; });
    return out;
  }

  PropSet image(const PropSet& s, Direction d) const {
    const Frame& src = source(d);
    if (s.frame_id != src.id() || s.members.universe() != src.size())
      fail(ErrorCode::frame_mismatch, "set on frame '" + s.frame_id + "' cannot be mapped from '" + src.id() + "'");
    return {target_ptr(d)->id(), image_bits(s.members, d)};
  }

 private:
  FramePtr a_;
  FramePtr b_;
  std::set<IndexPair> pairs_;
  std::vector<Subset> a_to_b_;
  std::vector<Subset> b_to_a_;
};

using RelationPtr = std::shared_ptr<const CompatibilityRelation>;

struct TranslationStep {
  RelationPtr relation;
  Direction direction;

  const std::string& from() const { return relation->source(direction).id(); }
  const std::string& to() const { return relation->target_ptr(direction)->id(); }
};

// Translation of a single focal-set-wise projection: each focal set's mass moves
// to its union image. Mass whose image is empty lands on the target Θ and is
// counted as translation loss.
inline Boe translate(const Boe& boe, const CompatibilityRelation& rel, Direction dir) {
  if (boe.is_open_world())
    fail(ErrorCode::open_world_input, "cannot translate open-world BOE '" + boe.id() + "'");
  const Frame& src = rel.source(dir);
  if (boe.frame().id() != src.id())
    fail(ErrorCode::frame_mismatch,
         "BOE on frame '" + boe.frame().id() + "' but relation starts at '" + src.id() + "'");
  const FramePtr& target = rel.target_ptr(dir);
  std::vector<FocalElement> out;
  out.reserve(boe.focal().size());
  double loss = 0.0;
  for (const auto& fe : boe.focal()) {
    Subset img = rel.image_bits(fe.set, dir);
    if (img.empty()) {
      loss += fe.mass;
      img = target->full();
    }
    out.push_back({std::move(img), fe.mass});
  }
  return Boe::from_focal(boe.id(), target, std::move(out), boe.source(), BoeKind::secondary)
      .with_translation_loss(boe.translation_loss() + loss);
}

// Undirected graph of frames and the relations between them. Copies share
// frames and relations, so edited galleries are cheap new values.
class FrameGallery {
 public:
  void add_frame(FramePtr frame) {
    const std::string id = frame->id();
    if (!frames_.emplace(id, std::move(frame)).second)
      fail(ErrorCode::invalid_argument, "frame '" + id + "' is already registered");
    order_.push_back(id);
  }

  const FramePtr& frame(const std::string& id) const {
    auto it = frames_.find(id);
    if (it == frames_.end()) fail(ErrorCode::unknown_frame, "unknown frame '" + id + "'");
    return it->second;
  }
  bool has_frame(const std::string& id) const { return frames_.count(id) != 0; }

  // Frames in registration order.
  std::vector<FramePtr> frames() const {
    std::vector<FramePtr> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(frames_.at(id));
    return out;
  }
  std::size_t frame_count() const noexcept { return frames_.size(); }

  const CompatibilityRelation& add_relation(const std::string& a, const std::string& b,
                                            const std::vector<std::pair<std::string, std::string>>& pairs,
                                            bool replace = false) {
    auto rel = std::make_shared<const CompatibilityRelation>(
        CompatibilityRelation::from_labels(frame(a), frame(b), pairs));
    return put_relation(std::move(rel), replace);
  }

  const CompatibilityRelation& put_relation(RelationPtr rel, bool replace = false) {
    const auto key = key_of(rel->frame_a().id(), rel->frame_b().id());
    if (!has_frame(key.first) || !has_frame(key.second))
      fail(ErrorCode::unknown_frame, "relation " + key.first + "<->" + key.second + " references an unregistered frame");
    auto it = relations_.find(key);
    if (it != relations_.end()) {
      if (!replace)
        fail(ErrorCode::duplicate_relation, "a relation between '" + key.first + "' and '" + key.second +
                                                "' already exists");
      it->second = std::move(rel);
      return *it->second;
    }
    relation_order_.push_back(key);
    return *relations_.emplace(key, std::move(rel)).first->second;
  }

  RelationPtr relation_between(const std::string& a, const std::string& b) const {
    auto it = relations_.find(key_of(a, b));
    return it == relations_.end() ? nullptr : it->second;
  }

  // Relations in insertion order.
  std::vector<RelationPtr> relations() const {
    std::vector<RelationPtr> out;
    out.reserve(relation_order_.size());
    for (const auto& k : relation_order_) out.push_back(relations_.at(k));
    return out;
  }

  std::vector<std::string> neighbors(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& [k, rel] : relations_) {
      if (k.first == id) out.push_back(k.second);
      else if (k.second == id) out.push_back(k.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Fewest-hop route between two frames. Among equally short routes, the one
  // whose sequence of frame ids is lexicographically smallest wins.
  std::vector<TranslationStep> translation_path(const std::string& from, const std::string& to) const {
    frame(from);
    frame(to);
    if (from == to) return {};
    // Distances to the target, then a greedy walk from the source.
    std::map<std::string, std::size_t> dist;
    std::deque<std::string> queue{to};
    dist[to] = 0;
    while (!queue.empty()) {
      std::string cur = std::move(queue.front());
      queue.pop_front();
      for (auto& nb : neighbors(cur)) {
        if (dist.count(nb)) continue;
        dist[nb] = dist[cur] + 1;
        queue.push_back(std::move(nb));
      }
    }
    if (!dist.count(from))
      fail(ErrorCode::unreachable_frame,
           "no chain of compatibility relations links frame '" + from + "' to frame '" + to + "'");
    std::vector<TranslationStep> path;
    std::string cur = from;
    while (cur != to) {
      const std::size_t d = dist[cur];
      for (const auto& nb : neighbors(cur)) {
        auto it = dist.find(nb);
        if (it != dist.end() && it->second + 1 == d) {
          RelationPtr rel = relation_between(cur, nb);
          path.push_back({rel, rel->direction_from(cur)});
          cur = nb;
          break;
        }
      }
    }
    return path;
  }

 private:
  static std::pair<std::string, std::string> key_of(const std::string& a, const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  std::map<std::string, FramePtr> frames_;
  std::vector<std::string> order_;
  std::map<std::pair<std::string, std::string>, RelationPtr> relations_;
  std::vector<std::pair<std::string, std::string>> relation_order_;
};

inline Boe translate_along(const Boe& boe, const std::vector<TranslationStep>& path) {
  if (boe.is_open_world())
    fail(ErrorCode::open_world_input, "cannot translate open-world BOE '" + boe.id() + "'");
  Boe cur = boe.with_kind(BoeKind::secondary);
  for (const auto& step : path) cur = translate(cur, *step.relation, step.direction);
  return cur;
}

inline Boe translate_to(const Boe& boe, const FrameGallery& gallery, const std::string& target) {
  return translate_along(boe, gallery.translation_path(boe.frame().id(), target));
}

}  // namespace horizon
