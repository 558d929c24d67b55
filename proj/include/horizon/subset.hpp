#pragma once

// Arbitrary-width bit set over the propositions of one frame. Focal sets are
// keyed by these, so a frame of a few hundred propositions costs a handful of
// machine words per focal set instead of a 2^n lattice.

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace horizon {

class Subset {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  Subset() = default;
  explicit Subset(std::size_t universe)
      : universe_(universe), words_((universe + kWordBits - 1) / kWordBits, 0) {}

  static Subset full(std::size_t universe) {
    Subset s(universe);
    std::fill(s.words_.begin(), s.words_.end(), ~Word{0});
    s.trim();
    return s;
  }

  static Subset singleton(std::size_t universe, std::size_t index) {
    Subset s(universe);
    s.set(index);
    return s;
  }

  // Bits of `mask` become members; only valid for universes of at most 64.
  static Subset from_mask(std::size_t universe, Word mask) {
    Subset s(universe);
    if (!s.words_.empty()) s.words_[0] = mask;
    s.trim();
    return s;
  }

  std::size_t universe() const noexcept { return universe_; }

  bool test(std::size_t i) const noexcept {
    return i < universe_ && ((words_[i / kWordBits] >> (i % kWordBits)) & 1U) != 0;
  }
  void set(std::size_t i) noexcept { words_[i / kWordBits] |= Word{1} << (i % kWordBits); }
  void reset(std::size_t i) noexcept { words_[i / kWordBits] &= ~(Word{1} << (i % kWordBits)); }

  bool empty() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
  }
  bool is_full() const noexcept { return *this == full(universe_); }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (Word w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool is_subset_of(const Subset& other) const noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if ((words_[i] & ~other.words_[i]) != 0) return false;
    return true;
  }

  bool intersects(const Subset& other) const noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if ((words_[i] & other.words_[i]) != 0) return true;
    return false;
  }

  Subset& operator&=(const Subset& o) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  Subset& operator|=(const Subset& o) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  friend Subset operator&(Subset a, const Subset& b) noexcept { return a &= b; }
  friend Subset operator|(Subset a, const Subset& b) noexcept { return a |= b; }

  Subset complement() const {
    Subset s = *this;
    for (Word& w : s.words_) w = ~w;
    s.trim();
    return s;
  }

  // Low 64 bits as an integer mask; used by dense lattice code on small frames.
  Word low_mask() const noexcept { return words_.empty() ? 0 : words_[0]; }

  template <class Fn>
  void for_each_member(Fn&& fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      Word w = words_[wi];
      while (w != 0) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(w));
        fn(wi * kWordBits + bit);
        w &= w - 1;
      }
    }
  }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    out.reserve(count());
    for_each_member([&](std::size_t i) { out.push_back(i); });
    return out;
  }

  std::size_t hash() const noexcept {
    std::size_t h = 1469598103934665603ULL ^ universe_;
    for (Word w : words_) {
      h ^= static_cast<std::size_t>(w);
      h *= 1099511628211ULL;
      h ^= h >> 29;
    }
    return h;
  }

  bool operator==(const Subset&) const = default;

  // Numeric order of the bit pattern (highest word first), so {a} < {b} < {a,b}.
  std::strong_ordering operator<=>(const Subset& o) const noexcept {
    if (auto c = universe_ <=> o.universe_; c != 0) return c;
    for (std::size_t i = words_.size(); i-- > 0;)
      if (auto c = words_[i] <=> o.words_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }

 private:
  void trim() noexcept {
    const std::size_t rem = universe_ % kWordBits;
    if (rem != 0 && !words_.empty()) words_.back() &= (Word{1} << rem) - 1;
  }

  std::size_t universe_ = 0;
  std::vector<Word> words_;
};

struct SubsetHash {
  std::size_t operator()(const Subset& s) const noexcept { return s.hash(); }
};

}  // namespace horizon
