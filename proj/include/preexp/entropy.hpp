// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace preexp {

namespace detail {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Stateless 64-bit hash of (seed, index); the Hilbert-cube coordinate of a
/// base stream is hash_index(seed, i) / 2^64.
inline std::uint64_t hash_index(std::uint64_t seed, std::uint64_t index) {
  return detail::mix64(detail::mix64(seed) + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

/// Maps a 64-bit hash to [0, 1) using its top 53 bits.
inline double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class EntropyExhausted : public std::runtime_error {
 public:
  EntropyExhausted() : std::runtime_error("scripted entropy exhausted") {}
};

/// An element of the entropy space: an infinite source of [0,1] values with
/// projections pi_u (first value), pi_l / pi_r (disjoint halves) and pairing.
///
/// Three shapes exist:
///   - base streams, realised as i -> u(seed, 2^depth * i + offset). pi_l and
///     pi_r compose the affine index map; once the stride would exceed 2^63
///     the map folds into a freshly derived seed.
///   - pairs, on which the projections are exact inverses of pair().
///   - scripted queues (test double): every projection shares one FIFO and
///     pi_u pops the next value, so draws come out in program order. Scripted
///     entropy does not satisfy the projection laws.
class Entropy {
 public:
  static Entropy base(std::uint64_t seed);
  static Entropy scripted(std::vector<double> values);
  static Entropy pair(Entropy left, Entropy right);

  double pi_u() const {
    return kind_ == Kind::kBase ? unit_interval(hash_index(seed_, offset_)) : pi_u_slow();
  }
  Entropy pi_l() const { return project(false); }
  Entropy pi_r() const { return project(true); }
  /// In-place pi_l / pi_r.
  void to_left() { step_into(false); }
  void to_right() { step_into(true); }

  bool is_base() const { return kind_ == Kind::kBase; }
  bool is_pair() const { return kind_ == Kind::kPair; }
  bool is_scripted() const { return kind_ == Kind::kScripted; }

  // Base-stream introspection.
  std::uint64_t seed() const { return seed_; }
  unsigned depth() const { return depth_; }
  std::uint64_t offset() const { return offset_; }
  /// Underlying base index of logical element i (base streams only).
  std::uint64_t base_index(std::uint64_t i) const;
  /// Logical element i of the sequence. Pairs interleave their halves.
  double element(std::uint64_t i) const;

  /// Values remaining in a scripted queue.
  std::size_t scripted_remaining() const;

 private:
  enum class Kind : std::uint8_t { kBase, kPair, kScripted };
  struct Shared;

  Entropy() = default;
  Entropy project(bool right) const {
    if (kind_ != Kind::kBase) return project_slow(right);
    Entropy e;
    e.seed_ = seed_;
    e.offset_ = offset_;
    e.depth_ = depth_;
    e.step_into(right);
    return e;
  }
  void step_into(bool right) {
    if (kind_ != Kind::kBase) {
      *this = project_slow(right);
      return;
    }
    if (right) offset_ += std::uint64_t{1} << depth_;
    if (++depth_ == 64) fold();
  }
  double pi_u_slow() const;
  Entropy project_slow(bool right) const;
  void fold();

  Kind kind_ = Kind::kBase;
  unsigned depth_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t offset_ = 0;
  std::shared_ptr<Shared> node_;  // pair halves or the scripted queue
};

struct Entropy::Shared {
  Entropy left;
  Entropy right;
  std::deque<double> queue;
};

/// The continuation entropy theta_K of an operational configuration. It is
/// always either a base entropy or `e :: rest` built by the (seq) rule, so it
/// is stored as a stack on top of a tail; pair() pushes and pi_r() of a pair
/// pops. Semantically identical to nested Entropy::pair values.
class ContEntropy {
 public:
  ContEntropy() : tail_(Entropy::base(0)) {}
  explicit ContEntropy(Entropy tail) : tail_(std::move(tail)) {}

  /// theta_K := e :: theta_K
  void push(Entropy e) { pushed_.push_back(std::move(e)); }
  /// theta_K := pi_r(e) :: theta_K
  void push_right_of(const Entropy& e) { pushed_.emplace_back(e).to_right(); }
  /// pi_l(theta_K)
  Entropy left() const { return pushed_.empty() ? tail_.pi_l() : pushed_.back(); }
  /// Returns pi_l(theta_K) and sets theta_K := pi_r(theta_K).
  Entropy pop_left() {
    if (pushed_.empty()) {
      Entropy out = tail_.pi_l();
      tail_.to_right();
      return out;
    }
    Entropy out = std::move(pushed_.back());
    pushed_.pop_back();
    return out;
  }
  /// As pop_left, assigning into `out`.
  void pop_left_into(Entropy& out) {
    if (pushed_.empty()) {
      out = tail_.pi_l();
      tail_.to_right();
      return;
    }
    out = std::move(pushed_.back());
    pushed_.pop_back();
  }
  /// theta_K := pi_r(theta_K)
  void drop_left() {
    if (pushed_.empty()) {
      tail_.to_right();
    } else {
      pushed_.pop_back();
    }
  }

  std::size_t pushed() const { return pushed_.size(); }
  /// The equivalent nested-pair entropy.
  Entropy materialize() const;

 private:
  Entropy tail_;
  std::vector<Entropy> pushed_;
};

}  // namespace preexp
