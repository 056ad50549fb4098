// SPDX-License-Identifier: Apache-2.0

#include "preexp/entropy.hpp"

namespace preexp {
namespace {

constexpr std::uint64_t kFoldSalt = 0xd1b54a32d192ed03ULL;

}  // namespace

Entropy Entropy::base(std::uint64_t seed) {
  Entropy e;
  e.kind_ = Kind::kBase;
  e.seed_ = seed;
  return e;
}

Entropy Entropy::scripted(std::vector<double> values) {
  Entropy e;
  e.kind_ = Kind::kScripted;
  e.node_ = std::make_shared<Shared>();
  e.node_->queue.assign(values.begin(), values.end());
  return e;
}

Entropy Entropy::pair(Entropy left, Entropy right) {
  Entropy e;
  e.kind_ = Kind::kPair;
  e.node_ = std::make_shared<Shared>();
  e.node_->left = std::move(left);
  e.node_->right = std::move(right);
  return e;
}

double Entropy::pi_u_slow() const {
  if (kind_ == Kind::kPair) return node_->left.pi_u();
  if (node_->queue.empty()) throw EntropyExhausted();
  double v = node_->queue.front();
  node_->queue.pop_front();
  return v;
}

Entropy Entropy::project_slow(bool right) const {
  if (kind_ == Kind::kPair) return right ? node_->right : node_->left;
  return *this;  // scripted: every projection shares the queue
}

// The stride 2^64 is not representable; continue on a derived stream keyed by
// the full path offset, which distinguishes all 2^64 siblings.
void Entropy::fold() {
  seed_ = hash_index(seed_ ^ kFoldSalt, offset_);
  offset_ = 0;
  depth_ = 0;
}

std::uint64_t Entropy::base_index(std::uint64_t i) const {
  if (kind_ != Kind::kBase) throw std::logic_error("base_index on a non-base entropy");
  return (i << depth_) + offset_;
}

double Entropy::element(std::uint64_t i) const {
  switch (kind_) {
    case Kind::kBase:
      return unit_interval(hash_index(seed_, base_index(i)));
    case Kind::kPair:
      return (i % 2 == 0) ? node_->left.element(i / 2) : node_->right.element(i / 2);
    case Kind::kScripted:
      if (i >= node_->queue.size()) throw EntropyExhausted();
      return node_->queue[i];
  }
  return 0.0;
}

std::size_t Entropy::scripted_remaining() const {
  return kind_ == Kind::kScripted ? node_->queue.size() : 0;
}

Entropy ContEntropy::materialize() const {
  Entropy out = tail_;
  for (const auto& e : pushed_) out = Entropy::pair(e, out);
  return out;
}

}  // namespace preexp
