#include "orr/predecessor.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace orr {

namespace detail {

namespace {
constexpr std::size_t kFlat = 16;
}

VebLayer::VebLayer(const std::vector<Hit>& sorted, unsigned width) : width_(width) {
  size_ = sorted.size();
  if (size_ == 0) return;
  min_ = sorted.front();
  max_ = sorted.back();
  if (size_ <= kFlat) {
    flat_ = sorted;
    return;
  }
  lo_bits_ = width / 2;
  std::vector<Hit> summary_hits;
  std::vector<Hit> run;
  for (std::size_t i = 0; i < size_;) {
    std::uint64_t h = hi(sorted[i].first);
    run.clear();
    for (; i < size_ && hi(sorted[i].first) == h; ++i)
      run.emplace_back(lo(sorted[i].first), sorted[i].second);
    auto idx = static_cast<std::uint32_t>(clusters_.size());
    clusters_.emplace_back(run, lo_bits_);
    cluster_of_.emplace(h, idx);
    summary_hits.emplace_back(h, idx);
  }
  summary_ = std::make_unique<VebLayer>(summary_hits, width - lo_bits_);
}

std::optional<VebLayer::Hit> VebLayer::pred(std::uint64_t e) const {
  if (size_ == 0 || e < min_.first) return std::nullopt;
  if (e >= max_.first) return max_;
  if (!flat_.empty()) {
    auto it = std::upper_bound(flat_.begin(), flat_.end(), e,
                               [](std::uint64_t v, const Hit& h) { return v < h.first; });
    return *(it - 1);
  }
  const std::uint64_t h = hi(e), l = lo(e);
  if (auto it = cluster_of_.find(h); it != cluster_of_.end()) {
    const VebLayer& c = clusters_[it->second];
    if (l >= c.min_.first) {
      auto r = c.pred(l);
      return Hit{join(h, r->first), r->second};
    }
  }
  // e >= min, so some earlier cluster exists and h >= 1.
  auto s = summary_->pred(h - 1);
  const VebLayer& c = clusters_[s->second];
  return Hit{join(s->first, c.max_.first), c.max_.second};
}

std::optional<VebLayer::Hit> VebLayer::succ(std::uint64_t e) const {
  if (size_ == 0 || e > max_.first) return std::nullopt;
  if (e <= min_.first) return min_;
  if (!flat_.empty()) {
    auto it = std::lower_bound(flat_.begin(), flat_.end(), e,
                               [](const Hit& h, std::uint64_t v) { return h.first < v; });
    return *it;
  }
  const std::uint64_t h = hi(e), l = lo(e);
  if (auto it = cluster_of_.find(h); it != cluster_of_.end()) {
    const VebLayer& c = clusters_[it->second];
    if (l <= c.max_.first) {
      auto r = c.succ(l);
      return Hit{join(h, r->first), r->second};
    }
  }
  auto s = summary_->succ(h + 1);
  const VebLayer& c = clusters_[s->second];
  return Hit{join(s->first, c.min_.first), c.min_.second};
}

std::size_t VebLayer::words() const {
  std::size_t w = 6 + 2 * flat_.size() + 2 * cluster_of_.size();
  for (const auto& c : clusters_) w += c.words();
  if (summary_) w += summary_->words();
  return w;
}

std::size_t VebLayer::bytes() const {
  std::size_t b = sizeof(VebLayer) + vec_bytes(flat_) +
                  cluster_of_.bucket_count() * sizeof(void*) +
                  cluster_of_.size() * (sizeof(std::uint64_t) + sizeof(std::uint32_t) + sizeof(void*));
  for (const auto& c : clusters_) b += c.bytes();
  if (summary_) b += summary_->bytes();
  return b;
}

unsigned VebLayer::depth() const {
  unsigned d = 0;
  for (const auto& c : clusters_) d = std::max(d, c.depth());
  if (summary_) d = std::max(d, summary_->depth());
  return d + 1;
}

}  // namespace detail

namespace {

void validate_sorted_set(const std::vector<Coord>& s, Coord universe) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 1 || s[i] > universe) throw std::invalid_argument("key outside [1,U]");
    if (i && s[i - 1] >= s[i]) throw std::invalid_argument("keys must be sorted and distinct");
  }
}

}  // namespace

PredecessorIndex::PredecessorIndex(std::vector<Coord> sorted, Coord universe)
    : keys_(std::move(sorted)), universe_(universe) {
  if (universe < 1) throw std::invalid_argument("universe must be >= 1");
  validate_sorted_set(keys_, universe);
  std::vector<detail::VebLayer::Hit> mins;
  for (std::size_t b = 0; b * kBlock < keys_.size(); ++b)
    mins.emplace_back(keys_[b * kBlock], static_cast<std::uint32_t>(b));
  top_ = detail::VebLayer(mins, static_cast<unsigned>(std::bit_width(universe)));
}

void PredecessorIndex::check(Coord e) const {
  if (e < 1 || e > universe_) throw std::out_of_range("probe outside [1,U]");
}

std::optional<std::size_t> PredecessorIndex::pred_index(Coord e) const {
  check(e);
  auto blk = top_.pred(e);
  if (!blk) return std::nullopt;
  std::size_t b = blk->second * kBlock;
  std::size_t end = std::min(keys_.size(), b + kBlock);
  auto it = std::upper_bound(keys_.begin() + b, keys_.begin() + end, e);
  return static_cast<std::size_t>(it - keys_.begin()) - 1;
}

std::optional<std::size_t> PredecessorIndex::succ_index(Coord e) const {
  check(e);
  if (keys_.empty()) return std::nullopt;
  auto blk = top_.pred(e);
  if (!blk) return 0;
  std::size_t b = blk->second * kBlock;
  std::size_t end = std::min(keys_.size(), b + kBlock);
  auto it = std::lower_bound(keys_.begin() + b, keys_.begin() + end, e);
  auto i = static_cast<std::size_t>(it - keys_.begin());
  if (i >= keys_.size()) return std::nullopt;
  return i;
}

std::optional<Coord> PredecessorIndex::pred(Coord e) const {
  auto i = pred_index(e);
  if (!i) return std::nullopt;
  return keys_[*i];
}

std::optional<Coord> PredecessorIndex::succ(Coord e) const {
  auto i = succ_index(e);
  if (!i) return std::nullopt;
  return keys_[*i];
}

void PredecessorIndex::account(SpaceLedger& ledger, int level) const {
  ledger.add("predecessor.keys", level, keys_.size(), universe_, 1, vec_bytes(keys_));
  ledger.add("predecessor.layers", level, top_.words(), universe_, 1, top_.bytes());
}

BinarySearchPredecessor::BinarySearchPredecessor(std::vector<Coord> sorted, Coord universe)
    : keys_(std::move(sorted)), universe_(universe) {
  validate_sorted_set(keys_, universe);
}

std::optional<std::size_t> BinarySearchPredecessor::pred_index(Coord e) const {
  if (e < 1 || e > universe_) throw std::out_of_range("probe outside [1,U]");
  auto it = std::upper_bound(keys_.begin(), keys_.end(), e);
  if (it == keys_.begin()) return std::nullopt;
  return static_cast<std::size_t>(it - keys_.begin()) - 1;
}

std::optional<std::size_t> BinarySearchPredecessor::succ_index(Coord e) const {
  if (e < 1 || e > universe_) throw std::out_of_range("probe outside [1,U]");
  auto it = std::lower_bound(keys_.begin(), keys_.end(), e);
  if (it == keys_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - keys_.begin());
}

std::optional<Coord> BinarySearchPredecessor::pred(Coord e) const {
  auto i = pred_index(e);
  return i ? std::optional<Coord>(keys_[*i]) : std::nullopt;
}

std::optional<Coord> BinarySearchPredecessor::succ(Coord e) const {
  auto i = succ_index(e);
  return i ? std::optional<Coord>(keys_[*i]) : std::nullopt;
}

}  // namespace orr
