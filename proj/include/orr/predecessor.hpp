#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "orr/geometry.hpp"
#include "orr/space_ledger.hpp"

namespace orr {

namespace detail {

// Static van Emde Boas layer over w-bit keys, each carrying a payload.
// Clusters are split on the upper half of the bits; small sets are kept flat.
class VebLayer {
 public:
  using Hit = std::pair<std::uint64_t, std::uint32_t>;  // key, payload

  VebLayer() = default;
  VebLayer(const std::vector<Hit>& sorted, unsigned width);

  std::optional<Hit> pred(std::uint64_t e) const;
  std::optional<Hit> succ(std::uint64_t e) const;
  bool empty() const { return size_ == 0; }
  std::size_t words() const;
  std::size_t bytes() const;
  unsigned depth() const;

 private:
  std::uint64_t hi(std::uint64_t e) const { return lo_bits_ >= 64 ? 0 : e >> lo_bits_; }
  std::uint64_t lo(std::uint64_t e) const {
    return lo_bits_ >= 64 ? e : e & ((std::uint64_t{1} << lo_bits_) - 1);
  }
  std::uint64_t join(std::uint64_t h, std::uint64_t l) const { return (h << lo_bits_) | l; }

  unsigned width_ = 0;
  unsigned lo_bits_ = 0;
  std::size_t size_ = 0;
  Hit min_{}, max_{};
  std::vector<Hit> flat_;  // used when the set is small
  std::unique_ptr<VebLayer> summary_;
  std::unordered_map<std::uint64_t, std::uint32_t> cluster_of_;
  std::vector<VebLayer> clusters_;
};

}  // namespace detail

// pred/succ over a static sorted set S in [1,U]. Keys are grouped in blocks
// of kBlock; a van Emde Boas layer over block minima finds the block and a
// short search finishes inside it.
class PredecessorIndex {
 public:
  static constexpr std::size_t kBlock = 64;

  PredecessorIndex() = default;
  PredecessorIndex(std::vector<Coord> sorted, Coord universe);

  std::optional<Coord> pred(Coord e) const;
  std::optional<Coord> succ(Coord e) const;
  // 0-based positions in S.
  std::optional<std::size_t> pred_index(Coord e) const;
  std::optional<std::size_t> succ_index(Coord e) const;

  std::size_t size() const { return keys_.size(); }
  Coord universe() const { return universe_; }
  const std::vector<Coord>& keys() const { return keys_; }
  void account(SpaceLedger& ledger, int level) const;

 private:
  void check(Coord e) const;

  std::vector<Coord> keys_;
  Coord universe_ = 0;
  detail::VebLayer top_;
};

// Same contract, plain binary search. Kept for differential tests.
class BinarySearchPredecessor {
 public:
  BinarySearchPredecessor() = default;
  BinarySearchPredecessor(std::vector<Coord> sorted, Coord universe);

  std::optional<Coord> pred(Coord e) const;
  std::optional<Coord> succ(Coord e) const;
  std::optional<std::size_t> pred_index(Coord e) const;
  std::optional<std::size_t> succ_index(Coord e) const;
  std::size_t size() const { return keys_.size(); }

 private:
  std::vector<Coord> keys_;
  Coord universe_ = 0;
};

}  // namespace orr
