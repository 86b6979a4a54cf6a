#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "orr/geometry.hpp"

namespace orr {

// Bidirectional coordinate <-> rank map, one sorted distinct list per axis.
// rank(e) counts list elements <= e, so equal coordinates share a rank.
template <class T>
class BasicRankMapper {
 public:
  BasicRankMapper() = default;

  explicit BasicRankMapper(std::vector<std::vector<T>> axes,
                           std::shared_ptr<const BasicRankMapper> parent = nullptr)
      : axes_(std::move(axes)), parent_(std::move(parent)) {
    for (auto& a : axes_) {
      if (!std::is_sorted(a.begin(), a.end()) ||
          std::adjacent_find(a.begin(), a.end()) != a.end())
        throw std::invalid_argument("rank mapper axis must be sorted and distinct");
    }
  }

  static BasicRankMapper identity(std::size_t dim, T extent) {
    BasicRankMapper m;
    m.identity_ = true;
    m.extent_ = extent;
    m.dim_ = dim;
    return m;
  }

  bool is_identity() const { return identity_; }
  std::size_t dim() const { return identity_ ? dim_ : axes_.size(); }
  std::size_t axis_size(std::size_t axis) const {
    return identity_ ? static_cast<std::size_t>(extent_) : axes_[axis].size();
  }
  const std::vector<T>& axis(std::size_t a) const { return axes_[a]; }
  const std::shared_ptr<const BasicRankMapper>& parent() const { return parent_; }

  std::size_t depth() const {
    std::size_t d = 1;
    for (auto* m = parent_.get(); m; m = m->parent_.get()) ++d;
    return d;
  }

  std::size_t rank(std::size_t axis, T e) const {
    if (identity_) return static_cast<std::size_t>(std::min<T>(e, extent_));
    const auto& a = axes_[axis];
    return static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), e) - a.begin());
  }

  // Rank of succ(e), or nullopt when every element is below e.
  std::optional<std::size_t> succ_rank(std::size_t axis, T e) const {
    if (identity_) {
      if (e > extent_) return std::nullopt;
      return static_cast<std::size_t>(std::max<T>(e, 1));
    }
    const auto& a = axes_[axis];
    auto it = std::lower_bound(a.begin(), a.end(), e);
    if (it == a.end()) return std::nullopt;
    return static_cast<std::size_t>(it - a.begin()) + 1;
  }

  // Rank of pred(e), or nullopt when every element is above e.
  std::optional<std::size_t> pred_rank(std::size_t axis, T e) const {
    std::size_t r = rank(axis, e);
    if (r == 0) return std::nullopt;
    return r;
  }

  T coord(std::size_t axis, std::size_t r) const {
    if (r < 1 || r > axis_size(axis)) throw std::out_of_range("rank out of range");
    if (identity_) return static_cast<T>(r);
    return axes_[axis][r - 1];
  }

 private:
  std::vector<std::vector<T>> axes_;
  std::shared_ptr<const BasicRankMapper> parent_;
  bool identity_ = false;
  T extent_ = 0;
  std::size_t dim_ = 0;
};

using RankMapper = BasicRankMapper<Coord>;

// Reduces points to rank space. The mapper may be nested under `parent`,
// in which case the input is expected in the parent's rank space.
std::pair<std::shared_ptr<const RankMapper>, PointSet> rank_reduce(
    const PointSet& points, std::shared_ptr<const RankMapper> parent = nullptr);

std::optional<QueryBox> query_to_rank_space(const QueryBox& q, const RankMapper& m);

// Walks the parent chain back to original coordinates; id is kept.
Point unmap(const Point& p, const RankMapper& m);

}  // namespace orr
