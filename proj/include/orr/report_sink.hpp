#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "orr/geometry.hpp"

namespace orr {

class ReportSink {
 public:
  using Callback = std::function<void(const Point&)>;

  ReportSink() = default;
  explicit ReportSink(Callback cb, bool stop_after_first = false)
      : cb_(std::move(cb)), first_only_(stop_after_first) {}

  void accept(const Point& p) {
    if (stop_) return;
    ++count_;
    if (cb_) cb_(p);
    if (first_only_) stop_ = true;
  }

  std::size_t count() const { return count_; }
  bool stopped() const { return stop_; }
  void request_stop() { stop_ = true; }
  bool& stop_flag() { return stop_; }

 private:
  Callback cb_;
  std::size_t count_ = 0;
  bool first_only_ = false;
  bool stop_ = false;
};

// Collects ids into a vector.
class IdCollector {
 public:
  IdCollector() : sink_([this](const Point& p) { ids_.push_back(p.id); }) {}
  IdCollector(const IdCollector&) = delete;
  IdCollector& operator=(const IdCollector&) = delete;

  ReportSink& sink() { return sink_; }
  std::vector<PointId>& ids() { return ids_; }

 private:
  std::vector<PointId> ids_;
  ReportSink sink_;
};

}  // namespace orr
