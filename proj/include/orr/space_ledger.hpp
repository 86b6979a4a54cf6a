#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace orr {

// Smallest b >= 1 with 2^b >= m.
unsigned bits_for(std::uint64_t m);

struct LedgerTotals {
  std::uint64_t records = 0;
  std::uint64_t elements = 0;
  std::uint64_t ideal_bits = 0;
  std::uint64_t bytes = 0;
};

struct LedgerRecord {
  const char* kind;
  int level;
  std::uint64_t elements;
  std::uint64_t ideal_bits;
  std::uint64_t bytes;
};

// Ideal bits charge ceil(log2 u) bits per coordinate, where u is the size of
// the rank space the element's coordinates live in. Aggregates are kept by
// (kind, level); individual records only when asked for.
class SpaceLedger {
 public:
  explicit SpaceLedger(bool keep_records = false) : keep_(keep_records) {}

  void add(const char* kind, int level, std::uint64_t elements, std::uint64_t universe,
           unsigned coords, std::uint64_t bytes);
  void add_bits(const char* kind, int level, std::uint64_t elements, std::uint64_t ideal_bits,
                std::uint64_t bytes);

  LedgerTotals total() const { return total_; }
  std::map<std::string, LedgerTotals> by_kind() const;
  std::map<int, LedgerTotals> by_level() const;
  const std::vector<LedgerRecord>& records() const { return records_; }

  // Ideal size in words of `word_bits` bits.
  double words_ideal(unsigned word_bits) const;
  std::uint64_t violations() const { return violations_; }

 private:
  bool keep_;
  LedgerTotals total_;
  std::map<std::pair<std::string, int>, LedgerTotals> cells_;
  std::vector<LedgerRecord> records_;
  std::uint64_t violations_ = 0;
};

template <class V>
std::uint64_t vec_bytes(const V& v) {
  return static_cast<std::uint64_t>(v.capacity()) * sizeof(typename V::value_type);
}

}  // namespace orr
