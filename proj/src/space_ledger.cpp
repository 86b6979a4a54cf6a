#include "orr/space_ledger.hpp"

#include <bit>

namespace orr {

unsigned bits_for(std::uint64_t m) {
  if (m <= 2) return 1;
  return static_cast<unsigned>(std::bit_width(m - 1));
}

void SpaceLedger::add(const char* kind, int level, std::uint64_t elements, std::uint64_t universe,
                      unsigned coords, std::uint64_t bytes) {
  add_bits(kind, level, elements, elements * bits_for(universe) * coords, bytes);
}

void SpaceLedger::add_bits(const char* kind, int level, std::uint64_t elements,
                           std::uint64_t ideal_bits, std::uint64_t bytes) {
  if (ideal_bits > 8 * bytes) ++violations_;
  auto& c = cells_[{kind, level}];
  for (LedgerTotals* t : {&c, &total_}) {
    ++t->records;
    t->elements += elements;
    t->ideal_bits += ideal_bits;
    t->bytes += bytes;
  }
  if (keep_) records_.push_back({kind, level, elements, ideal_bits, bytes});
}

std::map<std::string, LedgerTotals> SpaceLedger::by_kind() const {
  std::map<std::string, LedgerTotals> out;
  for (const auto& [key, t] : cells_) {
    auto& o = out[key.first];
    o.records += t.records;
    o.elements += t.elements;
    o.ideal_bits += t.ideal_bits;
    o.bytes += t.bytes;
  }
  return out;
}

std::map<int, LedgerTotals> SpaceLedger::by_level() const {
  std::map<int, LedgerTotals> out;
  for (const auto& [key, t] : cells_) {
    auto& o = out[key.second];
    o.records += t.records;
    o.elements += t.elements;
    o.ideal_bits += t.ideal_bits;
    o.bytes += t.bytes;
  }
  return out;
}

double SpaceLedger::words_ideal(unsigned word_bits) const {
  return static_cast<double>(total_.ideal_bits) / (word_bits ? word_bits : 64);
}

}  // namespace orr
