#include "cli_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace orr::cli {

namespace {

bool parse_u64(std::string_view s, Coord& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

PointsFile read_points(std::istream& in, const std::string& name) {
  PointsFile f;
  bool header = false;
  Coord maxc = 0;
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (blank(line)) continue;
    if (line[0] == '#') {
      if (!f.points.empty() || header) continue;
      const auto toks = split_ws(line.substr(1));
      bool any = false;
      for (const auto& t : toks) {
        Coord v = 0;
        if (t.rfind("d=", 0) == 0) {
          if (!parse_u64(std::string_view(t).substr(2), v) || v < 1 || v > kMaxDim)
            throw ParseError(name, ln, "bad dimension '" + t + "'");
          f.d = v;
          any = true;
        } else if (t.rfind("U=", 0) == 0) {
          if (!parse_u64(std::string_view(t).substr(2), v) || v < 1) throw ParseError(name, ln, "bad universe '" + t + "'");
          f.universe = v;
          any = true;
        }
      }
      header = any;
      continue;
    }
    const auto toks = split_ws(line);
    if (f.d == 0) {
      if (toks.size() > kMaxDim) throw ParseError(name, ln, "too many coordinates");
      f.d = toks.size();
    }
    if (toks.size() != f.d)
      throw ParseError(name, ln, "expected " + std::to_string(f.d) + " coordinates, got " + std::to_string(toks.size()));
    Coord c[kMaxDim];
    for (std::size_t a = 0; a < f.d; ++a) {
      if (!parse_u64(toks[a], c[a])) throw ParseError(name, ln, "not an unsigned integer: '" + toks[a] + "'");
      if (c[a] < 1) throw ParseError(name, ln, "coordinates start at 1");
      if (f.universe && c[a] > f.universe) throw ParseError(name, ln, "coordinate above U");
      maxc = std::max(maxc, c[a]);
    }
    f.points.emplace_back(c, f.d, static_cast<PointId>(ln));
  }
  if (f.universe == 0) f.universe = std::max<Coord>(maxc, 1);
  return f;
}

void write_points(std::ostream& out, const PointSet& points, std::size_t d, Coord universe) {
  out << "# d=" << d << " U=" << universe << '\n';
  for (const Point& p : points) {
    for (std::size_t a = 0; a < d; ++a) out << (a ? " " : "") << p[a];
    out << '\n';
  }
}

AxisBound parse_bound(const std::string& token) {
  const auto colon = token.find(':');
  if (colon == std::string::npos || token.find(':', colon + 1) != std::string::npos)
    throw std::invalid_argument("bound must look like lo:hi, *:hi or lo:*");
  const std::string lo = token.substr(0, colon), hi = token.substr(colon + 1);
  Coord l = 0, h = 0;
  const bool lo_star = lo == "*", hi_star = hi == "*";
  if (lo_star && hi_star) throw std::invalid_argument("'*:*' leaves the axis unbounded on both sides");
  if (!lo_star && (!parse_u64(lo, l) || l < 1)) throw std::invalid_argument("bad lower endpoint '" + lo + "'");
  if (!hi_star && (!parse_u64(hi, h) || h < 1)) throw std::invalid_argument("bad upper endpoint '" + hi + "'");
  if (lo_star) return AxisBound::up_to(h);
  if (hi_star) return AxisBound::from(l);
  if (l > h) throw std::invalid_argument("lower endpoint above upper in '" + token + "'");
  return AxisBound::closed(l, h);
}

std::string format_bound(const AxisBound& b) {
  switch (b.kind) {
    case AxisBound::Kind::UpTo: return "*:" + std::to_string(b.hi);
    case AxisBound::Kind::From: return std::to_string(b.lo) + ":*";
    default: return std::to_string(b.lo) + ":" + std::to_string(b.hi);
  }
}

std::vector<QueryLine> read_queries(std::istream& in, const std::string& name, std::size_t d) {
  std::vector<QueryLine> out;
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (blank(line) || line[0] == '#') continue;
    const auto toks = split_ws(line);
    if (toks.size() != d)
      throw ParseError(name, ln, "expected " + std::to_string(d) + " bounds, got " + std::to_string(toks.size()));
    std::vector<AxisBound> b;
    for (const auto& t : toks) {
      try {
        b.push_back(parse_bound(t));
      } catch (const std::invalid_argument& e) {
        throw ParseError(name, ln, e.what());
      }
    }
    out.push_back(QueryLine{ln, QueryBox(std::move(b))});
  }
  return out;
}

void write_queries(std::ostream& out, const std::vector<QueryBox>& queries) {
  for (const QueryBox& q : queries) {
    for (std::size_t a = 0; a < q.dim(); ++a) out << (a ? " " : "") << format_bound(q[a]);
    out << '\n';
  }
}

Dist parse_dist(const std::string& s) {
  if (s == "uniform") return Dist::Uniform;
  if (s == "clustered") return Dist::Clustered;
  if (s == "diagonal") return Dist::Diagonal;
  throw std::invalid_argument("distribution must be uniform, clustered or diagonal");
}

PointSet generate_points(std::uint64_t seed, std::size_t n, Coord universe, std::size_t d, Dist dist,
                         GenInfo* info) {
  if (universe < 1) throw std::invalid_argument("universe must be at least 1");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Coord> any(1, universe);
  PointSet out;
  out.reserve(n);
  Coord c[kMaxDim];
  GenInfo local;
  GenInfo& gi = info ? *info : local;
  gi = GenInfo{};
  if (dist == Dist::Clustered) {
    const std::size_t k = std::clamp<std::size_t>(n / 64, 1, 16);
    gi.radius = std::max<Coord>(1, universe / 64);
    const Coord r = gi.radius;
    const bool room = universe > 2 * r;
    std::uniform_int_distribution<Coord> centre(room ? 1 + r : 1, room ? universe - r : universe);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<Coord> ctr(d);
      for (auto& x : ctr) x = centre(rng);
      gi.centers.push_back(std::move(ctr));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    switch (dist) {
      case Dist::Uniform:
        for (std::size_t a = 0; a < d; ++a) c[a] = any(rng);
        break;
      case Dist::Diagonal: {
        const Coord v = std::max<Coord>(1, static_cast<Coord>((i + 1) * universe / n));
        for (std::size_t a = 0; a < d; ++a) c[a] = v;
        break;
      }
      case Dist::Clustered: {
        const auto& ctr = gi.centers[rng() % gi.centers.size()];
        const auto r = static_cast<std::int64_t>(gi.radius);
        std::uniform_int_distribution<std::int64_t> off(-r, r);
        for (std::size_t a = 0; a < d; ++a) {
          const std::int64_t v = static_cast<std::int64_t>(ctr[a]) + off(rng);
          c[a] = static_cast<Coord>(std::clamp<std::int64_t>(v, 1, static_cast<std::int64_t>(universe)));
        }
        break;
      }
    }
    out.emplace_back(c, d, static_cast<PointId>(i));
  }
  return out;
}

std::vector<QueryBox> generate_queries(std::uint64_t seed, std::size_t count, Coord universe, std::size_t d,
                                       bool closed_only) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Coord> any(1, universe);
  std::uniform_int_distribution<int> kind(0, 5);
  std::vector<QueryBox> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<AxisBound> b;
    for (std::size_t a = 0; a < d; ++a) {
      Coord lo = any(rng), hi = any(rng);
      if (lo > hi) std::swap(lo, hi);
      const int k = closed_only ? 0 : kind(rng);
      b.push_back(k < 4 ? AxisBound::closed(lo, hi) : k == 4 ? AxisBound::up_to(hi) : AxisBound::from(lo));
    }
    out.emplace_back(std::move(b));
  }
  return out;
}

StatsRecord& StatsRecord::add_ms(const std::string& key, double ms) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << ms;
  fields_.emplace_back(key, s.str());
  return *this;
}

void StatsRecord::add_stats(const detail::QueryStats& st) {
  add("queries_counted", st.queries);
  add("steps211", st.steps211).add("steps221", st.steps221);
  add("max_arity211", st.max_arity211).add("max_arity221", st.max_arity221);
  add("subqueries", st.subqueries);
  add("cell_queries", st.cell_queries).add("dominance_queries", st.dominance_queries);
  add("transfers", st.transfers).add("terminal_scans", st.terminal_scans);
  add("lift_subqueries", st.lift_subqueries).add("max_lift_fanout", st.max_lift_fanout);
  add("max_level", st.max_level);
  add("unmap_steps", st.unmap_steps).add("max_unmap_chain", st.max_unmap_chain);
  add("ladder_fallbacks", st.ladder_fallbacks).add("doubling_violations", st.doubling_violations);
  std::string hist;
  for (auto [l, c] : st.ladder_levels) hist += (hist.empty() ? "" : ",") + std::to_string(l) + ":" + std::to_string(c);
  add("ladder_levels", hist.empty() ? std::string("-") : hist);
  add("dd_probes", st.dd_probes).add("dd_max_probes_per_level", st.dd_max_probes_per_level);
  add("overlap_violations", st.overlap_violations);
}

void StatsRecord::add_ledger(const SpaceLedger& ledger) {
  std::ostringstream w;
  w << std::fixed << std::setprecision(1) << ledger.words_ideal(64);
  add("words_ideal", w.str());
  add("bytes_actual", ledger.total().bytes);
  add("ledger_violations", ledger.violations());
  for (const auto& [kind, t] : ledger.by_kind()) {
    std::ostringstream v;
    v << std::fixed << std::setprecision(1) << static_cast<double>(t.ideal_bits) / 64.0;
    add("words." + kind, v.str());
  }
}

std::string StatsRecord::line() const {
  std::string s;
  for (const auto& [k, v] : fields_) {
    if (!s.empty()) s += ' ';
    s += k + '=' + v;
  }
  return s;
}

}  // namespace orr::cli
