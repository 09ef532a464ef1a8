#include "interval_set.hpp"

#include <algorithm>

namespace soe {

IntervalSet IntervalSet::normalize(std::vector<Piece> raw) {
  for (auto& [lo, hi] : raw) {
    lo.canonicalize();
    hi.canonicalize();
  }
  for (const auto& [lo, hi] : raw) {
    if (lo < 0 || hi > 1 || lo > hi)
      throw std::domain_error("interval endpoints must satisfy 0 <= lo <= hi <= 1");
  }
  std::erase_if(raw, [](const Piece& p) { return p.first == p.second; });
  std::sort(raw.begin(), raw.end());
  IntervalSet out;
  for (auto& p : raw) {
    if (!out.iv_.empty() && p.first <= out.iv_.back().second) {
      if (p.second > out.iv_.back().second) out.iv_.back().second = p.second;
    } else {
      out.iv_.push_back(std::move(p));
    }
  }
  return out;
}

IntervalSet IntervalSet::interval(const Rat& lo, const Rat& hi) {
  return normalize({{lo, hi}});
}

IntervalSet IntervalSet::unit() { return interval(0, 1); }

Rat IntervalSet::measure() const {
  Rat m = 0;
  for (const auto& [lo, hi] : iv_) m += hi - lo;
  return m;
}

bool IntervalSet::contains(const Rat& x) const {
  // Binary search for the last piece with lo <= x.
  auto it = std::upper_bound(iv_.begin(), iv_.end(), x,
                             [](const Rat& v, const Piece& p) { return v < p.first; });
  if (it == iv_.begin()) return false;
  --it;
  return x >= it->first && x < it->second;
}

IntervalSet IntervalSet::translated(const Rat& d) const {
  std::vector<Piece> out;
  out.reserve(iv_.size());
  for (const auto& [lo, hi] : iv_) out.emplace_back(lo + d, hi + d);
  return normalize(std::move(out));
}

IntervalSet IntervalSet::complement() const {
  std::vector<Piece> out;
  Rat cursor = 0;
  for (const auto& [lo, hi] : iv_) {
    if (cursor < lo) out.emplace_back(cursor, lo);
    cursor = hi;
  }
  if (cursor < 1) out.emplace_back(cursor, Rat(1));
  IntervalSet r;
  r.iv_ = std::move(out);  // already canonical
  return r;
}

std::vector<IntervalSet> IntervalSet::split_equal(std::size_t n) const {
  std::vector<IntervalSet> chunks;
  if (n == 0) return chunks;
  const Rat step = measure() / static_cast<long>(n);
  std::vector<Piece> cur;
  Rat need = step;
  for (auto [lo, hi] : iv_) {
    while (hi - lo >= need) {
      if (need > 0) cur.emplace_back(lo, lo + need);
      lo += need;
      chunks.push_back(normalize(std::move(cur)));
      cur.clear();
      need = step;
      if (chunks.size() == n) return chunks;
    }
    if (lo < hi) {
      cur.emplace_back(lo, hi);
      need -= hi - lo;
    }
  }
  while (chunks.size() < n) chunks.push_back(normalize(std::move(cur)));  // step == 0 tail
  return chunks;
}

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b) {
  std::vector<IntervalSet::Piece> all = a.pieces();
  all.insert(all.end(), b.pieces().begin(), b.pieces().end());
  return IntervalSet::normalize(std::move(all));
}

IntervalSet set_intersect(const IntervalSet& a, const IntervalSet& b) {
  std::vector<IntervalSet::Piece> out;
  const auto& A = a.pieces();
  const auto& B = b.pieces();
  std::size_t i = 0, j = 0;
  while (i < A.size() && j < B.size()) {
    const Rat lo = std::max(A[i].first, B[j].first);
    const Rat hi = std::min(A[i].second, B[j].second);
    if (lo < hi) out.emplace_back(lo, hi);
    if (A[i].second < B[j].second)
      ++i;
    else
      ++j;
  }
  return IntervalSet::normalize(std::move(out));
}

IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b) {
  return set_intersect(a, b.complement());
}

IntervalSet set_symdiff(const IntervalSet& a, const IntervalSet& b) {
  return set_union(set_difference(a, b), set_difference(b, a));
}

}  // namespace soe
