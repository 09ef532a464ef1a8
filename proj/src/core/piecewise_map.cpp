#include "piecewise_map.hpp"

#include <algorithm>
#include <numeric>

namespace soe {

namespace {

std::vector<PiecewiseTranslation::Piece> canonicalize(
    std::vector<PiecewiseTranslation::Piece> pieces) {
  for (auto& p : pieces) {
    p.lo.canonicalize();
    p.hi.canonicalize();
    p.offset.canonicalize();
  }
  std::erase_if(pieces, [](const auto& p) { return p.lo == p.hi; });
  std::sort(pieces.begin(), pieces.end(),
            [](const auto& a, const auto& b) { return a.lo < b.lo; });
  std::vector<PiecewiseTranslation::Piece> out;
  for (auto& p : pieces) {
    if (!out.empty() && out.back().hi == p.lo && out.back().offset == p.offset)
      out.back().hi = p.hi;
    else
      out.push_back(std::move(p));
  }
  return out;
}

void verify_bijection(const std::vector<PiecewiseTranslation::Piece>& pieces) {
  // Domains partition [0,1).
  Rat cursor = 0;
  std::vector<IntervalSet::Piece> images;
  Rat total = 0;
  for (const auto& p : pieces) {
    if (p.lo != cursor)
      throw std::invalid_argument("piece domains do not partition [0,1): gap/overlap at " +
                                  to_string(p.lo));
    cursor = p.hi;
    const Rat ilo = p.lo + p.offset, ihi = p.hi + p.offset;
    if (ilo < 0 || ihi > 1)
      throw std::invalid_argument("piece image leaves [0,1)");
    images.emplace_back(ilo, ihi);
    total += ihi - ilo;
  }
  if (cursor != 1) throw std::invalid_argument("piece domains do not cover [0,1)");
  if (IntervalSet::normalize(images).measure() != total || total != 1)
    throw std::invalid_argument("piece images do not partition [0,1)");
}

}  // namespace

PiecewiseTranslation PiecewiseTranslation::identity() {
  return from_pieces({{Rat(0), Rat(1), Rat(0)}}, "id");
}

PiecewiseTranslation PiecewiseTranslation::from_pieces(std::vector<Piece> pieces,
                                                       std::string name) {
  PiecewiseTranslation f;
  f.pieces_ = canonicalize(std::move(pieces));
  f.name_ = std::move(name);
  verify_bijection(f.pieces_);
  return f;
}

Rat PiecewiseTranslation::apply(const Rat& x) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](const Rat& v, const Piece& p) { return v < p.lo; });
  if (it == pieces_.begin()) throw std::domain_error("point outside [0,1)");
  --it;
  if (x >= it->hi) throw std::domain_error("point outside [0,1)");
  return x + it->offset;
}

IntervalSet PiecewiseTranslation::apply_set(const IntervalSet& a) const {
  std::vector<IntervalSet::Piece> out;
  for (const auto& [alo, ahi] : a.pieces()) {
    // Domains are a sorted contiguous partition of [0,1); locate the piece
    // containing alo.
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), alo,
                               [](const Rat& v, const Piece& p) { return v < p.lo; });
    std::size_t i = static_cast<std::size_t>(it - pieces_.begin());
    if (i > 0) --i;
    for (std::size_t j = i; j < pieces_.size() && pieces_[j].lo < ahi; ++j) {
      const Rat lo = std::max(alo, pieces_[j].lo);
      const Rat hi = std::min(ahi, pieces_[j].hi);
      if (lo < hi) out.emplace_back(lo + pieces_[j].offset, hi + pieces_[j].offset);
    }
  }
  return IntervalSet::normalize(std::move(out));
}

PiecewiseTranslation PiecewiseTranslation::inverse() const {
  std::vector<Piece> inv;
  inv.reserve(pieces_.size());
  for (const auto& p : pieces_) inv.push_back({p.lo + p.offset, p.hi + p.offset, -p.offset});
  return from_pieces(std::move(inv), name_.empty() ? "" : name_ + "^-1");
}

PiecewiseTranslation compose(const PiecewiseTranslation& outer,
                             const PiecewiseTranslation& inner) {
  const auto& ops = outer.pieces();
  std::vector<PiecewiseTranslation::Piece> out;
  out.reserve(inner.pieces().size());
  for (const auto& pi : inner.pieces()) {
    const Rat ilo = pi.lo + pi.offset, ihi = pi.hi + pi.offset;
    // Outer pieces overlapping [ilo, ihi) form a contiguous range.
    auto it = std::upper_bound(ops.begin(), ops.end(), ilo,
                               [](const Rat& v, const PiecewiseTranslation::Piece& p) {
                                 return v < p.lo;
                               });
    std::size_t j = static_cast<std::size_t>(it - ops.begin());
    if (j > 0) --j;
    for (; j < ops.size() && ops[j].lo < ihi; ++j) {
      const Rat lo = std::max(ilo, ops[j].lo);
      const Rat hi = std::min(ihi, ops[j].hi);
      if (lo < hi) out.push_back({lo - pi.offset, hi - pi.offset, pi.offset + ops[j].offset});
    }
  }
  return PiecewiseTranslation::from_pieces(std::move(out));
}

PiecewiseTranslation PiecewiseTranslation::power(long k) const {
  if (k == 0) return identity();
  const PiecewiseTranslation base = k > 0 ? *this : inverse();
  PiecewiseTranslation acc = base;
  for (long i = 1; i < (k > 0 ? k : -k); ++i) acc = compose(base, acc);
  return acc;
}

LabeledPartition pullback_partition(const PiecewiseTranslation& f, const LabeledPartition& p) {
  const PiecewiseTranslation finv = f.inverse();
  std::vector<LabeledPartition::Atom> atoms;
  atoms.reserve(p.size());
  for (const auto& a : p.atoms()) atoms.push_back({a.label, finv.apply_set(a.set)});
  return LabeledPartition(std::move(atoms));
}

IntervalSet agreement_set(const PiecewiseTranslation& f, const PiecewiseTranslation& g) {
  // Both domain lists are sorted contiguous partitions of [0,1); merge them.
  const auto& pf = f.pieces();
  const auto& pg = g.pieces();
  std::vector<IntervalSet::Piece> out;
  std::size_t i = 0, j = 0;
  while (i < pf.size() && j < pg.size()) {
    const Rat lo = std::max(pf[i].lo, pg[j].lo);
    const Rat hi = std::min(pf[i].hi, pg[j].hi);
    if (lo < hi && pf[i].offset == pg[j].offset) out.emplace_back(lo, hi);
    if (pf[i].hi <= pg[j].hi)
      ++i;
    else
      ++j;
  }
  return IntervalSet::normalize(std::move(out));
}

RankOneSystem build_rank_one(const std::vector<unsigned>& cuts,
                             const std::vector<std::vector<unsigned>>& spacers) {
  if (cuts.empty()) throw std::invalid_argument("rank-one descriptor needs at least one cut");
  for (unsigned q : cuts)
    if (q < 2) throw std::invalid_argument("cut counts must be >= 2");
  if (!spacers.empty() && spacers.size() != cuts.size())
    throw std::invalid_argument("spacer schedule length must match cut schedule");
  for (std::size_t k = 0; k < spacers.size(); ++k)
    if (spacers[k].size() != cuts[k])
      throw std::invalid_argument("spacer vector size must equal cut count at each stage");

  // Height and total subdivision of the final column determine the base
  // width: h_n * w_n = 1 exactly.
  mpz_class height = 1, subdiv = 1;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    mpz_class h = height * cuts[k];
    if (!spacers.empty())
      for (unsigned s : spacers[k]) h += s;
    height = h;
    subdiv *= cuts[k];
  }
  Rat base_width(subdiv, height);
  base_width.canonicalize();

  std::vector<Rat> level_lo{Rat(0)};  // bottom-to-top level origins
  Rat width = base_width;
  Rat spacer_cursor = base_width;  // fresh mass for spacer levels
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const unsigned q = cuts[k];
    const Rat w = width / q;
    std::vector<Rat> next;
    next.reserve(level_lo.size() * q + 8);
    for (unsigned j = 0; j < q; ++j) {
      for (const Rat& lo : level_lo) next.push_back(lo + j * w);
      if (!spacers.empty())
        for (unsigned s = 0; s < spacers[k][j]; ++s) {
          next.push_back(spacer_cursor);
          spacer_cursor += w;
        }
    }
    level_lo = std::move(next);
    width = w;
  }

  std::vector<PiecewiseTranslation::Piece> pieces;
  pieces.reserve(level_lo.size());
  for (std::size_t i = 0; i < level_lo.size(); ++i) {
    const Rat& lo = level_lo[i];
    const Rat& to = level_lo[(i + 1) % level_lo.size()];  // top wraps to bottom
    pieces.push_back({lo, lo + width, to - lo});
  }

  RankOneSystem sys;
  sys.map = PiecewiseTranslation::from_pieces(std::move(pieces), "rank-one");
  sys.levels.reserve(level_lo.size());
  for (const Rat& lo : level_lo) sys.levels.push_back(IntervalSet::interval(lo, lo + width));
  sys.level_width = width;
  return sys;
}

ReturnStructure first_return(const PiecewiseTranslation& f, const IntervalSet& base,
                             long max_steps) {
  if (base.measure() == 0) throw std::invalid_argument("first return needs a positive-measure base");
  ReturnStructure rs;
  rs.base = base;
  // (image, offset) parts of the not-yet-returned set: the domain piece is
  // the image translated back by the accumulated offset.
  struct Part {
    IntervalSet img;
    Rat offset;
  };
  std::vector<Part> parts{{base, Rat(0)}};
  for (long t = 1; t <= max_steps && !parts.empty(); ++t) {
    std::vector<Part> next;
    for (const Part& part : parts)
      for (const auto& p : f.pieces()) {
        const IntervalSet hit =
            set_intersect(part.img, IntervalSet::interval(p.lo, p.hi));
        if (!hit.is_empty()) next.push_back({hit.translated(p.offset), part.offset + p.offset});
      }
    parts.clear();
    std::vector<IntervalSet::Piece> returned_raw;
    for (Part& part : next) {
      const IntervalSet returned = set_intersect(part.img, base);
      if (!returned.is_empty()) {
        const IntervalSet dom = returned.translated(-part.offset);
        for (const auto& piece : dom.pieces()) returned_raw.push_back(piece);
        part.img = set_difference(part.img, returned);
      }
      if (!part.img.is_empty()) parts.push_back(std::move(part));
    }
    if (!returned_raw.empty())
      rs.cells.emplace_back(IntervalSet::normalize(std::move(returned_raw)), t);
  }
  if (!parts.empty()) {
    std::vector<IntervalSet::Piece> raw;
    for (const Part& part : parts) {
      const IntervalSet dom = part.img.translated(-part.offset);
      for (const auto& piece : dom.pieces()) raw.push_back(piece);
    }
    throw IncompleteReturnError(IntervalSet::normalize(std::move(raw)), max_steps);
  }
  return rs;
}

}  // namespace soe
