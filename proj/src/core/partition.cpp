#include "partition.hpp"

#include <set>
#include <stdexcept>

namespace soe {

LabeledPartition::LabeledPartition(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  std::set<std::string> seen;
  for (const auto& a : atoms_)
    if (!seen.insert(a.label).second)
      throw std::invalid_argument("duplicate atom label: " + a.label);
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    for (std::size_t j = i + 1; j < atoms_.size(); ++j)
      if (!disjoint(atoms_[i].set, atoms_[j].set))
        throw std::invalid_argument("atoms overlap: " + atoms_[i].label + ", " + atoms_[j].label);
}

IntervalSet LabeledPartition::carrier() const {
  IntervalSet u;
  for (const auto& a : atoms_) u = set_union(u, a.set);
  return u;
}

bool LabeledPartition::partitions_unit() const { return carrier().measure() == 1; }

std::size_t LabeledPartition::atom_of(const Rat& x) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].set.contains(x)) return i;
  return npos;
}

std::size_t LabeledPartition::atom_containing(const IntervalSet& a) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (is_subset(a, atoms_[i].set)) return i;
  return npos;
}

LabeledPartition LabeledPartition::dyadic(unsigned k) {
  return equipartition(static_cast<std::size_t>(1) << k);
}

LabeledPartition LabeledPartition::equipartition(std::size_t n) {
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    atoms.push_back({std::to_string(i),
                     IntervalSet::interval(Rat(static_cast<long>(i), static_cast<long>(n)),
                                           Rat(static_cast<long>(i) + 1, static_cast<long>(n)))});
  return LabeledPartition(std::move(atoms));
}

LabeledPartition join(const LabeledPartition& p, const LabeledPartition& q) {
  std::vector<LabeledPartition::Atom> atoms;
  atoms.reserve(p.size() * q.size());
  for (const auto& a : p.atoms())
    for (const auto& b : q.atoms())
      atoms.push_back({a.label + "|" + b.label, set_intersect(a.set, b.set)});
  return LabeledPartition(std::move(atoms));
}

bool DistributionVector::same_shape(const DistributionVector& o) const {
  if (entries.size() != o.entries.size()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].label != o.entries[i].label) return false;
  return true;
}

DistributionVector distribution(const IntervalSet& carrier, const LabeledPartition& p) {
  const Rat m = carrier.measure();
  if (m == 0) throw std::invalid_argument("distribution over a zero-measure carrier");
  DistributionVector d;
  d.entries.reserve(p.size());
  for (const auto& a : p.atoms())
    d.entries.push_back({a.label, set_intersect(carrier, a.set).measure() / m});
  return d;
}

DistributionVector distribution(const LabeledPartition& p) {
  return distribution(IntervalSet::unit(), p);
}

DistributionVector product(const DistributionVector& u, const DistributionVector& v) {
  DistributionVector d;
  d.entries.reserve(u.entries.size() * v.entries.size());
  for (const auto& a : u.entries)
    for (const auto& b : v.entries) d.entries.push_back({a.label + "|" + b.label, a.mass * b.mass});
  return d;
}

Rat dist_distance(const DistributionVector& u, const DistributionVector& v) {
  if (!u.same_shape(v)) throw std::invalid_argument("distribution label sets differ");
  Rat best = 0;
  for (std::size_t i = 0; i < u.entries.size(); ++i) {
    Rat d = abs(u.entries[i].mass - v.entries[i].mass);
    if (d > best) best = d;
  }
  return best;
}

}  // namespace soe
