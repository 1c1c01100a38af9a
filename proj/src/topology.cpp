#include "finsheaf/topology.hpp"

#include <algorithm>
#include <set>

#include "finsheaf/error.hpp"
#include "finsheaf/labels.hpp"

namespace finsheaf {

std::vector<std::size_t> PointSet::indices() const {
  std::vector<std::size_t> out;
  out.reserve(size());
  for (Bits b = bits_; b != 0; b &= b - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
  return out;
}

bool canonical_less(PointSet a, PointSet b) noexcept {
  PointSet::Bits x = a.bits();
  PointSet::Bits y = b.bits();
  while (x != 0 && y != 0) {
    int i = std::countr_zero(x);
    int j = std::countr_zero(y);
    if (i != j) return i < j;
    x &= x - 1;
    y &= y - 1;
  }
  return x == 0 && y != 0;
}

namespace {

std::vector<std::string> normalized_points(std::vector<std::string> points) {
  std::sort(points.begin(), points.end());
  if (std::adjacent_find(points.begin(), points.end()) != points.end())
    throw Error(ErrorKind::ParseError, "duplicate point label");
  if (points.size() > kMaxPoints)
    throw Error(ErrorKind::ParseError, "at most 64 points are supported");
  return points;
}

PointSet mask_of(const std::vector<std::string>& sorted_points, std::span<const std::string> labels) {
  PointSet s;
  for (const auto& l : labels) {
    auto it = std::lower_bound(sorted_points.begin(), sorted_points.end(), l);
    if (it == sorted_points.end() || *it != l) throw Error(ErrorKind::UnknownPoint, l);
    s = s | PointSet::single(static_cast<std::size_t>(it - sorted_points.begin()));
  }
  return s;
}

// Closes a family under pairwise union and intersection, adding ∅ and the whole set.
std::vector<PointSet> lattice_closure(std::vector<PointSet> family, PointSet whole) {
  std::set<PointSet::Bits> seen{0, whole.bits()};
  for (auto s : family) seen.insert(s.bits());
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<PointSet::Bits> current(seen.begin(), seen.end());
    for (std::size_t i = 0; i < current.size(); ++i)
      for (std::size_t j = i + 1; j < current.size(); ++j) {
        grew |= seen.insert(current[i] | current[j]).second;
        grew |= seen.insert(current[i] & current[j]).second;
      }
  }
  std::vector<PointSet> out;
  for (auto b : seen) out.emplace_back(b);
  return out;
}

}  // namespace

SpacePtr FiniteSpace::from_masks(std::vector<std::string> sorted_points, std::vector<PointSet> opens) {
  auto space = std::shared_ptr<FiniteSpace>(new FiniteSpace());
  space->points_ = normalized_points(std::move(sorted_points));
  const PointSet whole = PointSet::first(space->points_.size());
  std::sort(opens.begin(), opens.end(), canonical_less);
  opens.erase(std::unique(opens.begin(), opens.end()), opens.end());
  for (std::size_t i = 0; i < space->points_.size(); ++i) space->point_index_.emplace(space->points_[i], i);
  for (std::size_t i = 0; i < opens.size(); ++i) {
    if (!opens[i].subset_of(whole)) throw Error(ErrorKind::ParseError, "open set outside the point set");
    space->open_index_.emplace(opens[i].bits(), i);
  }
  space->opens_ = std::move(opens);
  if (!space->is_open(PointSet{}) || !space->is_open(whole))
    throw Error(ErrorKind::ParseError, "a topology must contain the empty set and the whole space");
  for (std::size_t i = 0; i < space->opens_.size(); ++i)
    for (std::size_t j = i + 1; j < space->opens_.size(); ++j) {
      PointSet a = space->opens_[i];
      PointSet b = space->opens_[j];
      if (!space->is_open(a | b) || !space->is_open(a & b))
        throw Error(ErrorKind::ParseError, "opens are not closed under union and intersection: " +
                                               space->key_of(a) + ", " + space->key_of(b));
    }
  space->minimal_opens_.resize(space->points_.size(), whole);
  for (auto u : space->opens_)
    for (auto x : u.indices()) space->minimal_opens_[x] = space->minimal_opens_[x] & u;
  return space;
}

SpacePtr FiniteSpace::from_opens(std::vector<std::string> points,
                                 const std::vector<std::vector<std::string>>& opens) {
  points = normalized_points(std::move(points));
  std::vector<PointSet> masks;
  masks.reserve(opens.size());
  for (const auto& o : opens) masks.push_back(mask_of(points, o));
  return from_masks(std::move(points), std::move(masks));
}

SpacePtr FiniteSpace::from_basis(std::vector<std::string> points,
                                 const std::vector<std::vector<std::string>>& generators) {
  points = normalized_points(std::move(points));
  const PointSet whole = PointSet::first(points.size());
  std::vector<PointSet> gens;
  PointSet covered;
  for (const auto& g : generators) {
    gens.push_back(mask_of(points, g));
    covered = covered | gens.back();
  }
  if (covered != whole) throw Error(ErrorKind::GeneratorsDoNotCover, "union of generators is not the point set");
  std::sort(gens.begin(), gens.end(), canonical_less);
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  auto built = from_masks(points, lattice_closure(gens, whole));
  auto space = std::const_pointer_cast<FiniteSpace>(built);
  space->generators_ = std::move(gens);
  return space;
}

std::optional<std::size_t> FiniteSpace::find_point(std::string_view label) const {
  auto it = point_index_.find(std::string(label));
  if (it == point_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FiniteSpace::point_index(std::string_view label) const {
  auto found = find_point(label);
  if (!found) throw Error(ErrorKind::UnknownPoint, std::string(label));
  return *found;
}

bool FiniteSpace::is_open(PointSet s) const { return open_index_.contains(s.bits()); }

std::optional<std::size_t> FiniteSpace::find_open(PointSet s) const {
  auto it = open_index_.find(s.bits());
  if (it == open_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FiniteSpace::open_index(PointSet s) const {
  auto found = find_open(s);
  if (!found) throw Error(ErrorKind::NotAnOpen, key_of(s & all()));
  return *found;
}

PointSet FiniteSpace::closure(PointSet subset) const {
  if (!subset.subset_of(all())) throw Error(ErrorKind::UnknownPoint, "subset outside the space");
  PointSet out;
  for (std::size_t x = 0; x < size(); ++x)
    if (minimal_opens_[x].intersects(subset)) out = out | PointSet::single(x);
  return out;
}

bool FiniteSpace::is_irreducible() const {
  if (points_.empty()) return false;
  for (auto a : opens_)
    for (auto b : opens_)
      if (!a.empty() && !b.empty() && !a.intersects(b)) return false;
  return true;
}

std::vector<PointSet> FiniteSpace::neighborhoods(std::size_t x) const {
  std::vector<PointSet> out;
  for (auto u : opens_)
    if (u.contains(x)) out.push_back(u);
  return out;
}

std::vector<PointSet> FiniteSpace::opens_within(PointSet u) const {
  std::vector<PointSet> out;
  for (auto v : opens_)
    if (v.subset_of(u)) out.push_back(v);
  return out;
}

PointSet FiniteSpace::set_of(std::span<const std::string> labels) const {
  PointSet s;
  for (const auto& l : labels) s = s | PointSet::single(point_index(l));
  return s;
}

std::vector<std::string> FiniteSpace::labels_of(PointSet s) const {
  std::vector<std::string> out;
  for (auto i : s.indices()) out.push_back(points_.at(i));
  return out;
}

std::string FiniteSpace::key_of(PointSet s) const {
  auto labels = labels_of(s);
  return set_key(labels);
}

PointSet FiniteSpace::parse_key(std::string_view key) const {
  auto labels = parse_set_key(key);
  return set_of(labels);
}

SpacePtr FiniteSpace::subspace(PointSet subset) const {
  if (!subset.subset_of(all())) throw Error(ErrorKind::UnknownPoint, "subspace outside the space");
  std::vector<std::string> labels = labels_of(subset);
  auto sub_index = subset.indices();
  auto compress = [&](PointSet s) {
    PointSet out;
    for (std::size_t k = 0; k < sub_index.size(); ++k)
      if (s.contains(sub_index[k])) out = out | PointSet::single(k);
    return out;
  };
  std::vector<PointSet> traces;
  for (auto u : opens_) traces.push_back(compress(u & subset));
  return from_masks(std::move(labels), std::move(traces));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) { return a == b || (a && b && *a == *b); }

PointSet transfer(PointSet s, const FiniteSpace& from, const FiniteSpace& to) {
  if (&from == &to) return s;
  PointSet out;
  for (auto i : s.indices()) out = out | PointSet::single(to.point_index(from.label(i)));
  return out;
}

Basis::Basis(SpacePtr space, std::vector<PointSet> members) : space_(std::move(space)) {
  std::sort(members.begin(), members.end(), canonical_less);
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (auto m : members) space_->open_index(m);
  for (auto u : space_->opens()) {
    PointSet covered;
    for (auto m : members)
      if (m.subset_of(u)) covered = covered | m;
    if (covered != u) throw Error(ErrorKind::NotAnOpen, "basis does not generate open " + space_->key_of(u));
  }
  members_ = std::move(members);
  for (std::size_t i = 0; i < members_.size(); ++i) index_.emplace(members_[i].bits(), i);
}

Basis Basis::all_opens(SpacePtr space) {
  auto opens = space->opens();
  return Basis(std::move(space), std::move(opens));
}

bool Basis::contains(PointSet s) const { return index_.contains(s.bits()); }

std::size_t Basis::member_index(PointSet s) const {
  auto it = index_.find(s.bits());
  if (it == index_.end()) throw Error(ErrorKind::NotAnOpen, "not a basis member: " + space_->key_of(s));
  return it->second;
}

std::vector<PointSet> Basis::members_within(PointSet u) const {
  std::vector<PointSet> out;
  for (auto m : members_)
    if (m.subset_of(u)) out.push_back(m);
  return out;
}

std::optional<Basis> recorded_basis(const SpacePtr& space) {
  if (!space->generators()) return std::nullopt;
  try {
    return Basis(space, *space->generators());
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<Covering> antichain_coverings_from(const FiniteSpace& space, PointSet u,
                                               std::span<const PointSet> candidates, std::size_t cap) {
  space.open_index(u);
  std::vector<Covering> out;
  auto push = [&](Covering c) {
    if (out.size() >= cap) throw Error(ErrorKind::CapExceeded, "too many coverings of " + space.key_of(u));
    out.push_back(std::move(c));
  };
  bool u_is_candidate = std::find(candidates.begin(), candidates.end(), u) != candidates.end();
  if (u.empty()) {
    push(Covering{u, {}});
    if (u_is_candidate) push(Covering{u, {u}});
    return out;
  }
  if (u_is_candidate) push(Covering{u, {u}});

  std::vector<PointSet> proper;
  for (auto c : candidates)
    if (!c.empty() && c != u && c.subset_of(u)) proper.push_back(c);
  std::sort(proper.begin(), proper.end(), canonical_less);
  proper.erase(std::unique(proper.begin(), proper.end()), proper.end());
  std::vector<PointSet> suffix_union(proper.size() + 1);
  for (std::size_t i = proper.size(); i-- > 0;) suffix_union[i] = suffix_union[i + 1] | proper[i];

  std::vector<Covering> found;
  std::vector<PointSet> chosen;
  auto recurse = [&](auto&& self, std::size_t next, PointSet covered) -> void {
    if (covered == u && chosen.size() >= 2) {
      if (found.size() + out.size() >= cap)
        throw Error(ErrorKind::CapExceeded, "too many coverings of " + space.key_of(u));
      found.push_back(Covering{u, chosen});
    }
    for (std::size_t i = next; i < proper.size(); ++i) {
      if ((covered | suffix_union[i]) != u) return;
      PointSet c = proper[i];
      bool comparable = false;
      for (auto d : chosen) comparable |= c.subset_of(d) || d.subset_of(c);
      if (comparable) continue;
      chosen.push_back(c);
      self(self, i + 1, covered | c);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0, PointSet{});
  std::sort(found.begin(), found.end(), [](const Covering& a, const Covering& b) {
    if (a.parts.size() != b.parts.size()) return a.parts.size() < b.parts.size();
    return std::lexicographical_compare(a.parts.begin(), a.parts.end(), b.parts.begin(), b.parts.end(),
                                        canonical_less);
  });
  for (auto& c : found) push(std::move(c));
  return out;
}

std::vector<Covering> enumerate_antichain_coverings(const FiniteSpace& space, PointSet u, std::size_t cap) {
  return antichain_coverings_from(space, u, space.opens(), cap);
}

ContinuousMap::ContinuousMap(SpacePtr source, SpacePtr target, std::vector<std::size_t> assignment)
    : source_(std::move(source)), target_(std::move(target)), assignment_(std::move(assignment)) {
  if (assignment_.size() != source_->size())
    throw Error(ErrorKind::UnknownPoint, "map is not total on the source points");
  for (auto y : assignment_)
    if (y >= target_->size()) throw Error(ErrorKind::UnknownPoint, "map image outside the target");
}

ContinuousMap ContinuousMap::from_labels(SpacePtr source, SpacePtr target,
                                         const std::map<std::string, std::string>& assignment) {
  std::vector<std::size_t> a(source->size(), 0);
  std::vector<bool> seen(source->size(), false);
  for (const auto& [x, y] : assignment) {
    std::size_t i = source->point_index(x);
    a[i] = target->point_index(y);
    seen[i] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw Error(ErrorKind::UnknownPoint, "no image for point " + source->label(i));
  return ContinuousMap(std::move(source), std::move(target), std::move(a));
}

ContinuousMap ContinuousMap::identity(SpacePtr space) {
  std::vector<std::size_t> a(space->size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = i;
  return ContinuousMap(space, space, std::move(a));
}

ContinuousMap ContinuousMap::inclusion(SpacePtr subspace, SpacePtr ambient) {
  std::vector<std::size_t> a;
  for (const auto& l : subspace->points()) a.push_back(ambient->point_index(l));
  return ContinuousMap(std::move(subspace), std::move(ambient), std::move(a));
}

PointSet ContinuousMap::preimage(PointSet target_subset) const {
  PointSet out;
  for (std::size_t x = 0; x < assignment_.size(); ++x)
    if (target_subset.contains(assignment_[x])) out = out | PointSet::single(x);
  return out;
}

PointSet ContinuousMap::image(PointSet source_subset) const {
  PointSet out;
  for (auto x : source_subset.indices()) out = out | PointSet::single(assignment_.at(x));
  return out;
}

bool ContinuousMap::is_continuous() const {
  for (auto v : target_->opens())
    if (!source_->is_open(preimage(v))) return false;
  return true;
}

void ContinuousMap::require_continuous() const {
  for (auto v : target_->opens())
    if (!source_->is_open(preimage(v)))
      throw Error(ErrorKind::NotContinuous, "preimage of " + target_->key_of(v) + " is " +
                                                source_->key_of(preimage(v)) + ", not open");
}

bool check_continuous(const ContinuousMap& map) { return map.is_continuous(); }

ContinuousMap compose(const ContinuousMap& second, const ContinuousMap& first) {
  if (!same_space(first.target(), second.source()))
    throw Error(ErrorKind::CrossReferenceError, "maps are not composable");
  std::vector<std::size_t> a(first.source()->size());
  for (std::size_t x = 0; x < a.size(); ++x) a[x] = second(first(x));
  return ContinuousMap(first.source(), second.target(), std::move(a));
}

}  // namespace finsheaf
