#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "finsheaf/topology.hpp"

namespace finsheaf {

enum class Category { FinSet, FinAb };

std::string_view to_string(Category c) noexcept;
Category parse_category(std::string_view s);

inline constexpr std::size_t kDefaultHomCap = 1'000'000;

/// An object of one of the two value categories: a finite set, or a finite
/// abelian group given by its full addition table. Elements are kept sorted by
/// label and addressed by index. Copies share the immutable representation.
class ValueObject {
 public:
  /// Finite set; labels are sorted and must be distinct.
  static ValueObject set(std::vector<std::string> elements);
  /// Finite abelian group from triples (x, y, x+y); every pair must appear.
  /// Throws ValueMismatch if the table is not a commutative group.
  static ValueObject group(std::vector<std::string> elements,
                           const std::vector<std::array<std::string, 3>>& table, std::string_view zero);
  /// Group from an addition function over the given (unsorted) element order.
  static ValueObject group(std::vector<std::string> elements,
                           const std::function<std::size_t(std::size_t, std::size_t)>& add);
  /// Z/n with labels "0".."n-1".
  static ValueObject cyclic(std::size_t n);
  /// Singleton set labelled "()" or the zero group.
  static ValueObject terminal(Category category);

  ValueObject();  // the empty set

  Category category() const noexcept { return repr_->category; }
  bool is_group() const noexcept { return repr_->category == Category::FinAb; }
  std::size_t size() const noexcept { return repr_->elements.size(); }
  const std::vector<std::string>& elements() const noexcept { return repr_->elements; }
  const std::string& element(std::size_t i) const { return repr_->elements.at(i); }
  std::optional<std::size_t> find(std::string_view label) const;
  /// Throws NotASection.
  std::size_t index_of(std::string_view label) const;

  std::size_t add(std::size_t a, std::size_t b) const { return repr_->add[a * size() + b]; }
  std::size_t zero() const { return repr_->zero; }
  std::size_t neg(std::size_t a) const { return repr_->neg.at(a); }
  /// Additive order of the group exponent (lcm of element orders); 1 for sets.
  std::size_t exponent() const;

  friend bool operator==(const ValueObject& a, const ValueObject& b);

 private:
  struct Repr {
    Category category = Category::FinSet;
    std::vector<std::string> elements;
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::size_t> add;
    std::size_t zero = 0;
    std::vector<std::size_t> neg;
  };
  explicit ValueObject(std::shared_ptr<const Repr> repr) : repr_(std::move(repr)) {}
  static std::shared_ptr<Repr> make_repr(Category c, std::vector<std::string> sorted_elements);

  std::shared_ptr<const Repr> repr_;
};

/// A map between value objects of one category; for FinAb a homomorphism.
class ValueMorphism {
 public:
  /// Throws ValueMismatch if `map` is not total, out of range, or not a homomorphism.
  ValueMorphism(ValueObject source, ValueObject target, std::vector<std::size_t> map);
  static ValueMorphism identity(const ValueObject& object);
  static ValueMorphism from_labels(ValueObject source, ValueObject target,
                                   const std::map<std::string, std::string>& map);

  const ValueObject& source() const noexcept { return source_; }
  const ValueObject& target() const noexcept { return target_; }
  const std::vector<std::size_t>& table() const noexcept { return map_; }
  std::size_t operator()(std::size_t a) const { return map_.at(a); }

  bool is_injective() const;
  bool is_surjective() const;
  bool is_bijective() const { return is_injective() && is_surjective(); }
  /// Throws ValueMismatch if not bijective.
  ValueMorphism inverse() const;
  std::map<std::string, std::string> label_map() const;

  friend bool operator==(const ValueMorphism& a, const ValueMorphism& b) {
    return a.map_ == b.map_ && a.source_ == b.source_ && a.target_ == b.target_;
  }

 private:
  ValueObject source_;
  ValueObject target_;
  std::vector<std::size_t> map_;
};

/// after ∘ before. Throws ValueMismatch if the objects do not line up.
ValueMorphism compose(const ValueMorphism& after, const ValueMorphism& before);

/// A finite poset-indexed diagram. Arrows are keyed by (i, j) with i < j.
/// Contravariant: arrow(i, j) : objects[j] → objects[i] (projective systems).
/// Covariant: arrow(i, j) : objects[i] → objects[j] (inductive systems).
struct Diagram {
  enum class Orientation { Contravariant, Covariant };

  Category category = Category::FinSet;
  Orientation orientation = Orientation::Contravariant;
  std::vector<std::string> names;
  std::vector<std::vector<bool>> leq;  // reflexive partial order
  std::vector<ValueObject> objects;
  std::map<std::pair<std::size_t, std::size_t>, ValueMorphism> arrows;

  std::size_t size() const noexcept { return objects.size(); }
  /// Arrow for i ≤ j (identity when i == j).
  ValueMorphism arrow(std::size_t i, std::size_t j) const;
  /// Throws MixedCategories or MalformedDiagram.
  void validate() const;
};

struct LimitResult {
  ValueObject object;
  std::vector<ValueMorphism> projections;
  /// Component indices of each limit element.
  std::vector<std::vector<std::size_t>> families;
  std::map<std::vector<std::size_t>, std::size_t> lookup;
};

/// Compatible families of a contravariant diagram; the empty diagram gives the
/// terminal object.
LimitResult limit(const Diagram& diagram);

struct ColimitResult {
  ValueObject object;
  std::vector<ValueMorphism> injections;
  /// (index, element) of the least representative of each class.
  std::vector<std::pair<std::size_t, std::size_t>> representatives;
};

/// Germ-style quotient of a covariant filtered diagram. Classes are labelled by
/// their least representative "(index,element)".
ColimitResult filtered_colimit(const Diagram& diagram);

/// All maps (FinSet) or homomorphisms (FinAb), ordered lexicographically by
/// image table. Throws CapExceeded if more than `cap` candidates must be examined.
std::vector<ValueMorphism> enumerate_morphisms(const ValueObject& source, const ValueObject& target,
                                               std::size_t cap = kDefaultHomCap);

/// The unique apex → limit map through which the cone factors.
/// Throws IncompatibleCone.
ValueMorphism mediating_morphism(const ValueObject& apex, std::span<const ValueMorphism> cone,
                                 const LimitResult& limit);

/// The unique colimit → apex map through which the cocone factors.
/// Throws IncompatibleCone.
ValueMorphism comediating_morphism(const ColimitResult& colimit, const ValueObject& apex,
                                   std::span<const ValueMorphism> cocone);

}  // namespace finsheaf
