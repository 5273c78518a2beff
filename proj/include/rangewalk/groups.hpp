#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "rangewalk/rational.hpp"

namespace rangewalk {

enum class GroupKind : std::uint8_t {
  IntegerLine = 0,
  IntegerLattice = 1,
  FreeGroup = 2,
  FiniteCyclicProduct = 3,
};

std::string_view to_string(GroupKind kind);

/// Which concrete group a computation runs on.
struct GroupDescriptor {
  GroupKind kind = GroupKind::IntegerLine;
  /// Lattice dimension d, or free-group rank r; 1 for the integer line.
  std::size_t parameter = 1;
  /// Moduli of a finite cyclic product, each >= 2.
  std::vector<std::int64_t> moduli;

  static GroupDescriptor integer_line();
  static GroupDescriptor lattice(std::size_t d);
  static GroupDescriptor free_group(std::size_t rank);
  static GroupDescriptor cyclic_product(std::vector<std::int64_t> moduli);

  /// Throws ValidationError unless all parameters are in range.
  void validate() const;

  bool operator==(const GroupDescriptor&) const = default;
  std::string to_string() const;
};

/// Canonical element payload. Integers are a one-entry payload, lattice points
/// and residue vectors hold one entry per coordinate, free-group elements hold
/// a reduced word with letters +-1..+-r (negative = inverse generator).
class GroupElement {
 public:
  using Payload = boost::container::small_vector<std::int64_t, 4>;

  GroupElement() = default;
  GroupElement(GroupKind kind, Payload payload) : kind_(kind), payload_(std::move(payload)) {}

  static GroupElement integer(std::int64_t v);
  static GroupElement lattice(std::initializer_list<std::int64_t> coords);
  static GroupElement lattice(std::span<const std::int64_t> coords);
  static GroupElement word(std::initializer_list<std::int64_t> letters);
  static GroupElement word(std::span<const std::int64_t> letters);
  static GroupElement residues(std::initializer_list<std::int64_t> values);
  static GroupElement residues(std::span<const std::int64_t> values);

  GroupKind kind() const { return kind_; }
  const Payload& payload() const { return payload_; }
  Payload& payload() { return payload_; }

  /// Integer value of an IntegerLine element.
  std::int64_t value() const { return payload_.front(); }

  friend bool operator==(const GroupElement& a, const GroupElement& b) {
    return a.kind_ == b.kind_ && a.payload_ == b.payload_;
  }
  friend bool operator<(const GroupElement& a, const GroupElement& b);

  std::size_t hash() const;

 private:
  GroupKind kind_ = GroupKind::IntegerLine;
  Payload payload_;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const { return g.hash(); }
};

/// Appends a fixed-width big-endian 64-bit integer.
void append_u64(std::string& out, std::uint64_t v);
void append_i64(std::string& out, std::int64_t v);
/// Platform-independent serialization: kind byte, payload length, payload.
void append_element(std::string& out, const GroupElement& g);

/// Arithmetic and the fixed enumeration g_0 = e, g_1, g_2, ... of one group.
class Group {
 public:
  explicit Group(GroupDescriptor descriptor);

  const GroupDescriptor& descriptor() const { return descriptor_; }
  GroupKind kind() const { return descriptor_.kind; }

  GroupElement identity() const;
  bool is_identity(const GroupElement& g) const;

  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  /// a <- a * b without reallocating when possible.
  void mul_in_place(GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;

  /// Throws DescriptorMismatch if `g` does not belong to this group, or
  /// ValidationError if it is not in canonical form.
  void validate(const GroupElement& g) const;
  /// Reduces words and residues into canonical form (then validates).
  GroupElement canonicalize(GroupElement g) const;

  /// Element with enumeration index i. Throws ValidationError when i is out
  /// of range (finite groups) or the index overflows 64 bits.
  GroupElement enumerate(std::uint64_t i) const;
  std::uint64_t index_of(const GroupElement& g) const;

  /// Group order, or nullopt when infinite.
  std::optional<std::uint64_t> order() const;

  /// Human-readable form matching the config syntax: "e", "aB" for free
  /// groups; "5", "(1,-2)" otherwise.
  std::string format(const GroupElement& g) const;

  /// Length of a reduced word (free groups) or L-infinity norm (lattices).
  std::uint64_t norm(const GroupElement& g) const;

 private:
  void check_kind(const GroupElement& g) const;

  GroupDescriptor descriptor_;
};

/// One support point of a step distribution.
struct Atom {
  GroupElement element;
  double probability = 0.0;
};

/// Finitely supported probability measure mu on a group. Immutable.
class StepDistribution {
 public:
  /// Validates: distinct canonical support points, probabilities in (0,1],
  /// total within 1e-12 of 1, at least two support points.
  StepDistribution(GroupDescriptor descriptor, std::vector<Atom> atoms);
  /// Exact-rational variant; probabilities must sum to exactly 1.
  static StepDistribution from_exact(GroupDescriptor descriptor,
                                     std::vector<std::pair<GroupElement, Rational>> atoms);

  const Group& group() const { return group_; }
  const GroupDescriptor& descriptor() const { return group_.descriptor(); }
  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  bool has_exact() const { return !exact_.empty(); }
  /// Exact probabilities, aligned with atoms(); empty unless has_exact().
  std::span<const Rational> exact() const { return exact_; }

  /// mu(g), zero off the support.
  double probability(const GroupElement& g) const;
  /// Position of g in atoms(), or nullopt.
  std::optional<std::size_t> slot_of(const GroupElement& g) const;

  /// Shannon entropy H(X_1) in nats.
  double entropy() const;

  /// True when the integer span of the support is the whole lattice. Only
  /// decidable here for the integer line and lattices; nullopt otherwise.
  std::optional<bool> support_generates() const;

  bool operator==(const StepDistribution& other) const;

 private:
  struct ExactTag {};
  StepDistribution(GroupDescriptor descriptor, std::vector<std::pair<GroupElement, Rational>> atoms, ExactTag);
  void validate_support() const;

  Group group_;
  std::vector<Atom> atoms_;
  std::vector<Rational> exact_;
};

/// mu~(x) = mu(x^-1).
StepDistribution reversed_measure(const StepDistribution& mu);

}  // namespace rangewalk
