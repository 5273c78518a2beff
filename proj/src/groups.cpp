#include "rangewalk/groups.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rangewalk/error.hpp"
#include "rangewalk/rng.hpp"

namespace rangewalk {

namespace {

using u128 = unsigned __int128;

constexpr u128 kIndexLimit = static_cast<u128>(UINT64_MAX);

/// base^exp, saturating at kIndexLimit + 1.
u128 saturating_pow(u128 base, std::uint64_t exp) {
  u128 result = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && result > (kIndexLimit + 1) / base) return kIndexLimit + 1;
    result *= base;
  }
  return result;
}

std::uint64_t checked_index(u128 v) {
  if (v > kIndexLimit) throw ValidationError("enumeration index overflows 64 bits");
  return static_cast<std::uint64_t>(v);
}

std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Letter order 1 < -1 < 2 < -2 < ...
std::uint64_t letter_rank(std::int64_t s) {
  return s > 0 ? 2 * static_cast<std::uint64_t>(s - 1) : 2 * static_cast<std::uint64_t>(-s - 1) + 1;
}

std::int64_t letter_from_rank(std::uint64_t rank) {
  const auto g = static_cast<std::int64_t>(rank / 2) + 1;
  return rank % 2 == 0 ? g : -g;
}

}  // namespace

std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::IntegerLine: return "Z";
    case GroupKind::IntegerLattice: return "Zd";
    case GroupKind::FreeGroup: return "free";
    case GroupKind::FiniteCyclicProduct: return "cyclic";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// GroupDescriptor

GroupDescriptor GroupDescriptor::integer_line() { return {GroupKind::IntegerLine, 1, {}}; }

GroupDescriptor GroupDescriptor::lattice(std::size_t d) {
  GroupDescriptor g{GroupKind::IntegerLattice, d, {}};
  g.validate();
  return g;
}

GroupDescriptor GroupDescriptor::free_group(std::size_t rank) {
  GroupDescriptor g{GroupKind::FreeGroup, rank, {}};
  g.validate();
  return g;
}

GroupDescriptor GroupDescriptor::cyclic_product(std::vector<std::int64_t> moduli) {
  GroupDescriptor g{GroupKind::FiniteCyclicProduct, moduli.size(), std::move(moduli)};
  g.validate();
  return g;
}

void GroupDescriptor::validate() const {
  switch (kind) {
    case GroupKind::IntegerLine:
      if (parameter != 1) throw ValidationError("integer line has parameter 1");
      break;
    case GroupKind::IntegerLattice:
      if (parameter < 1) throw ValidationError("lattice dimension must be positive");
      break;
    case GroupKind::FreeGroup:
      if (parameter < 1) throw ValidationError("free group rank must be positive");
      if (parameter > 26) throw ValidationError("free group rank above 26 is not supported");
      break;
    case GroupKind::FiniteCyclicProduct:
      if (moduli.empty()) throw ValidationError("cyclic product needs at least one modulus");
      if (parameter != moduli.size()) throw ValidationError("cyclic product parameter mismatch");
      for (auto m : moduli) {
        if (m < 2) throw ValidationError("every modulus must be >= 2");
      }
      break;
  }
}

std::string GroupDescriptor::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case GroupKind::IntegerLine: os << "Z"; break;
    case GroupKind::IntegerLattice: os << "Z^" << parameter; break;
    case GroupKind::FreeGroup: os << "F_" << parameter; break;
    case GroupKind::FiniteCyclicProduct:
      for (std::size_t i = 0; i < moduli.size(); ++i) os << (i ? " x " : "") << "Z/" << moduli[i];
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// GroupElement

GroupElement GroupElement::integer(std::int64_t v) { return {GroupKind::IntegerLine, Payload{v}}; }

GroupElement GroupElement::lattice(std::initializer_list<std::int64_t> coords) {
  return {GroupKind::IntegerLattice, Payload(coords.begin(), coords.end())};
}
GroupElement GroupElement::lattice(std::span<const std::int64_t> coords) {
  return {GroupKind::IntegerLattice, Payload(coords.begin(), coords.end())};
}
GroupElement GroupElement::word(std::initializer_list<std::int64_t> letters) {
  return {GroupKind::FreeGroup, Payload(letters.begin(), letters.end())};
}
GroupElement GroupElement::word(std::span<const std::int64_t> letters) {
  return {GroupKind::FreeGroup, Payload(letters.begin(), letters.end())};
}
GroupElement GroupElement::residues(std::initializer_list<std::int64_t> values) {
  return {GroupKind::FiniteCyclicProduct, Payload(values.begin(), values.end())};
}
GroupElement GroupElement::residues(std::span<const std::int64_t> values) {
  return {GroupKind::FiniteCyclicProduct, Payload(values.begin(), values.end())};
}

bool operator<(const GroupElement& a, const GroupElement& b) {
  if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
  if (a.payload_.size() != b.payload_.size()) return a.payload_.size() < b.payload_.size();
  return std::lexicographical_compare(a.payload_.begin(), a.payload_.end(), b.payload_.begin(),
                                      b.payload_.end());
}

std::size_t GroupElement::hash() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(kind_) + 0x9e3779b97f4a7c15ULL * (payload_.size() + 1));
  for (auto v : payload_) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return static_cast<std::size_t>(h);
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void append_i64(std::string& out, std::int64_t v) { append_u64(out, static_cast<std::uint64_t>(v)); }

void append_element(std::string& out, const GroupElement& g) {
  out.push_back(static_cast<char>(g.kind()));
  append_u64(out, g.payload().size());
  for (auto v : g.payload()) append_i64(out, v);
}

// ---------------------------------------------------------------------------
// Group

Group::Group(GroupDescriptor descriptor) : descriptor_(std::move(descriptor)) { descriptor_.validate(); }

GroupElement Group::identity() const {
  switch (descriptor_.kind) {
    case GroupKind::IntegerLine: return GroupElement::integer(0);
    case GroupKind::IntegerLattice:
      return {GroupKind::IntegerLattice, GroupElement::Payload(descriptor_.parameter, 0)};
    case GroupKind::FreeGroup: return {GroupKind::FreeGroup, {}};
    case GroupKind::FiniteCyclicProduct:
      return {GroupKind::FiniteCyclicProduct, GroupElement::Payload(descriptor_.moduli.size(), 0)};
  }
  return {};
}

bool Group::is_identity(const GroupElement& g) const {
  return std::all_of(g.payload().begin(), g.payload().end(), [](auto v) { return v == 0; });
}

void Group::check_kind(const GroupElement& g) const {
  if (g.kind() != descriptor_.kind) {
    throw DescriptorMismatch("element of kind " + std::string(rangewalk::to_string(g.kind())) +
                             " used in group " + descriptor_.to_string());
  }
  const auto& p = g.payload();
  switch (descriptor_.kind) {
    case GroupKind::IntegerLine:
      if (p.size() != 1) throw DescriptorMismatch("integer element must have one entry");
      break;
    case GroupKind::IntegerLattice:
      if (p.size() != descriptor_.parameter) {
        throw DescriptorMismatch("lattice element has dimension " + std::to_string(p.size()) +
                                 ", group has " + std::to_string(descriptor_.parameter));
      }
      break;
    case GroupKind::FreeGroup: break;
    case GroupKind::FiniteCyclicProduct:
      if (p.size() != descriptor_.moduli.size()) {
        throw DescriptorMismatch("residue vector length does not match the moduli");
      }
      break;
  }
}

void Group::validate(const GroupElement& g) const {
  check_kind(g);
  const auto& p = g.payload();
  if (descriptor_.kind == GroupKind::FreeGroup) {
    const auto r = static_cast<std::int64_t>(descriptor_.parameter);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == 0 || p[i] > r || p[i] < -r) {
        throw DescriptorMismatch("letter " + std::to_string(p[i]) + " outside F_" + std::to_string(r));
      }
      if (i > 0 && p[i] == -p[i - 1]) throw ValidationError("word is not reduced");
    }
  } else if (descriptor_.kind == GroupKind::FiniteCyclicProduct) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] < 0 || p[i] >= descriptor_.moduli[i]) throw ValidationError("residue out of range");
    }
  }
}

GroupElement Group::canonicalize(GroupElement g) const {
  check_kind(g);
  if (descriptor_.kind == GroupKind::FreeGroup) {
    GroupElement out = identity();
    for (auto letter : g.payload()) {
      mul_in_place(out, GroupElement(GroupKind::FreeGroup, GroupElement::Payload{letter}));
    }
    validate(out);
    return out;
  }
  if (descriptor_.kind == GroupKind::FiniteCyclicProduct) {
    auto& p = g.payload();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = mod_floor(p[i], descriptor_.moduli[i]);
  }
  validate(g);
  return g;
}

void Group::mul_in_place(GroupElement& a, const GroupElement& b) const {
  check_kind(a);
  check_kind(b);
  auto& pa = a.payload();
  const auto& pb = b.payload();
  switch (descriptor_.kind) {
    case GroupKind::IntegerLine:
    case GroupKind::IntegerLattice:
      for (std::size_t i = 0; i < pa.size(); ++i) pa[i] += pb[i];
      break;
    case GroupKind::FreeGroup:
      for (auto letter : pb) {
        if (letter == 0) throw ValidationError("zero letter in word");
        if (!pa.empty() && pa.back() == -letter) {
          pa.pop_back();
        } else {
          pa.push_back(letter);
        }
      }
      break;
    case GroupKind::FiniteCyclicProduct:
      for (std::size_t i = 0; i < pa.size(); ++i) {
        pa[i] = mod_floor(pa[i] + pb[i], descriptor_.moduli[i]);
      }
      break;
  }
}

GroupElement Group::mul(const GroupElement& a, const GroupElement& b) const {
  GroupElement out = a;
  mul_in_place(out, b);
  return out;
}

GroupElement Group::inverse(const GroupElement& a) const {
  check_kind(a);
  GroupElement out = a;
  auto& p = out.payload();
  switch (descriptor_.kind) {
    case GroupKind::IntegerLine:
    case GroupKind::IntegerLattice:
      for (auto& v : p) v = -v;
      break;
    case GroupKind::FreeGroup:
      std::reverse(p.begin(), p.end());
      for (auto& v : p) v = -v;
      break;
    case GroupKind::FiniteCyclicProduct:
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = mod_floor(-p[i], descriptor_.moduli[i]);
      break;
  }
  return out;
}

std::optional<std::uint64_t> Group::order() const {
  if (descriptor_.kind != GroupKind::FiniteCyclicProduct) return std::nullopt;
  u128 n = 1;
  for (auto m : descriptor_.moduli) {
    n *= static_cast<u128>(m);
    if (n > kIndexLimit) throw ValidationError("group order overflows 64 bits");
  }
  return static_cast<std::uint64_t>(n);
}

std::uint64_t Group::norm(const GroupElement& g) const {
  check_kind(g);
  switch (descriptor_.kind) {
    case GroupKind::FreeGroup: return g.payload().size();
    case GroupKind::IntegerLine:
    case GroupKind::IntegerLattice: {
      std::uint64_t r = 0;
      for (auto v : g.payload()) r = std::max<std::uint64_t>(r, static_cast<std::uint64_t>(v < 0 ? -v : v));
      return r;
    }
    case GroupKind::FiniteCyclicProduct: {
      std::uint64_t r = 0;
      for (std::size_t i = 0; i < g.payload().size(); ++i) {
        const auto v = g.payload()[i];
        r = std::max<std::uint64_t>(r, static_cast<std::uint64_t>(std::min(v, descriptor_.moduli[i] - v)));
      }
      return r;
    }
  }
  return 0;
}

// Enumeration orders:
//   Z      0, 1, -1, 2, -2, ...
//   Z^d    by L-infinity shell, lexicographic inside a shell
//   F_r    by word length, lexicographic with letters 1 < -1 < 2 < -2 < ...
//   finite lexicographic residue vectors
GroupElement Group::enumerate(std::uint64_t i) const {
  switch (descriptor_.kind) {
    case GroupKind::IntegerLine: {
      const auto half = static_cast<std::int64_t>(i / 2);
      return GroupElement::integer(i % 2 == 1 ? half + 1 : -half);
    }
    case GroupKind::IntegerLattice: {
      const std::uint64_t d = descriptor_.parameter;
      if (i == 0) return identity();
      // smallest r with i < (2r+1)^d
      std::uint64_t r = 1;
      while (saturating_pow(2 * r + 1, d) <= i) ++r;
      u128 rank = static_cast<u128>(i) - saturating_pow(2 * r - 1, d);
      const u128 wide = 2 * r + 1;
      const u128 narrow = 2 * r - 1;
      const auto sr = static_cast<std::int64_t>(r);
      GroupElement::Payload out(d, 0);
      bool hit = false;
      for (std::uint64_t j = 0; j < d; ++j) {
        const std::uint64_t rem = d - j - 1;
        const u128 edge = saturating_pow(wide, rem);
        const u128 inner = hit ? edge : edge - saturating_pow(narrow, rem);
        if (rank < edge) {
          out[j] = -sr;
          hit = true;
          continue;
        }
        rank -= edge;
        if (inner > 0 && rank < inner * narrow) {
          const u128 k = rank / inner;
          out[j] = -sr + 1 + static_cast<std::int64_t>(k);
          rank -= k * inner;
          continue;
        }
        if (inner > 0) rank -= inner * narrow;
        out[j] = sr;
        hit = true;
      }
      return {GroupKind::IntegerLattice, std::move(out)};
    }
    case GroupKind::FreeGroup: {
      const u128 r2 = 2 * descriptor_.parameter;
      if (i == 0) return identity();
      u128 rest = static_cast<u128>(i) - 1;
      std::uint64_t length = 1;
      for (;; ++length) {
        const u128 count = r2 * saturating_pow(r2 - 1, length - 1);
        if (rest < count) break;
        rest -= count;
      }
      GroupElement::Payload word;
      word.reserve(length);
      for (std::uint64_t j = 0; j < length; ++j) {
        const u128 weight = saturating_pow(r2 - 1, length - 1 - j);
        auto digit = static_cast<std::uint64_t>(rest / weight);
        rest %= weight;
        if (j > 0) {
          // skip the letter that would cancel the previous one
          const std::uint64_t banned = letter_rank(-word.back());
          if (digit >= banned) ++digit;
        }
        word.push_back(letter_from_rank(digit));
      }
      return {GroupKind::FreeGroup, std::move(word)};
    }
    case GroupKind::FiniteCyclicProduct: {
      const auto total = *order();
      if (i >= total) {
        throw ValidationError("index " + std::to_string(i) + " out of range for finite group of order " +
                              std::to_string(total));
      }
      GroupElement::Payload out(descriptor_.moduli.size(), 0);
      std::uint64_t rest = i;
      for (std::size_t j = descriptor_.moduli.size(); j-- > 0;) {
        const auto m = static_cast<std::uint64_t>(descriptor_.moduli[j]);
        out[j] = static_cast<std::int64_t>(rest % m);
        rest /= m;
      }
      return {GroupKind::FiniteCyclicProduct, std::move(out)};
    }
  }
  return {};
}

std::uint64_t Group::index_of(const GroupElement& g) const {
  validate(g);
  const auto& p = g.payload();
  switch (descriptor_.kind) {
    case GroupKind::IntegerLine: {
      const auto v = p[0];
      const u128 mag = static_cast<u128>(v < 0 ? -static_cast<__int128>(v) : static_cast<__int128>(v));
      return checked_index(v > 0 ? 2 * mag - 1 : 2 * mag);
    }
    case GroupKind::IntegerLattice: {
      const std::uint64_t d = descriptor_.parameter;
      const std::uint64_t r = norm(g);
      if (r == 0) return 0;
      const u128 wide = 2 * static_cast<u128>(r) + 1;
      const u128 narrow = 2 * static_cast<u128>(r) - 1;
      u128 rank = 0;
      bool hit = false;
      for (std::uint64_t j = 0; j < d; ++j) {
        const std::uint64_t rem = d - j - 1;
        const u128 edge = saturating_pow(wide, rem);
        const u128 inner = hit ? edge : edge - saturating_pow(narrow, rem);
        const __int128 x = p[j];
        const __int128 sr = static_cast<__int128>(r);
        if (x > -sr) {
          rank += edge;  // v = -r
          rank += inner * static_cast<u128>(x + sr - 1);  // -r < v < x
        }
        if (x == sr || x == -sr) hit = true;
      }
      return checked_index(saturating_pow(narrow, d) + rank);
    }
    case GroupKind::FreeGroup: {
      const u128 r2 = 2 * descriptor_.parameter;
      const std::uint64_t length = p.size();
      if (length == 0) return 0;
      u128 base = 1;
      for (std::uint64_t l = 1; l < length; ++l) base += r2 * saturating_pow(r2 - 1, l - 1);
      u128 rank = 0;
      for (std::uint64_t j = 0; j < length; ++j) {
        std::uint64_t digit = letter_rank(p[j]);
        if (j > 0 && letter_rank(-p[j - 1]) < digit) --digit;
        rank += static_cast<u128>(digit) * saturating_pow(r2 - 1, length - 1 - j);
      }
      return checked_index(base + rank);
    }
    case GroupKind::FiniteCyclicProduct: {
      std::uint64_t index = 0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        index = index * static_cast<std::uint64_t>(descriptor_.moduli[j]) + static_cast<std::uint64_t>(p[j]);
      }
      return index;
    }
  }
  return 0;
}

std::string Group::format(const GroupElement& g) const {
  check_kind(g);
  const auto& p = g.payload();
  switch (descriptor_.kind) {
    case GroupKind::IntegerLine: return std::to_string(p[0]);
    case GroupKind::FreeGroup: {
      if (p.empty()) return "e";
      std::string s;
      for (auto letter : p) {
        const char base = letter > 0 ? 'a' : 'A';
        s.push_back(static_cast<char>(base + (letter > 0 ? letter : -letter) - 1));
      }
      return s;
    }
    case GroupKind::IntegerLattice:
    case GroupKind::FiniteCyclicProduct: {
      std::string s = "(";
      for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
      return s + ")";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// StepDistribution

namespace {

constexpr double kMassTolerance = 1e-12;

}  // namespace

StepDistribution::StepDistribution(GroupDescriptor descriptor, std::vector<Atom> atoms)
    : group_(std::move(descriptor)), atoms_(std::move(atoms)) {
  for (auto& a : atoms_) a.element = group_.canonicalize(std::move(a.element));
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& x, const Atom& y) { return x.element < y.element; });
  validate_support();
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!(a.probability > 0.0) || a.probability > 1.0) {
      throw ValidationError("probability of " + group_.format(a.element) + " must lie in (0,1]");
    }
    total += a.probability;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total << ", expected 1 within 1e-12";
    throw ValidationError(os.str());
  }
}

StepDistribution StepDistribution::from_exact(GroupDescriptor descriptor,
                                              std::vector<std::pair<GroupElement, Rational>> atoms) {
  return StepDistribution(std::move(descriptor), std::move(atoms), ExactTag{});
}

StepDistribution::StepDistribution(GroupDescriptor descriptor,
                                   std::vector<std::pair<GroupElement, Rational>> atoms, ExactTag)
    : group_(std::move(descriptor)) {
  for (auto& [element, p] : atoms) element = group_.canonicalize(std::move(element));
  std::sort(atoms.begin(), atoms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  Rational total = 0;
  for (auto& [element, p] : atoms) {
    if (p <= 0 || p > 1) throw ValidationError("probability of " + group_.format(element) + " must lie in (0,1]");
    total += p;
    atoms_.push_back({element, to_double(p)});
    exact_.push_back(p);
  }
  validate_support();
  if (total != 1) throw ValidationError("exact probabilities sum to " + to_string(total) + ", expected 1");
}

void StepDistribution::validate_support() const {
  for (std::size_t i = 1; i < atoms_.size(); ++i) {
    if (atoms_[i].element == atoms_[i - 1].element) {
      throw ValidationError("duplicate support element " + group_.format(atoms_[i].element));
    }
  }
  // H(X_1) > 0 is a standing assumption; point masses are rejected.
  if (atoms_.size() < 2) throw ValidationError("step distribution needs at least two support points (H(X_1) > 0)");
}

double StepDistribution::probability(const GroupElement& g) const {
  const auto slot = slot_of(g);
  return slot ? atoms_[*slot].probability : 0.0;
}

std::optional<std::size_t> StepDistribution::slot_of(const GroupElement& g) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), g,
                             [](const Atom& a, const GroupElement& x) { return a.element < x; });
  if (it == atoms_.end() || !(it->element == g)) return std::nullopt;
  return static_cast<std::size_t>(it - atoms_.begin());
}

double StepDistribution::entropy() const {
  double h = 0.0;
  for (const auto& a : atoms_) h -= a.probability * std::log(a.probability);
  return h;
}

std::optional<bool> StepDistribution::support_generates() const {
  const auto kind = descriptor().kind;
  if (kind == GroupKind::IntegerLine) {
    std::int64_t g = 0;
    for (const auto& a : atoms_) g = std::gcd(g, a.element.value());
    return g == 1;
  }
  if (kind != GroupKind::IntegerLattice) return std::nullopt;
  // Integer row reduction (Hermite form); the span is Z^d iff every pivot is a unit.
  const std::size_t d = descriptor().parameter;
  std::vector<std::vector<__int128>> rows;
  for (const auto& a : atoms_) rows.emplace_back(a.element.payload().begin(), a.element.payload().end());
  std::size_t top = 0;
  for (std::size_t col = 0; col < d; ++col) {
    for (;;) {
      std::size_t pivot = rows.size();
      for (std::size_t r = top; r < rows.size(); ++r) {
        if (rows[r][col] != 0 && (pivot == rows.size() || (rows[r][col] < 0 ? -rows[r][col] : rows[r][col]) <
                                                                (rows[pivot][col] < 0 ? -rows[pivot][col]
                                                                                      : rows[pivot][col]))) {
          pivot = r;
        }
      }
      if (pivot == rows.size()) return false;
      std::swap(rows[top], rows[pivot]);
      bool cleared = true;
      for (std::size_t r = top + 1; r < rows.size(); ++r) {
        if (rows[r][col] == 0) continue;
        const __int128 q = rows[r][col] / rows[top][col];
        for (std::size_t c = col; c < d; ++c) rows[r][c] -= q * rows[top][c];
        if (rows[r][col] != 0) cleared = false;
      }
      if (cleared) break;
    }
    if (rows[top][col] != 1 && rows[top][col] != -1) return false;
    ++top;
  }
  return true;
}

bool StepDistribution::operator==(const StepDistribution& other) const {
  if (!(descriptor() == other.descriptor()) || atoms_.size() != other.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!(atoms_[i].element == other.atoms_[i].element)) return false;
    if (atoms_[i].probability != other.atoms_[i].probability) return false;
  }
  return exact_ == other.exact_;
}

StepDistribution reversed_measure(const StepDistribution& mu) {
  const auto& group = mu.group();
  if (mu.has_exact()) {
    std::vector<std::pair<GroupElement, Rational>> atoms;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      atoms.emplace_back(group.inverse(mu.atoms()[i].element), mu.exact()[i]);
    }
    return StepDistribution::from_exact(mu.descriptor(), std::move(atoms));
  }
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) atoms.push_back({group.inverse(a.element), a.probability});
  return {mu.descriptor(), std::move(atoms)};
}

}  // namespace rangewalk
