#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ekb {

enum class Polarity { Positive, Negative };

/// Ternary truth value: TRUE / FALSE / UNKNOWN.
enum class Truth { True, False, Unknown };

[[nodiscard]] std::string_view to_string(Truth t) noexcept;

/// Unsigned triple pattern r(subject, object).
struct Query {
  std::string relation;
  std::string subject;
  std::string object;

  auto operator<=>(const Query&) const = default;
};

struct SignedTriple {
  std::string relation;
  std::string subject;
  std::string object;
  Polarity polarity = Polarity::Positive;

  [[nodiscard]] Query query() const { return {relation, subject, object}; }

  auto operator<=>(const SignedTriple&) const = default;
};

/// Throws Error if the name is empty, contains a tab or newline, or has
/// surrounding whitespace.
void validate_term(std::string_view name);

/// Signed ground-fact store. Immutable once built; triples are kept in
/// canonical (relation, subject, object) order so that the value does not
/// depend on input order.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  /// Validates terms, namespaces, duplicates and contradictions.
  explicit KnowledgeBase(std::vector<SignedTriple> triples);

  [[nodiscard]] const std::vector<SignedTriple>& triples() const noexcept { return triples_; }
  [[nodiscard]] const std::vector<std::string>& entities() const noexcept { return entities_; }
  [[nodiscard]] const std::vector<std::string>& relations() const noexcept { return relations_; }
  [[nodiscard]] bool empty() const noexcept { return triples_.empty(); }

  [[nodiscard]] std::optional<std::size_t> entity_index(std::string_view name) const;
  [[nodiscard]] std::optional<std::size_t> relation_index(std::string_view name) const;

  /// Polarity of the asserted triple matching q, if any.
  [[nodiscard]] std::optional<Polarity> lookup(const Query& q) const;

  /// Throws UnknownTermError unless every term of q is in the vocabulary
  /// with the right role.
  void check_query(const Query& q) const;

  /// Canonical text form; parse_kb(serialize()) == *this.
  [[nodiscard]] std::string serialize() const;

  /// Hex SHA-256 of serialize().
  [[nodiscard]] std::string digest() const;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  std::vector<SignedTriple> triples_;
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
};

/// Parses the tab-separated `relation subject object polarity` format.
[[nodiscard]] KnowledgeBase parse_kb(std::string_view text);

[[nodiscard]] KnowledgeBase load_kb(const std::string& path);

struct UnstatedOptions {
  bool include_self_pairs = true;
};

/// Every relation/subject/object combination the KB says nothing about,
/// in lexicographic order.
[[nodiscard]] std::vector<Query> unstated_queries(const KnowledgeBase& kb,
                                                  UnstatedOptions opts = {});

/// Ground-literal reading of the KB with no inference.
[[nodiscard]] Truth assertion_oracle(const KnowledgeBase& kb, const Query& q);

}  // namespace ekb
