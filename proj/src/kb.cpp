#include "ekb/kb.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/sha.h>

#include "ekb/error.hpp"

namespace ekb {

std::string_view to_string(Truth t) noexcept {
  switch (t) {
    case Truth::True:
      return "TRUE";
    case Truth::False:
      return "FALSE";
    case Truth::Unknown:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

std::string describe(const SignedTriple& t) {
  return t.relation + "(" + t.subject + ", " + t.object + ")";
}

std::optional<std::size_t> find_sorted(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::lower_bound(names.begin(), names.end(), name);
  if (it == names.end() || *it != name) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

void validate_term(std::string_view name) {
  if (name.empty()) {
    throw Error("empty term");
  }
  if (name.find_first_of("\t\n\r") != std::string_view::npos) {
    throw Error("term contains tab or newline: '" + std::string(name) + "'");
  }
  if (is_space(name.front()) || is_space(name.back())) {
    throw Error("term has leading or trailing whitespace: '" + std::string(name) + "'");
  }
}

KnowledgeBase::KnowledgeBase(std::vector<SignedTriple> triples) : triples_(std::move(triples)) {
  std::set<std::string> entities;
  std::set<std::string> relations;
  for (const auto& t : triples_) {
    validate_term(t.relation);
    validate_term(t.subject);
    validate_term(t.object);
    relations.insert(t.relation);
    entities.insert(t.subject);
    entities.insert(t.object);
  }
  for (const auto& r : relations) {
    if (entities.contains(r)) {
      throw Error("term used both as entity and relation: " + r);
    }
  }

  std::sort(triples_.begin(), triples_.end());
  for (std::size_t i = 1; i < triples_.size(); ++i) {
    const auto& prev = triples_[i - 1];
    const auto& cur = triples_[i];
    if (prev.query() != cur.query()) {
      continue;
    }
    if (prev.polarity == cur.polarity) {
      throw DuplicateError("duplicate triple " + describe(cur));
    }
    throw ContradictionError("contradiction: " + describe(cur) + " asserted both + and -");
  }

  entities_.assign(entities.begin(), entities.end());
  relations_.assign(relations.begin(), relations.end());
}

std::optional<std::size_t> KnowledgeBase::entity_index(std::string_view name) const {
  return find_sorted(entities_, name);
}

std::optional<std::size_t> KnowledgeBase::relation_index(std::string_view name) const {
  return find_sorted(relations_, name);
}

std::optional<Polarity> KnowledgeBase::lookup(const Query& q) const {
  auto it = std::lower_bound(triples_.begin(), triples_.end(), q,
                             [](const SignedTriple& t, const Query& key) { return t.query() < key; });
  if (it == triples_.end() || it->query() != q) {
    return std::nullopt;
  }
  return it->polarity;
}

void KnowledgeBase::check_query(const Query& q) const {
  if (!relation_index(q.relation)) {
    throw UnknownTermError(q.relation);
  }
  if (!entity_index(q.subject)) {
    throw UnknownTermError(q.subject);
  }
  if (!entity_index(q.object)) {
    throw UnknownTermError(q.object);
  }
}

std::string KnowledgeBase::serialize() const {
  std::string out;
  for (const auto& t : triples_) {
    out += t.relation;
    out += '\t';
    out += t.subject;
    out += '\t';
    out += t.object;
    out += '\t';
    out += t.polarity == Polarity::Positive ? '+' : '-';
    out += '\n';
  }
  return out;
}

std::string KnowledgeBase::digest() const {
  const std::string text = serialize();
  std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), md.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(md.size() * 2);
  for (unsigned char byte : md) {
    hex += kHex[byte >> 4];
    hex += kHex[byte & 0xf];
  }
  return hex;
}

KnowledgeBase parse_kb(std::string_view text) {
  std::vector<SignedTriple> triples;
  std::set<Query> seen;
  std::set<std::string> entity_names;
  std::set<std::string> relation_names;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty() || line.front() == '#' ||
        std::all_of(line.begin(), line.end(), [](char c) { return is_space(c); })) {
      continue;
    }

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) {
        break;
      }
      start = tab + 1;
    }
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    }
    Polarity polarity;
    if (fields[3] == "+") {
      polarity = Polarity::Positive;
    } else if (fields[3] == "-") {
      polarity = Polarity::Negative;
    } else {
      throw ParseError(line_no, "polarity must be '+' or '-', got '" + std::string(fields[3]) + "'");
    }
    SignedTriple t{std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), polarity};
    try {
      validate_term(t.relation);
      validate_term(t.subject);
      validate_term(t.object);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (entity_names.contains(t.relation)) {
      throw ParseError(line_no, "'" + t.relation + "' already used as an entity");
    }
    for (const auto* e : {&t.subject, &t.object}) {
      if (relation_names.contains(*e)) {
        throw ParseError(line_no, "'" + *e + "' already used as a relation");
      }
    }
    relation_names.insert(t.relation);
    entity_names.insert(t.subject);
    entity_names.insert(t.object);
    if (!seen.insert(t.query()).second) {
      auto prior = std::find_if(triples.begin(), triples.end(),
                                [&](const SignedTriple& o) { return o.query() == t.query(); });
      if (prior->polarity == t.polarity) {
        throw DuplicateError("line " + std::to_string(line_no) + ": duplicate triple " + describe(t));
      }
      throw ContradictionError("line " + std::to_string(line_no) + ": contradiction: " + describe(t) +
                               " asserted both + and -");
    }
    triples.push_back(std::move(t));
  }
  return KnowledgeBase(std::move(triples));
}

KnowledgeBase load_kb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open KB file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kb(buf.str());
}

std::vector<Query> unstated_queries(const KnowledgeBase& kb, UnstatedOptions opts) {
  std::vector<Query> out;
  for (const auto& r : kb.relations()) {
    for (const auto& s : kb.entities()) {
      for (const auto& o : kb.entities()) {
        if (!opts.include_self_pairs && s == o) {
          continue;
        }
        Query q{r, s, o};
        if (!kb.lookup(q)) {
          out.push_back(std::move(q));
        }
      }
    }
  }
  return out;
}

Truth assertion_oracle(const KnowledgeBase& kb, const Query& q) {
  kb.check_query(q);
  auto p = kb.lookup(q);
  if (!p) {
    return Truth::Unknown;
  }
  return *p == Polarity::Positive ? Truth::True : Truth::False;
}

}  // namespace ekb
