#include "gopt/canonical.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

namespace gopt {

namespace {

std::string constraint_token(const TypeConstraint& c) {
  if (c.is_all()) return "*";
  std::string s;
  for (const auto& n : c.names()) {
    if (!s.empty()) s += ",";
    s += n;
  }
  return s;
}

// Stable fingerprint of a predicate for cache keys.
std::string predicate_token(const ExprPtr& e) {
  return e ? e->to_string() : "";
}

}  // namespace

CanonicalCode encode_pattern(const PatternGraph& pattern,
                             bool include_predicates) {
  const size_t n = pattern.vertices.size();
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < n; ++i) index_of[pattern.vertices[i].alias] = i;

  CanonicalCode best;
  bool first = true;
  do {
    // position[i] = where original vertex i lands under this permutation
    std::vector<size_t> position(n);
    for (size_t i = 0; i < n; ++i) position[perm[i]] = i;

    std::string code;
    code += "V";
    std::vector<std::string> vtokens(n);
    for (size_t i = 0; i < n; ++i) {
      const auto& v = pattern.vertices[perm[i]];
      vtokens[i] = constraint_token(v.types);
      if (include_predicates && v.predicate)
        vtokens[i] += "?" + predicate_token(v.predicate);
    }
    for (const auto& t : vtokens) code += "(" + t + ")";

    std::vector<std::string> etokens;
    for (const auto& e : pattern.edges) {
      size_t a = position[index_of.at(e.src())];
      size_t b = position[index_of.at(e.dst())];
      std::string tok;
      if (e.is_both()) {
        // Unoriented: normalize endpoint order.
        if (a > b) std::swap(a, b);
        tok = "B" + std::to_string(a) + ">" + std::to_string(b);
      } else {
        tok = "D" + std::to_string(a) + ">" + std::to_string(b);
      }
      tok += "[" + constraint_token(e.types) + "]";
      if (include_predicates && e.predicate)
        tok += "?" + predicate_token(e.predicate);
      etokens.push_back(tok);
    }
    std::sort(etokens.begin(), etokens.end());
    code += "E";
    for (const auto& t : etokens) code += t + ";";

    if (first || code < best) {
      best = code;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

CanonicalCode canonicalize(const PatternGraph& pattern) {
  for (const auto& v : pattern.vertices)
    if (!v.types.is_basic())
      throw PatternError("canonicalize requires basic vertex constraints");
  for (const auto& e : pattern.edges)
    if (!e.types.is_basic())
      throw PatternError("canonicalize requires basic edge constraints");
  return encode_pattern(pattern);
}

namespace {
const char kB64[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string code_to_base64(const CanonicalCode& code) {
  std::string out;
  size_t i = 0;
  while (i + 2 < code.size()) {
    uint32_t v = (static_cast<unsigned char>(code[i]) << 16) |
                 (static_cast<unsigned char>(code[i + 1]) << 8) |
                 static_cast<unsigned char>(code[i + 2]);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
    i += 3;
  }
  size_t rest = code.size() - i;
  if (rest == 1) {
    uint32_t v = static_cast<unsigned char>(code[i]) << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    uint32_t v = (static_cast<unsigned char>(code[i]) << 16) |
                 (static_cast<unsigned char>(code[i + 1]) << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

CanonicalCode code_from_base64(const std::string& text) {
  auto val = [](char c) -> int {
    const char* p = std::find(kB64, kB64 + 64, c);
    return p == kB64 + 64 ? -1 : static_cast<int>(p - kB64);
  };
  CanonicalCode out;
  uint32_t buf = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    int v = val(c);
    if (v < 0) throw PatternError("invalid base64 in pattern code");
    buf = (buf << 6) | static_cast<uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((buf >> bits) & 0xff);
    }
  }
  return out;
}

}  // namespace gopt
