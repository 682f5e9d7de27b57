#include "gopt/value.hpp"

#include <sstream>

namespace gopt {

PropertyValue::PropertyValue(List v) : data_(std::move(v)) {
  const List& l = std::get<List>(data_);
  for (size_t i = 1; i < l.size(); ++i) {
    if (l[i].kind() != l[0].kind())
      throw EvalError("list values must be homogeneous");
  }
}

int PropertyValue::compare(const PropertyValue& o) const {
  if (kind() != o.kind())
    throw EvalError(std::string("cannot compare ") + gopt::to_string(kind()) +
                    " with " + gopt::to_string(o.kind()));
  auto cmp3 = [](auto a, auto b) { return a < b ? -1 : (b < a ? 1 : 0); };
  switch (kind()) {
    case Kind::Int:
      return cmp3(as_int(), o.as_int());
    case Kind::Float:
      return cmp3(as_float(), o.as_float());
    case Kind::String:
      return as_string().compare(o.as_string()) < 0
                 ? -1
                 : (as_string() == o.as_string() ? 0 : 1);
    case Kind::Bool:
      return cmp3(static_cast<int>(as_bool()), static_cast<int>(o.as_bool()));
    case Kind::ListKind: {
      const List& a = as_list();
      const List& b = o.as_list();
      for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        int c = a[i].compare(b[i]);
        if (c != 0) return c;
      }
      return cmp3(a.size(), b.size());
    }
  }
  return 0;
}

std::string PropertyValue::to_string() const {
  std::ostringstream os;
  switch (kind()) {
    case Kind::Int:
      os << as_int();
      break;
    case Kind::Float:
      os << as_float();
      break;
    case Kind::String:
      os << '\'' << as_string() << '\'';
      break;
    case Kind::Bool:
      os << (as_bool() ? "true" : "false");
      break;
    case Kind::ListKind: {
      os << '[';
      bool first = true;
      for (const auto& v : as_list()) {
        if (!first) os << ", ";
        first = false;
        os << v.to_string();
      }
      os << ']';
      break;
    }
  }
  return os.str();
}

const char* to_string(PropertyValue::Kind k) {
  switch (k) {
    case PropertyValue::Kind::Int:
      return "int";
    case PropertyValue::Kind::Float:
      return "float";
    case PropertyValue::Kind::String:
      return "string";
    case PropertyValue::Kind::Bool:
      return "bool";
    case PropertyValue::Kind::ListKind:
      return "list";
  }
  return "?";
}

PropertyValue::Kind value_kind_from_string(const std::string& s) {
  if (s == "int") return PropertyValue::Kind::Int;
  if (s == "float") return PropertyValue::Kind::Float;
  if (s == "string") return PropertyValue::Kind::String;
  if (s == "bool") return PropertyValue::Kind::Bool;
  if (s == "list") return PropertyValue::Kind::ListKind;
  throw EvalError("unknown value kind: " + s);
}

}  // namespace gopt
