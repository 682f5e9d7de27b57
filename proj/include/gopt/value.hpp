#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gopt {

class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

// A property value stored on a vertex or edge, or produced by an
// expression. Lists are homogeneous; comparisons across variants throw.
class PropertyValue {
 public:
  using List = std::vector<PropertyValue>;
  enum class Kind { Int, Float, String, Bool, ListKind };

  PropertyValue() : data_(int64_t{0}) {}
  explicit PropertyValue(int64_t v) : data_(v) {}
  explicit PropertyValue(double v) : data_(v) {}
  explicit PropertyValue(std::string v) : data_(std::move(v)) {}
  explicit PropertyValue(bool v) : data_(v) {}
  explicit PropertyValue(List v);

  Kind kind() const { return static_cast<Kind>(data_.index()); }

  int64_t as_int() const { return get<int64_t>("integer"); }
  double as_float() const { return get<double>("float"); }
  const std::string& as_string() const { return get<std::string>("string"); }
  bool as_bool() const { return get<bool>("boolean"); }
  const List& as_list() const { return get<List>("list"); }

  bool operator==(const PropertyValue& o) const { return data_ == o.data_; }
  bool operator!=(const PropertyValue& o) const { return !(*this == o); }

  // Three-way comparison within one variant; throws EvalError otherwise.
  int compare(const PropertyValue& o) const;

  std::string to_string() const;

 private:
  template <typename T>
  const T& get(const char* name) const {
    if (const T* p = std::get_if<T>(&data_)) return *p;
    throw EvalError(std::string("value is not of ") + name + " kind");
  }

  std::variant<int64_t, double, std::string, bool, List> data_;
};

using PropertyMap = std::map<std::string, PropertyValue>;

const char* to_string(PropertyValue::Kind k);
PropertyValue::Kind value_kind_from_string(const std::string& s);

}  // namespace gopt
