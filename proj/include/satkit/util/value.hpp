#ifndef SATKIT_UTIL_VALUE_HPP
#define SATKIT_UTIL_VALUE_HPP

#include <string>
#include <variant>

#include "satkit/util/rational.hpp"

namespace satkit {

/// A concrete value assigned to a variable or produced by a query:
/// an exact rational, a boolean, a symbol (enum member), or a symbol pair.
class Value {
 public:
  struct SymPair {
    std::string first, second;
    bool operator==(const SymPair& o) const = default;
  };

  Value() : data_(Rat(0)) {}
  explicit Value(Rat r) : data_(std::move(r)) {}
  explicit Value(bool b) : data_(b) {}
  static Value sym(std::string s) {
    Value v;
    v.data_ = Sym{std::move(s)};
    return v;
  }
  static Value pair(std::string a, std::string b) {
    Value v;
    v.data_ = SymPair{std::move(a), std::move(b)};
    return v;
  }

  bool is_rat() const { return std::holds_alternative<Rat>(data_); }
  bool is_bool() const { return std::holds_alternative<bool>(data_); }
  bool is_sym() const { return std::holds_alternative<Sym>(data_); }
  bool is_pair() const { return std::holds_alternative<SymPair>(data_); }

  const Rat& as_rat() const { return std::get<Rat>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  const std::string& as_sym() const { return std::get<Sym>(data_).name; }
  const SymPair& as_pair() const { return std::get<SymPair>(data_); }

  bool operator==(const Value& o) const { return data_ == o.data_; }
  bool operator!=(const Value& o) const { return !(*this == o); }

  std::string str() const {
    if (is_rat()) return rat_to_string(as_rat());
    if (is_bool()) return as_bool() ? "True" : "False";
    if (is_sym()) return as_sym();
    const auto& p = as_pair();
    return "(" + p.first + ", " + p.second + ")";
  }

 private:
  struct Sym {
    std::string name;
    bool operator==(const Sym& o) const = default;
  };
  std::variant<Rat, bool, Sym, SymPair> data_;
};

}  // namespace satkit

#endif  // SATKIT_UTIL_VALUE_HPP
