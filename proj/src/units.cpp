#include "optomech/units.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace optomech {

namespace {

// Splits "a*b*c" into factors, trimming whitespace.
std::vector<std::string> split_factors(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '*') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace

void Unit::add_symbol(const std::string& sym, int power) {
  if (sym.empty() || sym == "1") return;
  for (char c : sym) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
      throw unit_error("bad unit symbol: '" + sym + "'");
    }
  }
  auto it = exponents_.find(sym);
  if (it == exponents_.end()) {
    if (power != 0) exponents_[sym] = power;
  } else {
    it->second += power;
    if (it->second == 0) exponents_.erase(it);
  }
}

Unit Unit::parse(const std::string& text) {
  Unit u;
  auto slash = text.find('/');
  std::string num = text.substr(0, slash);
  std::string den = slash == std::string::npos ? "" : text.substr(slash + 1);
  if (den.find('/') != std::string::npos) {
    throw unit_error("only one '/' allowed in unit: '" + text + "'");
  }
  for (const auto& f : split_factors(num)) u.add_symbol(f, +1);
  if (!den.empty()) {
    for (const auto& f : split_factors(den)) u.add_symbol(f, -1);
  }
  return u;
}

Unit Unit::operator*(const Unit& other) const {
  Unit out = *this;
  for (const auto& [sym, p] : other.exponents_) out.add_symbol(sym, p);
  return out;
}

Unit Unit::operator/(const Unit& other) const {
  Unit out = *this;
  for (const auto& [sym, p] : other.exponents_) out.add_symbol(sym, -p);
  return out;
}

std::string Unit::str() const {
  if (exponents_.empty()) return "1";
  std::ostringstream num, den;
  bool have_num = false, have_den = false;
  for (const auto& [sym, p] : exponents_) {
    if (p > 0) {
      if (have_num) num << "*";
      num << sym;
      if (p > 1) num << "^" << p;
      have_num = true;
    } else {
      if (have_den) den << "*";
      den << sym;
      if (p < -1) den << "^" << -p;
      have_den = true;
    }
  }
  std::string out = have_num ? num.str() : "1";
  if (have_den) out += "/" + den.str();
  return out;
}

} // namespace optomech
