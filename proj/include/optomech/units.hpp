#ifndef OPTOMECH_UNITS_HPP
#define OPTOMECH_UNITS_HPP

#include <map>
#include <stdexcept>
#include <string>

namespace optomech {

struct unit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimal symbolic unit algebra for transfer-function bookkeeping.
// A Unit is a product of named symbols with integer exponents, e.g.
// "V/N" -> {V: 1, N: -1}. Only multiplication, division and equality are
// needed to check that loop-gain chains are dimensionless.
class Unit {
 public:
  Unit() = default;

  // Parses "V", "W/m", "1", "V/(N*m)"-free simple forms: one optional '/'
  // separating numerator and denominator, '*' between factors.
  static Unit parse(const std::string& text);

  Unit operator*(const Unit& other) const;
  Unit operator/(const Unit& other) const;
  bool operator==(const Unit& other) const { return exponents_ == other.exponents_; }
  bool operator!=(const Unit& other) const { return !(*this == other); }

  bool dimensionless() const { return exponents_.empty(); }
  std::string str() const;

 private:
  void add_symbol(const std::string& sym, int power);
  std::map<std::string, int> exponents_;
};

} // namespace optomech

#endif
