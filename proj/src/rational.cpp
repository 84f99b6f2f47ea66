#include "furst/rational.hpp"

#include <algorithm>
#include <cctype>
#include <string_view>

namespace furst {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) {
           return std::isdigit(c) != 0;
         });
}

// Leading zeros are stripped first: cpp_int's string constructor would read
// "0215" as octal.
BigInt digits_to_int(std::string_view s) {
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  return BigInt{std::string(s)};
}

BigInt parse_integer(std::string_view s, const std::string& original) {
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s))
    throw ConfigError("not a rational number: \"" + original + "\"");
  BigInt value = digits_to_int(s);
  return negative ? BigInt(-value) : value;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string_view s = trim(text);
  if (s.empty()) throw ConfigError("empty rational literal");

  if (std::size_t slash = s.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(s.substr(0, slash), text);
    BigInt den = parse_integer(s.substr(slash + 1), text);
    if (den == 0) throw ConfigError("zero denominator in \"" + text + "\"");
    if (den < 0) {  // the rational ctor insists on a positive denominator
      num = -num;
      den = -den;
    }
    return {num, den};
  }

  if (std::size_t dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view head = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    bool negative = false;
    if (!head.empty() && (head.front() == '+' || head.front() == '-')) {
      negative = head.front() == '-';
      head.remove_prefix(1);
    }
    if ((!head.empty() && !all_digits(head)) ||
        (!frac.empty() && !all_digits(frac)) || (head.empty() && frac.empty()))
      throw ConfigError("not a rational number: \"" + text + "\"");
    BigInt num = digits_to_int(std::string(head) + std::string(frac));
    BigInt den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    if (negative) num = -num;
    return {num, den};
  }

  return {parse_integer(s, text), BigInt(1)};
}

}  // namespace furst
