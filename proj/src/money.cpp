#include "gamelab/money.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gamelab/errors.hpp"

namespace gamelab {

Dollars Dollars::from_double(double dollars) {
  if (!std::isfinite(dollars)) throw DomainError("non-finite dollar amount");
  return Dollars(static_cast<std::int64_t>(std::llround(dollars * 100.0)));
}

Dollars Dollars::parse(std::string_view text) {
  auto fail = [&] { return DomainError("malformed dollar amount '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  std::size_t i = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  std::int64_t whole = 0;
  std::size_t digits = 0;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++digits) {
    whole = whole * 10 + (text[i] - '0');
    if (whole > 1'000'000'000'000LL) throw fail();
  }
  std::int64_t frac = 0;
  std::size_t frac_digits = 0;
  bool round_up = false;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++frac_digits) {
      if (frac_digits < 2) {
        frac = frac * 10 + (text[i] - '0');
      } else if (frac_digits == 2) {
        round_up = text[i] >= '5';
      }
    }
  }
  if (i != text.size() || (digits == 0 && frac_digits == 0)) throw fail();
  if (frac_digits == 1) frac *= 10;
  std::int64_t cents = whole * 100 + frac + (round_up ? 1 : 0);
  return Dollars(negative ? -cents : cents);
}

std::string Dollars::str() const {
  const std::int64_t mag = std::llabs(cents_);
  char buf[48];
  if (mag % 100 == 0) {
    std::snprintf(buf, sizeof buf, "%s%lld", cents_ < 0 ? "-" : "", static_cast<long long>(mag / 100));
  } else {
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents_ < 0 ? "-" : "",
                  static_cast<long long>(mag / 100), static_cast<long long>(mag % 100));
  }
  return buf;
}

}  // namespace gamelab
