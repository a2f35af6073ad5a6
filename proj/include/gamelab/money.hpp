#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace gamelab {

// Dollar amount held as an exact number of cents.
class Dollars {
 public:
  constexpr Dollars() = default;

  static constexpr Dollars from_cents(std::int64_t cents) { return Dollars(cents); }
  static constexpr Dollars whole(std::int64_t dollars) { return Dollars(dollars * 100); }

  // Rounds to the nearest cent.
  static Dollars from_double(double dollars);

  // Accepts "40", "40.5", "40.50", "-3". More than two fractional digits is
  // rounded half away from zero. Throws DomainError on malformed input.
  static Dollars parse(std::string_view text);

  constexpr std::int64_t cents() const { return cents_; }
  constexpr double value() const { return static_cast<double>(cents_) / 100.0; }
  constexpr bool is_whole() const { return cents_ % 100 == 0; }

  // Whole amounts print without a decimal point, others with two decimals.
  std::string str() const;

  constexpr Dollars operator+(Dollars o) const { return Dollars(cents_ + o.cents_); }
  constexpr Dollars operator-(Dollars o) const { return Dollars(cents_ - o.cents_); }
  constexpr Dollars& operator+=(Dollars o) {
    cents_ += o.cents_;
    return *this;
  }
  constexpr auto operator<=>(const Dollars&) const = default;

 private:
  constexpr explicit Dollars(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

}  // namespace gamelab
