#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace storm_audit {

/// Exact non-binary decimal: coefficient * 10^exponent.
///
/// Values are kept normalized (no trailing zeros in the coefficient, zero is
/// always 0e0), so structural equality is value equality. USD amounts flow
/// through the whole pipeline as Decimal and are only rendered as plain
/// decimal strings.
class Decimal {
public:
    using Coefficient = boost::multiprecision::cpp_int;

    Decimal() = default;
    Decimal(std::int64_t value); // NOLINT(google-explicit-constructor)
    Decimal(Coefficient coefficient, std::int32_t exponent);

    /// Parses plain decimal notation: digits with at most one '.', optional
    /// leading '-'. No exponent syntax, no whitespace.
    static std::optional<Decimal> parse(std::string_view text);

    static Decimal pow10(std::int32_t exponent);

    const Coefficient& coefficient() const { return coefficient_; }
    std::int32_t exponent() const { return exponent_; }

    bool is_zero() const { return coefficient_.is_zero(); }
    bool is_negative() const { return coefficient_.sign() < 0; }

    /// Plain notation, never scientific: "115000000000", "123.45", "0".
    std::string to_string() const;
    double to_double() const;

    Decimal scaled_by_pow10(std::int32_t exponent) const;

    Decimal& operator+=(const Decimal& rhs);
    Decimal& operator-=(const Decimal& rhs);
    friend Decimal operator+(Decimal lhs, const Decimal& rhs) { return lhs += rhs; }
    friend Decimal operator-(Decimal lhs, const Decimal& rhs) { return lhs -= rhs; }
    friend Decimal operator*(const Decimal& lhs, const Decimal& rhs);

    friend bool operator==(const Decimal& lhs, const Decimal& rhs) {
        return lhs.exponent_ == rhs.exponent_ && lhs.coefficient_ == rhs.coefficient_;
    }
    friend std::strong_ordering operator<=>(const Decimal& lhs, const Decimal& rhs);

private:
    void normalize();

    Coefficient coefficient_{0};
    std::int32_t exponent_{0};
};

} // namespace storm_audit
