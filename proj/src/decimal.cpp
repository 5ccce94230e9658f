#include "storm_audit/decimal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace storm_audit {

namespace {

Decimal::Coefficient ten_to(std::uint32_t n) {
    Decimal::Coefficient result = 1;
    // repeated squaring keeps huge shifts cheap
    Decimal::Coefficient base = 10;
    while (n != 0) {
        if (n & 1U) result *= base;
        base *= base;
        n >>= 1U;
    }
    return result;
}

// Brings both coefficients to the smaller exponent.
std::int32_t align(Decimal::Coefficient& a, std::int32_t ea, Decimal::Coefficient& b, std::int32_t eb) {
    if (ea > eb) {
        a *= ten_to(static_cast<std::uint32_t>(ea - eb));
        return eb;
    }
    if (eb > ea) {
        b *= ten_to(static_cast<std::uint32_t>(eb - ea));
    }
    return ea;
}

} // namespace

Decimal::Decimal(std::int64_t value) : coefficient_(value) { normalize(); }

Decimal::Decimal(Coefficient coefficient, std::int32_t exponent)
    : coefficient_(std::move(coefficient)), exponent_(exponent) {
    normalize();
}

void Decimal::normalize() {
    if (coefficient_.is_zero()) {
        exponent_ = 0;
        return;
    }
    while (true) {
        Coefficient q;
        Coefficient r;
        boost::multiprecision::divide_qr(coefficient_, Coefficient(10), q, r);
        if (!r.is_zero()) break;
        coefficient_ = std::move(q);
        ++exponent_;
    }
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
    bool negative = false;
    if (!text.empty() && text.front() == '-') {
        negative = true;
        text.remove_prefix(1);
    }
    if (text.empty()) return std::nullopt;

    std::string digits;
    digits.reserve(text.size());
    std::int32_t fraction_digits = 0;
    bool seen_point = false;
    for (char c : text) {
        if (c == '.') {
            if (seen_point) return std::nullopt;
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            if (seen_point) ++fraction_digits;
        } else {
            return std::nullopt;
        }
    }
    if (digits.empty()) return std::nullopt;

    // strip leading zeros so the cpp_int string ctor never sees octal
    auto first = digits.find_first_not_of('0');
    Coefficient coefficient = first == std::string::npos ? Coefficient(0) : Coefficient(digits.substr(first));
    if (negative) coefficient = -coefficient;
    return Decimal(std::move(coefficient), -fraction_digits);
}

Decimal Decimal::pow10(std::int32_t exponent) { return Decimal(Coefficient(1), exponent); }

std::string Decimal::to_string() const {
    if (coefficient_.is_zero()) return "0";
    bool negative = coefficient_.sign() < 0;
    std::string digits = (negative ? Coefficient(-coefficient_) : coefficient_).str();

    std::string out;
    if (exponent_ >= 0) {
        out = digits;
        out.append(static_cast<std::size_t>(exponent_), '0');
    } else {
        auto shift = static_cast<std::size_t>(-exponent_);
        if (digits.size() <= shift) {
            out = "0.";
            out.append(shift - digits.size(), '0');
            out += digits;
        } else {
            out = digits.substr(0, digits.size() - shift);
            out += '.';
            out += digits.substr(digits.size() - shift);
        }
    }
    return negative ? "-" + out : out;
}

double Decimal::to_double() const {
    // the string round-trip gives the correctly rounded binary value
    return std::stod(to_string());
}

Decimal Decimal::scaled_by_pow10(std::int32_t exponent) const {
    if (is_zero()) return *this;
    Decimal out = *this;
    out.exponent_ += exponent;
    return out;
}

Decimal& Decimal::operator+=(const Decimal& rhs) {
    if (rhs.is_zero()) return *this;
    if (is_zero()) return *this = rhs;
    Coefficient b = rhs.coefficient_;
    exponent_ = align(coefficient_, exponent_, b, rhs.exponent_);
    coefficient_ += b;
    normalize();
    return *this;
}

Decimal& Decimal::operator-=(const Decimal& rhs) {
    Decimal negated = rhs;
    negated.coefficient_ = -negated.coefficient_;
    return *this += negated;
}

Decimal operator*(const Decimal& lhs, const Decimal& rhs) {
    return Decimal(lhs.coefficient_ * rhs.coefficient_, lhs.exponent_ + rhs.exponent_);
}

std::strong_ordering operator<=>(const Decimal& lhs, const Decimal& rhs) {
    int ls = lhs.coefficient_.sign();
    int rs = rhs.coefficient_.sign();
    if (ls != rs) return ls <=> rs;
    if (lhs.exponent_ == rhs.exponent_) {
        int c = lhs.coefficient_.compare(rhs.coefficient_);
        return c <=> 0;
    }
    Decimal::Coefficient a = lhs.coefficient_;
    Decimal::Coefficient b = rhs.coefficient_;
    align(a, lhs.exponent_, b, rhs.exponent_);
    return a.compare(b) <=> 0;
}

} // namespace storm_audit
