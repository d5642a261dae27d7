#include "csma/rational.hpp"

#include <cctype>

namespace csma {

Rational Rational::parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("Rational::parse: empty string");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::int64_t n = std::stoll(s.substr(0, slash));
        std::int64_t d = std::stoll(s.substr(slash + 1));
        return Rational(n, d);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(std::stoll(s));
    bool neg = s[0] == '-';
    std::string digits = s;
    digits.erase(dot, 1);
    if (neg) digits.erase(0, 1);
    for (char c : digits)
        if (!std::isdigit((unsigned char)c)) throw std::invalid_argument("Rational::parse: bad number " + s);
    std::size_t frac_len = s.size() - dot - 1;
    std::int64_t num = digits.empty() ? 0 : std::stoll(digits);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) {
        if (den > INT64_MAX / 10) throw std::overflow_error("Rational::parse: too many decimals");
        den *= 10;
    }
    return Rational(neg ? -num : num, den);
}

}  // namespace csma
