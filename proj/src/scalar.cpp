#include "freeprod/scalar.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace freeprod {

namespace {
using Int = boost::multiprecision::cpp_int;
}

Rational parse_rational(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    if (auto slash = s.find('/'); slash != std::string::npos) {
        Int num(s.substr(0, slash));
        Int den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
        return Rational(num, den);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        std::string head = s.substr(0, dot);
        std::string tail = s.substr(dot + 1);
        bool negative = !head.empty() && head[0] == '-';
        if (!head.empty() && (head[0] == '-' || head[0] == '+')) head.erase(0, 1);
        if (!tail.empty() && tail.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed decimal literal: " + s);
        if (!head.empty() && head.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed decimal literal: " + s);
        Int ipart = head.empty() ? Int(0) : Int(head);
        Int scale = 1;
        for (std::size_t i = 0; i < tail.size(); ++i) scale *= 10;
        Int frac = tail.empty() ? Int(0) : Int(tail);
        Int num = ipart * scale + frac;
        return Rational(negative ? -num : num, scale);
    }
    return Rational(Int(s));
}

std::string rational_to_string(const Rational& r) {
    const Int num = boost::multiprecision::numerator(r);
    const Int den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

}  // namespace freeprod
