#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace conecount {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

using IntVec = std::vector<BigInt>;
using RatMatrix = std::vector<std::vector<Rational>>;

// Accepts "p/q", "p", or a finite decimal such as "-0.125".
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);

BigInt lcm(const BigInt& a, const BigInt& b);
BigInt vector_gcd(const IntVec& v);

}  // namespace conecount
