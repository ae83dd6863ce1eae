#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace cslab {

using Vector = std::vector<double>;
using CVector = std::vector<std::complex<double>>;

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline double norm2(const CVector& a) {
    double s = 0.0;
    for (const auto& v : a) s += std::norm(v);
    return std::sqrt(s);
}

inline double norm1(const Vector& a) {
    double s = 0.0;
    for (double v : a) s += std::abs(v);
    return s;
}

inline double norm_inf(const Vector& a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

inline double norm_inf(const CVector& a) {
    double s = 0.0;
    for (const auto& v : a) s = std::max(s, std::abs(v));
    return s;
}

// Locale-independent shortest round-trip formatting; every CSV writer goes
// through here so repeated runs are byte-identical.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace cslab
