#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgil {

using Vec = std::vector<double>;

// A tensor/vector dimension did not match the consumer's expectation.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A configuration is internally inconsistent (bad flag value, missing loss
// network for a strategy that needs one, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A caller broke a runtime contract (step after done, queried without an
// expert action, ...).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double clamp(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

inline bool all_finite(const Vec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline void require_size(const Vec& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw ShapeError(std::string(what) + ": expected length " + std::to_string(n) +
                         ", got " + std::to_string(v.size()));
    }
}

}  // namespace qgil
