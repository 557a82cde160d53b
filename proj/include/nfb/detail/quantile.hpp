#pragma once

#include <cstddef>
#include <vector>

namespace nfb::detail {

// Linear-interpolation empirical percentile on sorted data (the (n-1)-step
// convention: rank h = (n-1) * p / 100).
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
    double h = (static_cast<double>(sorted.size()) - 1.0) * p / 100.0;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace nfb::detail
