#pragma once

#include <cmath>

namespace cmrp {

struct Point2D {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2D&) const = default;
};

inline double distance(const Point2D& a, const Point2D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline bool is_finite(const Point2D& p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
}

}  // namespace cmrp
