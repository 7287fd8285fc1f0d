#include "pbm/geometry.hpp"

#include <numbers>

namespace pbm {

bool point_in_polygon(const Polygon& polygon, Point2d p) noexcept {
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2d& a = polygon[i];
        const Point2d& b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
            inside = !inside;
        }
    }
    return inside;
}

Point2d rotate_about(Point2d p, Point2d center, double degrees) noexcept {
    const double rad = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    return {center.x + c * dx - s * dy, center.y + s * dx + c * dy};
}

double wrap_degrees(double degrees) noexcept {
    double a = std::fmod(degrees, 360.0);
    if (a <= -180.0) {
        a += 360.0;
    } else if (a > 180.0) {
        a -= 360.0;
    }
    return a;
}

}  // namespace pbm
