#pragma once

#include <cmath>
#include <vector>

namespace pbm {

/// Image coordinates: x to the right, y down, pixel (i, j) centered at (i, j).
struct Point2d {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2d&) const = default;
};

/// Integer translation between two pixel grids.
struct PixelOffset {
    int dx = 0;
    int dy = 0;

    bool operator==(const PixelOffset&) const = default;
    PixelOffset operator-() const { return {-dx, -dy}; }
};

using Polygon = std::vector<Point2d>;

/// Even-odd point-in-polygon test with half-open edge handling, so that an
/// axis-aligned rectangle [x0,x1]x[y0,y1] contains exactly the pixel centers
/// with x0 <= x < x1 and y0 <= y < y1.
bool point_in_polygon(const Polygon& polygon, Point2d p) noexcept;

/// Rotates a point about a center by the given angle (degrees, positive
/// toward +y, i.e. clockwise on screen).
Point2d rotate_about(Point2d p, Point2d center, double degrees) noexcept;

/// Maps an angle in degrees into (-180, 180].
double wrap_degrees(double degrees) noexcept;

}  // namespace pbm
