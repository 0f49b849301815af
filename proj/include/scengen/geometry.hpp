#ifndef SCENGEN_GEOMETRY_HPP
#define SCENGEN_GEOMETRY_HPP

#include <cmath>

namespace scengen {

/// 3D point/vector in meters. y is elevation; ground-plane motion uses (x, z).
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }

/// Euclidean distance between two 3D points.
inline double euclid(const Vec3& p1, const Vec3& p2)
{
    const double dx = p1.x - p2.x;
    const double dy = p1.y - p2.y;
    const double dz = p1.z - p2.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Ground-plane distance, elevation ignored.
inline double dist_xz(const Vec3& p1, const Vec3& p2)
{
    return std::hypot(p1.x - p2.x, p1.z - p2.z);
}

inline double norm_xz(const Vec3& v) { return std::hypot(v.x, v.z); }

} // namespace scengen

#endif
