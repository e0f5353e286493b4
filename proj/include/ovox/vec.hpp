#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace ovox {

/// Small fixed-size 3-vector. Arithmetic is component-wise unless noted.
template <typename T>
struct Vec3 {
    T x{}, y{}, z{};

    constexpr Vec3() = default;
    constexpr Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}
    template <typename U>
    constexpr explicit Vec3(const Vec3<U>& o) : x(T(o.x)), y(T(o.y)), z(T(o.z)) {}

    constexpr T& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr const T& operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(T s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(T s) { x *= s; y *= s; z *= s; return *this; }

    constexpr bool operator==(const Vec3&) const = default;
};

template <typename T>
constexpr Vec3<T> operator*(T s, const Vec3<T>& v) { return v * s; }

template <typename T>
constexpr T dot(const Vec3<T>& a, const Vec3<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <typename T>
constexpr Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T>
constexpr T length_squared(const Vec3<T>& v) { return dot(v, v); }

template <typename T>
T length(const Vec3<T>& v) { return std::sqrt(dot(v, v)); }

template <typename T>
Vec3<T> normalized(const Vec3<T>& v) {
    const T len = length(v);
    return len > T(0) ? v / len : Vec3<T>{};
}

template <typename T>
constexpr Vec3<T> cwise_min(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.x < b.x ? a.x : b.x, a.y < b.y ? a.y : b.y, a.z < b.z ? a.z : b.z};
}

template <typename T>
constexpr Vec3<T> cwise_max(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.x > b.x ? a.x : b.x, a.y > b.y ? a.y : b.y, a.z > b.z ? a.z : b.z};
}

using Vec3d = Vec3<double>;
using Vec3f = Vec3<float>;

struct Vec2d {
    double u{}, v{};
    constexpr Vec2d operator+(const Vec2d& o) const { return {u + o.u, v + o.v}; }
    constexpr Vec2d operator-(const Vec2d& o) const { return {u - o.u, v - o.v}; }
    constexpr Vec2d operator*(double s) const { return {u * s, v * s}; }
    constexpr bool operator==(const Vec2d&) const = default;
};

/// Axis-aligned box, closed on both ends.
template <typename T>
struct Aabb {
    Vec3<T> lo{}, hi{};

    static constexpr Aabb empty() {
        constexpr T big = std::numeric_limits<T>::max();
        return {{big, big, big}, {-big, -big, -big}};
    }
    constexpr void extend(const Vec3<T>& p) { lo = cwise_min(lo, p); hi = cwise_max(hi, p); }
    constexpr void extend(const Aabb& b) { lo = cwise_min(lo, b.lo); hi = cwise_max(hi, b.hi); }
    constexpr bool valid() const { return lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z; }
    constexpr Vec3<T> center() const { return (lo + hi) * T(0.5); }
    constexpr Vec3<T> extent() const { return hi - lo; }

    /// Squared distance from p to the box; 0 inside.
    constexpr T distance_squared(const Vec3<T>& p) const {
        T d = 0;
        for (std::size_t a = 0; a < 3; ++a) {
            T g = 0;
            if (p[a] < lo[a]) g = lo[a] - p[a];
            else if (p[a] > hi[a]) g = p[a] - hi[a];
            d += g * g;
        }
        return d;
    }
};

using Aabbd = Aabb<double>;

}  // namespace ovox
