#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace brl {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline Vec2& operator+=(Vec2& a, Vec2 b) { a.x += b.x; a.y += b.y; return a; }
inline Vec2& operator-=(Vec2& a, Vec2 b) { a.x -= b.x; a.y -= b.y; return a; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
// Counterclockwise rotation by +90 degrees.
inline Vec2 rot90(Vec2 a) { return {-a.y, a.x}; }

// Symmetric or general 2x2 matrix with row-major entries.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

inline Vec2 apply(const Mat2& m, Vec2 v) {
  return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}
inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}
inline Mat2 operator*(double s, const Mat2& a) {
  return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
}
inline Mat2 matmul(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
inline double frobenius(const Mat2& a) {
  return std::sqrt(a.a11 * a.a11 + a.a12 * a.a12 + a.a21 * a.a21 + a.a22 * a.a22);
}

inline double sqr(double t) { return t * t; }

// Wrap an angle to [0, 2*pi).
inline double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

// Thread budget for parallel loops; set once from the CLI before running.
void set_thread_count(int n);
int thread_count();

// Runs f(i) for i in [0, n). Work is split into contiguous index blocks so
// that output written by index is identical for every thread count. The
// first exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

// Fixed-order pairwise summation; deterministic independent of threading.
double pairwise_sum(const std::vector<double>& v);

// Shortest-round-trip decimal formatting (17 significant digits).
std::string fmt17(double v);

}  // namespace brl
