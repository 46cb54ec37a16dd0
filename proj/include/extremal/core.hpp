#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace extremal {

struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

struct vec2 {
  double x = 0.0, y = 0.0;

  vec2 operator+(vec2 o) const { return {x + o.x, y + o.y}; }
  vec2 operator-(vec2 o) const { return {x - o.x, y - o.y}; }
  vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(vec2 o) const { return x * o.x + y * o.y; }
  double cross(vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? vec2{x / n, y / n} : vec2{0.0, 0.0};
  }
  vec2 perp() const { return {-y, x}; }
};

struct vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  vec3 operator+(vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  vec3 operator-(vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  vec3 cross(vec3 o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  vec3 normalized() const {
    double n = norm();
    if (n <= 0.0) throw validation_error("cannot normalize zero vector");
    return {x / n, y / n, z / n};
  }
};

struct pixel {
  int x = 0, y = 0;
  bool operator==(const pixel&) const = default;
  auto operator<=>(const pixel&) const = default;
};

/// Uniform 2D grid of real values, row-major. Interpreted as height,
/// slant, tilt, or intensity depending on context.
struct scalar_field {
  int width = 0;
  int height = 0;
  double spacing = 1.0;
  std::vector<double> values;

  scalar_field() = default;
  scalar_field(int w, int h, double fill = 0.0, double sp = 1.0)
      : width(w), height(h), spacing(sp), values(size_t(w) * size_t(h), fill) {}

  size_t idx(int x, int y) const { return size_t(y) * size_t(width) + size_t(x); }
  double& at(int x, int y) { return values[idx(x, y)]; }
  double at(int x, int y) const { return values[idx(x, y)]; }
  pixel coords(size_t i) const { return {int(i % size_t(width)), int(i / size_t(width))}; }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  bool is_interior(int x, int y) const {
    return x >= 1 && x < width - 1 && y >= 1 && y < height - 1;
  }
  size_t size() const { return values.size(); }

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_value() const { return *std::max_element(values.begin(), values.end()); }
  double range() const { return max_value() - min_value(); }

  void validate() const {
    if (width < 3 || height < 3)
      throw validation_error("scalar_field requires width and height >= 3");
    if (!(spacing > 0.0)) throw validation_error("scalar_field spacing must be > 0");
    if (values.size() != size_t(width) * size_t(height))
      throw validation_error("scalar_field value count does not match dimensions");
    for (double v : values)
      if (!std::isfinite(v)) throw validation_error("scalar_field contains non-finite value");
  }

  /// Bilinear sample at continuous pixel coordinates, clamped to the domain.
  double sample(double x, double y) const {
    x = std::clamp(x, 0.0, double(width - 1));
    y = std::clamp(y, 0.0, double(height - 1));
    int x0 = std::min(int(x), width - 2);
    int y0 = std::min(int(y), height - 2);
    if (width == 1) x0 = 0;
    if (height == 1) y0 = 0;
    double fx = x - x0, fy = y - y0;
    double v00 = at(x0, y0), v10 = at(x0 + 1, y0);
    double v01 = at(x0, y0 + 1), v11 = at(x0 + 1, y0 + 1);
    return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
           (1 - fx) * fy * v01 + fx * fy * v11;
  }
};

struct grid_mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> on;

  grid_mask() = default;
  grid_mask(int w, int h, bool fill = false)
      : width(w), height(h), on(size_t(w) * size_t(h), fill ? 1 : 0) {}

  size_t idx(int x, int y) const { return size_t(y) * size_t(width) + size_t(x); }
  bool get(int x, int y) const { return on[idx(x, y)] != 0; }
  void set(int x, int y, bool v = true) { on[idx(x, y)] = v ? 1 : 0; }
  size_t count() const { return size_t(std::count(on.begin(), on.end(), uint8_t(1))); }
};

/// Total order on pixels by (value, y, x); breaks all value ties so that
/// discrete fields behave like generic Morse data.
struct tie_break_order {
  const scalar_field* field;

  bool less(pixel a, pixel b) const {
    double va = field->at(a.x, a.y), vb = field->at(b.x, b.y);
    if (va != vb) return va < vb;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  }
  bool greater(pixel a, pixel b) const { return less(b, a); }
};

/// Deterministic 64-bit RNG with a canonical double mapping, so generated
/// data does not depend on the standard library's distribution details.
struct rng64 {
  uint64_t state;

  explicit rng64(uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  uint64_t next() {
    // xorshift64*
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545f4914f6cdd1dULL;
  }
  /// Uniform in [0, 1).
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
};

inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw validation_error("percentile of empty set");
  p = std::clamp(p, 0.0, 100.0);
  std::sort(v.begin(), v.end());
  double pos = p / 100.0 * double(v.size() - 1);
  size_t lo = size_t(pos);
  size_t hi = std::min(lo + 1, v.size() - 1);
  double f = pos - double(lo);
  return v[lo] * (1.0 - f) + v[hi] * f;
}

inline double median(std::vector<double> v) { return percentile(std::move(v), 50.0); }

inline constexpr double pi = 3.14159265358979323846;

}  // namespace extremal
