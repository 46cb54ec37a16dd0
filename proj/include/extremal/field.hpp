#pragma once

#include <array>
#include <cmath>

#include "extremal/core.hpp"

namespace extremal {

/// Per-pixel unit surface normals under orthographic projection along -z.
/// The view vector is (0,0,1); visible surfaces have a non-negative z
/// component everywhere (slant never exceeds pi/2).
struct normal_field {
  int width = 0;
  int height = 0;
  double spacing = 1.0;
  std::vector<vec3> normals;

  normal_field() = default;
  normal_field(int w, int h, double sp = 1.0)
      : width(w), height(h), spacing(sp), normals(size_t(w) * size_t(h), vec3{0, 0, 1}) {}

  size_t idx(int x, int y) const { return size_t(y) * size_t(width) + size_t(x); }
  vec3& at(int x, int y) { return normals[idx(x, y)]; }
  vec3 at(int x, int y) const { return normals[idx(x, y)]; }

  void validate() const {
    if (width < 3 || height < 3)
      throw validation_error("normal_field requires width and height >= 3");
    for (const vec3& n : normals) {
      if (std::abs(n.norm() - 1.0) > 1e-9)
        throw validation_error("normal_field vector is not unit length");
      if (n.z < 0.0)
        throw validation_error("normal_field vector faces away from the viewer");
    }
  }
};

enum class render_kind { lambertian, specular, glass_texture };

/// Rendering function parameters: the image is a pointwise function of the
/// surface normal, I(x,y) = F(N(x,y)).
struct render_spec {
  render_kind kind = render_kind::lambertian;
  vec3 light{0.0, 0.0, 1.0};
  double ambient = 0.0;
  double shininess = 32.0;     // specular only
  uint64_t texture_seed = 1;   // glass texture only

  void validate() const {
    if (std::abs(light.norm() - 1.0) > 1e-9)
      throw validation_error("render_spec light must be a unit vector");
    if (light.z <= 0.0)
      throw validation_error("render_spec light must be frontal (positive z)");
    if (ambient < 0.0 || ambient > 1.0)
      throw validation_error("render_spec ambient must lie in [0,1]");
    if (kind == render_kind::specular && !(shininess > 0.0))
      throw validation_error("render_spec shininess must be > 0");
  }
};

/// Central-difference gradient at an interior pixel, in world units.
inline vec2 gradient(const scalar_field& f, int x, int y) {
  if (!f.is_interior(x, y))
    throw validation_error("gradient requires an interior pixel");
  double gx = (f.at(x + 1, y) - f.at(x - 1, y)) / (2.0 * f.spacing);
  double gy = (f.at(x, y + 1) - f.at(x, y - 1)) / (2.0 * f.spacing);
  return {gx, gy};
}

struct sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
};

/// 5-point second derivatives plus the cross-difference mixed term.
/// Exact on polynomials of degree <= 2 (spacing 1). Symmetric by construction.
inline sym2 hessian(const scalar_field& f, int x, int y) {
  if (!f.is_interior(x, y))
    throw validation_error("hessian requires an interior pixel");
  double s2 = f.spacing * f.spacing;
  sym2 h;
  h.xx = (f.at(x + 1, y) - 2.0 * f.at(x, y) + f.at(x - 1, y)) / s2;
  h.yy = (f.at(x, y + 1) - 2.0 * f.at(x, y) + f.at(x, y - 1)) / s2;
  h.xy = (f.at(x + 1, y + 1) - f.at(x + 1, y - 1) - f.at(x - 1, y + 1) + f.at(x - 1, y - 1)) /
         (4.0 * s2);
  return h;
}

/// Normals of the graph surface z(x,y) viewed along -z: N ~ (-z_x, -z_y, 1).
/// Boundary pixels copy the nearest interior value.
inline normal_field normals_from_height(const scalar_field& z) {
  z.validate();
  normal_field n(z.width, z.height, z.spacing);
  for (int y = 1; y < z.height - 1; ++y)
    for (int x = 1; x < z.width - 1; ++x) {
      vec2 g = gradient(z, x, y);
      n.at(x, y) = vec3{-g.x, -g.y, 1.0}.normalized();
    }
  for (int y = 0; y < z.height; ++y)
    for (int x = 0; x < z.width; ++x) {
      int cx = std::clamp(x, 1, z.width - 2);
      int cy = std::clamp(y, 1, z.height - 2);
      if (cx != x || cy != y) n.at(x, y) = n.at(cx, cy);
    }
  return n;
}

/// Tilt is reported as this sentinel wherever slant is below the degeneracy
/// threshold; the azimuth of a near-frontal normal is numerical noise.
inline constexpr double tilt_undefined = -4.0;
inline constexpr double tilt_degeneracy_threshold = 1e-6;

inline bool is_tilt_defined(double tilt) { return tilt >= -pi && tilt <= pi; }

/// Slant = polar angle from the view axis, in [0, pi/2].
/// Tilt = azimuth of the normal's image-plane projection, in (-pi, pi].
inline std::pair<scalar_field, scalar_field> slant_tilt(const normal_field& n) {
  scalar_field slant(n.width, n.height, 0.0, n.spacing);
  scalar_field tilt(n.width, n.height, 0.0, n.spacing);
  for (int y = 0; y < n.height; ++y)
    for (int x = 0; x < n.width; ++x) {
      vec3 v = n.at(x, y);
      double s = std::acos(std::clamp(v.z, 0.0, 1.0));
      slant.at(x, y) = s;
      if (s < tilt_degeneracy_threshold) {
        tilt.at(x, y) = tilt_undefined;
      } else {
        double t = std::atan2(v.y, v.x);
        if (t <= -pi) t = pi;
        tilt.at(x, y) = t;
      }
    }
  return {std::move(slant), std::move(tilt)};
}

/// Rebuild a unit normal from slant/tilt coordinates.
inline vec3 normal_from_slant_tilt(double slant, double tilt) {
  return {std::sin(slant) * std::cos(tilt), std::sin(slant) * std::sin(tilt),
          std::cos(slant)};
}

namespace detail {

inline void splat_dot(scalar_field& img, double cx, double cy, double value) {
  // bilinear splat over the four surrounding pixels
  int x0 = int(std::floor(cx)), y0 = int(std::floor(cy));
  double fx = cx - x0, fy = cy - y0;
  const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const int dx[4] = {0, 1, 0, 1}, dy[4] = {0, 0, 1, 1};
  for (int k = 0; k < 4; ++k) {
    int x = x0 + dx[k], y = y0 + dy[k];
    if (img.in_bounds(x, y)) img.at(x, y) = std::min(1.0, img.at(x, y) + value * w[k]);
  }
}

inline scalar_field render_glass(const normal_field& n, uint64_t seed) {
  // Paired dots offset along the image projection of the surface tangent
  // (perpendicular to the projected normal). Foreshortening makes such
  // pairs run tangent to high-slant rings, which is the cue the flow
  // pipeline reads out. Density is uniform in the image.
  scalar_field img(n.width, n.height, 0.0, n.spacing);
  rng64 rng(seed);
  size_t pairs = size_t(0.04 * double(n.width) * double(n.height));
  const double offset = 2.5;
  for (size_t i = 0; i < pairs; ++i) {
    double px = rng.uniform(1.0, double(n.width - 2));
    double py = rng.uniform(1.0, double(n.height - 2));
    vec3 v = n.at(int(px), int(py));
    vec2 proj{v.x, v.y};
    vec2 dir;
    if (proj.norm() > 1e-6) {
      dir = proj.normalized().perp();
    } else {
      double a = rng.uniform(0.0, 2.0 * pi);
      dir = {std::cos(a), std::sin(a)};
    }
    splat_dot(img, px, py, 1.0);
    splat_dot(img, px + offset * dir.x, py + offset * dir.y, 1.0);
  }
  return img;
}

}  // namespace detail

/// Render an image from a normal field: I(x,y) = F(N(x,y)), clipped to [0,1].
inline scalar_field render(const normal_field& n, const render_spec& spec) {
  spec.validate();
  if (spec.kind == render_kind::glass_texture)
    return detail::render_glass(n, spec.texture_seed);

  scalar_field img(n.width, n.height, 0.0, n.spacing);
  const vec3 view{0.0, 0.0, 1.0};
  for (int y = 0; y < n.height; ++y)
    for (int x = 0; x < n.width; ++x) {
      vec3 v = n.at(x, y);
      double shade = 0.0;
      if (spec.kind == render_kind::lambertian) {
        shade = std::max(0.0, v.dot(spec.light));
      } else {
        vec3 refl = v * (2.0 * v.dot(spec.light)) - spec.light;
        shade = std::pow(std::max(0.0, refl.dot(view)), spec.shininess);
      }
      img.at(x, y) = std::clamp(spec.ambient + (1.0 - spec.ambient) * shade, 0.0, 1.0);
    }
  return img;
}

struct sigmoid_bump_params {
  int size = 256;
  double center_x = 128.0, center_y = 128.0;  // pixels
  double radius = 32.0;                       // pixels
  double height = 24.0;                       // world z units
  double base_tilt = 0.0;                     // radians, base plane slanted along +x
  double softness = 0.0;                      // pixels; 0 selects radius/4
  double spacing = 1.0;
};

/// Height field of a sigmoidal bump on a (possibly slightly bent) base plane:
/// z = tan(base_tilt) * x_world + height * s(r), with s a logistic profile of
/// radial pixel distance. Smooth, with a single interior height maximum.
inline scalar_field gen_sigmoid_bump(const sigmoid_bump_params& p) {
  if (p.size < 8) throw validation_error("sigmoid bump grid too small");
  double w = p.softness > 0.0 ? p.softness : p.radius / 4.0;
  double extent = p.radius + 3.0 * w;
  if (p.center_x - extent < 1.0 || p.center_x + extent > p.size - 2 ||
      p.center_y - extent < 1.0 || p.center_y + extent > p.size - 2)
    throw validation_error("sigmoid bump does not fit inside the grid");
  scalar_field z(p.size, p.size, 0.0, p.spacing);
  double slope = std::tan(p.base_tilt);
  for (int y = 0; y < p.size; ++y)
    for (int x = 0; x < p.size; ++x) {
      double r = std::hypot(x - p.center_x, y - p.center_y);
      double s = 1.0 / (1.0 + std::exp((r - p.radius) / w));
      z.at(x, y) = slope * double(x) * p.spacing + p.height * s;
    }
  return z;
}

/// Band-limited random height field, windowed by a radial quarter-cosine
/// dome so the rim falls off like an occluding contour. Deterministic in
/// the seed; output normalized to [0,1].
inline scalar_field gen_blob(int size, uint64_t seed, int cutoff, double spacing = 1.0) {
  if (size < 8) throw validation_error("blob grid too small");
  if (cutoff < 1) throw validation_error("blob cutoff must be >= 1");
  rng64 rng(seed);
  struct mode {
    double kx, ky, amp, phase;
  };
  std::vector<mode> modes;
  for (int ky = 0; ky <= cutoff; ++ky)
    for (int kx = -cutoff; kx <= cutoff; ++kx) {
      if (ky == 0 && kx <= 0) continue;  // one representative per +/- pair
      double k = std::hypot(double(kx), double(ky));
      if (k > double(cutoff)) continue;
      mode m;
      m.kx = double(kx);
      m.ky = double(ky);
      m.amp = rng.uniform(0.2, 1.0) / k;  // mild red spectrum
      m.phase = rng.uniform(0.0, 2.0 * pi);
      modes.push_back(m);
    }
  scalar_field f(size, size, 0.0, spacing);
  double inv = 2.0 * pi / double(size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double v = 0.0;
      for (const mode& m : modes)
        v += m.amp * std::cos(inv * (m.kx * double(x) + m.ky * double(y)) + m.phase);
      f.at(x, y) = v;
    }
  double lo = f.min_value(), hi = f.max_value();
  double span = hi > lo ? hi - lo : 1.0;
  double cx = 0.5 * double(size - 1), cy = 0.5 * double(size - 1);
  double rmax = 0.5 * double(size) - 2.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double noise = (f.at(x, y) - lo) / span;           // [0,1]
      double r = std::hypot(x - cx, y - cy);
      double window = r >= rmax ? 0.0 : std::cos(0.5 * pi * r / rmax);
      f.at(x, y) = (0.35 + 0.65 * noise) * window;
    }
  lo = f.min_value();
  hi = f.max_value();
  span = hi > lo ? hi - lo : 1.0;
  for (double& v : f.values) v = (v - lo) / span;
  return f;
}

enum class ring_polarity { a, b };

/// Bistable ring stimulus: an intensity image with a bright circular ridge
/// at ring_radius and a dip toward the centre. Polarity b inverts the
/// intensities strictly inside the ring (about max+min of polarity a) and
/// leaves everything outside unchanged, with a 1 px blend band.
inline scalar_field gen_ring_stimulus(int size, double ring_radius, ring_polarity pol,
                                      double spacing = 1.0) {
  if (size < 16) throw validation_error("ring stimulus grid too small");
  if (ring_radius < 6.0 || ring_radius > 0.5 * double(size) - 8.0)
    throw validation_error("ring radius does not fit with margin");
  const double bg = 0.5, ridge_amp = 0.4, dip_amp = 0.4;
  double cx = 0.5 * double(size - 1), cy = 0.5 * double(size - 1);
  double ridge_w = std::max(2.0, ring_radius / 8.0);
  double dip_w = ring_radius / 1.8;
  scalar_field img(size, size, 0.0, spacing);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double r = std::hypot(x - cx, y - cy);
      double dr = r - ring_radius;
      double v = bg + ridge_amp * std::exp(-0.5 * dr * dr / (ridge_w * ridge_w)) -
                 dip_amp * std::exp(-0.5 * r * r / (dip_w * dip_w));
      img.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  if (pol == ring_polarity::a) return img;

  double sum = img.max_value() + img.min_value();
  scalar_field out = img;
  const double blend = 1.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double r = std::hypot(x - cx, y - cy);
      if (r >= ring_radius) continue;
      double inverted = sum - img.at(x, y);
      if (r <= ring_radius - blend) {
        out.at(x, y) = inverted;
      } else {
        double t = (ring_radius - r) / blend;  // 0 at ring, 1 at inner edge
        out.at(x, y) = (1.0 - t) * img.at(x, y) + t * inverted;
      }
    }
  return out;
}

/// Adds i.i.d. uniform noise in [-amplitude, amplitude]; deterministic in seed.
inline scalar_field add_noise(const scalar_field& f, double amplitude, uint64_t seed) {
  if (amplitude < 0.0) throw validation_error("noise amplitude must be >= 0");
  scalar_field out = f;
  if (amplitude == 0.0) return out;
  rng64 rng(seed);
  for (double& v : out.values) v += rng.uniform(-amplitude, amplitude);
  return out;
}

struct cobblestone_params {
  int size = 256;
  int rows = 2, cols = 2;
  double radius = 26.0;
  double height = 20.0;
  double base_tilt = 0.01;
  uint64_t jitter_seed = 7;
  double jitter = 0.08;  // relative height jitter, plus ~2 px centre jitter
  double spacing = 1.0;
};

/// Several sigmoid bumps on a gently tilted base, with seeded irregularity.
inline scalar_field gen_cobblestone(const cobblestone_params& p) {
  if (p.rows < 1 || p.cols < 1) throw validation_error("cobblestone needs >= 1 bump");
  scalar_field z(p.size, p.size, 0.0, p.spacing);
  double slope = std::tan(p.base_tilt);
  for (int y = 0; y < p.size; ++y)
    for (int x = 0; x < p.size; ++x) z.at(x, y) = slope * double(x) * p.spacing;
  rng64 rng(p.jitter_seed);
  double w = p.radius / 4.0;
  for (int r = 0; r < p.rows; ++r)
    for (int c = 0; c < p.cols; ++c) {
      double cx = double(p.size) * (c + 0.5) / double(p.cols) + rng.uniform(-2.0, 2.0);
      double cy = double(p.size) * (r + 0.5) / double(p.rows) + rng.uniform(-2.0, 2.0);
      double h = p.height * (1.0 + p.jitter * rng.uniform(-1.0, 1.0));
      double extent = p.radius + 3.0 * w;
      if (cx - extent < 1 || cx + extent > p.size - 2 || cy - extent < 1 ||
          cy + extent > p.size - 2)
        throw validation_error("cobblestone bump does not fit inside the grid");
      for (int y = 0; y < p.size; ++y)
        for (int x = 0; x < p.size; ++x) {
          double rr = std::hypot(x - cx, y - cy);
          z.at(x, y) += h / (1.0 + std::exp((rr - p.radius) / w));
        }
    }
  return z;
}

}  // namespace extremal
