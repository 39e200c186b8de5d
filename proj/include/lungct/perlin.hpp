#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lungct/errors.hpp"
#include "lungct/rng.hpp"
#include "lungct/tensor.hpp"

namespace lungct {

// Gradient-lattice noise parameters. cell_size_px is the lattice spacing of
// the base octave in pixels; each further octave doubles the frequency and
// scales by `persistence`.
struct PerlinParams {
  int cell_size_px = 24;
  int octaves = 3;
  double persistence = 0.5;
  double amplitude = 0.35;
  std::uint64_t seed = 0;

  void validate() const {
    if (cell_size_px < 2) throw validation_error("PerlinParams: cell_size_px must be >= 2");
    if (octaves < 1 || octaves > 8)
      throw validation_error("PerlinParams: octaves must be in [1, 8]");
    if (!(persistence > 0.0 && persistence <= 1.0))
      throw validation_error("PerlinParams: persistence must be in (0, 1]");
    if (!(amplitude > 0.0)) throw validation_error("PerlinParams: amplitude must be > 0");
  }
};

namespace perlin_detail {

// quintic fade 6t^5 - 15t^4 + 10t^3
inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline double lerp(double a, double b, double w) { return a + (b - a) * w; }

// Unit gradient at a lattice vertex, derived from a mixing hash of the
// coordinates: no stored permutation table, reproducible from the seed alone.
inline void gradient2(std::uint64_t seed, std::int64_t ix, std::int64_t iy, double& gx,
                      double& gy) {
  std::uint64_t h = mix64(seed ^ (static_cast<std::uint64_t>(ix) * 0x8da6b343ull));
  h = mix64(h ^ (static_cast<std::uint64_t>(iy) * 0xd8163841ull));
  const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 6.283185307179586476925287;
  gx = std::cos(angle);
  gy = std::sin(angle);
}

inline double dot_grid_gradient2(std::uint64_t seed, std::int64_t ix, std::int64_t iy, double x,
                                 double y) {
  double gx, gy;
  gradient2(seed, ix, iy, gx, gy);
  return gx * (x - static_cast<double>(ix)) + gy * (y - static_cast<double>(iy));
}

// Single-octave 2D sample at lattice-space coordinates (x, y).
inline double sample2(std::uint64_t seed, double x, double y) {
  const auto x0 = static_cast<std::int64_t>(std::floor(x));
  const auto y0 = static_cast<std::int64_t>(std::floor(y));
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double u = fade(fx);
  const double v = fade(fy);
  const double n00 = dot_grid_gradient2(seed, x0, y0, x, y);
  const double n10 = dot_grid_gradient2(seed, x0 + 1, y0, x, y);
  const double n01 = dot_grid_gradient2(seed, x0, y0 + 1, x, y);
  const double n11 = dot_grid_gradient2(seed, x0 + 1, y0 + 1, x, y);
  return lerp(lerp(n00, n10, u), lerp(n01, n11, u), v);
}

// 3D variant used for volumetric phantom textures.
inline void gradient3(std::uint64_t seed, std::int64_t ix, std::int64_t iy, std::int64_t iz,
                      double& gx, double& gy, double& gz) {
  std::uint64_t h = mix64(seed ^ (static_cast<std::uint64_t>(ix) * 0x8da6b343ull));
  h = mix64(h ^ (static_cast<std::uint64_t>(iy) * 0xd8163841ull));
  h = mix64(h ^ (static_cast<std::uint64_t>(iz) * 0xcb1ab31full));
  // uniform direction on the sphere from two hashed uniforms
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  const double w = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
  const double cz = 2.0 * u - 1.0;
  const double r = std::sqrt(std::max(0.0, 1.0 - cz * cz));
  const double angle = w * 6.283185307179586476925287;
  gx = r * std::cos(angle);
  gy = r * std::sin(angle);
  gz = cz;
}

inline double sample3(std::uint64_t seed, double x, double y, double z) {
  const auto x0 = static_cast<std::int64_t>(std::floor(x));
  const auto y0 = static_cast<std::int64_t>(std::floor(y));
  const auto z0 = static_cast<std::int64_t>(std::floor(z));
  const double u = fade(x - static_cast<double>(x0));
  const double v = fade(y - static_cast<double>(y0));
  const double w = fade(z - static_cast<double>(z0));
  double n[2][2][2];
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        double gx, gy, gz;
        gradient3(seed, x0 + dx, y0 + dy, z0 + dz, gx, gy, gz);
        n[dz][dy][dx] = gx * (x - static_cast<double>(x0 + dx)) +
                        gy * (y - static_cast<double>(y0 + dy)) +
                        gz * (z - static_cast<double>(z0 + dz));
      }
  const double a = lerp(lerp(n[0][0][0], n[0][0][1], u), lerp(n[0][1][0], n[0][1][1], u), v);
  const double b = lerp(lerp(n[1][0][0], n[1][0][1], u), lerp(n[1][1][0], n[1][1][1], u), v);
  return lerp(a, b, w);
}

// Multi-octave sum at pixel coordinates, amplitude excluded. Lattice-space
// coordinates are computed as (pixel * 2^k) / cell so that pixels at exact
// multiples of the cell size land on lattice vertices with no rounding error.
inline double fractal2(const PerlinParams& p, int px, int py) {
  double sum = 0.0;
  double gain = 1.0;
  for (int k = 0; k < p.octaves; ++k) {
    const double scale = static_cast<double>(std::int64_t{1} << k);
    const std::uint64_t oct_seed = mix64(p.seed, 0x0c7a0e5ull + static_cast<std::uint64_t>(k));
    sum += gain * sample2(oct_seed, static_cast<double>(px) * scale / p.cell_size_px,
                          static_cast<double>(py) * scale / p.cell_size_px);
    gain *= p.persistence;
  }
  return sum;
}

inline double fractal3(std::uint64_t seed, int octaves, double persistence, double x, double y,
                       double z) {
  double sum = 0.0;
  double gain = 1.0;
  double freq = 1.0;
  for (int k = 0; k < octaves; ++k) {
    const std::uint64_t oct_seed = mix64(seed, 0x3d0c7a0e5ull + static_cast<std::uint64_t>(k));
    sum += gain * sample3(oct_seed, x * freq, y * freq, z * freq);
    gain *= persistence;
    freq *= 2.0;
  }
  return sum;
}

}  // namespace perlin_detail

// 2D fractal gradient noise over a pixel grid. Deterministic in (shape,
// params); single-octave values are exactly 0 at lattice vertices and bounded
// by sqrt(2)/2 in magnitude (before amplitude scaling).
inline Tensor<float> perlin_field(int height, int width, const PerlinParams& p) {
  p.validate();
  if (height < p.cell_size_px || width < p.cell_size_px)
    throw validation_error("perlin_field: image must be at least one cell across");
  Tensor<float> out({height, width});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out(y, x) = static_cast<float>(p.amplitude * perlin_detail::fractal2(p, x, y));
  return out;
}

// ---------------------------------------------------------------------------
// Pseudo-infection synthesis
// ---------------------------------------------------------------------------

// Adds rectified-positive fractal noise inside a randomly placed ellipse
// covering 5-20% of the slice. Returns the noisy slice and the exact applied
// field, so out == clamp(in + applied, 0, 1) and applied >= 0 everywhere.
inline std::pair<Tensor<float>, Tensor<float>> pseudo_infect(const Tensor<float>& slice,
                                                             const PerlinParams& p,
                                                             std::uint64_t region_seed) {
  p.validate();
  if (slice.rank() != 2) throw validation_error("pseudo_infect: expected a 2D slice");
  const int h = slice.dim(0), w = slice.dim(1);

  Rng rng(mix64(mix64(p.seed, 0x9e11u), region_seed));
  const double frac = rng.uniform(0.05, 0.20);
  const double aspect = rng.uniform(0.6, 1.6);
  const double cy = rng.uniform(0.2, 0.8) * h;
  const double cx = rng.uniform(0.2, 0.8) * w;
  const double a = std::sqrt(frac * h * w / (3.14159265358979323846 * aspect));
  const double b = a * aspect;  // semi-axes (x: a, y: b)

  PerlinParams noise = p;
  noise.seed = mix64(p.seed, region_seed);

  Tensor<float> applied({h, w});
  Tensor<float> out = slice;
  for (int y = 0; y < h; ++y) {
    const double dy = (y - cy) / b;
    for (int x = 0; x < w; ++x) {
      const double dx = (x - cx) / a;
      if (dy * dy + dx * dx > 1.0) continue;
      const double n = perlin_detail::fractal2(noise, x, y);
      if (n <= 0.0) continue;
      const float add = static_cast<float>(p.amplitude * n);
      applied(y, x) = add;
      out(y, x) = std::min(1.0f, std::max(0.0f, out(y, x) + add));
    }
  }
  return {std::move(out), std::move(applied)};
}

// Training corpus for the denoising reconstructor: all slices of the given
// stacks, shuffled and split as evenly as possible into a clean half and a
// noised half (odd counts give the noised half the extra slice). Targets are
// the original clean slices for both halves.
struct DenoiserDataset {
  std::vector<Tensor<float>> inputs;
  std::vector<Tensor<float>> targets;
  std::size_t n_clean = 0;  // inputs[0 .. n_clean) are untouched originals
  std::size_t n_noisy = 0;
};

template <class StackRange>
DenoiserDataset build_denoiser_dataset(const StackRange& control_stacks, const PerlinParams& p,
                                       std::uint64_t seed) {
  p.validate();
  std::vector<const Tensor<float>*> sources;
  std::vector<std::pair<int, int>> origin;  // (stack, slice)
  int stack_idx = 0;
  for (const auto& st : control_stacks) {
    for (int z = 0; z < st.slices.dim(0); ++z) origin.emplace_back(stack_idx, z);
    sources.push_back(&st.slices);
    ++stack_idx;
  }
  const std::size_t n = origin.size();
  if (n < 2) throw validation_error("build_denoiser_dataset: need at least 2 slices");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix64(seed, 0x5317ffu));
  rng.shuffle(order);

  const std::size_t n_noisy = (n + 1) / 2;
  const std::size_t n_clean = n - n_noisy;

  auto slice_of = [&](std::size_t flat) {
    const auto [si, z] = origin[flat];
    const Tensor<float>& st = *sources[static_cast<std::size_t>(si)];
    Tensor<float> s({st.dim(1), st.dim(2)});
    std::copy_n(st.data() + static_cast<std::size_t>(z) * s.size(), s.size(), s.data());
    return s;
  };

  DenoiserDataset ds;
  ds.n_clean = n_clean;
  ds.n_noisy = n_noisy;
  ds.inputs.reserve(n);
  ds.targets.reserve(n);
  // clean half first: input == target
  for (std::size_t i = n_noisy; i < n; ++i) {
    Tensor<float> s = slice_of(order[i]);
    ds.inputs.push_back(s);
    ds.targets.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < n_noisy; ++i) {
    Tensor<float> clean = slice_of(order[i]);
    auto [noisy, applied] = pseudo_infect(clean, p, mix64(seed, order[i]));
    (void)applied;
    ds.inputs.push_back(std::move(noisy));
    ds.targets.push_back(std::move(clean));
  }
  return ds;
}

}  // namespace lungct
