#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>

#include "lungct/errors.hpp"
#include "lungct/volume.hpp"

namespace lungct {

struct PreprocessOptions {
  std::array<double, 3> target_spacing_mm{1.0, 1.0, 1.0};
  int inplane = 240;       // square in-plane size after resize
  int standard_depth = 50; // depth of StandardVolume / InfectionVolume
};

namespace detail {

inline int output_extent(int n, double spacing, double target) {
  // round-half-away-from-zero, clamped to >= 1
  const double extent = static_cast<double>(n) * spacing / target;
  return std::max(1, static_cast<int>(std::llround(extent)));
}

// Trilinear sample at fractional index position (pz, py, px), clamped to the
// grid. Exact on affine fields and exact at integral positions.
template <class T>
inline float sample_trilinear(const Tensor<T>& v, double pz, double py, double px) {
  const int nz = v.dim(0), ny = v.dim(1), nx = v.dim(2);
  pz = std::clamp(pz, 0.0, static_cast<double>(nz - 1));
  py = std::clamp(py, 0.0, static_cast<double>(ny - 1));
  px = std::clamp(px, 0.0, static_cast<double>(nx - 1));
  const int z0 = static_cast<int>(pz), y0 = static_cast<int>(py), x0 = static_cast<int>(px);
  const int z1 = std::min(z0 + 1, nz - 1), y1 = std::min(y0 + 1, ny - 1),
            x1 = std::min(x0 + 1, nx - 1);
  const double fz = pz - z0, fy = py - y0, fx = px - x0;
  if (fz == 0.0 && fy == 0.0 && fx == 0.0) return static_cast<float>(v(z0, y0, x0));
  const double c000 = v(z0, y0, x0), c001 = v(z0, y0, x1);
  const double c010 = v(z0, y1, x0), c011 = v(z0, y1, x1);
  const double c100 = v(z1, y0, x0), c101 = v(z1, y0, x1);
  const double c110 = v(z1, y1, x0), c111 = v(z1, y1, x1);
  const double c00 = c000 + (c001 - c000) * fx;
  const double c01 = c010 + (c011 - c010) * fx;
  const double c10 = c100 + (c101 - c100) * fx;
  const double c11 = c110 + (c111 - c110) * fx;
  const double c0 = c00 + (c01 - c00) * fy;
  const double c1 = c10 + (c11 - c10) * fy;
  return static_cast<float>(c0 + (c1 - c0) * fz);
}

template <class T>
inline float sample_bilinear(const Tensor<T>& img, int z, double py, double px) {
  const int ny = img.dim(1), nx = img.dim(2);
  py = std::clamp(py, 0.0, static_cast<double>(ny - 1));
  px = std::clamp(px, 0.0, static_cast<double>(nx - 1));
  const int y0 = static_cast<int>(py), x0 = static_cast<int>(px);
  const int y1 = std::min(y0 + 1, ny - 1), x1 = std::min(x0 + 1, nx - 1);
  const double fy = py - y0, fx = px - x0;
  if (fy == 0.0 && fx == 0.0) return static_cast<float>(img(z, y0, x0));
  const double a = img(z, y0, x0) + (img(z, y0, x1) - img(z, y0, x0)) * fx;
  const double b = img(z, y1, x0) + (img(z, y1, x1) - img(z, y1, x0)) * fx;
  return static_cast<float>(a + (b - a) * fy);
}

template <class T>
Tensor<float> resample_grid(const Tensor<T>& voxels, const std::array<double, 3>& spacing,
                            const std::array<double, 3>& target) {
  for (double s : target)
    if (!(s > 0.0) || !std::isfinite(s))
      throw validation_error("resample: target spacing must be positive and finite");
  const int nz = voxels.dim(0), ny = voxels.dim(1), nx = voxels.dim(2);
  const int oz = output_extent(nz, spacing[0], target[0]);
  const int oy = output_extent(ny, spacing[1], target[1]);
  const int ox = output_extent(nx, spacing[2], target[2]);
  // input index = output index * (target / source): corner-anchored so that
  // an identity spacing ratio maps voxels onto themselves exactly.
  const double sz = target[0] / spacing[0];
  const double sy = target[1] / spacing[1];
  const double sx = target[2] / spacing[2];
  Tensor<float> out({oz, oy, ox});
  for (int k = 0; k < oz; ++k) {
    const double pz = k * sz;
    for (int j = 0; j < oy; ++j) {
      const double py = j * sy;
      for (int i = 0; i < ox; ++i) {
        out(k, j, i) = sample_trilinear(voxels, pz, py, i * sx);
      }
    }
  }
  return out;
}

}  // namespace detail

// Resample to the target voxel spacing (default 1x1x1 mm) with trilinear
// interpolation. Output extent per axis = round(n * spacing / target), min 1.
inline FloatVolume resample_isomorphic(const CtVolume& v,
                                       std::array<double, 3> target_spacing = {1.0, 1.0, 1.0}) {
  v.validate();
  FloatVolume out;
  out.voxels = detail::resample_grid(v.voxels, v.spacing_mm, target_spacing);
  out.spacing_mm = target_spacing;
  out.case_id = v.case_id;
  return out;
}

inline FloatVolume resample_isomorphic(const FloatVolume& v,
                                       std::array<double, 3> target_spacing = {1.0, 1.0, 1.0}) {
  FloatVolume out;
  out.voxels = detail::resample_grid(v.voxels, v.spacing_mm, target_spacing);
  out.spacing_mm = target_spacing;
  out.case_id = v.case_id;
  return out;
}

// Window HU to [-1000, 400] and min-max rescale to [0, 1]:
// out = (clamp(hu, -1000, 400) + 1000) / 1400.
inline Tensor<float> hu_window_normalize(Tensor<float> hu) {
  constexpr float lo = static_cast<float>(kHuWindowLow);
  constexpr float hi = static_cast<float>(kHuWindowHigh);
  constexpr float span = hi - lo;  // 1400
  for (std::size_t i = 0; i < hu.size(); ++i) {
    const float v = hu[i];
    if (!std::isfinite(v)) throw validation_error("hu_window_normalize: non-finite input");
    hu[i] = (std::clamp(v, lo, hi) - lo) / span;
  }
  return hu;
}

// Per-slice bilinear resize to target x target; slice count unchanged.
// Corner-aligned, so equal input/output sizes reproduce the input.
inline Tensor<float> resize_inplane(const Tensor<float>& stack, int target = 240) {
  if (stack.rank() != 3) throw validation_error("resize_inplane: expected (z, h, w)");
  const int nz = stack.dim(0), ny = stack.dim(1), nx = stack.dim(2);
  if (ny < 2 || nx < 2) throw validation_error("resize_inplane: in-plane size must be >= 2");
  if (target < 2) throw validation_error("resize_inplane: target must be >= 2");
  const double sy = static_cast<double>(ny - 1) / (target - 1);
  const double sx = static_cast<double>(nx - 1) / (target - 1);
  Tensor<float> out({nz, target, target});
  for (int z = 0; z < nz; ++z)
    for (int j = 0; j < target; ++j) {
      const double py = j * sy;
      for (int i = 0; i < target; ++i)
        out(z, j, i) = detail::sample_bilinear(stack, z, py, i * sx);
    }
  return out;
}

// Linear interpolation along z to exactly target_z slices, endpoints
// preserved. A single-slice input is replicated (with a warning).
inline Tensor<float> resize_depth(const Tensor<float>& stack, int target_z = 50) {
  if (stack.rank() != 3) throw validation_error("resize_depth: expected (z, h, w)");
  const int nz = stack.dim(0), ny = stack.dim(1), nx = stack.dim(2);
  if (target_z < 1) throw validation_error("resize_depth: target must be >= 1");
  Tensor<float> out({target_z, ny, nx});
  const std::size_t plane = static_cast<std::size_t>(ny) * static_cast<std::size_t>(nx);
  if (nz == 1) {
    std::cerr << "[lungct] warning: resize_depth on a single-slice stack, replicating\n";
    for (int k = 0; k < target_z; ++k)
      std::copy_n(stack.data(), plane, out.data() + static_cast<std::size_t>(k) * plane);
    return out;
  }
  const double sz = target_z > 1 ? static_cast<double>(nz - 1) / (target_z - 1) : 0.0;
  for (int k = 0; k < target_z; ++k) {
    const double pz = std::min(k * sz, static_cast<double>(nz - 1));
    const int z0 = static_cast<int>(pz);
    const int z1 = std::min(z0 + 1, nz - 1);
    const float f = static_cast<float>(pz - z0);
    const float* a = stack.data() + static_cast<std::size_t>(z0) * plane;
    const float* b = stack.data() + static_cast<std::size_t>(z1) * plane;
    float* o = out.data() + static_cast<std::size_t>(k) * plane;
    if (f == 0.0f) {
      std::copy_n(a, plane, o);
    } else {
      for (std::size_t i = 0; i < plane; ++i) o[i] = a[i] + (b[i] - a[i]) * f;
    }
  }
  return out;
}

// Full per-case chain: resample to isomorphic spacing, HU window + normalize,
// resize in-plane. Depth is left intact here; the depth resize happens on the
// infection maps downstream.
inline NormalizedStack preprocess_case(const CtVolume& v, const PreprocessOptions& opt = {}) {
  FloatVolume iso = resample_isomorphic(v, opt.target_spacing_mm);
  Tensor<float> norm = hu_window_normalize(std::move(iso.voxels));
  NormalizedStack stack;
  stack.slices = resize_inplane(norm, opt.inplane);
  stack.case_id = v.case_id;
  stack.original_slice_count = v.voxels.dim(0);
  return stack;
}

// Carry a phantom's lesion mask through the same geometry as the image path
// (trilinear resample, in-plane resize, depth resize), then threshold.
inline Tensor<std::uint8_t> mask_to_standard(const LesionMask& m,
                                             const std::array<double, 3>& spacing,
                                             const PreprocessOptions& opt = {}) {
  Tensor<float> f = m.mask.cast<float>();
  f = detail::resample_grid(f, spacing, opt.target_spacing_mm);
  f = resize_inplane(f, opt.inplane);
  f = resize_depth(f, opt.standard_depth);
  Tensor<std::uint8_t> out(f.shape());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] > 0.5f ? 1 : 0;
  return out;
}

inline StandardVolume to_standard(const Tensor<float>& stack, const std::string& case_id,
                                  const PreprocessOptions& opt = {}) {
  StandardVolume sv;
  sv.voxels = resize_depth(stack, opt.standard_depth);
  sv.case_id = case_id;
  sv.validate(opt.standard_depth, opt.inplane);
  return sv;
}

}  // namespace lungct
