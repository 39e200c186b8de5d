#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "lungct/errors.hpp"
#include "lungct/tensor.hpp"

namespace lungct {

constexpr std::int16_t kHuMin = -1024;
constexpr std::int16_t kHuMax = 3071;
constexpr double kHuWindowLow = -1000.0;
constexpr double kHuWindowHigh = 400.0;

// Raw CT volume: signed 16-bit Hounsfield units indexed (z, y, x) plus
// physical voxel spacing in millimeters.
struct CtVolume {
  Tensor<std::int16_t> voxels;  // (z, y, x)
  std::array<double, 3> spacing_mm{1.0, 1.0, 1.0};
  std::string case_id;

  void validate() const {
    if (voxels.rank() != 3 || voxels.size() == 0)
      throw validation_error("CtVolume: voxels must be a non-empty 3D grid");
    for (double s : spacing_mm)
      if (!(s > 0.0) || !std::isfinite(s))
        throw validation_error("CtVolume: spacing_mm must be positive and finite");
    for (std::size_t i = 0; i < voxels.size(); ++i)
      if (voxels[i] < kHuMin || voxels[i] > kHuMax)
        throw validation_error("CtVolume: voxel outside [-1024, 3071] HU");
  }
};

// Float voxel grid with spacing; intermediate result of resampling (still HU)
// or of normalization (values in [0,1]).
struct FloatVolume {
  Tensor<float> voxels;  // (z, y, x)
  std::array<double, 3> spacing_mm{1.0, 1.0, 1.0};
  std::string case_id;
};

// Preprocessed per-case stack: float slices in [0,1], square in-plane.
struct NormalizedStack {
  Tensor<float> slices;  // (z, s, s)
  std::string case_id;
  int original_slice_count = 0;

  int depth() const { return slices.dim(0); }
  int inplane() const { return slices.dim(1); }

  void validate() const {
    if (slices.rank() != 3 || slices.dim(0) < 1)
      throw validation_error("NormalizedStack: need at least one slice");
    if (slices.dim(1) != slices.dim(2))
      throw validation_error("NormalizedStack: slices must be square");
    for (std::size_t i = 0; i < slices.size(); ++i)
      if (!(slices[i] >= 0.0f && slices[i] <= 1.0f))
        throw validation_error("NormalizedStack: value outside [0,1]");
  }
};

// Fixed-size volume fed to the 3D classifier. The full profile uses
// (50, 240, 240); the reduced test profile uses (32, 96, 96).
struct StandardVolume {
  Tensor<float> voxels;  // (depth, s, s)
  std::string case_id;

  void validate(int depth, int inplane) const {
    if (voxels.rank() != 3 || voxels.dim(0) != depth || voxels.dim(1) != inplane ||
        voxels.dim(2) != inplane)
      throw validation_error("StandardVolume: wrong shape");
    for (std::size_t i = 0; i < voxels.size(); ++i)
      if (!std::isfinite(voxels[i]))
        throw validation_error("StandardVolume: non-finite value");
  }
};

// Signed subtraction volume (preprocessed minus reconstruction), values in
// [-1, 1], resized to the standard classifier shape.
struct InfectionVolume {
  Tensor<float> voxels;  // (depth, s, s)
  std::string case_id;

  void validate(int depth, int inplane) const {
    if (voxels.rank() != 3 || voxels.dim(0) != depth || voxels.dim(1) != inplane ||
        voxels.dim(2) != inplane)
      throw validation_error("InfectionVolume: wrong shape");
    for (std::size_t i = 0; i < voxels.size(); ++i)
      if (!(voxels[i] >= -1.0f && voxels[i] <= 1.0f))
        throw validation_error("InfectionVolume: value outside [-1,1]");
  }
};

// Ground-truth lesion voxels for a generated phantom; aligned with its volume.
struct LesionMask {
  Tensor<std::int16_t> mask;  // values {0,1}, same shape as companion volume
  std::string case_id;
};

}  // namespace lungct
