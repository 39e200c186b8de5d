#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lungct/errors.hpp"
#include "lungct/perlin.hpp"
#include "lungct/rng.hpp"
#include "lungct/volume.hpp"
#include "lungct/volume_io.hpp"

namespace lungct {

// Procedural lung phantom dataset. Geometry is deliberately simple (nested
// ellipsoids); the contract is HU realism per tissue class plus lesion/lung
// separability, not anatomical fidelity.
struct PhantomSpec {
  int n_control = 30;
  int n_cap = 30;
  int n_covid = 30;
  std::array<int, 3> shape{24, 160, 160};        // (z, y, x) voxels
  std::array<double, 3> spacing_mm{2.5, 1.5, 1.5};
  int n_test = 9;             // held-out test cases, stratified across classes
  double train_fraction = 0.9;
  std::uint64_t master_seed = 20200521;

  void validate() const {
    if (n_control < 0 || n_cap < 0 || n_covid < 0)
      throw validation_error("PhantomSpec: counts must be >= 0");
    if (shape[0] < 16 || shape[1] < 64 || shape[2] < 64)
      throw validation_error("PhantomSpec: shape must be at least (16, 64, 64)");
    for (double s : spacing_mm)
      if (!(s > 0.0)) throw validation_error("PhantomSpec: spacing must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw validation_error("PhantomSpec: train_fraction must be in (0, 1)");
    if (n_test < 0) throw validation_error("PhantomSpec: n_test must be >= 0");
  }
};

inline void to_json(nlohmann::json& j, const PhantomSpec& s) {
  j = nlohmann::json{{"n_control", s.n_control},   {"n_cap", s.n_cap},
                     {"n_covid", s.n_covid},       {"shape", s.shape},
                     {"spacing_mm", s.spacing_mm}, {"n_test", s.n_test},
                     {"train_fraction", s.train_fraction}, {"master_seed", s.master_seed}};
}

inline void from_json(const nlohmann::json& j, PhantomSpec& s) {
  s = PhantomSpec{};
  if (j.contains("n_control")) j.at("n_control").get_to(s.n_control);
  if (j.contains("n_cap")) j.at("n_cap").get_to(s.n_cap);
  if (j.contains("n_covid")) j.at("n_covid").get_to(s.n_covid);
  if (j.contains("shape")) j.at("shape").get_to(s.shape);
  if (j.contains("spacing_mm")) j.at("spacing_mm").get_to(s.spacing_mm);
  if (j.contains("n_test")) j.at("n_test").get_to(s.n_test);
  if (j.contains("train_fraction")) j.at("train_fraction").get_to(s.train_fraction);
  if (j.contains("master_seed")) j.at("master_seed").get_to(s.master_seed);
}

namespace phantom_detail {

struct Ellipsoid {
  // center and semi-axes in normalized volume coordinates (z, y, x in [0,1])
  std::array<double, 3> c;
  std::array<double, 3> r;

  double dist2(double qz, double qy, double qx) const {
    const double dz = (qz - c[0]) / r[0];
    const double dy = (qy - c[1]) / r[1];
    const double dx = (qx - c[2]) / r[2];
    return dz * dz + dy * dy + dx * dx;
  }
};

inline std::int16_t clamp_hu(double v) {
  return static_cast<std::int16_t>(std::clamp(v, static_cast<double>(kHuMin),
                                              static_cast<double>(kHuMax)));
}

// voxel bounding box of an ellipsoid, clipped to the grid
inline void bounds(const Ellipsoid& e, int n, int axis, int& lo, int& hi) {
  lo = std::max(0, static_cast<int>(std::floor((e.c[axis] - e.r[axis]) * n)) - 1);
  hi = std::min(n - 1, static_cast<int>(std::ceil((e.c[axis] + e.r[axis]) * n)) + 1);
}

}  // namespace phantom_detail

// Generate one phantom case: air background, soft-tissue torso with a bone
// shell, two textured lung ellipsoids, and class-dependent lesions.
//   Control    -> empty mask
//   CAP-like   -> 1-3 compact dense blobs (HU in [-100, 100]) in one lung
//   Covid-like -> 3-8 peripheral noise-carved patches (HU in [-500, -300]),
//                 bilateral by construction
inline std::pair<CtVolume, LesionMask> generate_phantom(Label label,
                                                        std::array<int, 3> shape,
                                                        std::array<double, 3> spacing,
                                                        std::uint64_t seed) {
  using phantom_detail::Ellipsoid;
  using phantom_detail::clamp_hu;
  if (shape[0] < 16 || shape[1] < 64 || shape[2] < 64)
    throw validation_error("generate_phantom: shape must be at least (16, 64, 64)");

  const int nz = shape[0], ny = shape[1], nx = shape[2];
  Rng rng(mix64(seed, 0xba5e));

  // per-case anatomy jitter
  const double torso_cy = 0.54 + rng.uniform(-0.015, 0.015);
  const double torso_cx = 0.50 + rng.uniform(-0.015, 0.015);
  const double torso_ry = 0.32 * (1.0 + rng.uniform(-0.04, 0.04));
  const double torso_rx = 0.42 * (1.0 + rng.uniform(-0.04, 0.04));
  const double taper = 0.10;

  Ellipsoid lungs[2];
  for (int s = 0; s < 2; ++s) {
    const double cx = (s == 0 ? 0.32 : 0.68) + rng.uniform(-0.01, 0.01);
    lungs[s].c = {0.5, 0.53 + rng.uniform(-0.01, 0.01), cx};
    lungs[s].r = {0.40 * (1.0 + rng.uniform(-0.05, 0.05)),
                  0.185 * (1.0 + rng.uniform(-0.05, 0.05)),
                  0.115 * (1.0 + rng.uniform(-0.05, 0.05))};
  }
  const double lung_base[2] = {rng.uniform(-700.0, -600.0), rng.uniform(-700.0, -600.0)};
  const double soft_base = rng.uniform(140.0, 260.0);
  const double bone_base = rng.uniform(500.0, 1200.0);
  const std::uint64_t tex_seed = mix64(seed, 0x7e47);

  CtVolume vol;
  vol.voxels.reset({nz, ny, nx});
  vol.spacing_mm = spacing;
  LesionMask mask;
  mask.mask.reset({nz, ny, nx});

  // body pass
  for (int z = 0; z < nz; ++z) {
    const double qz = (z + 0.5) / nz;
    const double sc = 1.0 - taper * (2.0 * qz - 1.0) * (2.0 * qz - 1.0);
    for (int y = 0; y < ny; ++y) {
      const double qy = (y + 0.5) / ny;
      for (int x = 0; x < nx; ++x) {
        const double qx = (x + 0.5) / nx;
        const double dy = (qy - torso_cy) / (torso_ry * sc);
        const double dx = (qx - torso_cx) / (torso_rx * sc);
        const double d = dy * dy + dx * dx;
        double hu = -1000.0;  // air
        if (d <= 1.0) {
          const double tex = perlin_detail::fractal3(tex_seed, 2, 0.5, qx * 8, qy * 8, qz * 8);
          if (d >= 0.80 && d <= 0.93) {
            hu = bone_base + 250.0 * tex;
            hu = std::clamp(hu, 300.0, 1900.0);
          } else {
            hu = soft_base + 60.0 * tex;
            hu = std::clamp(hu, 100.0, 300.0);
          }
          for (int s = 0; s < 2; ++s) {
            if (lungs[s].dist2(qz, qy, qx) <= 1.0) {
              hu = lung_base[s] + 50.0 * tex;
              break;
            }
          }
        }
        vol.voxels(z, y, x) = clamp_hu(hu);
      }
    }
  }

  // lesion pass
  struct Lesion {
    Ellipsoid support;
    int lung;
    double hu_base;
    bool carve;  // noise-carved irregular boundary
    std::uint64_t seed;
  };
  std::vector<Lesion> lesions;

  if (label == Label::CAP) {
    const int n = static_cast<int>(rng.uniform_int(1, 3));
    const int side = static_cast<int>(rng.uniform_int(0, 1));
    for (int i = 0; i < n; ++i) {
      // compact interior blob
      double uz, uy, ux;
      do {
        uz = rng.uniform(-0.55, 0.55);
        uy = rng.uniform(-0.55, 0.55);
        ux = rng.uniform(-0.55, 0.55);
      } while (uz * uz + uy * uy + ux * ux > 0.55 * 0.55);
      Lesion L;
      L.lung = side;
      L.support.c = {lungs[side].c[0] + uz * lungs[side].r[0],
                     lungs[side].c[1] + uy * lungs[side].r[1],
                     lungs[side].c[2] + ux * lungs[side].r[2]};
      L.support.r = {lungs[side].r[0] * rng.uniform(0.18, 0.32),
                     lungs[side].r[1] * rng.uniform(0.18, 0.32),
                     lungs[side].r[2] * rng.uniform(0.22, 0.40)};
      L.hu_base = rng.uniform(-80.0, 60.0);
      L.carve = false;
      L.seed = mix64(seed, 0xca0 + static_cast<std::uint64_t>(i));
      lesions.push_back(L);
    }
  } else if (label == Label::Covid) {
    const int n = static_cast<int>(rng.uniform_int(3, 8));
    for (int i = 0; i < n; ++i) {
      const int side = i < 2 ? i : static_cast<int>(rng.uniform_int(0, 1));
      // peripheral placement: unit direction scaled to 0.55-0.80 of the lung
      double dz = rng.normal(), dy = rng.normal(), dx = rng.normal();
      const double len = std::sqrt(dz * dz + dy * dy + dx * dx) + 1e-12;
      const double rho = rng.uniform(0.55, 0.80);
      Lesion L;
      L.lung = side;
      L.support.c = {lungs[side].c[0] + dz / len * rho * lungs[side].r[0],
                     lungs[side].c[1] + dy / len * rho * lungs[side].r[1],
                     lungs[side].c[2] + dx / len * rho * lungs[side].r[2]};
      L.support.r = {lungs[side].r[0] * rng.uniform(0.22, 0.38),
                     lungs[side].r[1] * rng.uniform(0.22, 0.38),
                     lungs[side].r[2] * rng.uniform(0.26, 0.44)};
      L.hu_base = rng.uniform(-460.0, -340.0);
      L.carve = true;
      L.seed = mix64(seed, 0xc0d + static_cast<std::uint64_t>(i));
      lesions.push_back(L);
    }
  }

  for (const auto& L : lesions) {
    const double tex_amp = L.carve ? 60.0 : 30.0;
    const double hu_lo = L.carve ? -500.0 : -100.0;
    const double hu_hi = L.carve ? -300.0 : 100.0;
    int z0, z1, y0, y1, x0, x1;
    phantom_detail::bounds(L.support, nz, 0, z0, z1);
    phantom_detail::bounds(L.support, ny, 1, y0, y1);
    phantom_detail::bounds(L.support, nx, 2, x0, x1);
    for (int pass = 0; pass < 2; ++pass) {
      // pass 0 applies the noise-carved region; if that yields no voxels
      // (tiny support), pass 1 fills the plain support instead.
      bool any = false;
      for (int z = z0; z <= z1; ++z) {
        const double qz = (z + 0.5) / nz;
        for (int y = y0; y <= y1; ++y) {
          const double qy = (y + 0.5) / ny;
          for (int x = x0; x <= x1; ++x) {
            const double qx = (x + 0.5) / nx;
            if (L.support.dist2(qz, qy, qx) > 1.0) continue;
            if (lungs[L.lung].dist2(qz, qy, qx) > 1.0) continue;
            const double n = perlin_detail::fractal3(L.seed, 2, 0.5, qx * 12, qy * 12, qz * 12);
            if (pass == 0 && L.carve && n < -0.10) continue;
            const double hu = std::clamp(L.hu_base + tex_amp * n, hu_lo, hu_hi);
            vol.voxels(z, y, x) = std::max(vol.voxels(z, y, x), clamp_hu(hu));
            mask.mask(z, y, x) = 1;
            any = true;
          }
        }
      }
      if (any || !L.carve) break;
    }
  }

  vol.case_id = "phantom";
  mask.case_id = "phantom";
  vol.validate();
  return {std::move(vol), std::move(mask)};
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

namespace phantom_detail {

// Per-class split of the non-test cases: validation = max(1, round(vf * n)),
// remainder train. Test cases are allocated first (n_test spread across the
// classes in declaration order).
inline std::vector<Split> assign_splits(int n_cases, int n_test_class, double train_fraction,
                                        Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n_cases));
  for (int i = 0; i < n_cases; ++i) order[static_cast<std::size_t>(i)] = i;
  std::vector<int> shuffled = order;
  rng.shuffle(shuffled);
  std::vector<Split> split(static_cast<std::size_t>(n_cases), Split::Train);
  int assigned = 0;
  for (int i = 0; i < n_test_class && assigned < n_cases; ++i, ++assigned)
    split[static_cast<std::size_t>(shuffled[static_cast<std::size_t>(assigned)])] = Split::Test;
  const int remaining = n_cases - assigned;
  if (remaining > 0) {
    const double vf = 1.0 - train_fraction;
    const int n_val = std::max(1, static_cast<int>(std::llround(vf * remaining)));
    for (int i = 0; i < std::min(n_val, remaining); ++i, ++assigned)
      split[static_cast<std::size_t>(shuffled[static_cast<std::size_t>(assigned)])] =
          Split::Validation;
  }
  return split;
}

}  // namespace phantom_detail

// Writes volumes, masks and the manifest under `root`:
//   root/manifest.json, root/volumes/<id>.json|.raw, root/masks/<id>.json|.raw
inline DatasetManifest generate_phantom_dataset(const PhantomSpec& spec,
                                                const std::filesystem::path& root) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(root / "volumes");
  fs::create_directories(root / "masks");

  const std::array<std::pair<Label, int>, 3> classes{{{Label::Control, spec.n_control},
                                                      {Label::CAP, spec.n_cap},
                                                      {Label::Covid, spec.n_covid}}};
  // stratify the test allocation across classes in declaration order
  std::array<int, 3> test_share{};
  for (int i = 0; i < spec.n_test; ++i) test_share[static_cast<std::size_t>(i % 3)]++;

  DatasetManifest manifest;
  std::uint64_t case_counter = 0;
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    const auto [label, count] = classes[ci];
    if (count == 0) continue;
    Rng split_rng(mix64(spec.master_seed, 0x51137 + ci));
    const auto splits = phantom_detail::assign_splits(
        count, std::min(count, test_share[ci]), spec.train_fraction, split_rng);
    for (int i = 0; i < count; ++i) {
      std::string id = to_string(label);
      std::transform(id.begin(), id.end(), id.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      char idx[8];
      std::snprintf(idx, sizeof(idx), "%03d", i);
      id += "_";
      id += idx;

      auto [vol, mask] = generate_phantom(label, spec.shape, spec.spacing_mm,
                                          mix64(spec.master_seed, case_counter));
      vol.case_id = id;
      mask.case_id = id;
      const std::string rel = "volumes/" + id + ".json";
      write_volume(vol, root / rel);
      write_mask(mask, spec.spacing_mm, root / ("masks/" + id + ".json"));

      ManifestEntry e;
      e.case_id = id;
      e.path = rel;
      e.label = label;
      e.split = splits[static_cast<std::size_t>(i)];
      manifest.entries.push_back(std::move(e));
      ++case_counter;
    }
  }
  save_manifest(manifest, root / "manifest.json");
  nlohmann::json jspec = spec;
  detail::save_json(jspec, root / "phantom_spec.json");
  return manifest;
}

}  // namespace lungct
