#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lungct/errors.hpp"
#include "lungct/volume.hpp"

namespace lungct {

static_assert(std::endian::native == std::endian::little,
              "container formats are little-endian; big-endian hosts are unsupported");

enum class Label { Control = 0, CAP = 1, Covid = 2 };
enum class Split { Train, Validation, Test };

inline const char* to_string(Label l) {
  switch (l) {
    case Label::Control: return "Control";
    case Label::CAP: return "CAP";
    case Label::Covid: return "Covid";
  }
  return "?";
}

inline const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

inline Label label_from_string(const std::string& s) {
  if (s == "Control") return Label::Control;
  if (s == "CAP") return Label::CAP;
  if (s == "Covid") return Label::Covid;
  throw format_error("unknown label '" + s + "' (expected Control, CAP or Covid)");
}

inline Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw format_error("unknown split '" + s + "'");
}

struct ManifestEntry {
  std::string case_id;
  std::string path;  // sidecar path relative to the manifest file
  Label label = Label::Control;
  Split split = Split::Train;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int schema_version = 1;

  void validate() const {
    std::map<std::string, int> seen;
    for (const auto& e : entries) {
      if (++seen[e.case_id] > 1)
        throw validation_error("manifest: duplicate case_id '" + e.case_id + "'");
    }
  }
};

namespace detail {

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path.string() + ": " + e.what());
  }
  return j;
}

inline void save_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <class T>
void write_raw(const std::filesystem::path& path, const T* data, std::size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(T)));
  if (!out) throw io_error("short write to " + path.string());
}

template <class T>
void read_raw(const std::filesystem::path& path, T* data, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  const auto bytes = std::filesystem::file_size(path);
  if (bytes != count * sizeof(T))
    throw corruption_error(path.string() + ": payload is " + std::to_string(bytes) +
                           " bytes, header implies " + std::to_string(count * sizeof(T)));
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(T)))
    throw corruption_error(path.string() + ": truncated payload");
}

template <class F>
auto require_field(const nlohmann::json& j, const char* field, F get) {
  if (!j.contains(field))
    throw format_error(std::string("sidecar missing field '") + field + "'");
  try {
    return get(j.at(field));
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("sidecar field '") + field + "': " + e.what());
  }
}

struct SidecarHeader {
  std::string case_id;
  std::vector<int> shape;
  std::array<double, 3> spacing{1, 1, 1};
  std::string dtype;
  std::string voxel_file;
  std::string stage;  // optional
};

inline SidecarHeader parse_sidecar(const nlohmann::json& j) {
  SidecarHeader h;
  h.case_id = require_field(j, "case_id", [](const nlohmann::json& v) { return v.get<std::string>(); });
  h.shape = require_field(j, "shape", [](const nlohmann::json& v) { return v.get<std::vector<int>>(); });
  auto sp = require_field(j, "spacing_mm",
                          [](const nlohmann::json& v) { return v.get<std::vector<double>>(); });
  if (h.shape.size() != 3 || sp.size() != 3)
    throw format_error("sidecar: shape and spacing_mm must have 3 entries [z,y,x]");
  h.spacing = {sp[0], sp[1], sp[2]};
  h.dtype = require_field(j, "dtype", [](const nlohmann::json& v) { return v.get<std::string>(); });
  h.voxel_file =
      require_field(j, "voxel_file", [](const nlohmann::json& v) { return v.get<std::string>(); });
  if (j.contains("stage")) h.stage = j.at("stage").get<std::string>();
  for (double s : h.spacing)
    if (!(s > 0.0) || !std::isfinite(s))
      throw validation_error("sidecar: spacing_mm components must be > 0");
  for (int d : h.shape)
    if (d <= 0) throw format_error("sidecar: shape components must be positive");
  return h;
}

inline std::filesystem::path raw_path_for(const std::filesystem::path& sidecar) {
  auto p = sidecar;
  p.replace_extension(".raw");
  return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CT volume container: JSON sidecar + raw little-endian voxel blob.
// `path` names the sidecar; the voxel file sits next to it.
// ---------------------------------------------------------------------------

inline CtVolume read_volume(const std::filesystem::path& path) {
  const auto j = detail::load_json(path);
  const auto h = detail::parse_sidecar(j);
  if (h.dtype != "int16")
    throw format_error(path.string() + ": dtype '" + h.dtype + "', expected int16");
  CtVolume v;
  v.case_id = h.case_id;
  v.spacing_mm = h.spacing;
  v.voxels.reset({h.shape[0], h.shape[1], h.shape[2]});
  detail::read_raw(path.parent_path() / h.voxel_file, v.voxels.data(), v.voxels.size());
  v.validate();
  return v;
}

inline void write_volume(const CtVolume& v, const std::filesystem::path& path) {
  v.validate();
  const auto raw = detail::raw_path_for(path);
  nlohmann::json j{{"case_id", v.case_id},
                   {"shape", {v.voxels.dim(0), v.voxels.dim(1), v.voxels.dim(2)}},
                   {"spacing_mm", {v.spacing_mm[0], v.spacing_mm[1], v.spacing_mm[2]}},
                   {"dtype", "int16"},
                   {"voxel_file", raw.filename().string()}};
  detail::save_json(j, path);
  detail::write_raw(raw, v.voxels.data(), v.voxels.size());
}

// Float containers hold derived artifacts (normalized stacks, standard
// volumes, infection maps). The sidecar carries a "stage" tag.

inline void write_float_volume(const Tensor<float>& voxels, const std::string& case_id,
                               const std::array<double, 3>& spacing, const std::string& stage,
                               const std::filesystem::path& path) {
  if (voxels.rank() != 3) throw validation_error("float container expects a 3D grid");
  const auto raw = detail::raw_path_for(path);
  nlohmann::json j{{"case_id", case_id},
                   {"shape", {voxels.dim(0), voxels.dim(1), voxels.dim(2)}},
                   {"spacing_mm", {spacing[0], spacing[1], spacing[2]}},
                   {"dtype", "float32"},
                   {"stage", stage},
                   {"voxel_file", raw.filename().string()}};
  detail::save_json(j, path);
  detail::write_raw(raw, voxels.data(), voxels.size());
}

struct FloatContainer {
  Tensor<float> voxels;
  std::array<double, 3> spacing_mm{1, 1, 1};
  std::string case_id;
  std::string stage;
};

inline FloatContainer read_float_volume(const std::filesystem::path& path) {
  const auto j = detail::load_json(path);
  const auto h = detail::parse_sidecar(j);
  if (h.dtype != "float32")
    throw format_error(path.string() + ": dtype '" + h.dtype + "', expected float32");
  FloatContainer c;
  c.case_id = h.case_id;
  c.spacing_mm = h.spacing;
  c.stage = h.stage;
  c.voxels.reset({h.shape[0], h.shape[1], h.shape[2]});
  detail::read_raw(path.parent_path() / h.voxel_file, c.voxels.data(), c.voxels.size());
  return c;
}

// Masks ride in the int16 container with a "stage":"mask" sidecar tag.
inline void write_mask(const LesionMask& m, const std::array<double, 3>& spacing,
                       const std::filesystem::path& path) {
  const auto raw = detail::raw_path_for(path);
  nlohmann::json j{{"case_id", m.case_id},
                   {"shape", {m.mask.dim(0), m.mask.dim(1), m.mask.dim(2)}},
                   {"spacing_mm", {spacing[0], spacing[1], spacing[2]}},
                   {"dtype", "int16"},
                   {"stage", "mask"},
                   {"voxel_file", raw.filename().string()}};
  detail::save_json(j, path);
  detail::write_raw(raw, m.mask.data(), m.mask.size());
}

inline LesionMask read_mask(const std::filesystem::path& path) {
  const auto j = detail::load_json(path);
  const auto h = detail::parse_sidecar(j);
  if (h.dtype != "int16") throw format_error(path.string() + ": mask dtype must be int16");
  LesionMask m;
  m.case_id = h.case_id;
  m.mask.reset({h.shape[0], h.shape[1], h.shape[2]});
  detail::read_raw(path.parent_path() / h.voxel_file, m.mask.data(), m.mask.size());
  return m;
}

// ---------------------------------------------------------------------------
// Dataset manifest: JSON list of {"case_id","path","label","split"}.
// ---------------------------------------------------------------------------

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  const auto j = detail::load_json(path);
  DatasetManifest m;
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    // Tolerated alternative envelope with an explicit schema_version.
    if (!j.contains("entries")) throw format_error("manifest: expected a JSON list");
    if (j.contains("schema_version")) m.schema_version = j.at("schema_version").get<int>();
    list = &j.at("entries");
  }
  if (!list->is_array()) throw format_error("manifest: expected a JSON list");
  for (const auto& e : *list) {
    ManifestEntry me;
    me.case_id = detail::require_field(e, "case_id",
                                       [](const nlohmann::json& v) { return v.get<std::string>(); });
    me.path = detail::require_field(e, "path",
                                    [](const nlohmann::json& v) { return v.get<std::string>(); });
    me.label = label_from_string(detail::require_field(
        e, "label", [](const nlohmann::json& v) { return v.get<std::string>(); }));
    me.split = split_from_string(detail::require_field(
        e, "split", [](const nlohmann::json& v) { return v.get<std::string>(); }));
    m.entries.push_back(std::move(me));
  }
  m.validate();
  return m;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  m.validate();
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : m.entries) {
    list.push_back({{"case_id", e.case_id},
                    {"path", e.path},
                    {"label", to_string(e.label)},
                    {"split", to_string(e.split)}});
  }
  detail::save_json(list, path);
}

// ---------------------------------------------------------------------------
// NamedTensorArchive: directory with manifest.json + one .bin per tensor.
// Payloads are raw little-endian float32, row-major.
// ---------------------------------------------------------------------------

struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

struct NamedTensorArchive {
  std::vector<NamedTensor> tensors;  // manifest order is preserved on disk
  std::map<std::string, std::string> metadata;

  void validate() const {
    std::map<std::string, int> seen;
    for (const auto& t : tensors) {
      if (++seen[t.name] > 1)
        throw validation_error("archive: duplicate tensor name '" + t.name + "'");
      std::size_t n = 1;
      for (int d : t.shape) {
        if (d <= 0) throw validation_error("archive: non-positive dimension in " + t.name);
        n *= static_cast<std::size_t>(d);
      }
      if (n != t.data.size())
        throw validation_error("archive: payload of " + t.name + " does not match shape");
    }
  }
};

inline void save_weights(const NamedTensorArchive& a, const std::filesystem::path& dir) {
  a.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json tensors = nlohmann::json::array();
  int index = 0;
  for (const auto& t : a.tensors) {
    std::string file = "t" + std::to_string(index++);
    for (char c : t.name) file += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    file += ".bin";
    tensors.push_back(
        {{"name", t.name}, {"shape", t.shape}, {"dtype", "float32"}, {"file", file}});
    detail::write_raw(dir / file, t.data.data(), t.data.size());
  }
  nlohmann::json j{{"tensors", tensors}, {"metadata", a.metadata}};
  detail::save_json(j, dir / "manifest.json");
}

inline NamedTensorArchive load_weights(const std::filesystem::path& dir) {
  const auto j = detail::load_json(dir / "manifest.json");
  if (!j.contains("tensors")) throw format_error("weight manifest: missing 'tensors'");
  NamedTensorArchive a;
  if (j.contains("metadata"))
    a.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  for (const auto& e : j.at("tensors")) {
    NamedTensor t;
    t.name = detail::require_field(e, "name",
                                   [](const nlohmann::json& v) { return v.get<std::string>(); });
    t.shape = detail::require_field(e, "shape",
                                    [](const nlohmann::json& v) { return v.get<std::vector<int>>(); });
    const auto dtype = detail::require_field(
        e, "dtype", [](const nlohmann::json& v) { return v.get<std::string>(); });
    if (dtype != "float32")
      throw format_error("weight archive: unsupported dtype '" + dtype + "'");
    const auto file = detail::require_field(
        e, "file", [](const nlohmann::json& v) { return v.get<std::string>(); });
    std::size_t n = 1;
    for (int d : t.shape) {
      if (d <= 0) throw format_error("weight archive: bad shape for " + t.name);
      n *= static_cast<std::size_t>(d);
    }
    t.data.resize(n);
    detail::read_raw(dir / file, t.data.data(), n);
    a.tensors.push_back(std::move(t));
  }
  a.validate();
  return a;
}

}  // namespace lungct
