#pragma once

// Binary snapshot container: "EULB", u32 format version, u64 metadata length,
// UTF-8 JSON metadata, then little-endian float64 payload (row-major, fields
// concatenated in metadata order).

#include "eulab/axisym3d.hpp"
#include "eulab/euler2d.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace eulab {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct SnapshotField {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<double> data;
};

struct Snapshot {
  nlohmann::json metadata = nlohmann::json::object();  // geometry, time, provenance
  std::vector<SnapshotField> fields;

  const SnapshotField& field(const std::string& name) const;
};

/// The "fields", "dtype", "endianness" and "format_version" metadata entries are
/// written from the field list.
std::string encode_snapshot(const Snapshot& s);
/// ValidationError on bad magic, version, lengths or metadata.
Snapshot decode_snapshot(const std::string& bytes);
void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(const std::filesystem::path& path);

/// geometry {"type": "periodic2d", "n", "L"}; field "omega".
Snapshot snapshot_2d(const SpectralField2D& omega, double t, const nlohmann::json& provenance = {});
SpectralField2D field_from_snapshot(const Snapshot& s, double* t = nullptr);
/// geometry {"type": "axi", "n_r", "n_z", "R_max", "L_z"}; field "q".
Snapshot snapshot_axi(const AxiState& s, const nlohmann::json& provenance = {});
AxiState axi_state_from_snapshot(const Snapshot& s);

}  // namespace eulab
