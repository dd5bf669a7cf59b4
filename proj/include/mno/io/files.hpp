#pragma once

// Binary containers: 8-byte magic | u32 LE header length | u32 reserved (0) | UTF-8 JSON header
// with sorted keys | little-endian float64 payload.

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "mno/core/dataset.hpp"
#include "mno/model/model.hpp"

namespace mno::io {

using json = nlohmann::json;

inline constexpr char dataset_magic[9] = "MNODATA1";
inline constexpr char checkpoint_magic[9] = "MNOCKPT1";
inline constexpr int format_version = 1;
inline constexpr std::size_t prefix_bytes = 16;

struct Container {
    json header;
    std::vector<double> payload;
};

std::vector<std::uint8_t> encode(const char* magic, const json& header, const std::vector<double>& payload);
Container decode(const char* magic, const std::vector<std::uint8_t>& bytes, const std::string& what);

/// Writes to a temporary file next to path and renames it over path.
void atomic_write(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

// .mnod with layout "pairs": inputs then outputs per record
std::vector<std::uint8_t> encode_dataset(const PairDataset& d);
PairDataset decode_dataset(const std::vector<std::uint8_t>& bytes, const std::string& what = "dataset");
void write_dataset(const std::string& path, const PairDataset& d);
PairDataset read_dataset(const std::string& path);

// .mnod with layout "trajectory"
struct TrajectoryFile {
    Trajectory trajectory;
    std::string system;
    std::uint64_t seed = 0;
    json meta = json::object();  // free-form provenance (blow-up flag, perturbation, Reynolds number)
};
std::vector<std::uint8_t> encode_trajectory(const TrajectoryFile& t);
TrajectoryFile decode_trajectory(const std::vector<std::uint8_t>& bytes, const std::string& what = "trajectory");
void write_trajectory(const std::string& path, const TrajectoryFile& t);
TrajectoryFile read_trajectory(const std::string& path);

/// Layout of a .mnod file without decoding the payload.
std::string dataset_layout(const std::string& path);

// .mnockpt
struct Checkpoint {
    json architecture;
    json info = json::object();  // training summary, system and post-processing settings
    model::ModelParams params;
};

json architecture_to_json(const model::Model& m);
model::Model model_from_json(const json& arch);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& what = "checkpoint");
void write_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace mno::io
