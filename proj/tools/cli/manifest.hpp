#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisewarp/rng.hpp"

namespace noisewarp::cli {

struct FileRecord {
  std::string path;      // inputs: absolute; outputs: relative to the output dir
  std::string checksum;  // FNV-1a 64, hex
  // Timing tables differ run to run; replay skips them.
  bool deterministic = true;
};

/// Written as manifest.json into every output directory.
struct RunManifest {
  static constexpr int kSchemaVersion = 1;

  std::string subcommand;
  nlohmann::json params = nlohmann::json::object();  // flag name -> value as given
  RngKey key;
  std::string tool_version;
  int threads = 1;
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
};

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

/// Command line that re-runs the manifest into `out_dir`.
std::vector<std::string> replay_arguments(const RunManifest& manifest,
                                          const std::filesystem::path& out_dir);

}  // namespace noisewarp::cli
