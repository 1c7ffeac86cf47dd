#include "cli/manifest.hpp"

#include "noisewarp/error.hpp"
#include "noisewarp/io_formats.hpp"

namespace noisewarp::cli {

using json = nlohmann::json;

namespace {

json records_to_json(const std::vector<FileRecord>& records) {
  json out = json::array();
  for (const FileRecord& r : records) {
    out.push_back({{"path", r.path}, {"checksum", r.checksum}, {"deterministic", r.deterministic}});
  }
  return out;
}

std::vector<FileRecord> records_from_json(const json& j) {
  std::vector<FileRecord> out;
  for (const json& r : j) {
    out.push_back({r.at("path").get<std::string>(), r.at("checksum").get<std::string>(),
                   r.value("deterministic", true)});
  }
  return out;
}

}  // namespace

json to_json(const RunManifest& m) {
  return {{"schema", "noisewarp.manifest"},
          {"version", RunManifest::kSchemaVersion},
          {"subcommand", m.subcommand},
          {"params", m.params},
          {"rng_key", {{"seed", m.key.seed}, {"stream", m.key.stream}}},
          {"tool_version", m.tool_version},
          {"threads", m.threads},
          {"inputs", records_to_json(m.inputs)},
          {"outputs", records_to_json(m.outputs)}};
}

RunManifest manifest_from_json(const json& j) {
  if (j.value("schema", "") != "noisewarp.manifest") throw FormatError("not a noisewarp manifest");
  if (j.value("version", 0) != RunManifest::kSchemaVersion) {
    throw FormatError("unsupported manifest version");
  }
  RunManifest m;
  try {
    m.subcommand = j.at("subcommand").get<std::string>();
    m.params = j.at("params");
    m.key.seed = j.at("rng_key").at("seed").get<std::uint64_t>();
    m.key.stream = j.at("rng_key").at("stream").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.threads = j.value("threads", 1);
    m.inputs = records_from_json(j.at("inputs"));
    m.outputs = records_from_json(j.at("outputs"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  if (!m.params.is_object()) throw FormatError("manifest params must be an object");
  return m;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_text_file(to_json(manifest).dump(2) + "\n", path);
}

RunManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

std::vector<std::string> replay_arguments(const RunManifest& manifest,
                                          const std::filesystem::path& out_dir) {
  std::vector<std::string> args{manifest.subcommand};
  for (const auto& [name, value] : manifest.params.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + name);
    } else if (value.is_string()) {
      args.push_back("--" + name);
      args.push_back(value.get<std::string>());
    } else {
      throw FormatError("manifest parameter '" + name + "' must be a string or boolean");
    }
  }
  args.push_back("--out");
  args.push_back(out_dir.string());
  return args;
}

}  // namespace noisewarp::cli
