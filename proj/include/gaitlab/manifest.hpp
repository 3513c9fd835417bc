#ifndef GAITLAB_MANIFEST_HPP
#define GAITLAB_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gaitlab {

struct ManifestFile {
  std::string path;  // relative to the manifest's directory
  std::string sha256;
};

/// Record of one CLI stage: what ran, with which settings, and what it wrote.
struct RunManifest {
  std::string stage;
  std::string tool_version;
  std::uint64_t master_seed = 0;
  std::string config;                         // canonical config snapshot
  std::map<std::string, std::string> inputs;  // stage name -> directory read
  std::map<std::string, std::string> outputs;
  std::vector<ManifestFile> files;
};

inline constexpr const char* kManifestName = "manifest.json";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Hashes `files` (relative to `root`) into the manifest, sorted by path.
void add_files(RunManifest& manifest, const std::filesystem::path& root, const std::vector<std::string>& files);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& root);
RunManifest read_manifest(const std::filesystem::path& root);

/// When `root` holds a manifest, every listed file must exist and match its
/// hash (Validation error otherwise). Returns false when there is no manifest.
bool verify_manifest(const std::filesystem::path& root);

}  // namespace gaitlab

#endif  // GAITLAB_MANIFEST_HPP
