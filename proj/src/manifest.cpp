#include "gaitlab/manifest.hpp"

#include "gaitlab/error.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace gaitlab {

namespace {

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  require(ctx && EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) == 1 &&
              EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) == 1 &&
              EVP_DigestFinal_ex(ctx.get(), digest, &length) == 1,
          ErrorKind::Io, "SHA-256 computation failed");
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_bytes(path)); }

void add_files(RunManifest& manifest, const std::filesystem::path& root, const std::vector<std::string>& files) {
  for (const auto& f : files) manifest.files.push_back({f, sha256_file(root / f)});
  std::sort(manifest.files.begin(), manifest.files.end(),
            [](const ManifestFile& a, const ManifestFile& b) { return a.path < b.path; });
}

void write_manifest(const RunManifest& m, const std::filesystem::path& root) {
  nlohmann::ordered_json j;
  j["stage"] = m.stage;
  j["tool_version"] = m.tool_version;
  j["master_seed"] = m.master_seed;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : m.files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}});
  const auto path = root / kManifestName;
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::filesystem::path& root) {
  const auto path = root / kManifestName;
  const std::string text = read_bytes(path);
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.stage = j.at("stage").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::string>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    for (const auto& f : j.at("files")) m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

bool verify_manifest(const std::filesystem::path& root) {
  if (!std::filesystem::exists(root / kManifestName)) return false;
  const RunManifest m = read_manifest(root);
  for (const auto& f : m.files) {
    const auto path = root / f.path;
    require(std::filesystem::exists(path), ErrorKind::Validation,
            "manifest lists '" + f.path + "' but it is missing from " + root.string());
    require(sha256_file(path) == f.sha256, ErrorKind::Validation,
            "'" + f.path + "' does not match its manifest hash");
  }
  return true;
}

}  // namespace gaitlab
