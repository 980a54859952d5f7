#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace morreylab::cli {

std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();

/// Run record written last into the output directory as manifest.json.
class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path out_dir);

  nlohmann::json& config() { return config_; }
  nlohmann::json& grid() { return grid_; }
  nlohmann::json& summary() { return summary_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }

  /// Writes `contents` to out_dir/name and records it as an output.
  void write_output(const std::string& name, const std::string& contents);

  /// Names of outputs whose hash differs from (or is missing in) the manifest
  /// already present in out_dir. Throws if there is none.
  std::vector<std::string> compare_with_existing() const;

  void finish(bool pass);

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  std::string started_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json grid_ = nlohmann::json::object();
  nlohmann::json summary_ = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> outputs_;  // name, sha256
  nlohmann::json previous_;
};

}  // namespace morreylab::cli
