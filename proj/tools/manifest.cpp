#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "morreylab/errors.hpp"

namespace morreylab::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    char two[3];
    std::snprintf(two, sizeof two, "%02x", digest[i]);
    hex += two;
  }
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string command, fs::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)), started_(utc_timestamp()) {
  const fs::path existing = out_dir_ / "manifest.json";
  if (fs::exists(existing)) {
    std::ifstream in(existing);
    previous_ = nlohmann::json::parse(in, nullptr, false);
  }
  fs::create_directories(out_dir_);
}

void RunManifest::write_output(const std::string& name, const std::string& contents) {
  const fs::path path = out_dir_ / name;
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
  }
  outputs_.emplace_back(name, sha256_file(path));
}

std::vector<std::string> RunManifest::compare_with_existing() const {
  if (!previous_.is_object() || !previous_.contains("outputs")) {
    throw PreconditionError("--check needs an existing manifest.json in " + out_dir_.string());
  }
  std::vector<std::string> mismatched;
  for (const auto& [name, hash] : outputs_) {
    bool found = false;
    for (const auto& entry : previous_["outputs"]) {
      if (entry.value("path", "") == name) {
        found = entry.value("sha256", "") == hash;
        break;
      }
    }
    if (!found) mismatched.push_back(name);
  }
  return mismatched;
}

void RunManifest::finish(bool pass) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& [name, hash] : outputs_) {
    outputs.push_back({{"path", name}, {"sha256", hash}, {"bytes", fs::file_size(out_dir_ / name)}});
  }
  summary_["pass"] = pass;
  const nlohmann::json manifest = {{"command", command_},
                                   {"config", config_},
                                   {"grid", grid_},
                                   {"started", started_},
                                   {"finished", utc_timestamp()},
                                   {"outputs", outputs},
                                   {"summary", summary_}};
  std::ofstream out(out_dir_ / "manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace morreylab::cli
