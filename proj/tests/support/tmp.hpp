#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

namespace synth {

/// Fresh empty directory under the build tree (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* root = std::getenv("AMODSCALE_TEST_TMP");
  const std::filesystem::path base = root ? root : std::filesystem::temp_directory_path() / "amodscale";
  const auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace synth
