#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>

#include "blamestyle/random.hpp"

namespace testutil {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(BLAMESTYLE_TEST_DATA_DIR) / rel;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static int counter = 0;
  const auto p = std::filesystem::temp_directory_path() /
                 ("blamestyle_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Clones the bundled fixture repository into `<tmp>/<name>`.
inline std::filesystem::path clone_fixture(const std::string& name) {
  const auto dir = temp_dir("clone") / name;
  const std::string cmd = "git clone -q \"" + data_path("fixtures/sample.bundle").string() + "\" \"" + dir.string() +
                          "\" >/dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("git clone of fixture failed");
  return dir;
}

}  // namespace testutil
