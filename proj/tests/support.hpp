#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "tempdir.hpp"

namespace testing {

namespace fs = std::filesystem;

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Compares against tests/golden/<name>. Set TALKGRADE_UPDATE_GOLDEN=1 to
// rewrite the file instead (then review the diff by hand).
inline void check_golden(const std::string& name, const std::string& actual) {
  const fs::path file = fs::path(TALKGRADE_GOLDEN_DIR) / name;
  if (std::getenv("TALKGRADE_UPDATE_GOLDEN")) {
    write_text(file, actual);
    MESSAGE("rewrote golden file " << file.string());
    return;
  }
  REQUIRE_MESSAGE(fs::exists(file), "missing golden file " << file.string());
  CHECK(read_text(file) == actual);
}

}  // namespace testing
