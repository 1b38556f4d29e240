#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "riskforge/dsl.hpp"

namespace rftest {

inline std::string data_path(const std::string& name) { return std::string(RISKFORGE_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline riskforge::RiskModel fixture(const std::string& name) {
  return riskforge::parse(read_text(data_path(name)));
}

}  // namespace rftest
