#pragma once

#include <sstream>
#include <string>

#include "frugal/dataset.hpp"

namespace frugal::testing {

inline Dataset from_csv(const std::string& text, const std::string& name = "inline") {
  std::istringstream in(text);
  return Dataset::load(in, name);
}

inline Dataset load_fixture(const std::string& file) {
  return Dataset::load(std::filesystem::path(FRUGAL_DATA_DIR) / file);
}

}  // namespace frugal::testing
