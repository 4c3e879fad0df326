#pragma once

#include "leakscan/program.hpp"

#include <string>

namespace fixtures {

/// Absolute path of a file under tests/fixtures.
std::string path(const std::string &relative);
std::string read(const std::string &relative);
/// Load every file listed in <dir>/manifest.json and link them.
leakscan::Program load_project(const std::string &relative_dir);
/// Link a single in-memory source.
leakscan::Program load_source(const std::string &text,
                              const std::string &name = "input.mc");

} // namespace fixtures
