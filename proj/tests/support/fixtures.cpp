#include "support/fixtures.hpp"

#include "json.hpp"

namespace fixtures {

std::string path(const std::string &relative) {
  return std::string(LEAKSCAN_FIXTURE_DIR) + "/" + relative;
}

std::string read(const std::string &relative) {
  return leakscan::read_file(path(relative));
}

leakscan::Program load_project(const std::string &relative_dir) {
  auto manifest = nlohmann::json::parse(read(relative_dir + "/manifest.json"));
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto &f : manifest.at("files")) {
    std::string rel = relative_dir + "/" + f.get<std::string>();
    files.emplace_back(rel, read(rel));
  }
  return leakscan::load_program(files);
}

leakscan::Program load_source(const std::string &text, const std::string &name) {
  return leakscan::load_program({{name, text}});
}

} // namespace fixtures
