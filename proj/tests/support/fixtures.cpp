#include "support/fixtures.hpp"

#include <chrono>
#include <filesystem>

namespace sbm::test {

std::string scratch_dir() {
  static const std::string dir = [] {
    const auto stamp =
        std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count();
    std::string d = (std::filesystem::temp_directory_path() /
                     ("sbm_test_" + std::to_string(stamp)))
                        .string();
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_ascii_cube_stl(const std::string& dir) {
  const std::string path = dir + "/cube_ascii.stl";
  write_stl_ascii(path, make_cube_triangles({0, 0, 0}, {1, 1, 1}), "cube");
  return path;
}

std::string write_binary_cube_stl(const std::string& dir) {
  const std::string path = dir + "/cube_binary.stl";
  write_stl_binary(path, make_cube_triangles({0, 0, 0}, {1, 1, 1}));
  return path;
}

std::string write_icosphere_stl(const std::string& dir, int subdivisions) {
  const std::string path = dir + "/icosphere.stl";
  write_stl_binary(path, make_icosphere({0, 0, 0}, 1.0, subdivisions));
  return path;
}

}  // namespace sbm::test
