#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "fieldlang/field.hpp"

namespace testutil {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("fieldlang-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Snapshot with channels filled from f(x, y) -> {u, v, p}.
template <class F>
fieldlang::FieldSnapshot sample(const fieldlang::GridSpec& grid, F f) {
  fieldlang::FieldSnapshot s(grid);
  for (std::size_t r = 0; r < grid.height; ++r)
    for (std::size_t c = 0; c < grid.width; ++c) {
      const auto [u, v, p] = f(grid.x_at(c), grid.y_at(r));
      s.u.at(r, c) = u;
      s.v.at(r, c) = v;
      s.p.at(r, c) = p;
    }
  return s;
}

inline fieldlang::FieldSnapshot random_field(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  fieldlang::FieldSnapshot s(fieldlang::GridSpec::unit(n));
  for (auto* g : {&s.u, &s.v, &s.p})
    for (auto& x : g->values) x = d(rng);
  return s;
}

}  // namespace testutil
