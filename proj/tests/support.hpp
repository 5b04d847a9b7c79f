#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "tieforge/corpus/corpus.hpp"
#include "tieforge/numcore/tensor.hpp"
#include "tieforge/random.hpp"

namespace tieforge::testing {

inline num::Tensor random_tensor(num::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  num::Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tieforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
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

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Sentence with positions encoded for the default clip distance.
inline corpus::SentenceInstance sentence(std::vector<std::size_t> tokens, std::size_t head, std::size_t tail) {
  corpus::SentenceInstance s;
  auto pos = corpus::encode_positions(tokens.size(), head, tail);
  s.token_ids = std::move(tokens);
  s.head_pos = head;
  s.tail_pos = tail;
  s.pos1_ids = std::move(pos.pos1);
  s.pos2_ids = std::move(pos.pos2);
  return s;
}

}  // namespace tieforge::testing
