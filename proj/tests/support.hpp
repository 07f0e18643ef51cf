#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Core>

namespace test {

/// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir
{
  std::filesystem::path path;

  TempDir()
  {
    static std::atomic<int> counter{0};
    auto const stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path = std::filesystem::temp_directory_path() /
           ("saca_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(std::string const &name) const { return path / name; }
};

inline std::string slurp(std::filesystem::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(std::filesystem::path const &p, std::string const &text)
{
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline Eigen::ArrayXd uniform_vector(Eigen::Index n, std::mt19937_64 &rng, double lo = 0.0, double hi = 1.0)
{
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::ArrayXd v(n);
  for (auto &e : v) e = u(rng);
  return v;
}

/// Runs a shell command, returns its exit status.
inline int run(std::string const &cmd)
{
  int const st = std::system((cmd + " >/dev/null 2>&1").c_str());
  if (st == -1) return -1;
  return WEXITSTATUS(st);
}

} // namespace test
