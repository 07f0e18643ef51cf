#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace saca {

/// Row-major 2D array over the pixel lattice; linear index = row * width + col.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PlaneXd = Plane<double>;
using PlaneXf = Plane<float>;
using MaskX = Plane<bool>;

using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Channel shapes disagree.
struct DimensionError : Error {
  using Error::Error;
};

/// Input file could not be decoded.
struct FormatError : Error {
  using Error::Error;
};

/// Out-of-domain parameter.
struct ParameterError : Error {
  using Error::Error;
};

/// Statistic undefined for the given data (zero variance, zero sum, ...).
struct DegenerateError : Error {
  using Error::Error;
};

/// splitmix64 finalizer; derives independent RNG stream seeds from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept
{
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace saca
