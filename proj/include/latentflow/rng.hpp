#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace latentflow {

/// Mixes an arbitrary list of integer keys into one 64-bit value (splitmix64 finalizer chain).
std::uint64_t hashKeys(std::initializer_list<std::uint64_t> keys);

/// Uniform double in [0,1) derived purely from the keys. Counter-based: no state.
double uniformFromKeys(std::initializer_list<std::uint64_t> keys);

/// Seeded stream generator. Uniform and normal draws are computed here rather than
/// through <random> distributions so that streams are identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::initializer_list<std::uint64_t> keys) : engine_(hashKeys(keys)) {}

  double uniform();  // [0,1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n);  // [0,n)
  double normal();
  std::uint64_t bits() { return engine_(); }

  Eigen::VectorXd normalVector(Eigen::Index n);
  Eigen::MatrixXd normalMatrix(Eigen::Index rows, Eigen::Index cols);

private:
  std::mt19937_64 engine_;
  bool hasSpare_ = false;
  double spare_ = 0.0;
};

}  // namespace latentflow
