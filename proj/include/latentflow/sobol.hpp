#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace latentflow {

/// Sobol low-discrepancy points in [0,1)^d. A nonzero seed applies a random
/// digital shift (XOR of every coordinate with a seeded mask), which keeps the
/// net structure while decorrelating seeds.
class SobolSequence {
public:
  SobolSequence(int dimension, std::uint64_t seed);
  ~SobolSequence();
  SobolSequence(SobolSequence&&) noexcept;
  SobolSequence& operator=(SobolSequence&&) noexcept;

  int dimension() const { return dimension_; }
  Eigen::VectorXd next();

private:
  struct Engine;
  int dimension_;
  std::unique_ptr<Engine> engine_;
  std::vector<std::uint64_t> shift_;
};

}  // namespace latentflow
