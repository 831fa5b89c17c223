#include "latentflow/sobol.hpp"

#include <boost/random/sobol.hpp>

#include "latentflow/errors.hpp"
#include "latentflow/rng.hpp"

namespace latentflow {

struct SobolSequence::Engine {
  explicit Engine(int d) : qrng(static_cast<std::size_t>(d)) {}
  boost::random::sobol qrng;
};

SobolSequence::SobolSequence(int dimension, std::uint64_t seed) : dimension_(dimension) {
  if (dimension < 1) throw DomainError("sobol dimension must be >= 1");
  engine_ = std::make_unique<Engine>(dimension);
  shift_.assign(static_cast<std::size_t>(dimension), 0);
  if (seed != 0) {
    Rng rng({seed, 0x50b01ULL});
    for (auto& s : shift_) s = rng.bits();
  }
}

SobolSequence::~SobolSequence() = default;
SobolSequence::SobolSequence(SobolSequence&&) noexcept = default;
SobolSequence& SobolSequence::operator=(SobolSequence&&) noexcept = default;

Eigen::VectorXd SobolSequence::next() {
  Eigen::VectorXd x(dimension_);
  for (int j = 0; j < dimension_; ++j) {
    const std::uint64_t raw = engine_->qrng() ^ shift_[static_cast<std::size_t>(j)];
    x(j) = static_cast<double>(raw >> 11) * 0x1.0p-53;
  }
  return x;
}

}  // namespace latentflow
