#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace spasel {

// Replicate-keyed generator: (seed, stream) fully determines the sequence,
// so replicate r of a simulation draws the same numbers no matter which
// worker thread runs it or in which order replicates are scheduled.
class ReplicateRng {
 public:
  ReplicateRng(std::uint64_t seed, std::uint64_t stream);

  double uniform();  // [0, 1)
  double normal();
  Eigen::VectorXd normals(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace spasel
