#include "spasel/rng.hpp"

namespace spasel {

ReplicateRng::ReplicateRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double ReplicateRng::uniform() { return uniform_(engine_); }

double ReplicateRng::normal() { return normal_(engine_); }

Eigen::VectorXd ReplicateRng::normals(Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal_(engine_);
  return z;
}

}  // namespace spasel
