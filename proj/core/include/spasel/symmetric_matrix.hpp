#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

#include "spasel/errors.hpp"

namespace spasel {

// Symmetric matrix with either dense storage or a compressed-column lower
// triangle (diagonal included). Sparse storage arises from compactly
// supported tapers; entries outside the stored pattern are exact zeros.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  // Checks symmetry to absolute tolerance 1e-12 on stored entries.
  static SymmetricMatrix from_dense(Eigen::MatrixXd m);

  // `lower` must contain the diagonal and strictly-lower entries only.
  static SymmetricMatrix from_sparse_lower(Eigen::SparseMatrix<double> lower);

  bool is_sparse() const { return sparse_ != nullptr; }
  Eigen::Index order() const;

  const Eigen::MatrixXd& dense() const;
  const Eigen::SparseMatrix<double>& sparse_lower() const;

  Eigen::MatrixXd to_dense() const;
  double coeff(Eigen::Index i, Eigen::Index j) const;

  // Stored entries strictly below the diagonal; one per interacting pair.
  Eigen::Index stored_offdiagonal_count() const;

 private:
  Eigen::MatrixXd dense_;
  std::shared_ptr<const Eigen::SparseMatrix<double>> sparse_;
};

// Immutable Cholesky factorization handle, safe to share across threads.
// Dense inputs use a plain LL^T; sparse inputs use a simplicial LL^T with a
// fill-reducing (AMD) ordering, so A = P^T L L^T P with P the permutation.
class CholeskyFactor {
 public:
  Eigen::Index order() const;
  bool is_sparse() const;
  double log_det() const;

  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  // W = L^{-1} P B, so that W^T W = B^T A^{-1} B.
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& b) const;

  // P^T L z: maps iid standard normals to draws with covariance A.
  Eigen::VectorXd lower(const Eigen::VectorXd& z) const;

  // L^T P b, so that the squared norm is b^T A b.
  Eigen::MatrixXd lower_t(const Eigen::MatrixXd& b) const;

 private:
  friend CholeskyFactor factorize(const SymmetricMatrix& a);
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Throws NotPositiveDefinite (with the smallest pivot seen) on breakdown.
CholeskyFactor factorize(const SymmetricMatrix& a);

}  // namespace spasel
