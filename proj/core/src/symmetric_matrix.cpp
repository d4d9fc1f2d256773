#include "spasel/symmetric_matrix.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <optional>
#include <utility>

namespace spasel {

SymmetricMatrix SymmetricMatrix::from_dense(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) throw InvalidParameter("symmetric matrix must be square");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12)) throw InvalidParameter("matrix not symmetric within 1e-12");
  SymmetricMatrix out;
  out.dense_ = std::move(m);
  return out;
}

SymmetricMatrix SymmetricMatrix::from_sparse_lower(Eigen::SparseMatrix<double> lower) {
  if (lower.rows() != lower.cols()) throw InvalidParameter("symmetric matrix must be square");
  lower.makeCompressed();
  for (int j = 0; j < lower.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(lower, j); it; ++it)
      if (it.row() < it.col()) throw InvalidParameter("sparse storage must be lower triangular");
  SymmetricMatrix out;
  out.sparse_ = std::make_shared<const Eigen::SparseMatrix<double>>(std::move(lower));
  return out;
}

Eigen::Index SymmetricMatrix::order() const {
  return is_sparse() ? sparse_->rows() : dense_.rows();
}

const Eigen::MatrixXd& SymmetricMatrix::dense() const {
  if (is_sparse()) throw InvalidParameter("dense() called on sparse matrix");
  return dense_;
}

const Eigen::SparseMatrix<double>& SymmetricMatrix::sparse_lower() const {
  if (!is_sparse()) throw InvalidParameter("sparse_lower() called on dense matrix");
  return *sparse_;
}

Eigen::MatrixXd SymmetricMatrix::to_dense() const {
  if (!is_sparse()) return dense_;
  Eigen::MatrixXd full = sparse_->toDense();
  Eigen::MatrixXd upper = full.transpose();
  upper.diagonal().setZero();
  return full + upper;
}

double SymmetricMatrix::coeff(Eigen::Index i, Eigen::Index j) const {
  if (!is_sparse()) return dense_(i, j);
  if (i < j) std::swap(i, j);
  return sparse_->coeff(i, j);
}

Eigen::Index SymmetricMatrix::stored_offdiagonal_count() const {
  if (!is_sparse()) {
    const Eigen::Index n = dense_.rows();
    return n * (n - 1) / 2;
  }
  Eigen::Index count = 0;
  for (int j = 0; j < sparse_->outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(*sparse_, j); it; ++it)
      if (it.row() > it.col()) ++count;
  return count;
}

namespace {

using SparseLLT =
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                         Eigen::AMDOrdering<int>>;

double dense_smallest_pivot(const Eigen::MatrixXd& a) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  return ldlt.vectorD().minCoeff();
}

}  // namespace

struct CholeskyFactor::Impl {
  std::optional<Eigen::LLT<Eigen::MatrixXd>> dense;
  std::unique_ptr<SparseLLT> sparse;
  std::shared_ptr<const Eigen::SparseMatrix<double>> sparse_input;  // keeps pattern alive
  double log_det = 0.0;
  Eigen::Index n = 0;
};

Eigen::Index CholeskyFactor::order() const { return impl_->n; }
bool CholeskyFactor::is_sparse() const { return impl_->sparse != nullptr; }
double CholeskyFactor::log_det() const { return impl_->log_det; }

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& b) const {
  if (impl_->sparse) return impl_->sparse->solve(b);
  return impl_->dense->solve(b);
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const {
  if (impl_->sparse) return impl_->sparse->solve(b);
  return impl_->dense->solve(b);
}

Eigen::MatrixXd CholeskyFactor::whiten(const Eigen::MatrixXd& b) const {
  if (!impl_->sparse) return impl_->dense->matrixL().solve(b);
  Eigen::MatrixXd pb = impl_->sparse->permutationP() * b;
  impl_->sparse->matrixL().solveInPlace(pb);
  return pb;
}

Eigen::VectorXd CholeskyFactor::lower(const Eigen::VectorXd& z) const {
  if (!impl_->sparse) return impl_->dense->matrixL() * z;
  const Eigen::SparseMatrix<double>& l = impl_->sparse->matrixL().nestedExpression();
  Eigen::VectorXd lz = l * z;
  return impl_->sparse->permutationPinv() * lz;
}

Eigen::MatrixXd CholeskyFactor::lower_t(const Eigen::MatrixXd& b) const {
  if (!impl_->sparse) return impl_->dense->matrixU() * b;
  const Eigen::SparseMatrix<double>& l = impl_->sparse->matrixL().nestedExpression();
  return l.transpose() * (impl_->sparse->permutationP() * b);
}

CholeskyFactor factorize(const SymmetricMatrix& a) {
  auto impl = std::make_shared<CholeskyFactor::Impl>();
  impl->n = a.order();
  if (!a.is_sparse()) {
    impl->dense.emplace(a.dense());
    if (impl->dense->info() != Eigen::Success)
      throw NotPositiveDefinite("dense Cholesky breakdown", dense_smallest_pivot(a.dense()));
    impl->log_det = 2.0 * impl->dense->matrixLLT().diagonal().array().log().sum();
  } else {
    impl->sparse_input = std::make_shared<const Eigen::SparseMatrix<double>>(a.sparse_lower());
    impl->sparse = std::make_unique<SparseLLT>();
    impl->sparse->compute(*impl->sparse_input);
    if (impl->sparse->info() != Eigen::Success)
      throw NotPositiveDefinite("sparse Cholesky breakdown", dense_smallest_pivot(a.to_dense()));
    const Eigen::SparseMatrix<double>& l = impl->sparse->matrixL().nestedExpression();
    double ld = 0.0;
    for (int j = 0; j < l.outerSize(); ++j) {
      Eigen::SparseMatrix<double>::InnerIterator it(l, j);
      ld += std::log(it.value());  // first stored entry per column is the diagonal
    }
    impl->log_det = 2.0 * ld;
  }
  CholeskyFactor f;
  f.impl_ = std::move(impl);
  return f;
}

}  // namespace spasel
