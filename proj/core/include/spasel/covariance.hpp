#pragma once

#include "spasel/symmetric_matrix.hpp"
#include "spasel/types.hpp"

namespace spasel {

// Euclidean distances between all site pairs. Throws DegenerateSites when an
// off-diagonal distance falls below 1e-12.
SymmetricMatrix pairwise_distances(const SiteSet& sites);

// Dense exponential-with-nugget covariance on the given distances.
SymmetricMatrix build_covariance(const SymmetricMatrix& dists, const CovParams& params);

// Entrywise taper. `none` returns the input unchanged; `linear` multiplies by
// (1 - d/omega)_+ and stores only entries with positive taper weight, as a
// sparse lower triangle. Entries at d >= omega are exact zeros.
SymmetricMatrix apply_taper(const SymmetricMatrix& gamma, const SymmetricMatrix& dists,
                            const TaperSpec& taper);

// Tapered covariance assembled directly on the taper support, skipping the
// dense intermediate. Equals apply_taper(build_covariance(...)) entrywise.
SymmetricMatrix build_tapered_covariance(const SymmetricMatrix& dists, const CovParams& params,
                                         const TaperSpec& taper);

// Taper weight (1 - d/omega)_+ for the linear family, 1.0 for none.
double taper_weight(double distance, const TaperSpec& taper);

// Derivatives of the covariance with respect to (range, nugget, sigma2), in
// that order, on the same distances. Diagonals are sigma2-only.
enum class CovDerivative { range, nugget, sigma2 };
Eigen::MatrixXd covariance_derivative(const SymmetricMatrix& dists, const CovParams& params,
                                      CovDerivative which);

void validate_cov_params(const CovParams& params);
void validate_taper(const TaperSpec& taper);

}  // namespace spasel
