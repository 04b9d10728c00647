#pragma once

#include "chiral/farfield.hpp"

#include <array>

namespace chiral {

class ChiralityDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum BlockId { kPP = 0, kPM = 1, kMP = 2, kMM = 3 };

struct ChiralityReport {
    double chi2 = 0.0;
    double chiHS = 0.0;
    double hs_norm = 0.0;
    double j2 = 0.0;
    double jHS = 0.0;
    std::array<Eigen::VectorXd, 4> singular_values;  // descending, per block
    std::array<double, 4> block_norms{};
};

ChiralityReport measure(const Eigen::MatrixXcd& T);
ChiralityReport measure(const FarFieldMatrix& T);

/// Smooth relaxation computed from block HS norms only.
double chi_hs(const Eigen::MatrixXcd& T);

/// Relative threshold for the block norms of the differentiability domain.
inline constexpr double kDomainTolerance = 1e-12;

/// Throws ChiralityDomainError unless chi_HS(G) > 0 and every block norm
/// exceeds kDomainTolerance * ||G||.
void require_domain(const Eigen::MatrixXcd& G);

/// Directional derivative of chi_HS at G in direction H.
double chiHS_derivative(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& H);

/// W with J_HS'[G] H = Re sum conj(W) H, J_HS = chi_HS / ||G||.
Eigen::MatrixXcd jHS_weight(const Eigen::MatrixXcd& G);

/// J_HS derivative for each supplied derivative matrix.
Eigen::VectorXd jHS_gradient(const FarFieldMatrix& T, const std::vector<FarFieldMatrix>& dT);

}  // namespace chiral
