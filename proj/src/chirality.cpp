#include "chiral/chirality.hpp"

#include <cmath>

namespace chiral {

namespace {

std::array<Eigen::MatrixXcd, 4> split(const Eigen::MatrixXcd& T) {
    if (T.rows() != T.cols() || T.rows() % 2 != 0) {
        throw std::invalid_argument("chirality measures need a square matrix of even size");
    }
    const Eigen::Index h = T.rows() / 2;
    return {T.topLeftCorner(h, h), T.topRightCorner(h, h), T.bottomLeftCorner(h, h),
            T.bottomRightCorner(h, h)};
}

double pair_distance(double a, double b) { return (a - b) * (a - b); }

}  // namespace

ChiralityReport measure(const Eigen::MatrixXcd& T) {
    const auto blk = split(T);
    ChiralityReport r;
    for (int i = 0; i < 4; ++i) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(blk[i]);
        if (svd.info() != Eigen::Success) throw std::runtime_error("block SVD did not converge");
        r.singular_values[i] = svd.singularValues();
        r.block_norms[i] = blk[i].norm();
    }
    r.hs_norm = T.norm();
    r.chi2 = std::sqrt((r.singular_values[kPP] - r.singular_values[kMM]).squaredNorm() +
                       (r.singular_values[kPM] - r.singular_values[kMP]).squaredNorm());
    r.chiHS = std::sqrt(pair_distance(r.block_norms[kPP], r.block_norms[kMM]) +
                        pair_distance(r.block_norms[kPM], r.block_norms[kMP]));
    if (r.hs_norm > 0.0) {
        r.j2 = r.chi2 / r.hs_norm;
        r.jHS = r.chiHS / r.hs_norm;
    }
    return r;
}

ChiralityReport measure(const FarFieldMatrix& T) { return measure(T.entries()); }

double chi_hs(const Eigen::MatrixXcd& T) {
    const auto blk = split(T);
    return std::sqrt(pair_distance(blk[kPP].norm(), blk[kMM].norm()) +
                     pair_distance(blk[kPM].norm(), blk[kMP].norm()));
}

void require_domain(const Eigen::MatrixXcd& G) {
    const auto blk = split(G);
    const double total = G.norm();
    for (const auto& b : blk) {
        if (!(b.norm() > kDomainTolerance * total)) {
            throw ChiralityDomainError("a helicity block of the far-field matrix vanishes");
        }
    }
    if (!(chi_hs(G) > 0.0)) throw ChiralityDomainError("far-field matrix is achiral (chi_HS = 0)");
}

namespace {

// G - sum_cd r_cd G^cd, r_cd = |G^{c'd'}| / |G^cd| with (c'd') the mirrored block.
Eigen::MatrixXcd chi_direction(const Eigen::MatrixXcd& G) {
    const auto blk = split(G);
    const std::array<double, 4> nrm{blk[0].norm(), blk[1].norm(), blk[2].norm(), blk[3].norm()};
    const Eigen::Index h = G.rows() / 2;
    Eigen::MatrixXcd D = G;
    D.topLeftCorner(h, h) *= 1.0 - nrm[kMM] / nrm[kPP];
    D.bottomRightCorner(h, h) *= 1.0 - nrm[kPP] / nrm[kMM];
    D.topRightCorner(h, h) *= 1.0 - nrm[kMP] / nrm[kPM];
    D.bottomLeftCorner(h, h) *= 1.0 - nrm[kPM] / nrm[kMP];
    return D;
}

}  // namespace

double chiHS_derivative(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& H) {
    require_domain(G);
    return chi_direction(G).cwiseProduct(H.conjugate()).sum().real() / chi_hs(G);
}

Eigen::MatrixXcd jHS_weight(const Eigen::MatrixXcd& G) {
    require_domain(G);
    const double chi = chi_hs(G);
    const double nrm = G.norm();
    return chi_direction(G) / (chi * nrm) - G * (chi / (nrm * nrm * nrm));
}

Eigen::VectorXd jHS_gradient(const FarFieldMatrix& T, const std::vector<FarFieldMatrix>& dT) {
    const Eigen::MatrixXcd W = jHS_weight(T.entries());
    Eigen::VectorXd g(static_cast<Eigen::Index>(dT.size()));
    for (std::size_t i = 0; i < dT.size(); ++i) {
        g(static_cast<Eigen::Index>(i)) = W.conjugate().cwiseProduct(dT[i].entries()).sum().real();
    }
    return g;
}

}  // namespace chiral
