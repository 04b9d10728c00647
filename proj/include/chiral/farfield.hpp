#pragma once

#include "chiral/frame.hpp"
#include "chiral/herglotz.hpp"
#include "chiral/material.hpp"

#include <iosfwd>
#include <memory>

namespace chiral {

/// Physical data entering the operator. Lengths (rho, spine coordinates)
/// and 1/k share one unit.
struct FarFieldSetup {
    double k = 0.0;
    double rho = 0.0;
    EllipticalCrossSection cross_section{0.5, 0.5};
    cplx eps_r{-1.0, 1.0};
    int max_degree = 1;
    TensorVariant variant = TensorVariant::Standard;

    /// |B'| (k rho)^2 (eps_r - 1).
    cplx prefactor() const;
};

struct HelicityBlocks {
    Eigen::MatrixXcd pp, pm, mp, mm;

    const Eigen::MatrixXcd& get(Helicity row, Helicity col) const;
    Eigen::MatrixXcd reassemble() const;
};

/// Q x Q matrix of the operator in the circularly polarized basis. Row q'
/// and column q hold <T basis_q, basis_q'>.
class FarFieldMatrix {
public:
    FarFieldMatrix() = default;
    FarFieldMatrix(Eigen::MatrixXcd entries, int max_degree);

    const Eigen::MatrixXcd& entries() const { return entries_; }
    int max_degree() const { return N_; }
    int size() const { return static_cast<int>(entries_.rows()); }
    int half() const { return size() / 2; }

    // Metadata, informational only.
    double k = 0.0;
    double rho = 0.0;
    double area = 0.0;
    cplx eps_r{0.0, 0.0};
    bool truncation_warning = false;

    HelicityBlocks blocks() const;
    double hs_norm() const { return entries_.norm(); }

private:
    Eigen::MatrixXcd entries_;
    int N_ = 0;
};

HelicityBlocks blocks(const FarFieldMatrix& T);

/// Radius of the smallest origin-centred ball containing the samples.
double circumscribing_radius(const SpineSpline& spine, const std::vector<double>& samples);

/// Rule-of-thumb truncation degree ceil(k R) + 1.
int default_degree(double k, double radius);

/// Wire geometry, polarization tensors and Herglotz fields at the curve
/// quadrature nodes. Everything the operator and its derivatives need is
/// computed once here.
class WireOperator {
public:
    WireOperator(const SpineSpline& spine, const AdaptedFrame& frame,
                 const CurveQuadrature& quad, const FarFieldSetup& setup,
                 std::shared_ptr<const HerglotzBasis> basis = nullptr);

    const FarFieldSetup& setup() const { return setup_; }
    const CurveQuadrature& quadrature() const { return quad_; }
    std::size_t nodes() const { return points_.size(); }

    FarFieldMatrix matrix() const;

    /// Directional derivative for a spine perturbation h and twist increment phi.
    FarFieldMatrix derivative(const SpineSpline& h, const TwistSpline& phi) const;

    /// Re <W, T'(e)> for every cardinal design direction e, ordered as
    /// [x knots, y knots, z knots, twist knots]. <A, B> = sum conj(A) B.
    Eigen::VectorXd contract(const Eigen::MatrixXcd& W) const;

private:
    FarFieldSetup setup_;
    CurveQuadrature quad_;
    std::shared_ptr<const HerglotzBasis> basis_;
    Eigen::Vector2cd m_;
    std::vector<Vec3> points_;
    std::vector<Vec3> dp_;
    std::vector<double> speed_;
    std::vector<Eigen::Matrix3d> frames_;
    std::vector<Eigen::Matrix3cd> tensors_;
    std::vector<HerglotzSample> fields_;

    FarFieldMatrix wrap(Eigen::MatrixXcd entries) const;
};

FarFieldMatrix assemble_T(const SpineSpline& spine, const AdaptedFrame& frame,
                          const CurveQuadrature& quad, const FarFieldSetup& setup);

FarFieldMatrix assemble_T_derivative(const SpineSpline& spine, const AdaptedFrame& frame,
                                     const CurveQuadrature& quad, const FarFieldSetup& setup,
                                     const SpineSpline& h, const TwistSpline& phi);

/// Plain-text dump: header line `Q N k rho`, then Q rows of `re im` pairs.
void write_matrix_dump(std::ostream& out, const FarFieldMatrix& T);
FarFieldMatrix read_matrix_dump(std::istream& in);

}  // namespace chiral
