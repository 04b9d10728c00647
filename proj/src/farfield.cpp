#include "chiral/farfield.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>

namespace chiral {

cplx FarFieldSetup::prefactor() const {
    return cross_section.area() * (k * rho) * (k * rho) * (eps_r - 1.0);
}

const Eigen::MatrixXcd& HelicityBlocks::get(Helicity row, Helicity col) const {
    if (row == Helicity::Plus) return col == Helicity::Plus ? pp : pm;
    return col == Helicity::Plus ? mp : mm;
}

Eigen::MatrixXcd HelicityBlocks::reassemble() const {
    const Eigen::Index h = pp.rows();
    Eigen::MatrixXcd out(2 * h, 2 * h);
    out.topLeftCorner(h, h) = pp;
    out.topRightCorner(h, h) = pm;
    out.bottomLeftCorner(h, h) = mp;
    out.bottomRightCorner(h, h) = mm;
    return out;
}

FarFieldMatrix::FarFieldMatrix(Eigen::MatrixXcd entries, int max_degree)
    : entries_(std::move(entries)), N_(max_degree) {
    const int Q = 2 * max_degree * (max_degree + 2);
    if (entries_.rows() != Q || entries_.cols() != Q) {
        throw std::invalid_argument("far-field matrix must be Q x Q with Q = 2N(N+2)");
    }
    if (!entries_.allFinite()) throw std::runtime_error("non-finite far-field matrix entries");
}

HelicityBlocks FarFieldMatrix::blocks() const {
    const int h = half();
    return {entries_.topLeftCorner(h, h), entries_.topRightCorner(h, h),
            entries_.bottomLeftCorner(h, h), entries_.bottomRightCorner(h, h)};
}

HelicityBlocks blocks(const FarFieldMatrix& T) { return T.blocks(); }

double circumscribing_radius(const SpineSpline& spine, const std::vector<double>& samples) {
    double r = 0.0;
    for (double s : samples) r = std::max(r, spine.eval(s).p.norm());
    return r;
}

int default_degree(double k, double radius) {
    return std::max(1, static_cast<int>(std::ceil(k * radius)) + 1);
}

WireOperator::WireOperator(const SpineSpline& spine, const AdaptedFrame& frame,
                           const CurveQuadrature& quad, const FarFieldSetup& setup,
                           std::shared_ptr<const HerglotzBasis> basis)
    : setup_(setup), quad_(quad), basis_(std::move(basis)) {
    if (!basis_ || basis_->layout().max_degree() != setup_.max_degree ||
        basis_->wave_number() != setup_.k) {
        basis_ = std::make_shared<HerglotzBasis>(BasisLayout(setup_.max_degree), setup_.k);
    }
    const auto& nodes = quad_.nodes();
    if (frame.size() != nodes.size()) {
        throw GeometryError("frame is not sampled at the curve quadrature nodes");
    }
    m_ = cross_section_tensor(setup_.cross_section, setup_.eps_r, setup_.variant);
    const std::size_t count = nodes.size();
    points_.resize(count);
    dp_.resize(count);
    speed_.resize(count);
    frames_.resize(count);
    tensors_.resize(count);
    fields_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (frame.params[i] != nodes[i]) {
            throw GeometryError("frame samples differ from the curve quadrature nodes");
        }
        const SpinePoint sp = spine.eval(nodes[i]);
        points_[i] = sp.p;
        dp_[i] = sp.dp;
        speed_[i] = sp.dp.norm();
        frames_[i] = frame.matrix(i);
        tensors_[i] = polarization_tensor(frames_[i], m_).tensor;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
        fields_[i] = basis_->evaluate(points_[i]);
    }
}

FarFieldMatrix WireOperator::wrap(Eigen::MatrixXcd entries) const {
    FarFieldMatrix T(std::move(entries), setup_.max_degree);
    T.k = setup_.k;
    T.rho = setup_.rho;
    T.area = setup_.cross_section.area();
    T.eps_r = setup_.eps_r;
    double radius = 0.0;
    for (const auto& p : points_) radius = std::max(radius, p.norm());
    T.truncation_warning = setup_.max_degree < std::ceil(setup_.k * radius);
    return T;
}

FarFieldMatrix WireOperator::matrix() const {
    const int Q = basis_->layout().size();
    const std::size_t count = points_.size();
    // T = sum_i c_i E_i^H M_i E_i as one stacked product.
    Eigen::MatrixXcd lhs(3 * count, Q), rhs(3 * count, Q);
    const cplx C = setup_.prefactor();
    for (std::size_t i = 0; i < count; ++i) {
        const cplx c = C * quad_.weights()[i] * speed_[i];
        lhs.middleRows(3 * i, 3) = fields_[i].E;
        rhs.middleRows(3 * i, 3) = c * (tensors_[i] * fields_[i].E);
    }
    return wrap(lhs.adjoint() * rhs);
}

FarFieldMatrix WireOperator::derivative(const SpineSpline& h, const TwistSpline& phi) const {
    const int Q = basis_->layout().size();
    const cplx C = setup_.prefactor();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(Q, Q);
    const auto& nodes = quad_.nodes();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const SpinePoint hp = h.eval(nodes[i]);
        const TwistPoint tp = phi.eval(nodes[i]);
        const auto& f = fields_[i];
        const Eigen::Matrix3cd& M = tensors_[i];
        const double s = speed_[i];
        const cplx c = C * quad_.weights()[i];

        Eigen::MatrixXcd dEh = f.dE[0] * hp.p(0) + f.dE[1] * hp.p(1) + f.dE[2] * hp.p(2);
        const Eigen::Matrix3d dV = frame_derivative(frames_[i], s, hp.dp, tp.theta);
        const Eigen::Matrix3cd dM = polarization_tensor_derivative(frames_[i], dV, m_);
        const double stretch = dp_[i].dot(hp.dp) / s;

        const Eigen::MatrixXcd ME = M * f.E;
        out.noalias() += (c * s) * (dEh.adjoint() * ME);
        out.noalias() += (c * s) * (f.E.adjoint() * (dM * f.E));
        out.noalias() += (c * s) * (f.E.adjoint() * (M * dEh));
        out.noalias() += (c * stretch) * (f.E.adjoint() * ME);
    }
    return wrap(std::move(out));
}

Eigen::VectorXd WireOperator::contract(const Eigen::MatrixXcd& W) const {
    const auto& D0 = quad_.cardinal(0);
    const auto& D1 = quad_.cardinal(1);
    const Eigen::Index n = D0.cols();
    const std::size_t count = points_.size();
    const cplx C = setup_.prefactor();
    const Eigen::MatrixXcd Wc = W.conjugate();

    // Per-node sensitivities of Re<W, T'> with respect to h, h' and phi.
    Eigen::MatrixXd a(count, 3), b(count, 3);
    Eigen::VectorXd c(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(count); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const auto& f = fields_[i];
        const Eigen::Matrix3cd& M = tensors_[i];
        const double s = speed_[i];
        const cplx cw = C * quad_.weights()[i];

        const Eigen::MatrixXcd Y = f.E.conjugate() * Wc;       // 3 x Q
        const Eigen::MatrixXcd Z = Wc * f.E.transpose();       // Q x 3
        const Eigen::Matrix3cd G = Y * f.E.transpose();
        const cplx MG = M.cwiseProduct(G).sum();
        for (int l = 0; l < 3; ++l) {
            const Eigen::Matrix3cd G1 = f.dE[l].conjugate() * Z;
            const Eigen::Matrix3cd G3 = Y * f.dE[l].transpose();
            a(i, l) = (cw * s * M.cwiseProduct(G1 + G3).sum()).real();

            Vec3 e = Vec3::Zero();
            e(l) = 1.0;
            const Eigen::Matrix3cd dM = polarization_tensor_derivative(
                frames_[i], frame_derivative(frames_[i], s, e, 0.0), m_);
            b(i, l) = (cw * (s * dM.cwiseProduct(G).sum() + MG * (dp_[i](l) / s))).real();
        }
        const Eigen::Matrix3cd dMphi = polarization_tensor_derivative(
            frames_[i], frame_derivative(frames_[i], s, Vec3::Zero(), 1.0), m_);
        c(i) = (cw * s * dMphi.cwiseProduct(G).sum()).real();
    }

    Eigen::VectorXd grad(4 * n);
    for (int l = 0; l < 3; ++l) {
        grad.segment(l * n, n) = D0.transpose() * a.col(l) + D1.transpose() * b.col(l);
    }
    grad.segment(3 * n, n) = D0.transpose() * c;
    return grad;
}

FarFieldMatrix assemble_T(const SpineSpline& spine, const AdaptedFrame& frame,
                          const CurveQuadrature& quad, const FarFieldSetup& setup) {
    return WireOperator(spine, frame, quad, setup).matrix();
}

FarFieldMatrix assemble_T_derivative(const SpineSpline& spine, const AdaptedFrame& frame,
                                     const CurveQuadrature& quad, const FarFieldSetup& setup,
                                     const SpineSpline& h, const TwistSpline& phi) {
    return WireOperator(spine, frame, quad, setup).derivative(h, phi);
}

void write_matrix_dump(std::ostream& out, const FarFieldMatrix& T) {
    out << T.size() << ' ' << T.max_degree() << ' ' << std::setprecision(17) << T.k << ' '
        << T.rho << '\n';
    for (int r = 0; r < T.size(); ++r) {
        for (int c = 0; c < T.size(); ++c) {
            const cplx v = T.entries()(r, c);
            out << (c ? " " : "") << v.real() << ' ' << v.imag();
        }
        out << '\n';
    }
}

FarFieldMatrix read_matrix_dump(std::istream& in) {
    int Q = 0, N = 0;
    double k = 0.0, rho = 0.0;
    if (!(in >> Q >> N >> k >> rho)) throw std::runtime_error("malformed matrix dump header");
    Eigen::MatrixXcd e(Q, Q);
    for (int r = 0; r < Q; ++r) {
        for (int c = 0; c < Q; ++c) {
            double re = 0.0, im = 0.0;
            if (!(in >> re >> im)) throw std::runtime_error("truncated matrix dump");
            e(r, c) = {re, im};
        }
    }
    FarFieldMatrix T(std::move(e), N);
    T.k = k;
    T.rho = rho;
    return T;
}

}  // namespace chiral
