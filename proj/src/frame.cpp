#include "chiral/frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace chiral {

Eigen::Matrix3d AdaptedFrame::matrix(std::size_t i) const {
    Eigen::Matrix3d v;
    v.col(0) = tangent[i];
    v.col(1) = normal[i];
    v.col(2) = binormal[i];
    return v;
}

double AdaptedFrame::orthonormality_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const Vec3& t = tangent[i];
        const Vec3& n = normal[i];
        const Vec3& b = binormal[i];
        worst = std::max({worst, std::abs(t.norm() - 1.0), std::abs(n.norm() - 1.0),
                          std::abs(b.norm() - 1.0), std::abs(t.dot(n)), std::abs(t.dot(b)),
                          std::abs(n.dot(b)), (t.cross(n) - b).norm()});
    }
    return worst;
}

TangentJet tangent_jet(const Vec3& dp, const Vec3& ddp) {
    const double speed = dp.norm();
    if (!(speed > 0.0)) throw GeometryError("vanishing spine derivative");
    const Vec3 t = dp / speed;
    const Vec3 dt = (ddp - t.dot(ddp) * t) / speed;
    return {t, dt, speed};
}

void check_regularity(const SpineSpline& spine, const std::vector<double>& samples) {
    const double scale = spine.parameter_length();
    for (double s : samples) {
        const double speed = spine.eval(s).dp.norm();
        if (!(speed > 1e-12 * std::max(1.0, scale)) || !std::isfinite(speed)) {
            throw GeometryError("spine is not regular at parameter " + std::to_string(s));
        }
    }
}

namespace {

Vec3 orthonormalize_against(const Vec3& v, const Vec3& t) {
    Vec3 w = v - v.dot(t) * t;
    return w.normalized();
}

}  // namespace

AdaptedFrame build_rmf(const SpineSpline& spine, const std::vector<double>& samples,
                       const Vec3& reference_normal, const RmfOptions& options) {
    if (samples.empty()) throw GeometryError("build_rmf: no samples");
    if (options.oversampling < 1) throw std::invalid_argument("oversampling must be >= 1");
    check_regularity(spine, samples);

    // Refined parameter grid containing every sample.
    const int over = options.oversampling;
    std::vector<double> fine;
    fine.reserve((samples.size() - 1) * over + 1);
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        for (int j = 0; j < over; ++j) {
            fine.push_back(samples[i] + (samples[i + 1] - samples[i]) * j / over);
        }
    }
    fine.push_back(samples.back());

    std::vector<Vec3> x(fine.size()), t(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const SpinePoint sp = spine.eval(fine[i]);
        x[i] = sp.p;
        t[i] = sp.dp.normalized();
    }

    const double rnorm = reference_normal.norm();
    if (!(rnorm > 0.0)) throw GeometryError("reference normal must be nonzero");
    Vec3 r = reference_normal / rnorm;
    const double off = std::abs(r.dot(t[0]));
    if (off > options.orthogonality_tol) {
        throw GeometryError("reference normal is not orthogonal to the initial tangent (|r.t| = " +
                            std::to_string(off) + ")");
    }
    r = orthonormalize_against(r, t[0]);

    std::vector<Vec3> rf(fine.size());
    rf[0] = r;
    for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
        if (!(t[i].dot(t[i + 1]) > 0.0)) {
            throw GeometryError("tangent reversal between consecutive RMF samples near parameter " +
                                std::to_string(fine[i]));
        }
        const Vec3 v1 = x[i + 1] - x[i];
        const double c1 = v1.dot(v1);
        Vec3 rl = rf[i];
        Vec3 tl = t[i];
        if (c1 > 0.0) {
            rl = rf[i] - (2.0 / c1) * v1.dot(rf[i]) * v1;
            tl = t[i] - (2.0 / c1) * v1.dot(t[i]) * v1;
        }
        const Vec3 v2 = t[i + 1] - tl;
        const double c2 = v2.dot(v2);
        Vec3 next = rl;
        if (c2 > 0.0) next = rl - (2.0 / c2) * v2.dot(rl) * v2;
        rf[i + 1] = orthonormalize_against(next, t[i + 1]);
    }

    AdaptedFrame frame;
    frame.params = samples;
    frame.tangent.resize(samples.size());
    frame.normal.resize(samples.size());
    frame.binormal.resize(samples.size());
    frame.beta.assign(samples.size(), 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t j = i * over;
        frame.tangent[i] = t[j];
        frame.normal[i] = rf[j];
        frame.binormal[i] = t[j].cross(rf[j]);
    }
    return frame;
}

AdaptedFrame apply_twist(const AdaptedFrame& frame, const TwistSpline& twist) {
    AdaptedFrame out = frame;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const TwistPoint tp = twist.eval(frame.params[i]);
        const double c = std::cos(tp.theta);
        const double s = std::sin(tp.theta);
        out.normal[i] = c * frame.normal[i] + s * frame.binormal[i];
        out.binormal[i] = -s * frame.normal[i] + c * frame.binormal[i];
        out.beta[i] = frame.beta[i] + tp.dtheta;
    }
    out.twisted = true;
    return out;
}

AdaptedFrame update_frame(const AdaptedFrame& frame, const SpineSpline& spine,
                          const SpineSpline& displacement, const TwistSpline& phi,
                          double tol_flip) {
    AdaptedFrame out = frame;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const double s = frame.params[i];
        const SpinePoint sp = spine.eval(s);
        const SpinePoint hp = displacement.eval(s);
        const TwistPoint ph = phi.eval(s);

        const TangentJet old_jet = tangent_jet(sp.dp, sp.ddp);
        const TangentJet new_jet = tangent_jet(sp.dp + hp.dp, sp.ddp + hp.ddp);
        const Vec3& t = frame.tangent[i];
        const Vec3& dt = old_jet.dt;
        const Vec3& u = new_jet.t;
        const Vec3& du = new_jet.dt;

        // Twist increment in the old normal plane.
        const double cphi = std::cos(ph.theta);
        const double sphi = std::sin(ph.theta);
        const Vec3 n = cphi * frame.normal[i] + sphi * frame.binormal[i];
        const Vec3 b = -sphi * frame.normal[i] + cphi * frame.binormal[i];
        const double beta = frame.beta[i] + ph.dtheta;
        const Vec3 dn = beta * b - dt.dot(n) * t;
        const Vec3 db = -dt.dot(b) * t - beta * n;

        const double c = t.dot(u);
        if (!(1.0 + c > tol_flip)) {
            throw GeometryError("tangent flip in frame update at parameter " + std::to_string(s));
        }
        const Vec3 k = t.cross(u);
        const double ub = u.dot(b);
        const double un = u.dot(n);
        const double g = ub / (1.0 + c);

        Vec3 n_new = c * n - g * k - un * t;
        Vec3 b_new = c * b + un / (1.0 + c) * k - ub * t;

        // Derivative of n_new along the curve for the carried twist rate.
        const double dc = dt.dot(u) + t.dot(du);
        const Vec3 dk = dt.cross(u) + t.cross(du);
        const double dub = du.dot(b) + u.dot(db);
        const double dun = du.dot(n) + u.dot(dn);
        const double dg = (dub * (1.0 + c) - ub * dc) / ((1.0 + c) * (1.0 + c));
        const Vec3 dn_new = dc * n + c * dn - dg * k - g * dk - dun * t - un * dt;

        n_new = (n_new - n_new.dot(u) * u).normalized();
        b_new = u.cross(n_new);
        out.tangent[i] = u;
        out.normal[i] = n_new;
        out.binormal[i] = b_new;
        out.beta[i] = dn_new.dot(b_new);
    }
    out.twisted = true;
    return out;
}

double curvature(const SpineSpline& spine, double t) {
    const SpinePoint sp = spine.eval(t);
    const double speed = sp.dp.norm();
    if (!(speed > 0.0)) throw GeometryError("curvature: vanishing spine derivative");
    return sp.dp.cross(sp.ddp).norm() / (speed * speed * speed);
}

std::vector<double> twist_rate(const AdaptedFrame& frame) { return frame.beta; }

std::vector<double> finite_difference_twist_rate(const AdaptedFrame& frame) {
    const std::size_t m = frame.size();
    std::vector<double> out(m, 0.0);
    if (m < 3) return out;
    auto derivative = [&](std::size_t i0, std::size_t i1, std::size_t i2, std::size_t at) {
        // Three-point Lagrange derivative on a possibly nonuniform grid.
        const double x0 = frame.params[i0], x1 = frame.params[i1], x2 = frame.params[i2];
        const double x = frame.params[at];
        const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        return Vec3(l0 * frame.normal[i0] + l1 * frame.normal[i1] + l2 * frame.normal[i2]);
    };
    out[0] = derivative(0, 1, 2, 0).dot(frame.binormal[0]);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        out[i] = derivative(i - 1, i, i + 1, i).dot(frame.binormal[i]);
    }
    out[m - 1] = derivative(m - 3, m - 2, m - 1, m - 1).dot(frame.binormal[m - 1]);
    return out;
}

SimplicityReport check_simplicity(const SpineSpline& spine, const std::vector<double>& samples,
                                  double threshold) {
    const std::size_t m = samples.size();
    std::vector<Vec3> pts(m);
    std::vector<double> arc(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        pts[i] = spine.eval(samples[i]).p;
        if (i > 0) arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
    SimplicityReport report;
    report.min_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (arc[j] - arc[i] <= 3.0 * threshold) continue;
            report.min_distance = std::min(report.min_distance, (pts[i] - pts[j]).norm());
        }
    }
    report.simple = report.min_distance > threshold;
    return report;
}

}  // namespace chiral
