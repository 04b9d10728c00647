#include "chiral/material.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace chiral {

double wave_number(double f_thz) {
    return 2.0 * std::numbers::pi * f_thz * 1e12 * std::sqrt(kEpsilon0 * kMu0);
}

double wavelength(double f_thz) { return 2.0 * std::numbers::pi / wave_number(f_thz); }

Metal parse_metal(const std::string& tag) {
    std::string t = tag;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "silver" || t == "ag") return Metal::Silver;
    if (t == "gold" || t == "au") return Metal::Gold;
    throw MaterialError("unknown metal '" + tag + "'");
}

std::string metal_name(Metal metal) { return metal == Metal::Silver ? "silver" : "gold"; }

PermittivityTable::PermittivityTable(Metal metal, std::vector<PermittivityRow> rows)
    : metal_(metal), rows_(std::move(rows)) {
    if (rows_.size() < 2) throw MaterialError("permittivity table needs at least two rows");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        if (i > 0 && !(r.f_thz > rows_[i - 1].f_thz)) {
            throw MaterialError("permittivity frequencies must be strictly increasing");
        }
        if (!(r.eps.real() < 0.0 && r.eps.imag() > 0.0)) {
            throw MaterialError("permittivity row at " + std::to_string(r.f_thz) +
                                " THz violates Re eps < 0 < Im eps");
        }
    }
}

const PermittivityTable& PermittivityTable::builtin(Metal metal) {
    static const PermittivityTable silver(
        Metal::Silver, {{300, {-50.55, 0.57}}, {350, {-36.23, 0.48}}, {400, {-26.94, 0.32}},
                        {450, {-20.57, 0.44}}, {500, {-16.05, 0.44}}, {550, {-12.62, 0.42}},
                        {600, {-9.78, 0.31}},  {650, {-7.64, 0.25}},  {700, {-5.94, 0.20}},
                        {750, {-4.41, 0.21}},  {800, {-3.10, 0.21}}});
    static const PermittivityTable gold(
        Metal::Gold, {{300, {-41.78, 2.94}}, {350, {-28.84, 1.77}}, {400, {-20.11, 1.24}},
                      {450, {-14.10, 1.04}}, {500, {-9.36, 1.53}},  {550, {-5.59, 2.19}},
                      {600, {-2.54, 3.65}},  {650, {-1.73, 5.06}},  {700, {-1.69, 5.66}},
                      {750, {-1.66, 5.74}},  {800, {-1.50, 5.63}}});
    return metal == Metal::Silver ? silver : gold;
}

std::map<Metal, PermittivityTable> PermittivityTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MaterialError("cannot open permittivity file " + path);
    std::string line;
    if (!std::getline(in, line)) throw MaterialError("empty permittivity file " + path);
    if (line.rfind("metal,f_THz,re_eps,im_eps", 0) != 0) {
        throw MaterialError("unexpected permittivity header: " + line);
    }
    std::map<Metal, std::vector<PermittivityRow>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string metal, f, re, im;
        if (!std::getline(ss, metal, ',') || !std::getline(ss, f, ',') ||
            !std::getline(ss, re, ',') || !std::getline(ss, im)) {
            throw MaterialError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
        try {
            rows[parse_metal(metal)].push_back({std::stod(f), {std::stod(re), std::stod(im)}});
        } catch (const std::invalid_argument&) {
            throw MaterialError(path + ":" + std::to_string(lineno) + ": not a number");
        }
    }
    std::map<Metal, PermittivityTable> out;
    for (auto& [metal, r] : rows) out.emplace(metal, PermittivityTable(metal, std::move(r)));
    return out;
}

cplx PermittivityTable::lookup(double f_thz) const {
    if (!(f_thz >= f_min() && f_thz <= f_max())) {
        throw MaterialError("frequency " + std::to_string(f_thz) + " THz outside table range [" +
                            std::to_string(f_min()) + ", " + std::to_string(f_max()) + "]");
    }
    auto it = std::lower_bound(rows_.begin(), rows_.end(), f_thz,
                               [](const PermittivityRow& r, double f) { return r.f_thz < f; });
    if (it->f_thz == f_thz) return it->eps;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (f_thz - lo.f_thz) / (hi.f_thz - lo.f_thz);
    return {lo.eps.real() + w * (hi.eps.real() - lo.eps.real()),
            lo.eps.imag() + w * (hi.eps.imag() - lo.eps.imag())};
}

cplx lookup_permittivity(Metal metal, double f_thz) {
    return PermittivityTable::builtin(metal).lookup(f_thz);
}

EllipticalCrossSection::EllipticalCrossSection(double a_, double b_) : a(a_), b(b_) {
    if (!(a > 0.0 && a <= b && b < 1.0)) {
        throw MaterialError("cross-section needs 0 < a <= b < 1");
    }
}

EllipticalCrossSection EllipticalCrossSection::from_aspect(double aspect) {
    if (!(aspect >= 1.0)) throw MaterialError("aspect ratio b/a must be >= 1");
    return {0.99 / aspect, 0.99};
}

double EllipticalCrossSection::area() const { return std::numbers::pi * a * b; }

Eigen::Vector2cd cross_section_tensor(const EllipticalCrossSection& cs, cplx eps_r,
                                      TensorVariant variant) {
    const double s = variant == TensorVariant::Standard ? 1.0 : -1.0;
    const cplx d1 = cs.a + s * eps_r * cs.b;
    const cplx d2 = cs.b + s * eps_r * cs.a;
    if (d1 == 0.0 || d2 == 0.0) throw MaterialError("singular cross-section tensor");
    return {(cs.a + cs.b) / d1, (cs.a + cs.b) / d2};
}

namespace {

void require_orthonormal(const Eigen::Matrix3d& v) {
    if ((v.transpose() * v - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
        throw GeometryError("frame matrix is not orthonormal");
    }
}

}  // namespace

PolarizationSample polarization_tensor(const Eigen::Matrix3d& frame, const Eigen::Vector2cd& m) {
    require_orthonormal(frame);
    const Eigen::Vector3cd diag(1.0, m(0), m(1));
    const Eigen::Matrix3cd v = frame.cast<cplx>();
    return {v * diag.asDiagonal() * v.transpose(), m};
}

Eigen::Matrix3d frame_derivative(const Eigen::Matrix3d& frame, double speed, const Vec3& dh,
                                 double phi) {
    const Vec3 t = frame.col(0);
    const Vec3 n = frame.col(1);
    const Vec3 b = frame.col(2);
    const double hn = dh.dot(n) / speed;
    const double hb = dh.dot(b) / speed;
    Eigen::Matrix3d dv;
    dv.col(0) = hn * n + hb * b;
    dv.col(1) = -hn * t + phi * b;
    dv.col(2) = -hb * t - phi * n;
    return dv;
}

Eigen::Matrix3cd polarization_tensor_derivative(const Eigen::Matrix3d& frame,
                                                const Eigen::Matrix3d& dframe,
                                                const Eigen::Vector2cd& m) {
    const Eigen::Vector3cd diag(1.0, m(0), m(1));
    const Eigen::Matrix3cd v = frame.cast<cplx>();
    const Eigen::Matrix3cd dv = dframe.cast<cplx>();
    const Eigen::Matrix3cd a = dv * diag.asDiagonal() * v.transpose();
    return a + a.transpose();
}

std::optional<double> plasmonic_resonance(const EllipticalCrossSection& cs, Metal metal) {
    return plasmonic_resonance(cs.aspect(), PermittivityTable::builtin(metal));
}

std::optional<double> plasmonic_resonance(double aspect, const PermittivityTable& table,
                                          double tol_thz) {
    auto g = [&](double f) { return table.lookup(f).real() + aspect; };
    const auto& rows = table.rows();
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        double lo = rows[i].f_thz, hi = rows[i + 1].f_thz;
        double glo = g(lo), ghi = g(hi);
        if (glo == 0.0) return lo;
        if (ghi == 0.0) {
            // Report the root once, from the segment whose lower end it is.
            if (i + 2 == rows.size()) return hi;
            continue;
        }
        if ((glo < 0.0) == (ghi < 0.0)) continue;
        while (hi - lo > tol_thz) {
            const double mid = 0.5 * (lo + hi);
            const double gm = g(mid);
            if (gm == 0.0) return mid;
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }
    return std::nullopt;
}

namespace {

double polar_angle_0_2pi(cplx z) {
    double a = std::arg(z);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
}

}  // namespace

double bound_phase(cplx eps_r) {
    const double alpha = polar_angle_0_2pi(std::conj(eps_r));
    const double beta = polar_angle_0_2pi(std::conj(eps_r - 1.0));
    return 1.5 * std::numbers::pi - 0.5 * (alpha + beta);
}

bool bound_phase_admissible(cplx eps_r, double gamma) {
    const cplx rot = std::polar(1.0, gamma);
    return gamma > 0.0 && gamma < 0.5 * std::numbers::pi && (rot * 1.0).real() > 0.0 &&
           (rot * std::conj(eps_r)).real() > 0.0 && (rot * std::conj(eps_r - 1.0)).real() < 0.0;
}

double imaginary_bound_ratio(const Eigen::Matrix3cd& M, cplx eps_r, const Vec3& xi) {
    const cplx c = std::conj(eps_r - 1.0);
    const Eigen::Matrix3d im = (c * M).imag();
    return xi.dot(im * xi) / c.imag();
}

double real_bound_ratio(const Eigen::Matrix3cd& M, cplx eps_r, double gamma, const Vec3& xi) {
    const cplx c = std::polar(1.0, gamma) * std::conj(eps_r - 1.0);
    const Eigen::Matrix3d re = (c * M).real();
    return xi.dot(re * xi) / c.real();
}

}  // namespace chiral
