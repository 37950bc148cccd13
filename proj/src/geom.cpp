// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "pointmatch/kernels.hpp"

namespace pointmatch {
namespace {

constexpr double kPi = 3.14159265358979323846264338328;

double wrap_pi(double a) {
    // into [-pi, pi)
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

}  // namespace

PointSet PointSet::make(Coords coords, std::vector<std::string> ids) {
    if (coords.empty()) throw Error("PointSet: at least one point required");
    if (coords.size() != ids.size()) throw Error("PointSet: ids/points size mismatch");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const Vec3 p = coords.at(i);
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw Error("PointSet: non-finite coordinate for id '" + ids[i] + "'");
        if (!seen.insert(ids[i]).second) throw Error("PointSet: duplicate id '" + ids[i] + "'");
    }
    PointSet ps;
    ps.coords = std::move(coords);
    ps.ids = std::move(ids);
    return ps;
}

EulerAngles EulerAngles::normalized(double t12, double t13, double t23) {
    t13 = wrap_pi(t13);
    if (t13 > kPi / 2.0) {
        t13 = kPi - t13;
        t12 += kPi;
        t23 += kPi;
    } else if (t13 < -kPi / 2.0) {
        t13 = -kPi - t13;
        t12 += kPi;
        t23 += kPi;
    }
    return {wrap_pi(t12), t13, wrap_pi(t23)};
}

bool EulerAngles::in_range() const {
    return theta12 >= -kPi && theta12 < kPi && theta13 >= -kPi / 2.0 && theta13 <= kPi / 2.0 &&
           theta23 >= -kPi && theta23 < kPi;
}

bool RigidTransform::is_rotation(double tol) const {
    const Mat3 g = rotation.transpose() * rotation;
    if (g.max_abs_diff(Mat3::identity()) > tol) return false;
    return std::abs(rotation.det() - 1.0) <= tol;
}

RigidTransform RigidTransform::compose_after(const RigidTransform& first) const {
    // (p * R1 + t1) * R2 + t2 = p * (R1 R2) + (t1 * R2 + t2)
    RigidTransform r;
    r.rotation = first.rotation * rotation;
    r.translation = rotation.apply_row(first.translation) + translation;
    return r;
}

Coords center(const Coords& ps) {
    if (ps.empty()) throw Error("center: empty point set");
    double c[3];
    kernels::active().centroid(ps.x(), ps.y(), ps.z(), ps.size(), c);
    Coords out(ps.size());
    const double r[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const double t[3] = {-c[0], -c[1], -c[2]};
    kernels::active().transform_points(ps.x(), ps.y(), ps.z(), ps.size(), r, t, out.x(), out.y(),
                                       out.z());
    return out;
}

PointSet center(const PointSet& ps) {
    PointSet out = ps;
    out.coords = center(ps.coords);
    return out;
}

Mat3 rot_x(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat3 r = Mat3::identity();
    r(1, 1) = c;
    r(1, 2) = s;
    r(2, 1) = -s;
    r(2, 2) = c;
    return r;
}

Mat3 rot_y(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat3 r = Mat3::identity();
    r(0, 0) = c;
    r(0, 2) = s;
    r(2, 0) = -s;
    r(2, 2) = c;
    return r;
}

Mat3 rot_z(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat3 r = Mat3::identity();
    r(0, 0) = c;
    r(0, 1) = s;
    r(1, 0) = -s;
    r(1, 1) = c;
    return r;
}

Mat3 euler_to_matrix(const EulerAngles& a) {
    return rot_z(a.theta12) * rot_y(a.theta13) * rot_x(a.theta23);
}

EulerAngles matrix_to_euler(const Mat3& r) {
    // From the closed form of Rz(a) Ry(b) Rx(c):
    //   r(2,0) = -sin b,  r(0,0) = cos a cos b,  r(1,0) = -sin a cos b,
    //   r(2,1) = -cos b sin c,  r(2,2) = cos b cos c.
    const double sb = std::clamp(-r(2, 0), -1.0, 1.0);
    const double t13 = std::asin(sb);
    if (std::abs(sb) > 1.0 - 1e-12) {
        // gimbal lock: only a +/- c is determined; fix c = 0
        // r(0,1) = -ca sb sc + sa cc -> sa ;  r(1,1) = sa sb sc + ca cc -> ca  (at c = 0)
        const double t12 = std::atan2(r(0, 1), r(1, 1));
        return EulerAngles::normalized(t12, t13, 0.0);
    }
    const double t12 = std::atan2(-r(1, 0), r(0, 0));
    const double t23 = std::atan2(-r(2, 1), r(2, 2));
    return EulerAngles::normalized(t12, t13, t23);
}

double haar_log_density(const EulerAngles& a) {
    if (std::abs(a.theta13) >= kPi / 2.0) return -std::numeric_limits<double>::infinity();
    const double c = std::cos(a.theta13);
    if (c <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(c) - std::log(8.0 * kPi * kPi);
}

SymEig4 jacobi_eigen_sym4(const double a_in[4][4]) {
    double a[4][4];
    double v[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = a_in[i][j];

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 4; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 4; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    int order[4] = {0, 1, 2, 3};
    std::sort(order, order + 4, [&](int i, int j) { return a[i][i] > a[j][j]; });
    SymEig4 out{};
    for (int j = 0; j < 4; ++j) {
        out.values[j] = a[order[j]][order[j]];
        for (int i = 0; i < 4; ++i) out.vectors[i][j] = v[i][order[j]];
    }
    return out;
}

namespace {

/// Rotation matrix of a unit quaternion (w, x, y, z) acting on column vectors.
Mat3 quat_to_matrix_col(double w, double x, double y, double z) {
    Mat3 r;
    r(0, 0) = 1 - 2 * (y * y + z * z);
    r(0, 1) = 2 * (x * y - w * z);
    r(0, 2) = 2 * (x * z + w * y);
    r(1, 0) = 2 * (x * y + w * z);
    r(1, 1) = 1 - 2 * (x * x + z * z);
    r(1, 2) = 2 * (y * z - w * x);
    r(2, 0) = 2 * (x * z - w * y);
    r(2, 1) = 2 * (y * z + w * x);
    r(2, 2) = 1 - 2 * (x * x + y * y);
    return r;
}

/// Maximizer of trace(Gamma^T S) over SO(3) via the quaternion form
/// trace(R_q S) = q^T D(S) q; the top eigenvector of D gives R_q = Gamma^T.
/// Always a proper rotation, so a reflecting unconstrained optimum falls back
/// to the best rotation automatically (the optimally-signed decomposition).
/// The eigenvalue gap lambda1 - lambda2 equals 2(l2 + l3) in terms of the
/// signed singular values, hence a zero gap is exactly the degenerate case.
struct RotationSolve {
    Mat3 gamma;
    bool degenerate;
};

RotationSolve optimal_rotation(const double s[9]) {
    const double s11 = s[0], s12 = s[1], s13 = s[2];
    const double s21 = s[3], s22 = s[4], s23 = s[5];
    const double s31 = s[6], s32 = s[7], s33 = s[8];
    const double d[4][4] = {
        {s11 + s22 + s33, s23 - s32, s31 - s13, s12 - s21},
        {s23 - s32, s11 - s22 - s33, s12 + s21, s13 + s31},
        {s31 - s13, s12 + s21, -s11 + s22 - s33, s23 + s32},
        {s12 - s21, s13 + s31, s23 + s32, -s11 - s22 + s33},
    };
    const SymEig4 eig = jacobi_eigen_sym4(d);
    const double w = eig.vectors[0][0], x = eig.vectors[1][0], y = eig.vectors[2][0],
                 zq = eig.vectors[3][0];
    double scale = 0.0;
    for (int k = 0; k < 9; ++k) scale = std::max(scale, std::abs(s[k]));
    const double gap = eig.values[0] - eig.values[1];
    RotationSolve out;
    out.gamma = quat_to_matrix_col(w, x, y, zq).transpose();
    out.degenerate = gap <= 1e-9 * std::max(1.0, scale);
    return out;
}

}  // namespace

ProcrustesFit partial_procrustes(const Coords& source, const Coords& target) {
    const std::size_t p = source.size();
    if (p == 0) throw Error("partial_procrustes: empty point sets");
    if (target.size() != p) throw Error("partial_procrustes: size mismatch");

    const auto& k = kernels::active();
    double cs[3], ct[3];
    k.centroid(source.x(), source.y(), source.z(), p, cs);
    k.centroid(target.x(), target.y(), target.z(), p, ct);

    Coords a(p), b(p);
    const double ident[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const double tneg_s[3] = {-cs[0], -cs[1], -cs[2]};
    const double tneg_t[3] = {-ct[0], -ct[1], -ct[2]};
    k.transform_points(source.x(), source.y(), source.z(), p, ident, tneg_s, a.x(), a.y(), a.z());
    k.transform_points(target.x(), target.y(), target.z(), p, ident, tneg_t, b.x(), b.y(), b.z());

    double s[9];
    k.cross_covariance(a.x(), a.y(), a.z(), b.x(), b.y(), b.z(), p, s);
    const RotationSolve rs = optimal_rotation(s);

    ProcrustesFit fit;
    fit.rotation = rs.gamma;
    fit.degenerate = rs.degenerate;
    const Vec3 csv{cs[0], cs[1], cs[2]}, ctv{ct[0], ct[1], ct[2]};
    fit.translation = ctv - fit.rotation.apply_row(csv);

    fit.fitted = Coords(p);
    double r9[9];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r9[i * 3 + j] = fit.rotation(i, j);
    const double tr[3] = {fit.translation.x, fit.translation.y, fit.translation.z};
    k.transform_points(source.x(), source.y(), source.z(), p, r9, tr, fit.fitted.x(),
                       fit.fitted.y(), fit.fitted.z());
    fit.distance = std::sqrt(std::max(
        0.0, k.sum_sq_paired_diff(fit.fitted.x(), fit.fitted.y(), fit.fitted.z(), target.x(),
                                  target.y(), target.z(), p)));
    return fit;
}

Coords apply_transform(const Coords& ps, const RigidTransform& t) {
    Coords out(ps.size());
    double r9[9];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r9[i * 3 + j] = t.rotation(i, j);
    const double tr[3] = {t.translation.x, t.translation.y, t.translation.z};
    kernels::active().transform_points(ps.x(), ps.y(), ps.z(), ps.size(), r9, tr, out.x(), out.y(),
                                       out.z());
    return out;
}

PointSet apply_transform(const PointSet& ps, const RigidTransform& t) {
    PointSet out = ps;
    out.coords = apply_transform(ps.coords, t);
    return out;
}

}  // namespace pointmatch
