// SPDX-License-Identifier: Apache-2.0
//
// Reference kernels. Plain loops, no intrinsics; compiled with
// -ffp-contract=off so per-point arithmetic matches the SIMD variants
// operation for operation.

#include "pointmatch/kernels.hpp"

namespace pointmatch::kernels {
namespace {

void centroid_scalar(const double* x, const double* y, const double* z, std::size_t n,
                     double out[3]) {
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sz += z[i];
    }
    out[0] = sx / double(n);
    out[1] = sy / double(n);
    out[2] = sz / double(n);
}

double sum_sq_paired_diff_scalar(const double* ax, const double* ay, const double* az,
                                 const double* bx, const double* by, const double* bz,
                                 std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = ax[i] - bx[i];
        const double dy = ay[i] - by[i];
        const double dz = az[i] - bz[i];
        s += dx * dx + dy * dy + dz * dz;
    }
    return s;
}

void cross_covariance_scalar(const double* ax, const double* ay, const double* az,
                             const double* bx, const double* by, const double* bz, std::size_t n,
                             double out[9]) {
    double s[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        s[0] += ax[i] * bx[i];
        s[1] += ax[i] * by[i];
        s[2] += ax[i] * bz[i];
        s[3] += ay[i] * bx[i];
        s[4] += ay[i] * by[i];
        s[5] += ay[i] * bz[i];
        s[6] += az[i] * bx[i];
        s[7] += az[i] * by[i];
        s[8] += az[i] * bz[i];
    }
    for (int k = 0; k < 9; ++k) out[k] = s[k];
}

void transform_points_scalar(const double* x, const double* y, const double* z, std::size_t n,
                             const double r[9], const double t[3], double* ox, double* oy,
                             double* oz) {
    for (std::size_t i = 0; i < n; ++i) {
        const double px = x[i], py = y[i], pz = z[i];
        const double nx = px * r[0] + py * r[3] + pz * r[6] + t[0];
        const double ny = px * r[1] + py * r[4] + pz * r[7] + t[1];
        const double nz = px * r[2] + py * r[5] + pz * r[8] + t[2];
        ox[i] = nx;
        oy[i] = ny;
        oz[i] = nz;
    }
}

double sum_sq_transformed_diff_scalar(const double* ax, const double* ay, const double* az,
                                      std::size_t n, const double r[9], const double t[3],
                                      const double* bx, const double* by, const double* bz) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double px = ax[i], py = ay[i], pz = az[i];
        const double dx = px * r[0] + py * r[3] + pz * r[6] + t[0] - bx[i];
        const double dy = px * r[1] + py * r[4] + pz * r[7] + t[1] - by[i];
        const double dz = px * r[2] + py * r[5] + pz * r[8] + t[2] - bz[i];
        s += dx * dx + dy * dy + dz * dz;
    }
    return s;
}

std::size_t nearest_index_scalar(double px, double py, double pz, const double* qx,
                                 const double* qy, const double* qz, std::size_t nq,
                                 double* best_d2) {
    std::size_t best = 0;
    double bd = 0.0;
    {
        const double dx = px - qx[0], dy = py - qy[0], dz = pz - qz[0];
        bd = dx * dx + dy * dy + dz * dz;
    }
    for (std::size_t j = 1; j < nq; ++j) {
        const double dx = px - qx[j], dy = py - qy[j], dz = pz - qz[j];
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < bd) {
            bd = d2;
            best = j;
        }
    }
    if (best_d2) *best_d2 = bd;
    return best;
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend b{
        "scalar",
        centroid_scalar,
        sum_sq_paired_diff_scalar,
        cross_covariance_scalar,
        transform_points_scalar,
        sum_sq_transformed_diff_scalar,
        nearest_index_scalar,
    };
    return b;
}

}  // namespace pointmatch::kernels
