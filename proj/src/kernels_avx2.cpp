// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernels, 4 doubles per lane. No FMA: per-point expressions use the
// same mul/add sequence as the scalar reference, so transform_points and
// nearest_index agree bit for bit; only reduction order differs.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "pointmatch/kernels.hpp"

namespace pointmatch::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void centroid_avx2(const double* x, const double* y, const double* z, std::size_t n,
                   double out[3]) {
    __m256d sx = _mm256_setzero_pd(), sy = _mm256_setzero_pd(), sz = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        sx = _mm256_add_pd(sx, _mm256_loadu_pd(x + i));
        sy = _mm256_add_pd(sy, _mm256_loadu_pd(y + i));
        sz = _mm256_add_pd(sz, _mm256_loadu_pd(z + i));
    }
    double tx = hsum(sx), ty = hsum(sy), tz = hsum(sz);
    for (; i < n; ++i) {
        tx += x[i];
        ty += y[i];
        tz += z[i];
    }
    out[0] = tx / double(n);
    out[1] = ty / double(n);
    out[2] = tz / double(n);
}

double sum_sq_paired_diff_avx2(const double* ax, const double* ay, const double* az,
                               const double* bx, const double* by, const double* bz,
                               std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(ax + i), _mm256_loadu_pd(bx + i));
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ay + i), _mm256_loadu_pd(by + i));
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(az + i), _mm256_loadu_pd(bz + i));
        const __m256d d2 = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
        acc = _mm256_add_pd(acc, d2);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double dx = ax[i] - bx[i];
        const double dy = ay[i] - by[i];
        const double dz = az[i] - bz[i];
        s += dx * dx + dy * dy + dz * dz;
    }
    return s;
}

void cross_covariance_avx2(const double* ax, const double* ay, const double* az,
                           const double* bx, const double* by, const double* bz, std::size_t n,
                           double out[9]) {
    __m256d acc[9];
    for (int k = 0; k < 9; ++k) acc[k] = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vax = _mm256_loadu_pd(ax + i);
        const __m256d vay = _mm256_loadu_pd(ay + i);
        const __m256d vaz = _mm256_loadu_pd(az + i);
        const __m256d vbx = _mm256_loadu_pd(bx + i);
        const __m256d vby = _mm256_loadu_pd(by + i);
        const __m256d vbz = _mm256_loadu_pd(bz + i);
        acc[0] = _mm256_add_pd(acc[0], _mm256_mul_pd(vax, vbx));
        acc[1] = _mm256_add_pd(acc[1], _mm256_mul_pd(vax, vby));
        acc[2] = _mm256_add_pd(acc[2], _mm256_mul_pd(vax, vbz));
        acc[3] = _mm256_add_pd(acc[3], _mm256_mul_pd(vay, vbx));
        acc[4] = _mm256_add_pd(acc[4], _mm256_mul_pd(vay, vby));
        acc[5] = _mm256_add_pd(acc[5], _mm256_mul_pd(vay, vbz));
        acc[6] = _mm256_add_pd(acc[6], _mm256_mul_pd(vaz, vbx));
        acc[7] = _mm256_add_pd(acc[7], _mm256_mul_pd(vaz, vby));
        acc[8] = _mm256_add_pd(acc[8], _mm256_mul_pd(vaz, vbz));
    }
    double s[9];
    for (int k = 0; k < 9; ++k) s[k] = hsum(acc[k]);
    for (; i < n; ++i) {
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

void transform_points_avx2(const double* x, const double* y, const double* z, std::size_t n,
                           const double r[9], const double t[3], double* ox, double* oy,
                           double* oz) {
    const __m256d r0 = _mm256_set1_pd(r[0]), r1 = _mm256_set1_pd(r[1]), r2 = _mm256_set1_pd(r[2]);
    const __m256d r3 = _mm256_set1_pd(r[3]), r4 = _mm256_set1_pd(r[4]), r5 = _mm256_set1_pd(r[5]);
    const __m256d r6 = _mm256_set1_pd(r[6]), r7 = _mm256_set1_pd(r[7]), r8 = _mm256_set1_pd(r[8]);
    const __m256d t0 = _mm256_set1_pd(t[0]), t1 = _mm256_set1_pd(t[1]), t2 = _mm256_set1_pd(t[2]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d px = _mm256_loadu_pd(x + i);
        const __m256d py = _mm256_loadu_pd(y + i);
        const __m256d pz = _mm256_loadu_pd(z + i);
        // same association as the scalar reference: ((px*r + py*r) + pz*r) + t
        const __m256d nx = _mm256_add_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(px, r0), _mm256_mul_pd(py, r3)),
                          _mm256_mul_pd(pz, r6)),
            t0);
        const __m256d ny = _mm256_add_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(px, r1), _mm256_mul_pd(py, r4)),
                          _mm256_mul_pd(pz, r7)),
            t1);
        const __m256d nz = _mm256_add_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(px, r2), _mm256_mul_pd(py, r5)),
                          _mm256_mul_pd(pz, r8)),
            t2);
        _mm256_storeu_pd(ox + i, nx);
        _mm256_storeu_pd(oy + i, ny);
        _mm256_storeu_pd(oz + i, nz);
    }
    for (; i < n; ++i) {
        const double px = x[i], py = y[i], pz = z[i];
        const double nx = px * r[0] + py * r[3] + pz * r[6] + t[0];
        const double ny = px * r[1] + py * r[4] + pz * r[7] + t[1];
        const double nz = px * r[2] + py * r[5] + pz * r[8] + t[2];
        ox[i] = nx;
        oy[i] = ny;
        oz[i] = nz;
    }
}

double sum_sq_transformed_diff_avx2(const double* ax, const double* ay, const double* az,
                                    std::size_t n, const double r[9], const double t[3],
                                    const double* bx, const double* by, const double* bz) {
    const __m256d r0 = _mm256_set1_pd(r[0]), r1 = _mm256_set1_pd(r[1]), r2 = _mm256_set1_pd(r[2]);
    const __m256d r3 = _mm256_set1_pd(r[3]), r4 = _mm256_set1_pd(r[4]), r5 = _mm256_set1_pd(r[5]);
    const __m256d r6 = _mm256_set1_pd(r[6]), r7 = _mm256_set1_pd(r[7]), r8 = _mm256_set1_pd(r[8]);
    const __m256d t0 = _mm256_set1_pd(t[0]), t1 = _mm256_set1_pd(t[1]), t2 = _mm256_set1_pd(t[2]);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d px = _mm256_loadu_pd(ax + i);
        const __m256d py = _mm256_loadu_pd(ay + i);
        const __m256d pz = _mm256_loadu_pd(az + i);
        const __m256d dx = _mm256_sub_pd(
            _mm256_add_pd(
                _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(px, r0), _mm256_mul_pd(py, r3)),
                              _mm256_mul_pd(pz, r6)),
                t0),
            _mm256_loadu_pd(bx + i));
        const __m256d dy = _mm256_sub_pd(
            _mm256_add_pd(
                _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(px, r1), _mm256_mul_pd(py, r4)),
                              _mm256_mul_pd(pz, r7)),
                t1),
            _mm256_loadu_pd(by + i));
        const __m256d dz = _mm256_sub_pd(
            _mm256_add_pd(
                _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(px, r2), _mm256_mul_pd(py, r5)),
                              _mm256_mul_pd(pz, r8)),
                t2),
            _mm256_loadu_pd(bz + i));
        const __m256d d2 = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
        acc = _mm256_add_pd(acc, d2);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double px = ax[i], py = ay[i], pz = az[i];
        const double dx = px * r[0] + py * r[3] + pz * r[6] + t[0] - bx[i];
        const double dy = px * r[1] + py * r[4] + pz * r[7] + t[1] - by[i];
        const double dz = px * r[2] + py * r[5] + pz * r[8] + t[2] - bz[i];
        s += dx * dx + dy * dy + dz * dz;
    }
    return s;
}

std::size_t nearest_index_avx2(double px, double py, double pz, const double* qx,
                               const double* qy, const double* qz, std::size_t nq,
                               double* best_d2) {
    const __m256d vpx = _mm256_set1_pd(px), vpy = _mm256_set1_pd(py), vpz = _mm256_set1_pd(pz);
    __m256d best = _mm256_set1_pd(__builtin_huge_val());
    __m256i bidx = _mm256_setzero_si256();
    __m256i idx = _mm256_set_epi64x(3, 2, 1, 0);
    const __m256i step = _mm256_set1_epi64x(4);
    std::size_t i = 0;
    for (; i + 4 <= nq; i += 4) {
        const __m256d dx = _mm256_sub_pd(vpx, _mm256_loadu_pd(qx + i));
        const __m256d dy = _mm256_sub_pd(vpy, _mm256_loadu_pd(qy + i));
        const __m256d dz = _mm256_sub_pd(vpz, _mm256_loadu_pd(qz + i));
        const __m256d d2 = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
        const __m256d lt = _mm256_cmp_pd(d2, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, d2, lt);
        bidx = _mm256_castpd_si256(
            _mm256_blendv_pd(_mm256_castsi256_pd(bidx), _mm256_castsi256_pd(idx), lt));
        idx = _mm256_add_epi64(idx, step);
    }
    double lane_d[4];
    long long lane_i[4];
    _mm256_storeu_pd(lane_d, best);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(lane_i), bidx);
    std::size_t bi = 0;
    double bd = __builtin_huge_val();
    // ties across lanes resolve to the lowest index, matching the scalar scan
    for (int l = 0; l < 4; ++l) {
        if (lane_d[l] < bd ||
            (lane_d[l] == bd && std::size_t(lane_i[l]) < bi)) {
            bd = lane_d[l];
            bi = std::size_t(lane_i[l]);
        }
    }
    for (; i < nq; ++i) {
        const double dx = px - qx[i], dy = py - qy[i], dz = pz - qz[i];
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < bd) {
            bd = d2;
            bi = i;
        }
    }
    if (best_d2) *best_d2 = bd;
    return bi;
}

}  // namespace

const Backend& avx2_backend() {
    static const Backend b{
        "avx2",
        centroid_avx2,
        sum_sq_paired_diff_avx2,
        cross_covariance_avx2,
        transform_points_avx2,
        sum_sq_transformed_diff_avx2,
        nearest_index_avx2,
    };
    return b;
}

}  // namespace pointmatch::kernels

#endif  // x86_64
