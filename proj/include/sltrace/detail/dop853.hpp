#pragma once

// Dormand-Prince 8(5,3) with Hairer's step-size control.
//
// The system is evaluated by node index rather than by abscissa alone, so
// systems with an oscillatory factor can precompute per-node rotations:
//   sys.anchor(x, y)           start of a step at (x, y)
//   sys.step_size(h)           the step about to be attempted
//   sys(node, x, y, dy)        derivative at node `node` (0..12) of the step,
//                              x = anchor + c[node] * h
// Node 0 is the anchor itself, node 12 is the step end.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "sltrace/errors.hpp"

namespace sltrace::detail {

namespace dop853c {
// clang-format off
inline constexpr std::array<double, 13> c{
    0.0,
    0.0,  // unused slot keeps node numbering aligned with Hairer's k1..k12
    0.526001519587677318785587544488e-01, 0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510e+00, 0.281649658092772603273242802490e+00,
    0.333333333333333333333333333333e+00, 0.25e+00,
    0.307692307692307692307692307692e+00, 0.651282051282051282051282051282e+00,
    0.6e+00, 0.857142857142857142857142857142e+00, 1.0};

inline constexpr double b1 = 5.42937341165687622380535766363e-2, b6 = 4.45031289275240888144113950566e0,
    b7 = 1.89151789931450038304281599044e0, b8 = -5.8012039600105847814672114227e0,
    b9 = 3.1116436695781989440891606237e-1, b10 = -1.52160949662516078556178806805e-1,
    b11 = 2.01365400804030348374776537501e-1, b12 = 4.47106157277725905176885569043e-2;

inline constexpr double a21 = 5.26001519587677318785587544488e-2,
    a31 = 1.97250569845378994544595329183e-2, a32 = 5.91751709536136983633785987549e-2,
    a41 = 2.95875854768068491816892993775e-2, a43 = 8.87627564304205475450678981324e-2,
    a51 = 2.41365134159266685502369798665e-1, a53 = -8.84549479328286085344864962717e-1,
    a54 = 9.24834003261792003115737966543e-1,
    a61 = 3.7037037037037037037037037037e-2, a64 = 1.70828608729473871279604482173e-1,
    a65 = 1.25467687566822425016691814123e-1,
    a71 = 3.7109375e-2, a74 = 1.70252211019544039314978060272e-1,
    a75 = 6.02165389804559606850219397283e-2, a76 = -1.7578125e-2,
    a81 = 3.70920001185047927108779319836e-2, a84 = 1.70383925712239993810214054705e-1,
    a85 = 1.07262030446373284651809199168e-1, a86 = -1.53194377486244017527936158236e-2,
    a87 = 8.27378916381402288758473766002e-3,
    a91 = 6.24110958716075717114429577812e-1, a94 = -3.36089262944694129406857109825e0,
    a95 = -8.68219346841726006818189891453e-1, a96 = 2.75920996994467083049415600797e1,
    a97 = 2.01540675504778934086186788979e1, a98 = -4.34898841810699588477366255144e1,
    a101 = 4.77662536438264365890433908527e-1, a104 = -2.48811461997166764192642586468e0,
    a105 = -5.90290826836842996371446475743e-1, a106 = 2.12300514481811942347288949897e1,
    a107 = 1.52792336328824235832596922938e1, a108 = -3.32882109689848629194453265587e1,
    a109 = -2.03312017085086261358222928593e-2,
    a111 = -9.3714243008598732571704021658e-1, a114 = 5.18637242884406370830023853209e0,
    a115 = 1.09143734899672957818500254654e0, a116 = -8.14978701074692612513997267357e0,
    a117 = -1.85200656599969598641566180701e1, a118 = 2.27394870993505042818970056734e1,
    a119 = 2.49360555267965238987089396762e0, a1110 = -3.0467644718982195003823669022e0,
    a121 = 2.27331014751653820792359768449e0, a124 = -1.05344954667372501984066689879e1,
    a125 = -2.00087205822486249909675718444e0, a126 = -1.79589318631187989172765950534e1,
    a127 = 2.79488845294199600508499808837e1, a128 = -2.85899827713502369474065508674e0,
    a129 = -8.87285693353062954433549289258e0, a1210 = 1.23605671757943030647266201528e1,
    a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00, bhh2 = 0.733846688281611857341361741547e+00,
    bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01, er6 = -0.1225156446376204440720569753e+01,
    er7 = -0.4957589496572501915214079952e+00, er8 = 0.1664377182454986536961530415e+01,
    er9 = -0.3503288487499736816886487290e+00, er10 = 0.3341791187130174790297318841e+00,
    er11 = 0.8192320648511571246570742613e-01, er12 = -0.2235530786388629525884427845e-01;
// clang-format on
} // namespace dop853c

struct Dop853Result {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double max_error_ratio = 0.0;  // largest accepted scaled error (<= 1)
};

/// Integrates y from x0 to x1 (either direction) with |h| <= hmax.
template <std::size_t N, class System>
Dop853Result dop853_integrate(System& sys, std::array<double, N>& y, double x0, double x1, double hmax,
                              double rel_tol, double abs_tol, std::size_t max_steps = 10'000'000) {
    using namespace dop853c;
    using State = std::array<double, N>;
    Dop853Result res;
    if (x0 == x1) return res;

    const double dir = x1 > x0 ? 1.0 : -1.0;
    const double uround = std::numeric_limits<double>::epsilon();
    double x = x0;
    double h = dir * hmax;
    State k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, w, ynew;

    sys.anchor(x, y);
    sys(0, x, y, k1);

    auto axpy = [&](auto&& combine) {
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * combine(i);
    };

    bool last = false;
    while (true) {
        if (res.accepted + res.rejected > max_steps) throw ToleranceFailure("DOP853: step budget exhausted");
        if (0.1 * std::abs(h) <= std::abs(x) * uround) throw ToleranceFailure("DOP853: step size underflow");
        if ((x + 1.01 * h - x1) * dir > 0.0) {
            h = x1 - x;
            last = true;
        }
        sys.step_size(h);

        axpy([&](std::size_t i) { return a21 * k1[i]; });
        sys(2, x + c[2] * h, w, k2);
        axpy([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
        sys(3, x + c[3] * h, w, k3);
        axpy([&](std::size_t i) { return a41 * k1[i] + a43 * k3[i]; });
        sys(4, x + c[4] * h, w, k4);
        axpy([&](std::size_t i) { return a51 * k1[i] + a53 * k3[i] + a54 * k4[i]; });
        sys(5, x + c[5] * h, w, k5);
        axpy([&](std::size_t i) { return a61 * k1[i] + a64 * k4[i] + a65 * k5[i]; });
        sys(6, x + c[6] * h, w, k6);
        axpy([&](std::size_t i) { return a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]; });
        sys(7, x + c[7] * h, w, k7);
        axpy([&](std::size_t i) { return a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] + a87 * k7[i]; });
        sys(8, x + c[8] * h, w, k8);
        axpy([&](std::size_t i) {
            return a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] + a97 * k7[i] + a98 * k8[i];
        });
        sys(9, x + c[9] * h, w, k9);
        axpy([&](std::size_t i) {
            return a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i] + a107 * k7[i] + a108 * k8[i] +
                   a109 * k9[i];
        });
        sys(10, x + c[10] * h, w, k10);
        axpy([&](std::size_t i) {
            return a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i] + a117 * k7[i] + a118 * k8[i] +
                   a119 * k9[i] + a1110 * k10[i];
        });
        sys(11, x + c[11] * h, w, k2);
        const double xph = x + h;
        axpy([&](std::size_t i) {
            return a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i] + a127 * k7[i] + a128 * k8[i] +
                   a129 * k9[i] + a1210 * k10[i] + a1211 * k2[i];
        });
        sys(12, xph, w, k3);

        double err = 0.0, err2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            k4[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] + b11 * k2[i] +
                    b12 * k3[i];
            ynew[i] = y[i] + h * k4[i];
            const double sk = 1.0 / (abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i])));
            double e = (k4[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k3[i]) * sk;
            err2 += e * e;
            e = (er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] + er10 * k10[i] +
                 er11 * k2[i] + er12 * k3[i]) *
                sk;
            err += e * e;
        }
        const double deno = err + 0.01 * err2;
        err = std::abs(h) * err * std::sqrt(1.0 / (deno <= 0.0 ? N : deno * N));

        // Hairer's controller: fac in [1/6, 3] of the inverse growth factor.
        const double fac11 = std::pow(err, 1.0 / 8.0);
        const double fac = std::max(1.0 / 6.0, std::min(3.0, fac11 / 0.9));
        double hnew = h / fac;
        if (!std::isfinite(err)) hnew = h / 6.0;

        if (err <= 1.0) {
            ++res.accepted;
            res.max_error_ratio = std::max(res.max_error_ratio, err);
            y = ynew;
            x = xph;
            if (last) return res;
            if (std::abs(hnew) > hmax) hnew = dir * hmax;
            sys.anchor(x, y);
            sys(0, x, y, k1);
            h = hnew;
        } else {
            ++res.rejected;
            last = false;
            h = h / std::min(3.0, fac11 / 0.9);
            if (!std::isfinite(h)) h = dir * hmax / 6.0;
        }
    }
}

} // namespace sltrace::detail
