#include "mia/numeric.hpp"

#include <cmath>

namespace mia {

// Rational Chebyshev approximations for erf/erfc from W. J. Cody,
// "Rational Chebyshev approximation for the error function",
// Math. Comp. 23 (1969), 631-638 -- the CALERF coefficient tables.
// Good to ~18 significant decimals in exact arithmetic; in IEEE double the
// realized error is a few ulps.
namespace {

constexpr double kA[5] = {3.16112374387056560e0, 1.13864154151050156e2,
                          3.77485237685302021e2, 3.20937758913846947e3,
                          1.85777706184603153e-1};
constexpr double kB[4] = {2.36012909523441209e1, 2.44024637934444173e2,
                          1.28261652607737228e3, 2.84423683343917062e3};
constexpr double kC[9] = {5.64188496988670089e-1, 8.88314979438837594e0,
                          6.61191906371416295e1,  2.98635138197400131e2,
                          8.81952221241769090e2,  1.71204761263407058e3,
                          2.05107837782607147e3,  1.23033935479799725e3,
                          2.15311535474403846e-8};
constexpr double kD[8] = {1.57449261107098347e1, 1.17693950891312499e2,
                          5.37181101862009858e2, 1.62138957456669019e3,
                          3.29079923573345963e3, 4.36261909014324716e3,
                          3.43936767414372164e3, 1.23033935480374942e3};
constexpr double kP[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                          1.25781726111229246e-1, 1.60837851487422766e-2,
                          6.58749161529837803e-4, 1.63153871373020978e-2};
constexpr double kQ[5] = {2.56852019228982242e0,  1.87295284992346047e0,
                          5.27905102951428412e-1, 6.05183413124413191e-2,
                          2.33520497626869185e-3};

constexpr double kInvSqrtPi = 5.6418958354775628695e-1;
constexpr double kThresh = 0.46875;
constexpr double kXSmall = 1.11e-16;
constexpr double kXBig = 26.543;  // erfc underflows beyond this

// exp(-y^2) split as exp(-ysq^2) * exp(-(y-ysq)(y+ysq)) with ysq a 1/16
// truncation of y, avoiding the cancellation in forming y*y directly.
double exp_neg_square(double y) {
    const double ysq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq) * (y + ysq);
    return std::exp(-ysq * ysq) * std::exp(-del);
}

}  // namespace

double erfc_cody(double x) {
    const double y = std::fabs(x);

    if (y <= kThresh) {
        // erfc = 1 - erf with erf from the [0, 0.46875] rational form.
        const double z = (y > kXSmall) ? y * y : 0.0;
        double num = kA[4] * z;
        double den = z;
        for (int i = 0; i < 3; ++i) {
            num = (num + kA[i]) * z;
            den = (den + kB[i]) * z;
        }
        const double erf = x * (num + kA[3]) / (den + kB[3]);
        return 1.0 - erf;
    }

    double result;
    if (y <= 4.0) {
        double num = kC[8] * y;
        double den = y;
        for (int i = 0; i < 7; ++i) {
            num = (num + kC[i]) * y;
            den = (den + kD[i]) * y;
        }
        result = (num + kC[7]) / (den + kD[7]);
        result *= exp_neg_square(y);
    } else if (y < kXBig) {
        const double ysq = 1.0 / (y * y);
        double num = kP[5] * ysq;
        double den = ysq;
        for (int i = 0; i < 4; ++i) {
            num = (num + kP[i]) * ysq;
            den = (den + kQ[i]) * ysq;
        }
        result = ysq * (num + kP[4]) / (den + kQ[4]);
        result = (kInvSqrtPi - result) / y;
        result *= exp_neg_square(y);
    } else {
        result = 0.0;
    }

    return (x < 0.0) ? 2.0 - result : result;
}

double normal_cdf(double z) { return 0.5 * erfc_cody(-z * M_SQRT1_2); }

}  // namespace mia
