#pragma once

// Embedded Dormand-Prince 5(4) stepper with the standard quartic continuous
// extension (Hairer, Norsett & Wanner, "Solving ODE I", DOPD coefficients).
// State is the 4-component phase vector (x, y, px, py).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "morbit/model.hpp"

namespace morbit {

using Y4 = std::array<double, 4>;

inline Y4 operator+(const Y4& a, const Y4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Y4 operator-(const Y4& a, const Y4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Y4 operator*(double s, const Y4& a) {
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}

class StepSizeUnderflow : public Error {
  public:
    StepSizeUnderflow(double t)
        : Error("integrator: step size underflow at t = " + std::to_string(t)),
          t_fail(t) {}
    double t_fail;
};

class NonFiniteState : public Error {
  public:
    NonFiniteState(double t)
        : Error("integrator: non-finite state at t = " + std::to_string(t)),
          t_fail(t) {}
    double t_fail;
};

/// One accepted step together with its dense-output coefficients.
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    std::array<Y4, 5> rcont{};

    /// Interpolated state at t in [t0, t0+h].
    Y4 eval(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        Y4 y;
        for (int i = 0; i < 4; ++i) {
            y[i] = rcont[0][i] +
                   th * (rcont[1][i] +
                         th1 * (rcont[2][i] +
                                th * (rcont[3][i] + th1 * rcont[4][i])));
        }
        return y;
    }
};

/// Adaptive DOPRI5 driver. RHS is any callable (double t, const Y4&) -> Y4.
template <class RHS>
class Dopri5 {
  public:
    Dopri5(RHS f, double rtol, double atol) : f_(f), rtol_(rtol), atol_(atol) {}

    void init(double t0, const Y4& y0, double h_guess = 0.0) {
        t_ = t0;
        y_ = y0;
        k1_ = f_(t_, y_);
        n_accepted_ = n_rejected_ = 0;
        h_ = h_guess > 0.0 ? h_guess : initial_step();
    }

    double t() const { return t_; }
    const Y4& y() const { return y_; }
    long accepted() const { return n_accepted_; }
    long rejected() const { return n_rejected_; }

    /// Advance one accepted step (not past t_limit); returns dense coefficients.
    DenseStep step(double t_limit) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            double h = std::min(h_, t_limit - t_);
            const bool clipped = h < h_;
            if (h <= 1e2 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(t_), 1.0))
                throw StepSizeUnderflow(t_);

            const Y4 k1 = k1_;
            const Y4 k2 = f_(t_ + c2 * h, y_ + (h * a21) * k1);
            const Y4 k3 = f_(t_ + c3 * h, y_ + (h * a31) * k1 + (h * a32) * k2);
            const Y4 k4 = f_(t_ + c4 * h,
                             y_ + (h * a41) * k1 + (h * a42) * k2 + (h * a43) * k3);
            const Y4 k5 =
                f_(t_ + c5 * h, y_ + (h * a51) * k1 + (h * a52) * k2 +
                                    (h * a53) * k3 + (h * a54) * k4);
            const Y4 k6 =
                f_(t_ + h, y_ + (h * a61) * k1 + (h * a62) * k2 + (h * a63) * k3 +
                               (h * a64) * k4 + (h * a65) * k5);
            const Y4 y1 = y_ + (h * a71) * k1 + (h * a73) * k3 + (h * a74) * k4 +
                          (h * a75) * k5 + (h * a76) * k6;
            const Y4 k7 = f_(t_ + h, y1);

            // embedded error estimate
            double err = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                      e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc =
                    atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(y1[i]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / 4.0);

            if (!std::isfinite(err)) throw NonFiniteState(t_ + h);

            if (err <= 1.0) {
                DenseStep ds;
                ds.t0 = t_;
                ds.h = h;
                const Y4 dy = y1 - y_;
                ds.rcont[0] = y_;
                ds.rcont[1] = dy;
                ds.rcont[2] = h * k1 - dy;
                ds.rcont[3] = dy - h * k7 - ds.rcont[2];
                ds.rcont[4] = h * ((d1 * k1) + (d3 * k3) + (d4 * k4) +
                                   (d5 * k5) + (d6 * k6) + (d7 * k7));
                t_ += h;
                y_ = y1;
                k1_ = k7;  // FSAL
                ++n_accepted_;
                const double fac =
                    std::clamp(0.9 * std::pow(err > 1e-30 ? err : 1e-30, -0.2),
                               0.2, 5.0);
                if (!clipped) h_ = h * fac;
                return ds;
            }
            ++n_rejected_;
            h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
        }
        throw StepSizeUnderflow(t_);
    }

  private:
    double initial_step() const {
        double d0 = 0.0, d1n = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double sc = atol_ + rtol_ * std::abs(y_[i]);
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1n += (k1_[i] / sc) * (k1_[i] / sc);
        }
        d0 = std::sqrt(d0 / 4.0);
        d1n = std::sqrt(d1n / 4.0);
        double h0 = (d0 < 1e-10 || d1n < 1e-10) ? 1e-6 : 0.01 * d0 / d1n;
        return 0.1 * h0 + 1e-8;
    }

    RHS f_;
    double rtol_, atol_;
    double t_ = 0.0, h_ = 0.0;
    Y4 y_{}, k1_{};
    long n_accepted_ = 0, n_rejected_ = 0;

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                            a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;
};

}  // namespace morbit
