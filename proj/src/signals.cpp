#include "mmck/signals.hpp"

#include "mmck/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace mmck {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTwoThirdsPi = kTwoPi / 3.0;
} // namespace

Dq abc_to_dq(const Abc& x, double theta) {
    const double ca = std::cos(theta);
    const double cb = std::cos(theta - kTwoThirdsPi);
    const double cc = std::cos(theta + kTwoThirdsPi);
    const double sa = std::sin(theta);
    const double sb = std::sin(theta - kTwoThirdsPi);
    const double sc = std::sin(theta + kTwoThirdsPi);
    Dq out;
    out.d = (2.0 / 3.0) * (x[0] * ca + x[1] * cb + x[2] * cc);
    out.q = -(2.0 / 3.0) * (x[0] * sa + x[1] * sb + x[2] * sc);
    return out;
}

Abc dq_to_abc(const Dq& x, double theta) {
    const double ca = std::cos(theta);
    const double cb = std::cos(theta - kTwoThirdsPi);
    const double cc = std::cos(theta + kTwoThirdsPi);
    const double sa = std::sin(theta);
    const double sb = std::sin(theta - kTwoThirdsPi);
    const double sc = std::sin(theta + kTwoThirdsPi);
    return {x.d * ca - x.q * sa, x.d * cb - x.q * sb, x.d * cc - x.q * sc};
}

Dq power_to_current_refs(double p_ref, double q_ref, double v_d, double v_min) {
    if (std::abs(v_d) < v_min)
        throw config_error("power_to_current_refs: |v_d| below minimum threshold");
    return {(2.0 / 3.0) * p_ref / v_d, -(2.0 / 3.0) * q_ref / v_d};
}

ThdReport thd(std::span<const double> samples, double sample_rate, double f0,
              int max_harmonic) {
    if (!(sample_rate > 0.0) || !(f0 > 0.0) || max_harmonic < 2)
        throw analysis_error("thd: invalid sample_rate/f0/max_harmonic");

    const double periods_avail = static_cast<double>(samples.size()) * f0 / sample_rate;
    const int periods = static_cast<int>(std::floor(periods_avail + 1e-9));
    if (periods < 2)
        throw analysis_error("thd: fewer than 2 whole fundamental periods in window");

    const std::size_t n_window =
        static_cast<std::size_t>(std::llround(periods * sample_rate / f0));
    const std::size_t start = samples.size() - n_window;

    ThdReport rep;
    rep.f0 = f0;
    double harmonic_ss = 0.0;
    for (int h = 1; h <= max_harmonic; ++h) {
        std::complex<double> acc{0.0, 0.0};
        const double w = kTwoPi * h * f0 / sample_rate;
        for (std::size_t k = 0; k < n_window; ++k) {
            const double ph = w * static_cast<double>(k);
            acc += samples[start + k] * std::complex<double>(std::cos(ph), -std::sin(ph));
        }
        const double amp = 2.0 * std::abs(acc) / static_cast<double>(n_window);
        if (h == 1) {
            rep.fundamental_amplitude = amp;
        } else {
            rep.harmonic_amplitudes.push_back(amp);
            harmonic_ss += amp * amp;
        }
    }

    if (!(rep.fundamental_amplitude > 1e-12))
        throw analysis_error("thd: degenerate signal, fundamental amplitude near zero");
    rep.thd = std::sqrt(harmonic_ss) / rep.fundamental_amplitude;
    return rep;
}

} // namespace mmck
