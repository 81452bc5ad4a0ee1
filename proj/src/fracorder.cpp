#include "mmck/fracorder.hpp"

#include "mmck/errors.hpp"

#include <cmath>
#include <iostream>

namespace mmck {

FracOperator design_oustaloup(double alpha, int n_filter, double omega_b, double omega_h) {
    if (!(omega_b > 0.0) || !(omega_h > omega_b))
        throw config_error("design_oustaloup: need omega_h > omega_b > 0");
    if (n_filter < 1)
        throw config_error("design_oustaloup: n_filter must be >= 1");
    if (!(std::abs(alpha) < 2.0))
        throw config_error("design_oustaloup: |alpha| must be < 2");

    FracOperator op;
    op.alpha = alpha;
    op.n_filter = n_filter;
    op.omega_b = omega_b;
    op.omega_h = omega_h;

    const int n = n_filter;
    const double span = omega_h / omega_b;
    const double order = 2.0 * n + 1.0;
    op.zeros.reserve(2 * n + 1);
    op.poles.reserve(2 * n + 1);
    for (int k = -n; k <= n; ++k) {
        const double ez = (k + n + 0.5 * (1.0 - alpha)) / order;
        const double ep = (k + n + 0.5 * (1.0 + alpha)) / order;
        op.zeros.push_back(omega_b * std::pow(span, ez));
        op.poles.push_back(omega_b * std::pow(span, ep));
    }
    op.gain = std::pow(omega_h, alpha);
    return op;
}

std::complex<double> frequency_response(const FracOperator& op, double omega) {
    const std::complex<double> s(0.0, omega);
    std::complex<double> g(op.gain, 0.0);
    for (std::size_t i = 0; i < op.poles.size(); ++i)
        g *= (s + op.zeros[i]) / (s + op.poles[i]);
    return g;
}

FracRealization discretize(const FracOperator& op, double dt) {
    if (!(dt > 0.0))
        throw config_error("discretize: dt must be > 0");
    if (dt * op.omega_h >= 2.0)
        std::cerr << "warning: dt*omega_h = " << dt * op.omega_h
                  << " >= 2; band top is beyond the bilinear warping limit\n";

    FracRealization real;
    real.dt = dt;
    real.input_gain = op.gain;
    const double c = 2.0 / dt;
    real.sections.reserve(op.poles.size());
    double dc_discrete = op.gain;
    for (std::size_t i = 0; i < op.poles.size(); ++i) {
        const double z = op.zeros[i];
        const double p = op.poles[i];
        FracSection sec;
        sec.b0 = (c + z) / (c + p);
        sec.b1 = (z - c) / (c + p);
        sec.a1 = (p - c) / (c + p);
        real.sections.push_back(sec);
        // section DC gain (b0+b1)/(1+a1) = (2z/(c+p)) / (2p/(c+p)); the factored
        // form avoids the catastrophic cancellation of b0+b1 when p << c
        dc_discrete *= (2.0 * z / (c + p)) / (2.0 * p / (c + p));
    }

    double dc_continuous = op.gain;
    for (std::size_t i = 0; i < op.poles.size(); ++i)
        dc_continuous *= op.zeros[i] / op.poles[i];
    if (std::abs(dc_discrete - dc_continuous) > 1e-9 * std::abs(dc_continuous))
        throw config_error("discretize: DC gain mismatch between continuous and discrete cascade");

    return real;
}

void FracRealization::reset() {
    for (auto& s : sections) s.w = 0.0;
}

double step_filter(FracRealization& real, double u) {
    if (!std::isfinite(u))
        throw simulation_fault("step_filter: non-finite input sample", 0.0);
    double x = real.input_gain * u;
    for (auto& s : real.sections) {
        const double y = s.b0 * x + s.w;
        s.w = s.b1 * x - s.a1 * y;
        x = y;
    }
    return x;
}

} // namespace mmck
