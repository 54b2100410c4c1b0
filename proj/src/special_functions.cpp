#include "fockcat/special_functions.hpp"

#include <cmath>

namespace fockcat
{
double log_factorial(int n)
{
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double LogScaled::value() const
{
    return sign == 0 ? 0.0 : sign * std::exp(log_abs);
}

std::vector<LogScaled> laguerre_column(int n_count, int k, double x)
{
    std::vector<LogScaled> out(static_cast<std::size_t>(n_count));
    if (n_count <= 0)
        return out;

    auto store = [&out](int n, double v, double log_scale) {
        LogScaled& s = out[static_cast<std::size_t>(n)];
        if (v == 0.0)
        {
            s = LogScaled{};
            return;
        }
        s.sign = v > 0 ? 1 : -1;
        s.log_abs = std::log(std::abs(v)) + log_scale;
    };

    double prev = 1.0;  // L_0
    double log_scale = 0.0;
    store(0, prev, log_scale);
    if (n_count == 1)
        return out;
    double cur = 1.0 + k - x;  // L_1
    store(1, cur, log_scale);

    constexpr double kBig = 1e150;
    for (int n = 1; n + 1 < n_count; ++n)
    {
        double next = ((2.0 * n + 1.0 + k - x) * cur - (n + k) * prev)
                      / (n + 1.0);
        prev = cur;
        cur = next;
        double mag = std::max(std::abs(prev), std::abs(cur));
        if (mag > kBig || (mag < 1.0 / kBig && mag > 0.0))
        {
            double lg = std::log(mag);
            prev /= mag;
            cur /= mag;
            log_scale += lg;
        }
        store(n + 1, cur, log_scale);
    }
    return out;
}

std::vector<LogScaled>
jacobi_column(int n_count, double a, double b, double x)
{
    std::vector<LogScaled> out(static_cast<std::size_t>(std::max(n_count, 0)));
    if (n_count <= 0)
        return out;

    auto store = [&out](int n, double v, double log_scale) {
        LogScaled& s = out[static_cast<std::size_t>(n)];
        if (v == 0.0)
        {
            s = LogScaled{};
            return;
        }
        s.sign = v > 0 ? 1 : -1;
        s.log_abs = std::log(std::abs(v)) + log_scale;
    };

    double prev = 1.0;
    double log_scale = 0.0;
    store(0, prev, log_scale);
    if (n_count == 1)
        return out;
    double cur = (a + 1.0) + (a + b + 2.0) * 0.5 * (x - 1.0);
    store(1, cur, log_scale);

    constexpr double kBig = 1e150;
    for (int n = 2; n < n_count; ++n)
    {
        double const s = 2.0 * n + a + b;
        double const lhs = 2.0 * n * (n + a + b) * (s - 2.0);
        double const c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        double const c2 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        double next = (c1 * cur - c2 * prev) / lhs;
        prev = cur;
        cur = next;
        double mag = std::max(std::abs(prev), std::abs(cur));
        if (mag > kBig || (mag < 1.0 / kBig && mag > 0.0))
        {
            prev /= mag;
            cur /= mag;
            log_scale += std::log(mag);
        }
        store(n, cur, log_scale);
    }
    return out;
}

}  // namespace fockcat
