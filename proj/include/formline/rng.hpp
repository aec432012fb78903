#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace formline {

// mt19937_64 with hand-rolled variate transforms. std::*_distribution output
// is implementation-defined, which would break the bit-reproducibility
// contract of simulate/em_fit, so every draw here is pinned arithmetic.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // Uniform in [0, 1).
    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform() * (hi - lo + 1));
    }

    // Standard normal via Box-Muller (one value per call; no cache, stays
    // reproducible under interleaved use).
    double normal() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Marsaglia-Tsang for alpha >= 1, boosted for alpha < 1.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::vector<double> dirichlet(const std::vector<double>& alpha) {
        std::vector<double> out(alpha.size());
        double sum = 0.0;
        for (size_t i = 0; i < alpha.size(); ++i) {
            out[i] = gamma(alpha[i]);
            sum += out[i];
        }
        if (sum <= 0.0) {  // pathological underflow; fall back to uniform
            for (double& x : out) x = 1.0 / out.size();
            return out;
        }
        for (double& x : out) x /= sum;
        return out;
    }

    std::vector<double> dirichlet_symmetric(size_t n, double alpha) {
        return dirichlet(std::vector<double>(n, alpha));
    }

    // Index sampled from an (unnormalized) non-negative weight vector.
    int discrete(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace formline
