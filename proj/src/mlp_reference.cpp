#include <cmath>

#include "tmlp/mlp.hpp"
#include "tmlp/sde.hpp"

namespace tmlp::reference {

namespace {

struct Recursion {
    const MlpParams& params;
    const Problem& problem;
    std::uint64_t seed;

    std::uint64_t power(int exponent) const {
        std::uint64_t r = 1;
        for (int k = 0; k < exponent; ++k) r *= params.branching;
        return r;
    }

    std::vector<double> path(double t, std::span<const double> x, const MultiIndex& idx, double target,
                             CostLedger& ledger) const {
        if (t >= problem.horizon) return {x.begin(), x.end()};
        TamedPathSpec spec{&problem, params.partition.adjoin(t), t, {x.begin(), x.end()}, idx, seed};
        return simulate_path(spec, target, ledger);
    }

    double operator()(int n, double t, std::span<const double> x, const MultiIndex& theta,
                      CostLedger& ledger) const {
        if (n <= 0) return 0.0;
        const double T = problem.horizon;
        const std::uint64_t count = power(n);
        double g_sum = 0.0;
        for (std::uint64_t i = 1; i <= count; ++i) {
            const auto y = path(t, x, theta.child(0, -static_cast<std::int64_t>(i)), T, ledger);
            ++ledger.g_evals;
            g_sum += problem.terminal(y);
        }
        double value = g_sum / static_cast<double>(count);
        for (int ell = 0; ell < n; ++ell) {
            const std::uint64_t m = power(n - ell);
            double sum = 0.0;
            for (std::uint64_t i = 1; i <= m; ++i) {
                const auto ii = static_cast<std::int64_t>(i);
                const MultiIndex idx = theta.child(ell, ii);
                const double u = sample_eval_time(t, T, StreamKey{seed, idx, Purpose::UniformTime, 0});
                const auto y = path(t, x, idx, u, ledger);
                ++ledger.f_evals;
                double term = problem.nonlinearity(u, y, (*this)(ell, u, y, idx, ledger));
                if (ell >= 1) {
                    ++ledger.f_evals;
                    term -= problem.nonlinearity(u, y, (*this)(ell - 1, u, y, theta.child(-ell, ii), ledger));
                }
                sum += term;
            }
            value += (T - t) * (sum / static_cast<double>(m));
        }
        if (!std::isfinite(value)) throw NumericError("non-finite MLP value at index " + theta.to_string());
        return value;
    }
};

}  // namespace

MlpEstimate estimate(const MlpParams& params, double t, std::span<const double> x, const MultiIndex& index,
                     const Problem& problem, std::uint64_t seed) {
    problem.validate();
    if (params.levels < 0 || params.branching < 1) throw ConfigError("invalid MLP parameters");
    if (x.size() != problem.dim) throw DomainError("MLP evaluation point has wrong dimension");
    MlpEstimate out;
    out.value = Recursion{params, problem, seed}(params.levels, t, x, index, out.ledger);
    if (params.levels > 0) out.terminal_g_evals = Recursion{params, problem, seed}.power(params.levels);
    return out;
}

}  // namespace tmlp::reference
