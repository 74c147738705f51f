#include "tmlp/mlp.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "tmlp/sde.hpp"

namespace tmlp {

void StreamAudit::record(const MultiIndex& index, Purpose purpose) {
    std::lock_guard lock(mutex_);
    if (!seen_.emplace(index, purpose).second)
        throw NumericError("random stream reused: index " + index.to_string() + ", purpose " +
                           std::to_string(static_cast<int>(purpose)));
}

std::size_t StreamAudit::size() const {
    std::lock_guard lock(mutex_);
    return seen_.size();
}

SpaceTimeFunction lift(Nonlinearity f, SpaceTimeFunction w) {
    return [f = std::move(f), w = std::move(w)](double t, std::span<const double> x) { return f(t, x, w(t, x)); };
}

double sample_eval_time(double t, double horizon, const StreamKey& key) {
    return t + (horizon - t) * uniform01(key);
}

namespace {

std::uint64_t checked_count(std::uint64_t M, int exponent) {
    auto count = checked_power(M, static_cast<unsigned>(exponent));
    if (!count || *count > kMaxSampleCount)
        throw CapacityError("M^n = " + std::to_string(M) + "^" + std::to_string(exponent) +
                            " exceeds the sample cap " + std::to_string(kMaxSampleCount));
    return *count;
}

void validate_call(const MlpParams& params, double t, std::span<const double> x, const Problem& problem) {
    problem.validate();
    if (params.levels < 0) throw ConfigError("MLP levels must be >= 0");
    if (params.branching < 1) throw ConfigError("MLP branching M must be >= 1");
    if (params.partition.front() != 0.0 || params.partition.back() != problem.horizon)
        throw ConfigError("MLP partition must span [0, T] of the problem");
    if (!(t >= 0.0) || !(t <= problem.horizon)) throw DomainError("MLP evaluation time outside [0, T]");
    if (x.size() != problem.dim) throw DomainError("MLP evaluation point has wrong dimension");
    if (!all_finite(x)) throw DomainError("MLP evaluation point is not finite");
    if (params.levels > 0) checked_count(params.branching, params.levels);
}

/// Serial evaluator with reusable buffers. One per thread.
class Evaluator {
public:
    Evaluator(const Problem& problem, const MlpParams& params, std::uint64_t seed, StreamAudit* audit)
        : problem_(problem),
          params_(params),
          seed_(seed),
          audit_(audit),
          sim_(problem),
          frames_(static_cast<std::size_t>(std::max(params.levels, 0)) + 1,
                  std::vector<double>(problem.dim)) {}

    double value(int n, double t, std::span<const double> x, const MultiIndex& theta, CostLedger& ledger,
                 int depth) {
        if (n <= 0) return 0.0;
        const Span path = prepare(t);
        const std::uint64_t count = checked_count(params_.branching, n);
        double g_sum = 0.0;
        for (std::uint64_t i = 1; i <= count; ++i)
            g_sum += terminal_term(t, x, path, theta, static_cast<std::int64_t>(i), ledger, depth);
        double result = g_sum / static_cast<double>(count);
        for (int ell = 0; ell < n; ++ell) {
            const std::uint64_t m = checked_count(params_.branching, n - ell);
            double sum = 0.0;
            for (std::uint64_t i = 1; i <= m; ++i)
                sum += level_term(ell, t, x, path, theta, static_cast<std::int64_t>(i), ledger, depth);
            result += (problem_.horizon - t) * (sum / static_cast<double>(m));
        }
        if (!std::isfinite(result))
            throw NumericError("non-finite MLP value at index " + theta.to_string() + ", level " +
                               std::to_string(n));
        return result;
    }

    struct Span {
        bool trivial = false;  // t == T: Y_{T,T}(x) = x
        Partition adjoined = Partition::uniform(1, 1.0);
    };

    Span prepare(double t) const {
        Span s;
        if (t < problem_.horizon) {
            s.adjoined = params_.partition.adjoin(t);
        } else {
            s.trivial = true;
        }
        return s;
    }

    // g(Y^{(θ,0,−i)}_{t,T}(x))
    double terminal_term(double t, std::span<const double> x, const Span& path, const MultiIndex& theta,
                         std::int64_t i, CostLedger& ledger, int depth) {
        const MultiIndex idx = theta.child(0, -i);
        if (audit_) audit_->record(idx, Purpose::BrownianIncrement);
        std::vector<double>& y = frames_[static_cast<std::size_t>(depth)];
        std::copy(x.begin(), x.end(), y.begin());
        if (!path.trivial)
            sim_.simulate(path.adjoined, y, stream_base(seed_, idx, Purpose::BrownianIncrement),
                          problem_.horizon, ledger);
        (void)t;
        ++ledger.g_evals;
        const double g = problem_.terminal(y);
        if (!std::isfinite(g))
            throw NumericError("non-finite terminal value at index " + idx.to_string());
        return g;
    }

    // F(V_ℓ^{(θ,ℓ,i)}) − 1_ℕ(ℓ) F(V_{ℓ−1}^{(θ,−ℓ,i)}) at the shared point (U, Y^{(θ,ℓ,i)}_{t,U}(x))
    double level_term(int ell, double t, std::span<const double> x, const Span& path, const MultiIndex& theta,
                      std::int64_t i, CostLedger& ledger, int depth) {
        const MultiIndex idx = theta.child(ell, i);
        if (audit_) {
            audit_->record(idx, Purpose::UniformTime);
            audit_->record(idx, Purpose::BrownianIncrement);
        }
        const double T = problem_.horizon;
        const double u = sample_eval_time(t, T, StreamKey{seed_, idx, Purpose::UniformTime, 0});
        std::vector<double>& y = frames_[static_cast<std::size_t>(depth)];
        std::copy(x.begin(), x.end(), y.begin());
        if (!path.trivial)
            sim_.simulate(path.adjoined, y, stream_base(seed_, idx, Purpose::BrownianIncrement), u, ledger);

        const double upper = value(ell, u, y, idx, ledger, depth + 1);
        ++ledger.f_evals;
        double term = problem_.nonlinearity(u, y, upper);
        if (ell >= 1) {
            const double lower = value(ell - 1, u, y, theta.child(-ell, i), ledger, depth + 1);
            ++ledger.f_evals;
            term -= problem_.nonlinearity(u, y, lower);
        }
        if (!std::isfinite(term))
            throw NumericError("non-finite nonlinearity difference at level " + std::to_string(ell) +
                               ", i = " + std::to_string(i) + ", index " + idx.to_string());
        return term;
    }

private:
    const Problem& problem_;
    const MlpParams& params_;
    std::uint64_t seed_;
    StreamAudit* audit_;
    PathSimulator sim_;
    std::vector<std::vector<double>> frames_;  // one path state per recursion depth
};

struct RootTask {
    int ell;         // -1 marks a terminal-average term
    std::int64_t i;
};

}  // namespace

MlpEstimate estimate(const MlpParams& params, double t, std::span<const double> x, const MultiIndex& index,
                     const Problem& problem, std::uint64_t seed, const MlpOptions& options) {
    validate_call(params, t, x, problem);
    MlpEstimate out;
    const int n = params.levels;
    if (n <= 0) return out;

    const std::uint64_t M = params.branching;
    const std::uint64_t terminal_count = checked_count(M, n);
    std::vector<RootTask> tasks;
    std::vector<std::size_t> level_offset(static_cast<std::size_t>(n) + 1);
    for (std::uint64_t i = 1; i <= terminal_count; ++i) tasks.push_back({-1, static_cast<std::int64_t>(i)});
    for (int ell = 0; ell < n; ++ell) {
        level_offset[static_cast<std::size_t>(ell)] = tasks.size();
        const std::uint64_t m = checked_count(M, n - ell);
        for (std::uint64_t i = 1; i <= m; ++i) tasks.push_back({ell, static_cast<std::int64_t>(i)});
    }
    level_offset[static_cast<std::size_t>(n)] = tasks.size();

    std::vector<double> terms(tasks.size());
    const long long task_count = static_cast<long long>(tasks.size());
    const int threads = std::max(1, options.threads);
    std::exception_ptr failure;

#pragma omp parallel num_threads(threads)
    {
        Evaluator eval(problem, params, seed, options.audit);
        const auto root = eval.prepare(t);
        CostLedger local;
#pragma omp for schedule(dynamic, 1) nowait
        for (long long k = 0; k < task_count; ++k) {
            try {
                const RootTask& task = tasks[static_cast<std::size_t>(k)];
                terms[static_cast<std::size_t>(k)] =
                    task.ell < 0 ? eval.terminal_term(t, x, root, index, task.i, local, 0)
                                 : eval.level_term(task.ell, t, x, root, index, task.i, local, 0);
            } catch (...) {
#pragma omp critical(tmlp_mlp_failure)
                if (!failure) failure = std::current_exception();
            }
        }
#pragma omp critical(tmlp_mlp_ledger)
        out.ledger += local;
    }
    if (failure) std::rethrow_exception(failure);

    // Canonical summation order, identical to the serial recursion.
    double g_sum = 0.0;
    for (std::size_t k = 0; k < terminal_count; ++k) g_sum += terms[k];
    double result = g_sum / static_cast<double>(terminal_count);
    for (int ell = 0; ell < n; ++ell) {
        const std::size_t lo = level_offset[static_cast<std::size_t>(ell)];
        const std::size_t hi = level_offset[static_cast<std::size_t>(ell) + 1];
        double sum = 0.0;
        for (std::size_t k = lo; k < hi; ++k) sum += terms[k];
        result += (problem.horizon - t) * (sum / static_cast<double>(hi - lo));
    }
    if (!std::isfinite(result)) throw NumericError("non-finite MLP value at index " + index.to_string());
    out.value = result;
    out.terminal_g_evals = terminal_count;
    return out;
}

// --- replicates ------------------------------------------------------------------

double jackknife_rms_stderr(std::span<const double> sq) {
    const std::size_t R = sq.size();
    if (R < 2) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (double v : sq) total += v;
    std::vector<double> loo(R);
    double mean = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
        loo[i] = std::sqrt(std::max(0.0, total - sq[i]) / static_cast<double>(R - 1));
        mean += loo[i];
    }
    mean /= static_cast<double>(R);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    return std::sqrt(static_cast<double>(R - 1) / static_cast<double>(R) * ss);
}

RmseResult rmse_against(const MlpParams& params, double t, std::span<const double> x, const Problem& problem,
                        double target, std::size_t replicates, std::uint64_t seed, int threads) {
    if (replicates < 2) throw ConfigError("rmse: need at least two replicates");
    validate_call(params, t, x, problem);
    RmseResult out;
    out.replicates.resize(replicates);
    std::exception_ptr failure;
    const long long R = static_cast<long long>(replicates);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads))
    for (long long r = 0; r < R; ++r) {
        try {
            out.replicates[static_cast<std::size_t>(r)] =
                estimate(params, t, x, MultiIndex::replicate_root(static_cast<std::uint64_t>(r)), problem, seed);
        } catch (...) {
#pragma omp critical(tmlp_rmse_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> sq(replicates);
    double sum_sq = 0.0, sum = 0.0, evals = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
        const double v = out.replicates[r].value;
        sq[r] = (v - target) * (v - target);
        sum_sq += sq[r];
        sum += v;
        evals += static_cast<double>(out.replicates[r].ledger.total());
    }
    const double Rd = static_cast<double>(replicates);
    out.rmse = std::sqrt(sum_sq / Rd);
    out.mc_stderr = jackknife_rms_stderr(sq);
    out.mean = sum / Rd;
    out.mean_total_evals = evals / Rd;
    return out;
}

RmseResult rmse(const MlpParams& params, double t, std::span<const double> x, const Problem& problem,
                std::size_t replicates, std::uint64_t seed, int threads) {
    if (!problem.reference) throw ConfigError("rmse: problem '" + problem.name + "' has no reference solution");
    return rmse_against(params, t, x, problem, problem.reference(t, x), replicates, seed, threads);
}

// --- cost ------------------------------------------------------------------------

std::uint64_t ceil_steps(const Partition& partition) {
    if (partition.is_uniform() && partition.front() == 0.0) return partition.base_steps();
    const double q = (partition.back() - partition.front()) / partition.mesh();
    return static_cast<std::uint64_t>(std::ceil(q * (1.0 - 1e-12)));
}

namespace {

CostCount add_checked(CostCount a, CostCount b) {
    CostCount r;
    if (__builtin_add_overflow(a, b, &r)) throw CapacityError("cost recursion overflows 128-bit integers");
    return r;
}

CostCount mul_checked(CostCount a, CostCount b) {
    CostCount r;
    if (__builtin_mul_overflow(a, b, &r)) throw CapacityError("cost recursion overflows 128-bit integers");
    return r;
}

CostCount pow_checked(std::uint64_t base, int exponent) {
    CostCount r = 1;
    for (int k = 0; k < exponent; ++k) r = mul_checked(r, base);
    return r;
}

}  // namespace

CostCount cost_recursion(int n, std::uint64_t M, const Partition& partition) {
    if (n < 0) throw ConfigError("cost_recursion: n must be >= 0");
    if (M < 1) throw ConfigError("cost_recursion: M must be >= 1");
    const CostCount K = ceil_steps(partition);
    std::vector<CostCount> fe(static_cast<std::size_t>(n) + 1, 0);
    for (int k = 1; k <= n; ++k) {
        CostCount total = mul_checked(add_checked(2, K), pow_checked(M, k));
        for (int ell = 0; ell < k; ++ell) {
            CostCount inner = add_checked(add_checked(3, K), fe[static_cast<std::size_t>(ell)]);
            if (ell >= 1) inner = add_checked(inner, fe[static_cast<std::size_t>(ell - 1)]);
            total = add_checked(total, mul_checked(pow_checked(M, k - ell), inner));
        }
        fe[static_cast<std::size_t>(k)] = total;
    }
    return fe[static_cast<std::size_t>(n)];
}

long double cost_closed_form(int n, std::uint64_t M, const Partition& partition) {
    const long double ratio = (partition.is_uniform() && partition.front() == 0.0)
                                  ? static_cast<long double>(partition.base_steps())
                                  : static_cast<long double>(partition.back()) / partition.mesh();
    return 4.0L * ratio * std::pow(5.0L * static_cast<long double>(M), static_cast<long double>(n));
}

std::string to_string(CostCount value) {
    if (value == 0) return "0";
    std::string s;
    while (value > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
        value /= 10;
    }
    return {s.rbegin(), s.rend()};
}

// --- theoretical bound -------------------------------------------------------------

double log_rho(const DeclaredConstants& k) {
    return 3.0 * k.p * (std::log(5.0 * k.p) + (1.0 + 1.0 / k.kappa) * std::log(k.c));
}

double log_log_eta(double a, double horizon, const DeclaredConstants& k) {
    const double m = std::min(std::fabs(a), 1.0);
    if (m == 0.0) return -std::numeric_limits<double>::infinity();  // η(0) = 1
    const double ce3 = std::pow(k.c * std::exp(k.alpha * horizon), 3.0);
    const double base = 720.0 * std::max({horizon, k.alpha, 1.0}) * ce3;
    const double exponent = (720.0 * ce3 * std::max(horizon, 1.0) + 7.0) * k.gamma;
    // log η(a) = exp(2·base^exponent)·m^{1/8}
    const double log_inner = std::log(2.0) + exponent * std::log(base);  // log(2·base^exponent)
    const double inner = std::exp(log_inner);                            // may be +inf
    return inner + std::log(m) / 8.0;
}

ErrorBoundLog theoretical_error_bound_log(int n, std::uint64_t M, const Partition& partition,
                                          const ErrorBoundInputs& in) {
    if (n < 1 || M < 1) throw ConfigError("error bound: n and M must be >= 1");
    const DeclaredConstants& k = in.constants;
    const double T = in.horizon;
    const double L = in.lipschitz_f;
    const double nn = static_cast<double>(n);
    const double Md = static_cast<double>(M);
    const double inf = std::numeric_limits<double>::infinity();

    ErrorBoundLog out;
    const double first = Md / 2.0 + 2.0 * nn * L * T - nn / 2.0 * std::log(Md);
    const double second = 0.5 * (std::log(partition.mesh()) - std::log(T));
    const double hi = std::max(first, second);
    out.log_bracket = hi + std::log1p(std::exp(std::min(first, second) - hi));

    out.log_rho = log_rho(k);
    const double rho_T = std::exp(out.log_rho + std::log(T));
    double eta_term = 0.0;
    if (L > 0.0) {
        const double lle = log_log_eta(partition.mesh(), T, k);
        eta_term = std::exp(std::log(3.0 * L * T) + std::exp(lle) / 4.0);
    }
    const double terms[] = {
        std::log(1184.0),
        3.0 * std::log(k.b),
        3.0 * T,
        rho_T,
        eta_term,
        std::exp(k.alpha * T) * in.potential_at_x / 4.0,
        0.5 * std::log(in.phi_at_x),
    };
    double prefactor = 0.0;
    for (double v : terms) prefactor += v;
    if (!std::isfinite(out.log_rho) || out.log_rho > kLogBoundCeiling) {
        out.log_rho = kLogBoundCeiling;
        out.saturated = true;
    }
    if (!(prefactor < inf) || prefactor > kLogBoundCeiling) {
        prefactor = kLogBoundCeiling;
        out.saturated = true;
    }
    out.log_prefactor = prefactor;
    out.log_total = std::min(out.log_bracket + out.log_prefactor, kLogBoundCeiling);
    if (out.log_total >= kLogBoundCeiling) out.saturated = true;
    return out;
}

}  // namespace tmlp
