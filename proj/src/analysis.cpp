#include "tmlp/analysis.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "tmlp/mlp.hpp"
#include "tmlp/rng.hpp"
#include "tmlp/sde.hpp"

namespace tmlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Relative slack for comparisons between quantities computed along different
// floating-point routes.
constexpr double kRoundingSlack = 1e-12;

}  // namespace

void LyapunovSpec::validate() const {
    if (!(offset > 0.0) || !std::isfinite(offset)) throw ConfigError("Lyapunov offset a must be positive");
    if (!(power >= 1.5) || !std::isfinite(power)) throw ConfigError("Lyapunov power p must be >= 3/2");
}

PhiValue phi_checked(std::span<const double> x, const LyapunovSpec& spec) {
    PhiValue out;
    out.log_value = spec.power * std::log(spec.offset + squared_norm(x));
    out.value = std::exp(out.log_value);
    if (!std::isfinite(out.value)) {
        out.value = std::numeric_limits<double>::max();
        out.saturated = true;
    }
    return out;
}

double phi(std::span<const double> x, const LyapunovSpec& spec) { return phi_checked(x, spec).value; }

double phi_d1(std::span<const double> x, std::span<const double> u, const LyapunovSpec& s) {
    const double A = s.offset + squared_norm(x);
    return 2.0 * s.power * std::pow(A, s.power - 1.0) * dot(x, u);
}

double phi_d2(std::span<const double> x, std::span<const double> u, std::span<const double> v,
              const LyapunovSpec& s) {
    const double p = s.power;
    const double A = s.offset + squared_norm(x);
    return 4.0 * p * (p - 1.0) * std::pow(A, p - 2.0) * dot(x, u) * dot(x, v) +
           2.0 * p * std::pow(A, p - 1.0) * dot(u, v);
}

double phi_d3(std::span<const double> x, std::span<const double> u, std::span<const double> v,
              std::span<const double> w, const LyapunovSpec& s) {
    const double p = s.power;
    const double A = s.offset + squared_norm(x);
    const double xu = dot(x, u), xv = dot(x, v), xw = dot(x, w);
    return 8.0 * p * (p - 1.0) * (p - 2.0) * std::pow(A, p - 3.0) * xu * xv * xw +
           4.0 * p * (p - 1.0) * std::pow(A, p - 2.0) * (dot(u, v) * xw + dot(u, w) * xv + dot(v, w) * xu);
}

void phi_gradient(std::span<const double> x, const LyapunovSpec& s, std::span<double> out) {
    const double scale = 2.0 * s.power * std::pow(s.offset + squared_norm(x), s.power - 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * x[i];
}

PhiDerivativeNorms phi_derivative_norms(std::span<const double> x, const LyapunovSpec& s) {
    const double p = s.power;
    const double r2 = squared_norm(x);
    const double r = std::sqrt(r2);
    const double A = s.offset + r2;
    PhiDerivativeNorms n;
    n.d1 = 2.0 * p * std::pow(A, p - 1.0) * r;
    // Eigenvalues 4p(p−1)A^{p−2}r² + 2pA^{p−1} (along x) and 2pA^{p−1}; both ≥ 0 for p ≥ 1.
    n.d2 = 4.0 * p * (p - 1.0) * std::pow(A, p - 2.0) * r2 + 2.0 * p * std::pow(A, p - 1.0);
    // Symmetric trilinear form: its norm is max over unit u of |D³φ[u,u,u]| = |αc³ + βc|,
    // c = ⟨x/‖x‖, u⟩ ∈ [−1, 1].
    const double alpha = 8.0 * p * (p - 1.0) * (p - 2.0) * std::pow(A, p - 3.0) * r2 * r;
    const double beta = 12.0 * p * (p - 1.0) * std::pow(A, p - 2.0) * r;
    double best = std::fabs(alpha + beta);
    if (alpha < 0.0) {
        const double c2 = -beta / (3.0 * alpha);
        if (c2 > 0.0 && c2 < 1.0) {
            const double c = std::sqrt(c2);
            best = std::max(best, std::fabs(alpha * c * c2 + beta * c));
        }
    }
    n.d3 = best;
    return n;
}

double log_derivative_bound(int order, std::span<const double> x, const LyapunovSpec& s) {
    const double i = static_cast<double>(order);
    return i * std::log(2.0 * s.power) + (1.0 - i / (2.0 * s.power)) * phi_checked(x, s).log_value;
}

// --- sampled verifiers -------------------------------------------------------------

std::vector<double> sample_point(const SamplingConfig& config, std::uint64_t k) {
    const GeneratorState g = stream_base(config.seed, MultiIndex{static_cast<std::int64_t>(k)}, Purpose::Replicate).at(0);
    std::vector<double> x(config.dim);
    for (std::size_t i = 0; i < config.dim; ++i) x[i] = g.normal(i);
    const double norm = std::sqrt(squared_norm(x));
    const double radius = config.radius * g.uniform(config.dim);
    for (double& v : x) v = norm > 0.0 ? v / norm * radius : 0.0;
    return x;
}

namespace {

std::vector<double> unit_direction(const SamplingConfig& config, std::uint64_t k, std::uint64_t which) {
    const GeneratorState g = stream_base(config.seed, MultiIndex{static_cast<std::int64_t>(k)}, Purpose::Replicate)
                                 .at(1 + which);
    std::vector<double> u(config.dim);
    for (std::size_t i = 0; i < config.dim; ++i) u[i] = g.normal(i);
    const double norm = std::sqrt(squared_norm(u));
    for (double& v : u) v /= norm;
    return u;
}

bool exceeds_log(double lhs, double log_rhs) {
    if (lhs <= 0.0) return false;
    return std::log(lhs) > log_rhs + kRoundingSlack * std::max(1.0, std::fabs(log_rhs));
}

}  // namespace

DerivativeCheckReport derivative_bound_check(const LyapunovSpec& spec, const SamplingConfig& config,
                                             std::size_t fd_samples) {
    spec.validate();
    DerivativeCheckReport report;
    for (std::uint64_t k = 0; k < config.samples; ++k) {
        const auto x = sample_point(config, k);
        const auto norms = phi_derivative_norms(x, spec);
        const double values[] = {norms.d1, norms.d2, norms.d3};
        for (int i = 1; i <= 3; ++i) {
            const double lb = log_derivative_bound(i, x, spec);
            const double v = values[i - 1];
            if (exceeds_log(v, lb)) ++report.violations;
            if (v > 0.0) report.max_log_ratio = std::max(report.max_log_ratio, std::log(v) - lb);
        }
        const auto u = unit_direction(config, k, 0);
        const double along[] = {phi_d1(x, u, spec), phi_d2(x, u, u, spec), phi_d3(x, u, u, u, spec)};
        for (int i = 0; i < 3; ++i)
            if (std::fabs(along[i]) > values[i] * (1.0 + kRoundingSlack) + 1e-300) ++report.direction_violations;
        ++report.points;
    }

    std::vector<double> grad(config.dim), probe(config.dim);
    for (std::uint64_t k = 0; k < std::min<std::uint64_t>(fd_samples, config.samples); ++k) {
        const auto x = sample_point(config, k);
        phi_gradient(x, spec, grad);
        const double gnorm = std::sqrt(squared_norm(grad));
        if (gnorm == 0.0) continue;
        const double h = 1e-5 * std::sqrt(spec.offset + squared_norm(x));
        double err2 = 0.0;
        for (std::size_t i = 0; i < config.dim; ++i) {
            probe.assign(x.begin(), x.end());
            probe[i] = x[i] + h;
            const double up = phi(probe, spec);
            probe[i] = x[i] - h;
            const double down = phi(probe, spec);
            const double fd = (up - down) / (2.0 * h);
            err2 += (fd - grad[i]) * (fd - grad[i]);
        }
        report.max_fd_relative_error = std::max(report.max_fd_relative_error, std::sqrt(err2) / gnorm);
        ++report.fd_points;
    }
    return report;
}

GeneratorCheckReport generator_check(const Problem& problem, const LyapunovSpec& spec, double declared_c,
                                     const SamplingConfig& config) {
    problem.validate();
    spec.validate();
    const std::size_t d = problem.dim, m = problem.brownian_dim;
    SamplingConfig cfg = config;
    cfg.dim = d;
    std::vector<double> mu(d), sigma(d * m), column(d);
    const double p = spec.power;
    GeneratorCheckReport report;
    for (std::uint64_t k = 0; k < cfg.samples; ++k) {
        const auto x = sample_point(cfg, k);
        problem.drift(x, mu);
        problem.diffusion(x, sigma);
        const double A = spec.offset + squared_norm(x);
        const double hyp_lhs = dot(mu, x) + 0.5 * (2.0 * p - 1.0) * squared_norm(sigma);
        const double hyp_rhs = declared_c * A;  // c φ^{1/p}
        ++report.points;
        report.max_hypothesis_slack = std::max(report.max_hypothesis_slack, (hyp_lhs - hyp_rhs) / hyp_rhs);
        if (hyp_lhs > hyp_rhs * (1.0 + kRoundingSlack)) {
            ++report.hypothesis_violations;
            continue;
        }
        double gen = phi_d1(x, mu, spec);
        for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t i = 0; i < d; ++i) column[i] = sigma[i * m + c];
            gen += 0.5 * phi_d2(x, column, column, spec);
        }
        const double concl_rhs = 2.0 * declared_c * p * phi(x, spec);
        if (gen > concl_rhs + kRoundingSlack * std::fabs(concl_rhs)) ++report.conclusion_violations;
    }
    return report;
}

LipschitzCheckReport lipschitz_check(const Problem& problem, const SamplingConfig& config) {
    problem.validate();
    SamplingConfig cfg = config;
    cfg.dim = problem.dim;
    LipschitzCheckReport report;
    for (std::uint64_t k = 0; k < cfg.samples; ++k) {
        const auto x = sample_point(cfg, k);
        const GeneratorState g =
            stream_base(cfg.seed, MultiIndex{static_cast<std::int64_t>(k), 1}, Purpose::Replicate).at(0);
        const double t = problem.horizon * g.uniform(0);
        const double w1 = 10.0 * g.normal(1);
        const double w2 = 10.0 * g.normal(2);
        if (w1 == w2) continue;
        const double diff = std::fabs(problem.nonlinearity(t, x, w1) - problem.nonlinearity(t, x, w2));
        const double gap = std::fabs(w1 - w2);
        report.max_ratio = std::max(report.max_ratio, diff / gap);
        if (diff > problem.lipschitz_f * gap * (1.0 + kRoundingSlack) + 1e-15) ++report.violations;
        ++report.samples;
    }
    return report;
}

// --- path diagnostics -------------------------------------------------------------

double log_mean_exp(std::span<const double> v) {
    double m = -kInf, s = 0.0;
    std::size_t n = 0;
    for (double x : v) {
        if (!std::isfinite(x)) continue;
        if (n == 0) {
            m = x;
            s = 1.0;
        } else if (x <= m) {
            s += std::exp(x - m);
        } else {
            s = s * std::exp(m - x) + 1.0;
            m = x;
        }
        ++n;
    }
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return m + (std::log(s) - std::log(static_cast<double>(n)));
}

bool MomentGrowthReport::finite() const {
    return std::isfinite(slope) && std::isfinite(intercept) &&
           std::ranges::all_of(log_means, [](double v) { return std::isfinite(v); });
}

namespace {

struct PathSetup {
    Partition adjoined;
    std::vector<double> x;
};

PathSetup path_setup(const Problem& problem, const PathDiagnosticConfig& config) {
    problem.validate();
    if (config.paths < 1) throw ConfigError("path diagnostics need at least one path");
    if (config.sample_every < 1) throw ConfigError("sample_every must be >= 1");
    std::vector<double> x = config.start_state.empty() ? std::vector<double>(problem.dim, 0.0) : config.start_state;
    if (x.size() != problem.dim) throw DomainError("path diagnostics: start state has wrong dimension");
    const Partition base = Partition::uniform(config.steps, problem.horizon);
    return {base.adjoin(config.start_time), std::move(x)};
}

MultiIndex path_index(std::size_t k) { return MultiIndex{static_cast<std::int64_t>(k)}; }

}  // namespace

MomentGrowthReport moment_growth(const Problem& problem, const LyapunovSpec& spec,
                                 const PathDiagnosticConfig& config) {
    spec.validate();
    const auto setup = path_setup(problem, config);
    const Partition& grid = setup.adjoined;

    std::vector<std::size_t> recorded;
    for (std::size_t i = 0; i < grid.size(); i += config.sample_every) recorded.push_back(i);
    if (recorded.back() != grid.size() - 1) recorded.push_back(grid.size() - 1);
    const std::size_t k = recorded.size();

    // log φ per (path, recorded time); NaN marks a saturated path.
    std::vector<double> logs(config.paths * k);
    const long long paths = static_cast<long long>(config.paths);
#pragma omp parallel num_threads(std::max(1, config.threads))
    {
        PathSimulator sim(problem);
        std::vector<double> state(problem.dim);
        CostLedger ledger;
#pragma omp for schedule(static)
        for (long long p = 0; p < paths; ++p) {
            double* row = &logs[static_cast<std::size_t>(p) * k];
            state = setup.x;
            std::size_t slot = 0;
            try {
                sim.walk_grid(grid, state,
                              stream_base(config.seed, path_index(static_cast<std::size_t>(p)),
                                          Purpose::BrownianIncrement),
                              ledger, [&](std::size_t i, std::span<const double> y) {
                                  if (slot < k && recorded[slot] == i) row[slot++] = phi_checked(y, spec).log_value;
                              });
            } catch (const NumericError&) {
                std::fill(row, row + k, std::numeric_limits<double>::quiet_NaN());
            }
        }
    }

    MomentGrowthReport report;
    std::vector<bool> keep(config.paths, true);
    for (std::size_t p = 0; p < config.paths; ++p) {
        for (std::size_t j = 0; j < k; ++j)
            if (!std::isfinite(logs[p * k + j])) keep[p] = false;
        if (!keep[p]) ++report.saturated;
    }
    std::vector<double> column;
    column.reserve(config.paths);
    for (std::size_t j = 0; j < k; ++j) {
        column.clear();
        for (std::size_t p = 0; p < config.paths; ++p)
            if (keep[p]) column.push_back(logs[p * k + j]);
        report.times.push_back(grid.point(recorded[j]));
        report.log_means.push_back(column.empty() ? std::numeric_limits<double>::quiet_NaN() : log_mean_exp(column));
    }

    report.intercept = phi_checked(setup.x, spec).log_value;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double tau = report.times[j] - config.start_time;
        sxx += tau * tau;
        sxy += tau * (report.log_means[j] - report.intercept);
    }
    report.slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    double rss = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double tau = report.times[j] - config.start_time;
        const double res = report.log_means[j] - report.intercept - report.slope * tau;
        rss += res * res;
    }
    report.slope_stderr = (k > 1 && sxx > 0.0) ? std::sqrt(rss / static_cast<double>(k - 1) / sxx) : 0.0;
    report.ci_low = report.slope - 1.96 * report.slope_stderr;
    report.ci_high = report.slope + 1.96 * report.slope_stderr;
    return report;
}

ExpMomentReport exp_moment_diagnostic(const Problem& problem, const PathDiagnosticConfig& config) {
    if (!problem.potential) throw ConfigError("exp-moment diagnostic: problem '" + problem.name + "' has no potential U");
    const auto setup = path_setup(problem, config);
    const Partition& grid = setup.adjoined;
    const double T = problem.horizon;
    const double h = grid.mesh();
    const double alpha = problem.constants ? problem.constants->alpha : 0.0;
    const auto rate = problem.potential_rate ? problem.potential_rate
                                             : ScalarField([](std::span<const double>) { return 0.0; });

    std::vector<double> exponents(config.paths);
    const long long paths = static_cast<long long>(config.paths);
#pragma omp parallel num_threads(std::max(1, config.threads))
    {
        PathSimulator sim(problem);
        std::vector<double> state(problem.dim);
        CostLedger ledger;
#pragma omp for schedule(static)
        for (long long p = 0; p < paths; ++p) {
            state = setup.x;
            double integral = 0.0;
            double left_value = 0.0;   // e^{α(T−t_i)}Ū(Y_{t_i})
            bool left_active = false;  // 1_D(Y_{t_i})
            double value = 0.0;
            try {
                sim.walk_grid(grid, state,
                              stream_base(config.seed, path_index(static_cast<std::size_t>(p)),
                                          Purpose::BrownianIncrement),
                              ledger, [&](std::size_t i, std::span<const double> y) {
                                  const double s = grid.point(i);
                                  const double current = std::exp(alpha * (T - s)) * rate(y);
                                  if (i > 0 && left_active)
                                      integral += 0.5 * (s - grid.point(i - 1)) * (left_value + current);
                                  left_value = current;
                                  left_active = problem.taming_set(h, y);
                                  if (i + 1 == grid.size()) value = problem.potential(y) + integral;
                              });
            } catch (const NumericError&) {
                value = std::numeric_limits<double>::quiet_NaN();
            }
            exponents[static_cast<std::size_t>(p)] = value;
        }
    }

    ExpMomentReport report;
    for (double v : exponents)
        if (!std::isfinite(v)) ++report.saturated;
    report.log_mean_exp = log_mean_exp(exponents);

    const double ux = problem.potential(setup.x) * std::exp(alpha * (T - config.start_time));
    if (problem.constants) {
        const double lle = log_log_eta(h, T, *problem.constants);
        const double log_eta = std::exp(lle);
        report.log_rhs = log_eta + ux;
    } else {
        report.log_rhs = kInf;
    }
    report.rhs_finite = std::isfinite(report.log_rhs);
    report.below_rhs = report.rhs_finite && report.log_mean_exp <= report.log_rhs;
    return report;
}

}  // namespace tmlp
