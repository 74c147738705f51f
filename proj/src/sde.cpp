#include "tmlp/sde.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <sstream>

namespace tmlp {

namespace {

std::string describe_state(std::span<const double> z) {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (std::size_t i = 0; i < z.size(); ++i) os << (i ? ", " : "") << z[i];
    os << ']';
    return os.str();
}

}  // namespace

std::vector<double> taming_map(std::span<const double> y) {
    std::vector<double> out(y.begin(), y.end());
    taming_map_inplace(out);
    return out;
}

void taming_map_inplace(std::span<double> y) {
    if (!all_finite(y)) throw DomainError("taming_map: non-finite input");
    const double denom = 1.0 + squared_norm(y);
    for (double& v : y) v /= denom;
}

// --- PathSimulator -------------------------------------------------------------

PathSimulator::PathSimulator(const Problem& problem)
    : problem_(&problem),
      mu_(problem.dim),
      sigma_(problem.dim * problem.brownian_dim),
      y_(problem.dim),
      dw_(problem.brownian_dim) {}

bool PathSimulator::step(std::span<double> z, double dt, std::span<const double> dW, double h,
                         CostLedger& ledger) {
    const Problem& p = *problem_;
    if (!p.taming_set(h, z)) return false;

    p.drift(z, mu_);
    ++ledger.mu_evals;
    p.diffusion(z, sigma_);
    ++ledger.sigma_evals;
    ++ledger.coefficient_steps;
    if (!all_finite(mu_) || !all_finite(sigma_))
        throw NumericError("non-finite drift or diffusion at state " + describe_state(z));

    const std::size_t d = p.dim;
    const std::size_t m = p.brownian_dim;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        const double* row = sigma_.data() + i * m;
        for (std::size_t k = 0; k < m; ++k) acc += row[k] * dW[k];
        y_[i] = acc;
        norm2 += acc * acc;
    }
    const double denom = 1.0 + norm2;
    for (std::size_t i = 0; i < d; ++i) z[i] += mu_[i] * dt + y_[i] / denom;
    if (!all_finite(z)) throw NumericError("non-finite state after tamed step: " + describe_state(z));
    return true;
}

void PathSimulator::simulate(const Partition& adjoined, std::span<double> state, const StreamBase& brownian,
                             double target, CostLedger& ledger) {
    if (!(target >= adjoined.front()) || !(target <= adjoined.back()))
        throw DomainError("simulate_path: target time outside [t, T]");
    if (target == adjoined.front()) return;

    const double h = adjoined.mesh();
    const std::size_t last = adjoined.round_down_index(target);
    for (std::size_t i = 0; i < last; ++i) {
        const double dt = adjoined.point(i + 1) - adjoined.point(i);
        gaussian_increment(brownian.at(i), dt, dw_);
        if (!step(state, dt, dw_, h, ledger)) return;  // frozen for good
    }
    const double dt = target - adjoined.point(last);
    if (dt <= 0.0) return;  // target is a grid point
    gaussian_increment(brownian.at(last), dt, dw_);
    step(state, dt, dw_, h, ledger);
}

std::vector<double> tamed_step(std::span<const double> z, double dt, std::span<const double> dW, double h,
                               const Problem& problem, CostLedger& ledger) {
    if (!(dt > 0.0)) throw DomainError("tamed_step: dt must be positive");
    if (!all_finite(z)) throw DomainError("tamed_step: non-finite state");
    PathSimulator sim(problem);
    std::vector<double> out(z.begin(), z.end());
    sim.step(out, dt, dW, h, ledger);
    return out;
}

std::vector<double> simulate_path(const TamedPathSpec& spec, double target_time, CostLedger& ledger) {
    if (spec.problem == nullptr) throw ConfigError("simulate_path: no problem");
    if (spec.start_state.size() != spec.problem->dim) throw DomainError("simulate_path: state dimension");
    if (spec.partition.front() != spec.start_time)
        throw DomainError("simulate_path: partition must start at the start time");
    PathSimulator sim(*spec.problem);
    std::vector<double> state = spec.start_state;
    sim.simulate(spec.partition, state, stream_base(spec.seed, spec.stream_index, Purpose::BrownianIncrement),
                 target_time, ledger);
    return state;
}

// --- taming sets -----------------------------------------------------------------

bool log_mesh_taming_criterion(double h, std::span<const double> x, std::size_t d, double eta, double beta) {
    if (!(h > 0.0) || h > 0.5) return false;
    const double dd = static_cast<double>(d);
    const double lhs = 3.0 * eta * std::log(dd) + 8.0 * beta * std::log(squared_norm(x) + std::pow(dd, eta));
    return lhs <= std::sqrt(std::fabs(std::log(h)));
}

TamingSet log_mesh_taming_set(double eta, double beta) {
    return [eta, beta](double h, std::span<const double> x) { return log_mesh_taming_criterion(h, x, x.size(), eta, beta); };
}

TamingSet everywhere_taming_set() {
    return [](double, std::span<const double>) { return true; };
}

// --- strong error ----------------------------------------------------------------

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (nn * sxy - sx * sy) / denom;
}

namespace {

struct RatePlan {
    std::vector<std::uint64_t> coarse;  // meshes compared against the reference
    std::uint64_t fine = 0;
    bool exact = false;
};

RatePlan plan_rate(const Problem& problem, const StrongRateConfig& config) {
    problem.validate();
    if (config.steps.empty()) throw ConfigError("sde-rate: no meshes given");
    for (std::size_t i = 0; i < config.steps.size(); ++i) {
        if (config.steps[i] < 1) throw ConfigError("sde-rate: step counts must be >= 1");
        if (i > 0 && config.steps[i] <= config.steps[i - 1])
            throw ConfigError("sde-rate: meshes must be strictly decreasing");
    }
    RatePlan plan;
    plan.fine = config.steps.back();
    for (auto s : config.steps)
        if (plan.fine % s != 0) throw ConfigError("sde-rate: meshes are not nested in the finest mesh");
    if (!(config.moment >= 1.0)) throw ConfigError("sde-rate: moment order must be >= 1");
    if (config.paths < 2) throw ConfigError("sde-rate: need at least two paths");
    if (!config.start_state.empty() && config.start_state.size() != problem.dim)
        throw ConfigError("sde-rate: start state dimension mismatch");
    plan.exact = static_cast<bool>(problem.exact_step);
    plan.coarse = config.steps;
    if (!plan.exact) plan.coarse.pop_back();  // the finest tamed path is the reference
    return plan;
}

// Per-path terminal errors ‖Y_c − X‖^r for every coarse mesh c.
void rate_path(const Problem& problem, const StrongRateConfig& config, const RatePlan& plan, std::size_t path,
               PathSimulator& sim, std::span<double> errors_out) {
    const std::size_t d = problem.dim;
    const std::size_t m = problem.brownian_dim;
    const double T = problem.horizon;
    const double h_fine = T / static_cast<double>(plan.fine);
    const std::size_t nc = plan.coarse.size();

    std::vector<double> x0 = config.start_state.empty() ? std::vector<double>(d, 0.0) : config.start_state;
    std::vector<double> reference = x0;
    std::vector<std::vector<double>> coarse(nc, x0);
    std::vector<std::vector<double>> acc(nc, std::vector<double>(m, 0.0));
    std::vector<double> dw(m), aux(m);
    std::vector<bool> active(nc, true);
    bool ref_active = true;
    CostLedger scratch;

    const StreamBase base = stream_base(config.seed, MultiIndex{static_cast<std::int64_t>(path)},
                                        Purpose::BrownianIncrement);
    const double scale = std::sqrt(h_fine);
    for (std::uint64_t j = 0; j < plan.fine; ++j) {
        const GeneratorState g = base.at(j);
        for (std::size_t k = 0; k < m; ++k) dw[k] = scale * g.normal(k);
        if (plan.exact) {
            for (std::size_t k = 0; k < m; ++k) aux[k] = g.normal(m + k);
            problem.exact_step(reference, h_fine, dw, aux);
        } else if (ref_active) {
            ref_active = sim.step(reference, h_fine, dw, h_fine, scratch);
        }
        for (std::size_t c = 0; c < nc; ++c) {
            for (std::size_t k = 0; k < m; ++k) acc[c][k] += dw[k];
            const std::uint64_t ratio = plan.fine / plan.coarse[c];
            if ((j + 1) % ratio == 0) {
                const double dt = T / static_cast<double>(plan.coarse[c]);
                if (active[c]) active[c] = sim.step(coarse[c], dt, acc[c], dt, scratch);
                std::fill(acc[c].begin(), acc[c].end(), 0.0);
            }
        }
    }
    for (std::size_t c = 0; c < nc; ++c) {
        double e2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = coarse[c][i] - reference[i];
            e2 += diff * diff;
        }
        errors_out[c] = std::pow(std::sqrt(e2), config.moment);
    }
}

StrongRateResult summarize_rate(const Problem& problem, const StrongRateConfig& config, const RatePlan& plan,
                                const std::vector<double>& errors) {
    const std::size_t nc = plan.coarse.size();
    const double P = static_cast<double>(config.paths);
    StrongRateResult result;
    result.exact_reference = plan.exact;
    std::vector<double> meshes, errs;
    for (std::size_t c = 0; c < nc; ++c) {
        double sum = 0.0;
        for (std::size_t p = 0; p < config.paths; ++p) sum += errors[p * nc + c];
        const double mean = sum / P;
        double ss = 0.0;
        for (std::size_t p = 0; p < config.paths; ++p) {
            const double dev = errors[p * nc + c] - mean;
            ss += dev * dev;
        }
        const double se_mean = std::sqrt(ss / (P - 1.0) / P);
        StrongRateRow row;
        row.mesh = problem.horizon / static_cast<double>(plan.coarse[c]);
        row.error = std::pow(mean, 1.0 / config.moment);
        row.std_error = mean > 0.0 ? row.error / (config.moment * mean) * se_mean : 0.0;
        result.rows.push_back(row);
        meshes.push_back(row.mesh);
        errs.push_back(row.error);
    }
    result.slope = loglog_slope(meshes, errs);
    return result;
}

}  // namespace

StrongRateResult strong_rate_experiment(const Problem& problem, const StrongRateConfig& config) {
    const RatePlan plan = plan_rate(problem, config);
    const std::size_t nc = plan.coarse.size();
    std::vector<double> errors(config.paths * nc);
    const long long paths = static_cast<long long>(config.paths);
#pragma omp parallel num_threads(std::max(1, config.threads))
    {
        PathSimulator sim(problem);
#pragma omp for schedule(static)
        for (long long p = 0; p < paths; ++p)
            rate_path(problem, config, plan, static_cast<std::size_t>(p), sim,
                      std::span<double>(errors).subspan(static_cast<std::size_t>(p) * nc, nc));
    }
    return summarize_rate(problem, config, plan, errors);
}

StrongRateResult strong_rate_experiment_serial(const Problem& problem, const StrongRateConfig& config) {
    const RatePlan plan = plan_rate(problem, config);
    const std::size_t nc = plan.coarse.size();
    std::vector<double> errors(config.paths * nc);
    PathSimulator sim(problem);
    for (std::size_t p = 0; p < config.paths; ++p)
        rate_path(problem, config, plan, p, sim, std::span<double>(errors).subspan(p * nc, nc));
    return summarize_rate(problem, config, plan, errors);
}

}  // namespace tmlp
