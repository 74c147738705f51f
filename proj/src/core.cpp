#include "tmlp/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tmlp {

void Problem::validate() const {
    if (dim < 1 || brownian_dim < 1) throw ConfigError("problem '" + name + "': d and m must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("problem '" + name + "': horizon must be positive and finite");
    if (!drift || !diffusion || !nonlinearity || !terminal || !taming_set)
        throw ConfigError("problem '" + name + "': missing coefficient callback");
    if (!(lipschitz_f >= 0.0)) throw ConfigError("problem '" + name + "': lipschitz_f must be >= 0");
}

// --- Partition -------------------------------------------------------------

Partition Partition::from_points(std::vector<double> points) {
    if (points.size() < 2) throw DomainError("partition needs at least two points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i])) throw DomainError("partition point is not finite");
        if (i > 0 && !(points[i] > points[i - 1]))
            throw DomainError("partition points must be strictly increasing");
    }
    auto grid = std::make_shared<ExplicitGrid>();
    const std::size_t n = points.size() - 1;
    grid->suffix_max_gap.assign(n + 1, 0.0);
    for (std::size_t j = n; j-- > 0;)
        grid->suffix_max_gap[j] = std::max(grid->suffix_max_gap[j + 1], points[j + 1] - points[j]);
    grid->points = std::move(points);

    Partition p;
    p.base_last_ = n;
    p.start_ = grid->points.front();
    p.first_ = 1;
    p.mesh_ = grid->suffix_max_gap[0];
    p.explicit_ = std::move(grid);
    return p;
}

Partition Partition::uniform(std::uint64_t steps, double horizon, std::uint64_t step_cap) {
    if (steps < 1) throw DomainError("uniform partition needs at least one step");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
    if (steps > step_cap)
        throw CapacityError("uniform partition with " + std::to_string(steps) +
                            " steps exceeds the step cap " + std::to_string(step_cap));
    Partition p;
    p.steps_ = steps;
    p.horizon_ = horizon;
    p.base_last_ = steps;
    p.start_ = 0.0;
    p.first_ = 1;
    p.mesh_ = horizon / static_cast<double>(steps);
    return p;
}

double Partition::base_point(std::uint64_t j) const {
    if (explicit_) return explicit_->points[j];
    if (j >= steps_) return horizon_;
    return static_cast<double>(j) * horizon_ / static_cast<double>(steps_);
}

std::size_t Partition::round_down_index(double s) const {
    if (!(s >= start_) || !(s <= back()))
        throw DomainError("round_down: time outside the partition interval");
    if (s == start_) return 0;

    // Base index j with base(j) < s <= base(j+1).
    std::uint64_t j;
    if (explicit_) {
        const auto& pts = explicit_->points;
        auto it = std::lower_bound(pts.begin(), pts.end(), s);  // first >= s
        j = static_cast<std::uint64_t>(it - pts.begin()) - 1;
    } else {
        double guess = std::ceil(s * static_cast<double>(steps_) / horizon_) - 1.0;
        guess = std::clamp(guess, 0.0, static_cast<double>(steps_ - 1));
        j = static_cast<std::uint64_t>(guess);
        while (j > 0 && base_point(j) >= s) --j;
        while (j + 1 < steps_ && base_point(j + 1) < s) ++j;
    }
    if (j < first_ || base_point(j) <= start_) return 0;
    return static_cast<std::size_t>(j - first_ + 1);
}

Partition Partition::adjoin(double t) const {
    if (!(t >= start_) || !(t < back()))
        throw DomainError("adjoin: start time must lie in [t0, T)");
    Partition p = *this;
    p.start_ = t;
    // First base index with base(j) > t.
    std::uint64_t j;
    if (explicit_) {
        const auto& pts = explicit_->points;
        j = static_cast<std::uint64_t>(std::upper_bound(pts.begin(), pts.end(), t) - pts.begin());
    } else {
        double guess = std::floor(t * static_cast<double>(steps_) / horizon_) + 1.0;
        guess = std::clamp(guess, 1.0, static_cast<double>(steps_));
        j = static_cast<std::uint64_t>(guess);
        while (j > 1 && base_point(j - 1) > t) --j;
        while (j < steps_ && base_point(j) <= t) ++j;
    }
    p.first_ = std::max(j, first_);
    const double first_gap = p.base_point(p.first_) - t;
    if (explicit_) {
        p.mesh_ = std::max(first_gap, explicit_->suffix_max_gap[p.first_]);
    } else {
        const double h = horizon_ / static_cast<double>(steps_);
        p.mesh_ = p.first_ < steps_ ? h : std::min(first_gap, h);
    }
    return p;
}

std::vector<double> Partition::points() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = point(i);
    return out;
}

double round_down(double s, const Partition& partition) { return partition.round_down(s); }
double mesh(const Partition& partition) { return partition.mesh(); }
Partition adjoin(const Partition& partition, double t) { return partition.adjoin(t); }

std::optional<std::uint64_t> checked_power(std::uint64_t base, unsigned exponent) {
    std::uint64_t result = 1;
    for (unsigned k = 0; k < exponent; ++k) {
        if (base != 0 && result > UINT64_MAX / base) return std::nullopt;
        result *= base;
    }
    return result;
}

Partition uniform_partition(unsigned n, double horizon, std::uint64_t step_cap) {
    if (n < 1) throw DomainError("uniform_partition: n must be >= 1");
    auto steps = checked_power(n, n);
    if (!steps || *steps > step_cap)
        throw CapacityError("uniform_partition: n^n for n = " + std::to_string(n) +
                            " exceeds the step cap " + std::to_string(step_cap));
    return Partition::uniform(*steps, horizon, step_cap);
}

// --- MultiIndex ------------------------------------------------------------

MultiIndex::MultiIndex(std::initializer_list<std::int64_t> entries) : path_(entries) {
    if (path_.empty()) throw DomainError("multi-index must be nonempty");
}

MultiIndex::MultiIndex(std::vector<std::int64_t> entries) : path_(std::move(entries)) {
    if (path_.empty()) throw DomainError("multi-index must be nonempty");
}

MultiIndex MultiIndex::replicate_root(std::uint64_t replicate) {
    return MultiIndex{static_cast<std::int64_t>(replicate), 0};
}

MultiIndex MultiIndex::child(std::int64_t a, std::int64_t b) const {
    std::vector<std::int64_t> next;
    next.reserve(path_.size() + 2);
    next = path_;
    next.push_back(a);
    next.push_back(b);
    return MultiIndex(std::move(next));
}

std::string MultiIndex::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < path_.size(); ++i) os << (i ? "," : "") << path_[i];
    os << ')';
    return os.str();
}

// ---------------------------------------------------------------------------

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace tmlp
