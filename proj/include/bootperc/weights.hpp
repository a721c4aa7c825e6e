#pragma once

// Vertex-weight sequences w(n) and their limiting laws F.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bootperc/errors.hpp"
#include "bootperc/rng.hpp"

namespace bootperc {

namespace detail {

/// Neumaier-compensated sum.
template <class Range>
double compensated_sum(const Range& values) {
    double sum = 0.0;
    double comp = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace detail

/// Class label for vertices that belong to no discretisation class (heavy part).
inline constexpr std::int32_t kNoClass = -1;

/// Positive vertex weights sorted nondecreasingly; vertex i has weight weights()[i].
class WeightSequence {
public:
    WeightSequence() = default;

    /// Sorts the input. Throws std::invalid_argument on empty input or non-positive /
    /// non-finite weights.
    explicit WeightSequence(std::vector<double> weights) : weights_(std::move(weights)) {
        detail::require(!weights_.empty(), "weight sequence must be non-empty");
        for (double w : weights_)
            detail::require(std::isfinite(w) && w > 0.0, "weights must be positive and finite");
        std::sort(weights_.begin(), weights_.end());
        total_ = detail::compensated_sum(weights_);
    }

    /// Sequence carrying class metadata. `weights` must already be sorted and
    /// `class_of` aligned with it (kNoClass for unclassed vertices).
    WeightSequence(std::vector<double> weights, std::vector<std::int32_t> class_of)
        : weights_(std::move(weights)), class_of_(std::move(class_of)) {
        detail::require(!weights_.empty(), "weight sequence must be non-empty");
        detail::require(class_of_.size() == weights_.size(), "class_of must align with weights");
        for (double w : weights_)
            detail::require(std::isfinite(w) && w > 0.0, "weights must be positive and finite");
        detail::require(std::is_sorted(weights_.begin(), weights_.end()), "weights must be sorted");
        total_ = detail::compensated_sum(weights_);
        for (auto c : class_of_) num_classes_ = std::max<std::size_t>(num_classes_, c + 1);
    }

    std::span<const double> weights() const noexcept { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::size_t size() const noexcept { return weights_.size(); }
    double total_weight() const noexcept { return total_; }
    double mean() const noexcept { return total_ / static_cast<double>(weights_.size()); }
    double min_weight() const { return weights_.front(); }
    double max_weight() const { return weights_.back(); }

    bool has_classes() const noexcept { return !class_of_.empty(); }
    std::span<const std::int32_t> class_of() const noexcept { return class_of_; }
    std::size_t num_classes() const noexcept { return num_classes_; }

    /// Sum of the weights of the vertices in `subset`.
    double subset_weight(std::span<const std::uint32_t> subset) const {
        std::vector<double> vals;
        vals.reserve(subset.size());
        for (auto v : subset) vals.push_back(weights_.at(v));
        return detail::compensated_sum(vals);
    }

private:
    std::vector<double> weights_;
    std::vector<std::int32_t> class_of_;
    double total_ = 0.0;
    std::size_t num_classes_ = 0;
};

// ---------------------------------------------------------------------------
// Limiting distributions

struct PointMass {
    double value;
};

/// Finite mixture of atoms. Values are kept sorted ascending.
struct Mixture {
    std::vector<double> values;
    std::vector<double> probs;
};

/// F(x) = 1 - c x^{1-beta} on [x0, inf) with c = x0^{beta-1}, optionally
/// conditioned on [x0, cap].
struct PowerLaw {
    double beta;
    double x0;
    double cap = std::numeric_limits<double>::infinity();
};

class WeightDistribution {
public:
    using Kind = std::variant<PointMass, Mixture, PowerLaw>;

    static WeightDistribution point_mass(double d) {
        detail::require(std::isfinite(d) && d > 0.0, "point mass requires d > 0");
        return WeightDistribution(PointMass{d});
    }

    static WeightDistribution mixture(std::vector<double> values, std::vector<double> probs) {
        detail::require(!values.empty() && values.size() == probs.size(),
                        "mixture needs matching non-empty values and probabilities");
        std::vector<std::size_t> order(values.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        Mixture m;
        for (auto i : order) {
            detail::require(values[i] > 0.0 && std::isfinite(values[i]), "mixture values must be positive");
            detail::require(probs[i] >= 0.0, "mixture probabilities must be non-negative");
            if (probs[i] == 0.0) continue;
            if (!m.values.empty() && m.values.back() == values[i]) {
                m.probs.back() += probs[i];
            } else {
                m.values.push_back(values[i]);
                m.probs.push_back(probs[i]);
            }
        }
        const double total = detail::compensated_sum(m.probs);
        detail::require(std::abs(total - 1.0) < 1e-9, "mixture probabilities must sum to 1");
        for (auto& p : m.probs) p /= total;
        return WeightDistribution(std::move(m));
    }

    static WeightDistribution power_law(double beta, double x0,
                                        double cap = std::numeric_limits<double>::infinity()) {
        detail::require(beta > 2.0, "power law requires beta > 2 (finite mean)");
        detail::require(x0 > 0.0 && std::isfinite(x0), "power law requires x0 > 0");
        detail::require(cap > x0, "power-law cap must exceed x0");
        return WeightDistribution(PowerLaw{beta, x0, cap});
    }

    const Kind& kind() const noexcept { return kind_; }
    bool is_point_mass() const noexcept { return std::holds_alternative<PointMass>(kind_); }
    bool is_mixture() const noexcept { return std::holds_alternative<Mixture>(kind_); }
    bool is_power_law() const noexcept { return std::holds_alternative<PowerLaw>(kind_); }
    /// True when F has no continuous part (point mass or mixture).
    bool is_discrete() const noexcept { return !is_power_law(); }

    /// Atoms and their masses; a point mass is a one-atom mixture. Empty for power laws.
    Mixture atoms() const {
        if (auto pm = std::get_if<PointMass>(&kind_)) return Mixture{{pm->value}, {1.0}};
        if (auto mx = std::get_if<Mixture>(&kind_)) return *mx;
        return {};
    }

    /// Left end of the support (the non-degeneracy constant x_0).
    double x0() const {
        if (auto pl = std::get_if<PowerLaw>(&kind_)) return pl->x0;
        return atoms().values.front();
    }

    /// Power-law normalising constant c = x0^{beta-1}; 0 for discrete kinds.
    double c() const {
        if (auto pl = std::get_if<PowerLaw>(&kind_)) return std::pow(pl->x0, pl->beta - 1.0);
        return 0.0;
    }

    double cdf(double x) const {
        if (auto pl = std::get_if<PowerLaw>(&kind_)) {
            if (x < pl->x0) return 0.0;
            if (x >= pl->cap) return 1.0;
            return -std::expm1((1.0 - pl->beta) * std::log(x / pl->x0)) / power_law_mass(*pl);
        }
        const auto m = atoms();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.values.size() && m.values[i] <= x; ++i) acc += m.probs[i];
        return std::min(acc, 1.0);
    }

    /// F(x-).
    double cdf_left(double x) const {
        if (is_power_law()) return cdf(x);
        const auto m = atoms();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.values.size() && m.values[i] < x; ++i) acc += m.probs[i];
        return std::min(acc, 1.0);
    }

    /// P(W_F > x).
    double survival(double x) const { return 1.0 - cdf(x); }

    /// inf { x : F(x) >= u } for u in (0, 1].
    double quantile(double u) const {
        detail::require(u > 0.0 && u <= 1.0, "quantile level must lie in (0, 1]");
        if (auto pl = std::get_if<PowerLaw>(&kind_)) {
            if (u >= 1.0) return pl->cap;
            // 1 - (x/x0)^{1-beta} = u * mass
            const double tail = 1.0 - u * power_law_mass(*pl);
            return pl->x0 * std::pow(tail, 1.0 / (1.0 - pl->beta));
        }
        const auto m = atoms();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            acc += m.probs[i];
            if (acc >= u - 1e-15) return m.values[i];
        }
        return m.values.back();
    }

    /// d = E[W_F], closed form per kind.
    double mean() const {
        if (auto pl = std::get_if<PowerLaw>(&kind_)) return power_law_partial_mean(*pl, pl->x0, pl->cap);
        const auto m = atoms();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.values.size(); ++i) acc += m.values[i] * m.probs[i];
        return acc;
    }

    /// E[W_F 1{W_F >= t}] (atom at t included).
    double tail_mean(double t) const {
        if (auto pl = std::get_if<PowerLaw>(&kind_)) {
            const double lo = std::max(t, pl->x0);
            if (lo >= pl->cap) return 0.0;
            return power_law_partial_mean(*pl, lo, pl->cap);
        }
        const auto m = atoms();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.values.size(); ++i)
            if (m.values[i] >= t) acc += m.values[i] * m.probs[i];
        return acc;
    }

    /// E[W_F 1{W_F > t}].
    double tail_mean_strict(double t) const {
        if (is_power_law()) return tail_mean(t);
        const auto m = atoms();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.values.size(); ++i)
            if (m.values[i] > t) acc += m.values[i] * m.probs[i];
        return acc;
    }

    /// E[W_F 1{a <= W_F < b}].
    double interval_mean(double a, double b) const { return tail_mean(a) - tail_mean(b); }

    /// Whether E[W_F^*] = E[W_F^2]/E[W_F] is finite.
    bool has_finite_size_biased_mean() const {
        if (auto pl = std::get_if<PowerLaw>(&kind_)) return pl->beta > 3.0 || std::isfinite(pl->cap);
        return true;
    }

    /// The size-biased law W_F^* as a distribution in its own right, for the
    /// discrete kinds; power laws are handled analytically by the callers.
    WeightDistribution size_biased() const {
        if (is_power_law()) {
            const auto& pl = std::get<PowerLaw>(kind_);
            // density proportional to w^{1-beta}: a power law with exponent beta-1
            return WeightDistribution(PowerLaw{pl.beta - 1.0, pl.x0, pl.cap}, /*size_biased_tag=*/true);
        }
        auto m = atoms();
        const double d = mean();
        for (std::size_t i = 0; i < m.values.size(); ++i) m.probs[i] *= m.values[i] / d;
        return WeightDistribution(std::move(m));
    }

    /// Draw from the size-biased law x dF(x) / d.
    double sample_size_biased(Rng& rng) const {
        if (auto pl = std::get_if<PowerLaw>(&kind_)) {
            // survival of W* is (x/x0)^{2-beta}, conditioned on [x0, cap]
            const double a = pl->beta - 2.0;
            const double top = std::isfinite(pl->cap) ? std::pow(pl->cap / pl->x0, -a) : 0.0;
            const double u = rng.uniform();
            const double s = 1.0 - u * (1.0 - top);  // in (top, 1]
            return pl->x0 * std::pow(s, -1.0 / a);
        }
        const auto m = atoms();
        const double d = mean();
        const double u = rng.uniform() * d;
        double acc = 0.0;
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            acc += m.values[i] * m.probs[i];
            if (u < acc) return m.values[i];
        }
        return m.values.back();
    }

    /// Draw from F itself.
    double sample(Rng& rng) const {
        if (is_power_law()) return quantile(rng.uniform());
        const auto m = atoms();
        const double u = rng.uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            acc += m.probs[i];
            if (u < acc) return m.values[i];
        }
        return m.values.back();
    }

    bool size_biased_tag() const noexcept { return size_biased_; }

private:
    explicit WeightDistribution(Kind k, bool size_biased = false) : kind_(std::move(k)), size_biased_(size_biased) {}

    static double power_law_mass(const PowerLaw& pl) {
        if (!std::isfinite(pl.cap)) return 1.0;
        return -std::expm1((1.0 - pl.beta) * std::log(pl.cap / pl.x0));
    }

    // E[W 1{a <= W < b}] for the (possibly conditioned) power law.
    static double power_law_partial_mean(const PowerLaw& pl, double a, double b) {
        const double c = std::pow(pl.x0, pl.beta - 1.0);
        const double e = 2.0 - pl.beta;
        const double hi = std::isfinite(b) ? std::pow(b, e) : 0.0;
        return (pl.beta - 1.0) * c * (std::pow(a, e) - hi) / (pl.beta - 2.0) / power_law_mass(pl);
    }

    Kind kind_;
    bool size_biased_ = false;
};

// ---------------------------------------------------------------------------
// Constructors for sequences

inline WeightSequence make_point_mass(double d, std::size_t n) {
    detail::require(std::isfinite(d) && d > 0.0, "point mass requires d > 0");
    detail::require(n >= 1, "point mass requires n >= 1");
    return WeightSequence(std::vector<double>(n, d));
}

/// w_i = d (n / (i + i0))^{1/(beta-1)} for i = 1..n, returned sorted ascending.
inline WeightSequence make_power_law(std::size_t n, double d, double beta, double i0 = 0.0) {
    detail::require(n >= 1, "power-law sequence requires n >= 1");
    detail::require(beta > 2.0, "power-law sequence requires beta > 2");
    detail::require(d > 0.0 && std::isfinite(d), "power-law sequence requires d > 0");
    detail::require(i0 >= 0.0, "power-law offset i0 must be non-negative");
    std::vector<double> w(n);
    const double nn = static_cast<double>(n);
    const double ex = 1.0 / (beta - 1.0);
    for (std::size_t i = 1; i <= n; ++i) w[n - i] = d * std::pow(nn / (static_cast<double>(i) + i0), ex);
    return WeightSequence(std::move(w));
}

/// Offset i0 for which the largest weight d (n/(1+i0))^{1/(beta-1)} equals n^zeta.
inline double power_law_offset_for_cap(std::size_t n, double d, double beta, double zeta) {
    const double nn = static_cast<double>(n);
    const double i0 = nn * std::pow(d / std::pow(nn, zeta), beta - 1.0) - 1.0;
    return std::max(0.0, i0);
}

/// The explicit power-law sequence with weights capped at n^zeta.
inline WeightSequence make_power_law_capped(std::size_t n, double d, double beta, double zeta) {
    auto base = make_power_law(n, d, beta, 0.0);
    const double cap = std::pow(static_cast<double>(n), zeta);
    std::vector<double> w(base.weights().begin(), base.weights().end());
    for (auto& x : w) x = std::min(x, cap);
    return WeightSequence(std::move(w));
}

/// Deterministic finitary sequence: value i repeated round(p_i n) times
/// (largest-remainder rounding so the counts sum to n).
inline WeightSequence make_mixture_sequence(const WeightDistribution& dist, std::size_t n) {
    detail::require(dist.is_discrete(), "mixture sequence requires a discrete distribution");
    detail::require(n >= 1, "mixture sequence requires n >= 1");
    const auto m = dist.atoms();
    const std::size_t k = m.values.size();
    std::vector<std::size_t> counts(k);
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double exact = m.probs[i] * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        assigned += counts[i];
        rema.emplace_back(exact - static_cast<double>(counts[i]), i);
    }
    std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; assigned < n; ++j, ++assigned) counts[rema[j % k].second]++;
    std::vector<double> w;
    w.reserve(n);
    for (std::size_t i = 0; i < k; ++i) w.insert(w.end(), counts[i], m.values[i]);
    return WeightSequence(std::move(w));
}

// ---------------------------------------------------------------------------
// Queries

/// F_n(x) = |{i : w_i <= x}| / n.
inline double empirical_cdf(const WeightSequence& ws, double x) {
    const auto w = ws.weights();
    const auto it = std::upper_bound(w.begin(), w.end(), x);
    return static_cast<double>(it - w.begin()) / static_cast<double>(w.size());
}

/// Count of weights that are >= x.
inline std::size_t count_at_least(const WeightSequence& ws, double x) {
    const auto w = ws.weights();
    return static_cast<std::size_t>(w.end() - std::lower_bound(w.begin(), w.end(), x));
}

/// C_gamma(F) = inf { x : F(x) >= 1 - gamma }.
inline double c_gamma(const WeightDistribution& dist, double gamma) {
    detail::require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
    if (auto pl = std::get_if<PowerLaw>(&dist.kind()); pl && !std::isfinite(pl->cap))
        return std::pow(dist.c() / gamma, 1.0 / (pl->beta - 1.0));
    return dist.quantile(1.0 - gamma);
}

/// W_gamma(F) = E[W_F 1{W_F >= C_gamma}].
inline double w_gamma(const WeightDistribution& dist, double gamma) {
    return dist.tail_mean(c_gamma(dist, gamma));
}

/// Sup-norm distance sup_x |F_n(x) - F(x)|, computed exactly by checking both
/// one-sided limits at every jump of F_n and of F.
inline double kolmogorov_distance(const WeightSequence& ws, const WeightDistribution& dist) {
    std::vector<double> pts(ws.weights().begin(), ws.weights().end());
    for (double a : dist.atoms().values) pts.push_back(a);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const auto w = ws.weights();
    const double n = static_cast<double>(w.size());
    double sup = 0.0;
    for (double x : pts) {
        const double right = static_cast<double>(std::upper_bound(w.begin(), w.end(), x) - w.begin()) / n;
        const double left = static_cast<double>(std::lower_bound(w.begin(), w.end(), x) - w.begin()) / n;
        sup = std::max({sup, std::abs(right - dist.cdf(x)), std::abs(left - dist.cdf_left(x))});
    }
    return sup;
}

struct RegularityRow {
    std::size_t n;
    double sup_distance;
    double mean_gap;
    bool min_weight_ok;
};

struct RegularityReport {
    std::vector<RegularityRow> rows;
    bool distances_nonincreasing = true;
    bool mean_gaps_nonincreasing = true;
};

/// Regularity diagnostics for a family n -> w(n) against a candidate limit F.
inline RegularityReport check_regularity(const std::function<WeightSequence(std::size_t)>& family,
                                         const WeightDistribution& dist, std::span<const std::size_t> n_grid) {
    detail::require(n_grid.size() >= 2, "regularity check needs at least two values of n");
    RegularityReport rep;
    const double d = dist.mean();
    const double x0 = dist.x0();
    for (auto n : n_grid) {
        const auto ws = family(n);
        rep.rows.push_back({n, kolmogorov_distance(ws, dist), std::abs(ws.mean() - d),
                            ws.min_weight() >= x0 * (1.0 - 1e-12)});
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        if (rep.rows[i].sup_distance > rep.rows[i - 1].sup_distance) rep.distances_nonincreasing = false;
        if (rep.rows[i].mean_gap > rep.rows[i - 1].mean_gap) rep.mean_gaps_nonincreasing = false;
    }
    return rep;
}

struct PowerLawBounds {
    double c1;
    double c2;
};

/// Tightest (c1, c2) with c1 x^{1-beta} <= 1 - F_n(x) <= c2 x^{1-beta} on [x0, x_max),
/// evaluated at the jump points of F_n (where the ratio is extremal).
inline PowerLawBounds fit_power_law_bounds(const WeightSequence& ws, double beta, double x0, double x_max) {
    const auto w = ws.weights();
    const double n = static_cast<double>(w.size());
    PowerLawBounds b{std::numeric_limits<double>::infinity(), 0.0};
    std::vector<double> pts{x0};
    for (double x : w)
        if (x >= x0 && x < x_max) pts.push_back(x);
    for (double x : pts) {
        const double above = static_cast<double>(w.end() - std::upper_bound(w.begin(), w.end(), x)) / n;
        const double below_left = static_cast<double>(w.end() - std::lower_bound(w.begin(), w.end(), x)) / n;
        const double scale = std::pow(x, beta - 1.0);
        b.c1 = std::min(b.c1, above * scale);
        b.c2 = std::max(b.c2, below_left * scale);
    }
    return b;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_weights_csv(std::ostream& os, const WeightSequence& ws) {
    os << "weight\n";
    os.precision(17);
    for (double w : ws.weights()) os << w << '\n';
}

inline WeightSequence read_weights_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("weights CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "weight") throw std::invalid_argument("weights CSV: header must be 'weight'");
    std::vector<double> w;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(line, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("weights CSV: unparsable value '" + line + "'");
        }
        if (pos != line.size()) throw std::invalid_argument("weights CSV: trailing characters in '" + line + "'");
        w.push_back(v);
    }
    return WeightSequence(std::move(w));
}

}  // namespace bootperc
