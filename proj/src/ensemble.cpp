#include "formeval/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "formeval/metrics.hpp"

namespace formeval {

double EnsembleWeights::get(AspectId aspect) const {
    switch (aspect) {
    case AspectId::LP: return lp;
    case AspectId::MC: return mc;
    case AspectId::FV: return fv;
    case AspectId::FQ: return fq;
    }
    throw InputError("invalid AspectId");
}

void EnsembleWeights::validate() const {
    for (double w : as_array()) {
        if (!(w >= -1e-12)) throw InputError("ensemble weights must be nonnegative");
    }
    const double sum = lp + mc + fv + fq;
    if (std::abs(sum - 1.0) > 1e-9) throw InputError("ensemble weights must sum to 1");
}

EnsembleWeights paper_weights() { return EnsembleWeights{0.25, 0.19, 0.32, 0.24}; }

namespace {

int profile_judgment(const OapProfile& profile, OapId oap, AspectId aspect) {
    auto it = profile.find(oap);
    if (it == profile.end()) {
        throw InputError("profile is missing OAP " + std::string(oap_name(oap)) +
                         " required for aspect " + std::string(aspect_name(aspect)));
    }
    if (it->second != 0 && it->second != 1) {
        throw InputError("OAP judgments must be 0/1");
    }
    return it->second;
}

} // namespace

std::map<AspectId, double> and_synthesis(const OapProfile& profile,
                                         const CriteriaRegistry& registry,
                                         const std::vector<AspectId>& aspects) {
    std::map<AspectId, double> scores;
    for (AspectId aspect : aspects) {
        int all_positive = 1;
        for (OapId oap : registry.aspect_oaps(aspect)) {
            all_positive &= profile_judgment(profile, oap, aspect);
        }
        scores[aspect] = static_cast<double>(all_positive);
    }
    return scores;
}

std::map<AspectId, double>
wa_synthesis(const OapProfile& profile, const CriteriaRegistry& registry,
             const std::vector<AspectId>& aspects,
             const std::map<AspectId, std::vector<double>>& oap_weights) {
    std::map<AspectId, double> scores;
    for (AspectId aspect : aspects) {
        const auto& group = registry.aspect_oaps(aspect);
        const std::vector<double>* weights = nullptr;
        if (auto it = oap_weights.find(aspect); it != oap_weights.end()) {
            weights = &it->second;
            if (weights->size() != group.size()) {
                throw InputError("OAP weight vector length mismatch for aspect " +
                                 std::string(aspect_name(aspect)));
            }
            double sum = 0.0;
            for (double w : *weights) {
                if (w < 0.0) throw InputError("OAP weights must be nonnegative");
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw InputError("OAP weights must sum to 1");
        }
        double score = 0.0;
        if (weights) {
            for (std::size_t i = 0; i < group.size(); ++i)
                score += (*weights)[i] * profile_judgment(profile, group[i], aspect);
        } else {
            // Equal weights reduce to the group mean; summing the raw
            // judgments first keeps full groups at exactly 1.
            for (std::size_t i = 0; i < group.size(); ++i)
                score += profile_judgment(profile, group[i], aspect);
            score /= static_cast<double>(group.size());
        }
        scores[aspect] = score;
    }
    return scores;
}

double overall_score(const AspectScores& aspects, const EnsembleWeights& weights) {
    weights.validate();
    for (AspectId a : kAllAspects) {
        const double s = aspects.get(a);
        if (!(s >= 0.0 && s <= 1.0)) throw InputError("aspect scores must lie in [0,1]");
    }
    return weights.lp * aspects.lp + weights.mc * aspects.mc + weights.fv * aspects.fv +
           weights.fq * aspects.fq;
}

double gate_overall_with_validity(double overall_judgment, int valid, double gate) {
    if (!(overall_judgment >= 0.0 && overall_judgment <= 1.0)) {
        throw InputError("overall judgment must lie in [0,1]");
    }
    if (valid != 0 && valid != 1) throw InputError("validity must be 0/1");
    if (!(gate >= 0.0 && gate <= 1.0)) throw InputError("gate must lie in [0,1]");
    return valid == 1 ? overall_judgment : overall_judgment * gate;
}

namespace {

// Solves the k x k linear system a*x = b by Gaussian elimination with
// partial pivoting. Returns false when a pivot collapses.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
    const std::size_t k = b.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < k; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (std::abs(a[pivot][col]) < 1e-13) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < k; ++row) {
            const double factor = a[row][col] / a[col][col];
            for (std::size_t j = col; j < k; ++j) a[row][j] -= factor * a[col][j];
            b[row] -= factor * b[col];
        }
    }
    x.assign(k, 0.0);
    for (std::size_t row = k; row-- > 0;) {
        double acc = b[row];
        for (std::size_t j = row + 1; j < k; ++j) acc -= a[row][j] * x[j];
        x[row] = acc / a[row][row];
    }
    return true;
}

// Equality-constrained least squares on one face: minimize ||A v - y||^2
// subject to sum(v) = 1, where A holds the support's columns. Solved via
// the KKT system; on a singular face a small ridge term on the Gram matrix
// breaks the degeneracy without moving well-posed solutions.
bool solve_face(const std::vector<std::array<double, 4>>& X, const std::vector<double>& y,
                const std::vector<int>& support, std::vector<double>& v) {
    const std::size_t k = support.size();
    std::vector<std::vector<double>> kkt(k + 1, std::vector<double>(k + 1, 0.0));
    std::vector<double> rhs(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double g = 0.0;
            for (std::size_t r = 0; r < X.size(); ++r) {
                g += X[r][support[i]] * X[r][support[j]];
            }
            kkt[i][j] = 2.0 * g;
        }
        double xty = 0.0;
        for (std::size_t r = 0; r < X.size(); ++r) xty += X[r][support[i]] * y[r];
        rhs[i] = 2.0 * xty;
        kkt[i][k] = 1.0;
        kkt[k][i] = 1.0;
    }
    rhs[k] = 1.0;

    std::vector<double> sol;
    if (!solve_linear(kkt, rhs, sol)) {
        for (std::size_t i = 0; i < k; ++i) kkt[i][i] += 1e-10;
        if (!solve_linear(kkt, rhs, sol)) return false;
    }
    v.assign(sol.begin(), sol.begin() + static_cast<long>(k));
    return true;
}

double objective_at(const std::vector<std::array<double, 4>>& X, const std::vector<double>& y,
                    const std::array<double, 4>& w) {
    double total = 0.0;
    for (std::size_t r = 0; r < X.size(); ++r) {
        double pred = 0.0;
        for (int j = 0; j < 4; ++j) pred += X[r][j] * w[j];
        const double d = pred - y[r];
        total += d * d;
    }
    return total;
}

std::vector<std::vector<int>> supports_in_lex_order() {
    std::vector<std::vector<int>> supports;
    for (int mask = 1; mask < 16; ++mask) {
        std::vector<int> s;
        for (int j = 0; j < 4; ++j) {
            if (mask & (1 << j)) s.push_back(j);
        }
        supports.push_back(std::move(s));
    }
    std::sort(supports.begin(), supports.end());
    return supports;
}

} // namespace

FitResult fit_weights(const std::vector<std::array<double, 4>>& X, const std::vector<double>& y) {
    if (X.empty()) throw InputError("fit_weights: need at least one row");
    if (X.size() != y.size()) throw InputError("fit_weights: X/y length mismatch");
    for (const auto& row : X) {
        for (double v : row) {
            if (!(v >= 0.0 && v <= 1.0)) throw InputError("fit_weights: X entries must lie in [0,1]");
        }
    }
    for (double v : y) {
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("fit_weights: y entries must lie in [0,1]");
    }

    constexpr double kFeasibilityEps = 1e-9;
    bool have_best = false;
    double best_objective = 0.0;
    std::array<double, 4> best_w{};

    for (const auto& support : supports_in_lex_order()) {
        std::vector<double> v;
        if (!solve_face(X, y, support, v)) continue;
        if (std::any_of(v.begin(), v.end(), [](double x) { return x < -kFeasibilityEps; })) {
            continue;
        }
        // Clamp numerical dust and renormalize so the returned point
        // satisfies the simplex constraints exactly enough for the
        // invariants; the objective is evaluated at the returned point.
        std::array<double, 4> w{0.0, 0.0, 0.0, 0.0};
        double sum = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            w[support[i]] = std::max(0.0, v[i]);
            sum += w[support[i]];
        }
        if (sum <= 0.0) continue;
        for (double& x : w) x /= sum;
        const double obj = objective_at(X, y, w);
        if (!have_best || obj < best_objective) {
            have_best = true;
            best_objective = obj;
            best_w = w;
        }
    }
    if (!have_best) throw InputError("fit_weights: no feasible face solution found");

    FitResult result;
    result.weights = EnsembleWeights{best_w[0], best_w[1], best_w[2], best_w[3]};
    result.objective = best_objective;

    std::vector<double> fitted(X.size());
    for (std::size_t r = 0; r < X.size(); ++r) {
        double pred = 0.0;
        for (int j = 0; j < 4; ++j) pred += X[r][j] * best_w[j];
        fitted[r] = pred;
    }
    result.nrmse = nrmse(fitted, y);
    if (y.size() >= 2) result.correlation = pearson(fitted, y);
    return result;
}

} // namespace formeval
