#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "formeval/criteria.hpp"
#include "formeval/ensemble.hpp"
#include "formeval/errors.hpp"

using namespace formeval;

namespace {

OapProfile profile_from_mask(unsigned mask) {
    OapProfile p;
    for (std::size_t j = 0; j < kAllOaps.size(); ++j) {
        p[kAllOaps[j]] = static_cast<int>((mask >> j) & 1u);
    }
    return p;
}

const std::vector<AspectId> kAspectsVec(kAllAspects.begin(), kAllAspects.end());

// Euclidean projection onto the probability simplex (sort-based).
std::array<double, 4> project_simplex(std::array<double, 4> v) {
    std::array<double, 4> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    int rho = -1;
    for (int i = 0; i < 4; ++i) {
        css += u[i];
        const double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) {
            rho = i;
            theta = t;
        }
    }
    std::array<double, 4> w{};
    for (int i = 0; i < 4; ++i) w[i] = std::max(0.0, v[i] - theta);
    (void)rho;
    return w;
}

struct QuadForm {
    std::array<std::array<double, 4>, 4> G{};
    std::array<double, 4> b{};
    double c = 0.0;

    static QuadForm of(const std::vector<std::array<double, 4>>& X, const std::vector<double>& y) {
        QuadForm q;
        for (std::size_t r = 0; r < X.size(); ++r) {
            for (int i = 0; i < 4; ++i) {
                q.b[i] += X[r][i] * y[r];
                for (int j = 0; j < 4; ++j) q.G[i][j] += X[r][i] * X[r][j];
            }
            q.c += y[r] * y[r];
        }
        return q;
    }

    double objective(const std::array<double, 4>& w) const {
        double quad = 0.0, lin = 0.0;
        for (int i = 0; i < 4; ++i) {
            lin += b[i] * w[i];
            for (int j = 0; j < 4; ++j) quad += w[i] * G[i][j] * w[j];
        }
        return quad - 2.0 * lin + c;
    }
};

// Reference solver #1: exhaustive simplex grid with the given step count.
double grid_minimum(const QuadForm& q, int levels) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= levels; ++i) {
        for (int j = 0; i + j <= levels; ++j) {
            for (int k = 0; i + j + k <= levels; ++k) {
                const int l = levels - i - j - k;
                const std::array<double, 4> w{
                    static_cast<double>(i) / levels, static_cast<double>(j) / levels,
                    static_cast<double>(k) / levels, static_cast<double>(l) / levels};
                best = std::min(best, q.objective(w));
            }
        }
    }
    return best;
}

// Reference solver #2: projected gradient descent on the simplex.
double projected_gradient_minimum(const QuadForm& q, int iterations) {
    double trace = 0.0;
    for (int i = 0; i < 4; ++i) trace += q.G[i][i];
    const double step = 1.0 / (2.0 * trace + 1e-12);
    std::array<double, 4> w{0.25, 0.25, 0.25, 0.25};
    for (int it = 0; it < iterations; ++it) {
        std::array<double, 4> grad{};
        for (int i = 0; i < 4; ++i) {
            grad[i] = -2.0 * q.b[i];
            for (int j = 0; j < 4; ++j) grad[i] += 2.0 * q.G[i][j] * w[j];
        }
        std::array<double, 4> next{};
        for (int i = 0; i < 4; ++i) next[i] = w[i] - step * grad[i];
        w = project_simplex(next);
    }
    return q.objective(w);
}

std::vector<std::array<double, 4>> random_design(std::mt19937_64& rng, int rows) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::array<double, 4>> X(rows);
    for (auto& row : X)
        for (double& v : row) v = unit(rng);
    return X;
}

} // namespace

TEST_CASE("published ensemble weights") {
    const EnsembleWeights w = paper_weights();
    CHECK(w.lp == 0.25);
    CHECK(w.mc == 0.19);
    CHECK(w.fv == 0.32);
    CHECK(w.fq == 0.24);
    CHECK_NOTHROW(w.validate());
    CHECK(w.get(AspectId::LP) == 0.25);
    CHECK(w.get(AspectId::MC) == 0.19);
    CHECK(w.get(AspectId::FV) == 0.32);
    CHECK(w.get(AspectId::FQ) == 0.24);
}

TEST_CASE("weight validation rejects off-simplex vectors") {
    CHECK_NOTHROW(EnsembleWeights{0.25, 0.25, 0.25, 0.25}.validate());
    CHECK_NOTHROW(EnsembleWeights{1.0, 0.0, 0.0, -1e-13}.validate()); // numerical dust
    CHECK_THROWS_AS((EnsembleWeights{0.5, 0.5, 0.5, -0.5}.validate()), InputError);
    CHECK_THROWS_AS((EnsembleWeights{0.3, 0.3, 0.3, 0.3}.validate()), InputError);
    CHECK_THROWS_AS((EnsembleWeights{0.2, 0.2, 0.2, 0.2}.validate()), InputError);
}

TEST_CASE("synthesis laws hold on every one of the 4096 judgment profiles") {
    const auto& registry = CriteriaRegistry::builtin();

    std::vector<std::map<AspectId, double>> and_by_mask(4096), wa_by_mask(4096);
    for (unsigned mask = 0; mask < 4096; ++mask) {
        const OapProfile profile = profile_from_mask(mask);
        and_by_mask[mask] = and_synthesis(profile, registry, kAspectsVec);
        wa_by_mask[mask] = wa_synthesis(profile, registry, kAspectsVec);

        for (AspectId aspect : kAllAspects) {
            const auto& group = registry.aspect_oaps(aspect);
            int product = 1;
            double sum = 0.0;
            for (OapId oap : group) {
                const int bit = profile.at(oap);
                product &= bit;
                sum += bit;
            }
            // And is the product of the group bits; WA with default weights
            // is the exact group mean.
            CHECK(and_by_mask[mask].at(aspect) == static_cast<double>(product));
            CHECK(wa_by_mask[mask].at(aspect) == sum / static_cast<double>(group.size()));
            CHECK(and_by_mask[mask].at(aspect) <= wa_by_mask[mask].at(aspect));
        }
    }

    // Full profile scores 1 under both syntheses, empty profile scores 0.
    for (AspectId aspect : kAllAspects) {
        CHECK(and_by_mask[4095].at(aspect) == 1.0);
        CHECK(wa_by_mask[4095].at(aspect) == 1.0);
        CHECK(and_by_mask[0].at(aspect) == 0.0);
        CHECK(wa_by_mask[0].at(aspect) == 0.0);
    }

    // Flipping any single judgment 0 -> 1 never lowers any aspect score.
    for (unsigned mask = 0; mask < 4096; ++mask) {
        for (unsigned j = 0; j < 12; ++j) {
            if (mask & (1u << j)) continue;
            const unsigned up = mask | (1u << j);
            for (AspectId aspect : kAllAspects) {
                CHECK(and_by_mask[mask].at(aspect) <= and_by_mask[up].at(aspect));
                CHECK(wa_by_mask[mask].at(aspect) <= wa_by_mask[up].at(aspect));
            }
        }
    }
}

TEST_CASE("synthesis validates profiles") {
    const auto& registry = CriteriaRegistry::builtin();
    OapProfile missing = profile_from_mask(4095);
    missing.erase(OapId::Quantification);
    CHECK_THROWS_AS(and_synthesis(missing, registry, {AspectId::LP}), InputError);
    CHECK_THROWS_AS(wa_synthesis(missing, registry, {AspectId::LP}), InputError);
    // Aspects whose group is intact still work.
    CHECK_NOTHROW(and_synthesis(missing, registry, {AspectId::MC, AspectId::FV, AspectId::FQ}));

    OapProfile bad = profile_from_mask(4095);
    bad[OapId::Concept] = 2;
    CHECK_THROWS_AS(and_synthesis(bad, registry, {AspectId::MC}), InputError);
    CHECK_THROWS_AS(wa_synthesis(bad, registry, {AspectId::MC}), InputError);
}

TEST_CASE("weighted-average synthesis with custom weights") {
    const auto& registry = CriteriaRegistry::builtin();
    const auto& lp_group = registry.aspect_oaps(AspectId::LP);
    REQUIRE(lp_group.size() == 4);

    OapProfile profile = profile_from_mask(0);
    profile[lp_group[0]] = 1; // only the first LP judgment is positive

    std::map<AspectId, std::vector<double>> pick_first{
        {AspectId::LP, {1.0, 0.0, 0.0, 0.0}}};
    auto scores = wa_synthesis(profile, registry, kAspectsVec, pick_first);
    CHECK(scores.at(AspectId::LP) == 1.0);
    CHECK(scores.at(AspectId::MC) == 0.0); // other aspects fall back to the mean

    std::map<AspectId, std::vector<double>> pick_last{
        {AspectId::LP, {0.0, 0.0, 0.0, 1.0}}};
    CHECK(wa_synthesis(profile, registry, kAspectsVec, pick_last).at(AspectId::LP) == 0.0);

    std::map<AspectId, std::vector<double>> skewed{
        {AspectId::LP, {0.7, 0.1, 0.1, 0.1}}};
    CHECK(wa_synthesis(profile, registry, kAspectsVec, skewed).at(AspectId::LP) == 0.7);

    CHECK_THROWS_AS(wa_synthesis(profile, registry, kAspectsVec,
                                 {{AspectId::LP, {0.5, 0.5}}}),
                    InputError); // length mismatch
    CHECK_THROWS_AS(wa_synthesis(profile, registry, kAspectsVec,
                                 {{AspectId::LP, {0.5, 0.5, 0.5, -0.5}}}),
                    InputError); // negative weight
    CHECK_THROWS_AS(wa_synthesis(profile, registry, kAspectsVec,
                                 {{AspectId::LP, {0.5, 0.2, 0.2, 0.2}}}),
                    InputError); // sum != 1
}

TEST_CASE("overall score matches the hand-written expression on all binary vertices") {
    const EnsembleWeights w = paper_weights();
    for (int mask = 0; mask < 16; ++mask) {
        const double a = (mask & 1) ? 1.0 : 0.0;
        const double b = (mask & 2) ? 1.0 : 0.0;
        const double c = (mask & 4) ? 1.0 : 0.0;
        const double d = (mask & 8) ? 1.0 : 0.0;
        AspectScores s;
        s.lp = a;
        s.mc = b;
        s.fv = c;
        s.fq = d;
        const double expected = 0.25 * a + 0.19 * b + 0.32 * c + 0.24 * d;
        CHECK(overall_score(s, w) == expected); // bitwise
    }
    // Spot values: the all-ones vertex is exactly 1, single-aspect vertices
    // recover the aspect's weight exactly.
    AspectScores ones;
    ones.lp = ones.mc = ones.fv = ones.fq = 1.0;
    CHECK(overall_score(ones, w) == 1.0);
    AspectScores only_fv;
    only_fv.fv = 1.0;
    CHECK(overall_score(only_fv, w) == 0.32);
    AspectScores only_mc;
    only_mc.mc = 1.0;
    CHECK(overall_score(only_mc, w) == 0.19);
}

TEST_CASE("overall score with equal weights counts positive aspects") {
    const EnsembleWeights equal{0.25, 0.25, 0.25, 0.25};
    for (int mask = 0; mask < 16; ++mask) {
        AspectScores s;
        int bits = 0;
        for (int j = 0; j < 4; ++j) {
            const int bit = (mask >> j) & 1;
            s.set(kAllAspects[j], bit);
            bits += bit;
        }
        CHECK(overall_score(s, equal) == static_cast<double>(bits) / 4.0);
    }
}

TEST_CASE("overall score stays in range and validates input") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        AspectScores s;
        for (AspectId a : kAllAspects) s.set(a, unit(rng));
        std::array<double, 4> raw{unit(rng) + 1e-3, unit(rng) + 1e-3, unit(rng) + 1e-3,
                                  unit(rng) + 1e-3};
        const double total = raw[0] + raw[1] + raw[2] + raw[3];
        const EnsembleWeights w{raw[0] / total, raw[1] / total, raw[2] / total, raw[3] / total};
        const double v = overall_score(s, w);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }

    AspectScores s;
    s.lp = 1.5;
    CHECK_THROWS_AS(overall_score(s, paper_weights()), InputError);
    s.lp = -0.1;
    CHECK_THROWS_AS(overall_score(s, paper_weights()), InputError);
    s.lp = 0.5;
    CHECK_THROWS_AS(overall_score(s, EnsembleWeights{0.5, 0.5, 0.5, 0.5}), InputError);
}

TEST_CASE("validity gating of the direct overall judgment") {
    CHECK(gate_overall_with_validity(0.73, 1, 0.0) == 0.73); // valid passes through
    CHECK(gate_overall_with_validity(0.73, 1, 0.5) == 0.73);
    CHECK(gate_overall_with_validity(0.73, 0, 0.0) == 0.0); // hard gate
    CHECK(gate_overall_with_validity(0.5, 0, 0.3) == 0.5 * 0.3);
    CHECK(gate_overall_with_validity(1.0, 0, 1.0) == 1.0); // gate 1 = no gating

    CHECK_THROWS_AS(gate_overall_with_validity(1.1, 1, 0.0), InputError);
    CHECK_THROWS_AS(gate_overall_with_validity(-0.1, 1, 0.0), InputError);
    CHECK_THROWS_AS(gate_overall_with_validity(0.5, 2, 0.0), InputError);
    CHECK_THROWS_AS(gate_overall_with_validity(0.5, 0, 1.5), InputError);
    CHECK_THROWS_AS(gate_overall_with_validity(0.5, 0, -0.1), InputError);
}

TEST_CASE("fit_weights recovers planted interior weights exactly") {
    std::mt19937_64 rng(2024);
    const auto X = random_design(rng, 50);
    const std::array<double, 4> planted{0.25, 0.19, 0.32, 0.24};
    std::vector<double> y;
    for (const auto& row : X) {
        double v = 0.0;
        for (int j = 0; j < 4; ++j) v += row[j] * planted[j];
        y.push_back(v);
    }
    const FitResult fit = fit_weights(X, y);
    CHECK(fit.weights.lp == doctest::Approx(planted[0]).epsilon(1e-8));
    CHECK(fit.weights.mc == doctest::Approx(planted[1]).epsilon(1e-8));
    CHECK(fit.weights.fv == doctest::Approx(planted[2]).epsilon(1e-8));
    CHECK(fit.weights.fq == doctest::Approx(planted[3]).epsilon(1e-8));
    CHECK(fit.objective <= 1e-12);
    CHECK_NOTHROW(fit.weights.validate());
    REQUIRE(fit.nrmse.has_value());
    CHECK(*fit.nrmse <= 1e-9);
    REQUIRE(fit.correlation.has_value());
    CHECK(*fit.correlation == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit_weights lands on a boundary face when the optimum is outside") {
    // y depends only on the third feature, so the best simplex point is the
    // vertex (0, 0, 1, 0).
    std::mt19937_64 rng(7);
    const auto X = random_design(rng, 40);
    std::vector<double> y;
    for (const auto& row : X) y.push_back(row[2]);
    const FitResult fit = fit_weights(X, y);
    CHECK(fit.weights.fv == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fit.objective <= 1e-12);
}

TEST_CASE("fit_weights breaks ties toward the lexicographically smallest support") {
    // All four columns are identical, so every simplex point fits y exactly;
    // the solver must return the first support in lexicographic order: {lp}.
    const std::vector<std::array<double, 4>> X{
        {1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.5}};
    const std::vector<double> y{1.0, 0.0, 0.5};
    const FitResult fit = fit_weights(X, y);
    CHECK(fit.weights.lp == 1.0);
    CHECK(fit.weights.mc == 0.0);
    CHECK(fit.weights.fv == 0.0);
    CHECK(fit.weights.fq == 0.0);
    CHECK(fit.objective == 0.0);
}

TEST_CASE("fit_weights flags degenerate diagnostics instead of fabricating them") {
    // All-zero targets: mean(y) = 0 so nrmse is undefined.
    std::mt19937_64 rng(13);
    const auto X = random_design(rng, 10);
    const std::vector<double> zeros(10, 0.0);
    const FitResult fit = fit_weights(X, zeros);
    CHECK_FALSE(fit.nrmse.has_value());

    // Constant targets: pearson against a constant is undefined.
    const std::vector<double> halves(10, 0.5);
    const FitResult fit2 = fit_weights(X, halves);
    CHECK_FALSE(fit2.correlation.has_value());

    // A single row cannot support a correlation at all.
    const FitResult fit3 = fit_weights({{1.0, 0.0, 0.0, 0.0}}, {1.0});
    CHECK_FALSE(fit3.correlation.has_value());
    CHECK(fit3.objective == 0.0);
}

TEST_CASE("fit_weights validates its input") {
    CHECK_THROWS_AS(fit_weights({}, {}), InputError);
    CHECK_THROWS_AS(fit_weights({{0.5, 0.5, 0.5, 0.5}}, {0.5, 0.5}), InputError);
    CHECK_THROWS_AS(fit_weights({{1.5, 0.0, 0.0, 0.0}}, {0.5}), InputError);
    CHECK_THROWS_AS(fit_weights({{-0.1, 0.0, 0.0, 0.0}}, {0.5}), InputError);
    CHECK_THROWS_AS(fit_weights({{0.5, 0.5, 0.5, 0.5}}, {1.5}), InputError);
    CHECK_THROWS_AS(fit_weights({{0.5, 0.5, 0.5, 0.5}}, {-0.5}), InputError);
}

TEST_CASE("fit_weights beats a dense simplex grid on random instances") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> rows(3, 30);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int instance = 0; instance < 20; ++instance) {
        const auto X = random_design(rng, rows(rng));
        std::vector<double> y;
        for (std::size_t r = 0; r < X.size(); ++r) y.push_back(unit(rng));
        const FitResult fit = fit_weights(X, y);
        const QuadForm q = QuadForm::of(X, y);
        // The solver result evaluated through the quadratic form agrees with
        // its reported objective, and is no worse than every grid point.
        CHECK(q.objective(fit.weights.as_array()) == doctest::Approx(fit.objective).epsilon(1e-9));
        CHECK(fit.objective <= grid_minimum(q, 50) + 1e-6);
    }
}

TEST_CASE("fit_weights matches projected gradient descent") {
    std::mt19937_64 rng(123);
    std::uniform_int_distribution<int> rows(4, 40);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int instance = 0; instance < 10; ++instance) {
        const auto X = random_design(rng, rows(rng));
        std::vector<double> y;
        for (std::size_t r = 0; r < X.size(); ++r) y.push_back(unit(rng));
        const FitResult fit = fit_weights(X, y);
        const QuadForm q = QuadForm::of(X, y);
        const double pg = projected_gradient_minimum(q, 30000);
        // The exact solver can only be at least as good as an iterative
        // feasible method, and the iterate must have essentially converged.
        CHECK(fit.objective <= pg + 1e-9);
        CHECK(pg <= fit.objective + 1e-4);
    }
}
