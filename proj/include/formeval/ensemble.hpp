#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "formeval/core.hpp"
#include "formeval/criteria.hpp"

namespace formeval {

/// Binary OAP judgments for one candidate. All twelve entries are present
/// when every property was judged by the LLM; the FV-group entries may be
/// absent when formal validity comes from the theorem prover instead.
using OapProfile = std::map<OapId, int>;

/// The simplex-constrained weight vector of the linear evaluation model.
struct EnsembleWeights {
    double lp = 0.25;
    double mc = 0.25;
    double fv = 0.25;
    double fq = 0.25;

    double get(AspectId aspect) const;

    /// Throws InputError unless all weights are >= -1e-12 and they sum to 1
    /// within 1e-9.
    void validate() const;

    std::array<double, 4> as_array() const { return {lp, mc, fv, fq}; }
};

/// The weights fitted on the published annotation data.
EnsembleWeights paper_weights();

/// Result of fitting weights to annotations.
struct FitResult {
    EnsembleWeights weights;
    double objective = 0.0; // ||Xw - y||^2 at the returned weights
    std::optional<double> nrmse;       // empty when mean(y) == 0
    std::optional<double> correlation; // empty when Xw or y is constant
};

/// And-synthesis: an aspect is positive iff every judgment in its OAP group
/// is positive. Computes only the requested aspects; throws InputError if a
/// required OAP is missing from the profile.
std::map<AspectId, double> and_synthesis(const OapProfile& profile,
                                         const CriteriaRegistry& registry,
                                         const std::vector<AspectId>& aspects);

/// Weighted-average synthesis: aspect score is the weighted mean of its OAP
/// judgments; weights default to equal (1/group size). Supplied weight
/// vectors must be nonnegative, sum to 1, and match the group length.
std::map<AspectId, double>
wa_synthesis(const OapProfile& profile, const CriteriaRegistry& registry,
             const std::vector<AspectId>& aspects,
             const std::map<AspectId, std::vector<double>>& oap_weights = {});

/// The linear evaluation model: S = w_lp*lp + w_mc*mc + w_fv*fv + w_fq*fq.
/// Inputs must satisfy their invariants (scores in [0,1], weights on the
/// simplex); the result is in [0,1].
double overall_score(const AspectScores& aspects, const EnsembleWeights& weights);

/// Combines a direct overall judgment with the prover's validity bit:
/// score = judgment when valid, judgment * gate when not. gate = 0 is a
/// hard gate (invalid code scores 0 regardless of the judgment).
double gate_overall_with_validity(double overall_judgment, int valid, double gate);

/// Minimizes ||Xw - y||^2 over the simplex {w >= 0, sum w = 1}.
///
/// Because the dimension is four, the solver is exact: it enumerates all 15
/// non-empty support sets, solves the equality-constrained least squares on
/// each face, keeps the feasible candidates, and returns the best. Ties are
/// broken by the lexicographically smallest support set.
///
/// X rows are (lp, mc, fv, fq) labels in [0,1]; y entries are normalized
/// overall ratings in [0,1]. Requires at least one row.
FitResult fit_weights(const std::vector<std::array<double, 4>>& X, const std::vector<double>& y);

} // namespace formeval
