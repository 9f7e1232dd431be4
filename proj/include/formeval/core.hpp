#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formeval/errors.hpp"

namespace formeval {

/// The four core evaluation aspects: logical preservation, mathematical
/// consistency, formal validity, formal quality.
enum class AspectId { LP, MC, FV, FQ };

inline constexpr std::array<AspectId, 4> kAllAspects{AspectId::LP, AspectId::MC, AspectId::FV,
                                                     AspectId::FQ};

/// The twelve operable atomic properties, each a binary-judgeable facet of a
/// candidate formalization.
enum class OapId {
    PreArgStructure,
    Quantification,
    Formula,
    Relation,
    Concept,
    Constant,
    Operator,
    SyntaxValidity,
    ReferentialCompleteness,
    TypeMatch,
    Conciseness,
    LogicalConsistency,
};

inline constexpr std::array<OapId, 12> kAllOaps{
    OapId::PreArgStructure, OapId::Quantification, OapId::Formula,
    OapId::Relation,        OapId::Concept,        OapId::Constant,
    OapId::Operator,        OapId::SyntaxValidity, OapId::ReferentialCompleteness,
    OapId::TypeMatch,       OapId::Conciseness,    OapId::LogicalConsistency};

std::string_view aspect_name(AspectId aspect);
std::string_view oap_name(OapId oap);
std::optional<AspectId> aspect_from_name(std::string_view name);
std::optional<OapId> oap_from_name(std::string_view name);

/// Target formal system of a candidate formalization.
class FormalLanguage {
public:
    enum class Kind { IsabelleHOL, Lean4, Other };

    static FormalLanguage isabelle_hol() { return FormalLanguage(Kind::IsabelleHOL, {}); }
    static FormalLanguage lean4() { return FormalLanguage(Kind::Lean4, {}); }
    /// `label` must be non-empty.
    static FormalLanguage other(std::string label);

    Kind kind() const { return kind_; }

    /// Human-facing name as it appears in prompts ("Isabelle/HOL", "Lean4",
    /// or the custom label).
    std::string display_name() const;

    /// Stable identifier used in corpus files: "isabelle_hol", "lean4", or
    /// "other:<label>".
    std::string schema_name() const;

    /// Parses a schema_name. Returns nullopt for anything unrecognized.
    static std::optional<FormalLanguage> from_schema_name(std::string_view name);

    bool operator==(const FormalLanguage& rhs) const = default;

private:
    FormalLanguage(Kind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

    Kind kind_;
    std::string label_;
};

/// Who produced a candidate formalization.
struct CandidateOrigin {
    enum class Kind { GroundTruth, ModelOutput };

    Kind kind = Kind::GroundTruth;
    std::string model;     // ModelOutput only
    std::string prompting; // ModelOutput only (e.g. "zero_shot", "8_shot")

    static CandidateOrigin ground_truth() { return {Kind::GroundTruth, {}, {}}; }
    static CandidateOrigin model_output(std::string model, std::string prompting) {
        return {Kind::ModelOutput, std::move(model), std::move(prompting)};
    }

    bool operator==(const CandidateOrigin&) const = default;
};

/// One candidate formalization of a statement. `code` is opaque text here.
struct CandidateFormalization {
    std::string candidate_id;
    std::string code;
    FormalLanguage language = FormalLanguage::isabelle_hol();
    CandidateOrigin origin;

    bool operator==(const CandidateFormalization&) const = default;
};

/// One natural-language statement with zero or more candidate
/// formalizations, all in the same formal language.
struct StatementRecord {
    std::string id;
    std::string statement; // natural language + LaTeX
    FormalLanguage language = FormalLanguage::isabelle_hol();
    std::string source; // corpus name / split tag, may be empty
    std::vector<CandidateFormalization> candidates;

    bool operator==(const StatementRecord&) const = default;
};

/// Human ground truth for one candidate: binary aspect labels plus a 5-point
/// overall rating.
struct AnnotationRecord {
    std::string statement_id;
    std::string candidate_id;
    int lp = 0;
    int mc = 0;
    int fv = 0;
    int fq = 0;
    int overall_5pt = 1;

    bool operator==(const AnnotationRecord&) const = default;
};

/// The four core-aspect scores for one candidate, each in [0,1].
struct AspectScores {
    double lp = 0.0;
    double mc = 0.0;
    double fv = 0.0;
    double fq = 0.0;

    double get(AspectId aspect) const;
    void set(AspectId aspect, double value);

    bool operator==(const AspectScores&) const = default;
};

/// Maps the 5-point overall rating onto [0,1] by the affine map (r-1)/4.
/// Bijection {1..5} -> {0, .25, .5, .75, 1}.
/// Throws InputError for ratings outside 1..5.
double normalize_rating(int rating);

} // namespace formeval
