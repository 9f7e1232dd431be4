#include "formeval/core.hpp"

namespace formeval {

std::string_view aspect_name(AspectId aspect) {
    switch (aspect) {
    case AspectId::LP: return "LP";
    case AspectId::MC: return "MC";
    case AspectId::FV: return "FV";
    case AspectId::FQ: return "FQ";
    }
    throw InputError("invalid AspectId");
}

std::string_view oap_name(OapId oap) {
    switch (oap) {
    case OapId::PreArgStructure: return "PreArgStructure";
    case OapId::Quantification: return "Quantification";
    case OapId::Formula: return "Formula";
    case OapId::Relation: return "Relation";
    case OapId::Concept: return "Concept";
    case OapId::Constant: return "Constant";
    case OapId::Operator: return "Operator";
    case OapId::SyntaxValidity: return "SyntaxValidity";
    case OapId::ReferentialCompleteness: return "ReferentialCompleteness";
    case OapId::TypeMatch: return "TypeMatch";
    case OapId::Conciseness: return "Conciseness";
    case OapId::LogicalConsistency: return "LogicalConsistency";
    }
    throw InputError("invalid OapId");
}

std::optional<AspectId> aspect_from_name(std::string_view name) {
    for (AspectId a : kAllAspects) {
        if (aspect_name(a) == name) return a;
    }
    return std::nullopt;
}

std::optional<OapId> oap_from_name(std::string_view name) {
    for (OapId o : kAllOaps) {
        if (oap_name(o) == name) return o;
    }
    return std::nullopt;
}

FormalLanguage FormalLanguage::other(std::string label) {
    if (label.empty()) throw InputError("FormalLanguage::other requires a non-empty label");
    return FormalLanguage(Kind::Other, std::move(label));
}

std::string FormalLanguage::display_name() const {
    switch (kind_) {
    case Kind::IsabelleHOL: return "Isabelle/HOL";
    case Kind::Lean4: return "Lean4";
    case Kind::Other: return label_;
    }
    throw InputError("invalid FormalLanguage kind");
}

std::string FormalLanguage::schema_name() const {
    switch (kind_) {
    case Kind::IsabelleHOL: return "isabelle_hol";
    case Kind::Lean4: return "lean4";
    case Kind::Other: return "other:" + label_;
    }
    throw InputError("invalid FormalLanguage kind");
}

std::optional<FormalLanguage> FormalLanguage::from_schema_name(std::string_view name) {
    if (name == "isabelle_hol") return isabelle_hol();
    if (name == "lean4") return lean4();
    constexpr std::string_view prefix = "other:";
    if (name.size() > prefix.size() && name.substr(0, prefix.size()) == prefix) {
        return other(std::string(name.substr(prefix.size())));
    }
    return std::nullopt;
}

double AspectScores::get(AspectId aspect) const {
    switch (aspect) {
    case AspectId::LP: return lp;
    case AspectId::MC: return mc;
    case AspectId::FV: return fv;
    case AspectId::FQ: return fq;
    }
    throw InputError("invalid AspectId");
}

void AspectScores::set(AspectId aspect, double value) {
    switch (aspect) {
    case AspectId::LP: lp = value; return;
    case AspectId::MC: mc = value; return;
    case AspectId::FV: fv = value; return;
    case AspectId::FQ: fq = value; return;
    }
    throw InputError("invalid AspectId");
}

double normalize_rating(int rating) {
    if (rating < 1 || rating > 5) {
        throw InputError("rating must be in 1..5, got " + std::to_string(rating));
    }
    return static_cast<double>(rating - 1) / 4.0;
}

} // namespace formeval
