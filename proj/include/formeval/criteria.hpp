#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "formeval/core.hpp"

namespace formeval {

/// One judgeable criterion: a core aspect, an atomic property, or the
/// direct overall question. `description` is the exact prompt sentence from
/// the bundled criteria file, byte for byte.
struct Criterion {
    enum class Kind { Aspect, Oap, Overall };

    std::string id;
    Kind kind = Kind::Overall;
    std::optional<AspectId> aspect; // set for Kind::Aspect and Kind::Oap (the group)
    std::optional<OapId> oap;       // set for Kind::Oap
    std::string description;
};

/// The criterion set and the aspect->OAP grouping, loaded from a criteria
/// file. The default registry parses a copy of data/criteria.json embedded
/// at build time, so the library works without any runtime data path; a file
/// can be supplied to override prompt wording or the grouping.
class CriteriaRegistry {
public:
    static const CriteriaRegistry& builtin();
    static CriteriaRegistry from_json_text(std::string_view text, const std::string& origin);
    static CriteriaRegistry from_file(const std::string& path);

    /// Throws ConfigError for ids not present in the registry.
    const Criterion& criterion(const std::string& id) const;
    const Criterion& aspect_criterion(AspectId aspect) const;
    const Criterion& oap_criterion(OapId oap) const;
    const Criterion& overall_criterion() const;

    /// The OAP group estimating `aspect`, in file order. The groups
    /// partition the twelve OAPs.
    const std::vector<OapId>& aspect_oaps(AspectId aspect) const;

    const std::vector<Criterion>& all() const { return criteria_; }

    /// Raw bytes of the builtin criteria file, as embedded at build time.
    static std::string_view builtin_text();

private:
    CriteriaRegistry() = default;
    void validate(const std::string& origin) const;

    std::vector<Criterion> criteria_;
    std::vector<std::vector<OapId>> groups_{4};
};

} // namespace formeval
