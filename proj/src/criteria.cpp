#include "formeval/criteria.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "criteria_embedded.hpp"

namespace formeval {

using nlohmann::json;

std::string_view CriteriaRegistry::builtin_text() {
    return std::string_view(reinterpret_cast<const char*>(kCriteriaJsonBytes),
                            sizeof(kCriteriaJsonBytes));
}

const CriteriaRegistry& CriteriaRegistry::builtin() {
    static const CriteriaRegistry registry =
        from_json_text(builtin_text(), "builtin criteria");
    return registry;
}

CriteriaRegistry CriteriaRegistry::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open criteria file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str(), path);
}

CriteriaRegistry CriteriaRegistry::from_json_text(std::string_view text,
                                                  const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("criteria") || !doc["criteria"].is_array()) {
        throw ConfigError(origin + ": expected an object with a \"criteria\" array");
    }

    CriteriaRegistry reg;
    for (const json& entry : doc["criteria"]) {
        Criterion c;
        try {
            c.id = entry.at("id").get<std::string>();
            std::string kind = entry.at("kind").get<std::string>();
            c.description = entry.at("description").get<std::string>();
            if (kind == "aspect") {
                c.kind = Criterion::Kind::Aspect;
                c.aspect = aspect_from_name(c.id);
                if (!c.aspect) throw ConfigError(origin + ": unknown aspect id: " + c.id);
            } else if (kind == "oap") {
                c.kind = Criterion::Kind::Oap;
                c.oap = oap_from_name(c.id);
                if (!c.oap) throw ConfigError(origin + ": unknown OAP id: " + c.id);
                std::string group = entry.at("aspect").get<std::string>();
                c.aspect = aspect_from_name(group);
                if (!c.aspect) throw ConfigError(origin + ": unknown aspect group: " + group);
            } else if (kind == "overall") {
                c.kind = Criterion::Kind::Overall;
            } else {
                throw ConfigError(origin + ": unknown criterion kind: " + kind);
            }
        } catch (const json::exception& e) {
            throw ConfigError(origin + ": malformed criterion entry: " + e.what());
        }
        if (c.description.empty()) throw ConfigError(origin + ": empty description for " + c.id);
        if (c.kind == Criterion::Kind::Oap) {
            reg.groups_[static_cast<int>(*c.aspect)].push_back(*c.oap);
        }
        reg.criteria_.push_back(std::move(c));
    }
    reg.validate(origin);
    return reg;
}

void CriteriaRegistry::validate(const std::string& origin) const {
    for (AspectId a : kAllAspects) {
        bool found = std::any_of(criteria_.begin(), criteria_.end(), [&](const Criterion& c) {
            return c.kind == Criterion::Kind::Aspect && c.aspect == a;
        });
        if (!found) {
            throw ConfigError(origin + ": missing aspect criterion " +
                              std::string(aspect_name(a)));
        }
    }
    bool has_overall = std::any_of(criteria_.begin(), criteria_.end(), [](const Criterion& c) {
        return c.kind == Criterion::Kind::Overall;
    });
    if (!has_overall) throw ConfigError(origin + ": missing overall criterion");

    // The OAP groups must partition the twelve properties.
    std::set<OapId> seen;
    std::size_t total = 0;
    for (const auto& group : groups_) {
        total += group.size();
        seen.insert(group.begin(), group.end());
    }
    if (total != kAllOaps.size() || seen.size() != kAllOaps.size()) {
        throw ConfigError(origin + ": OAP groups must partition the 12 atomic properties");
    }
    std::set<std::string> ids;
    for (const Criterion& c : criteria_) {
        if (!ids.insert(c.id).second) throw ConfigError(origin + ": duplicate criterion id " + c.id);
    }
}

const Criterion& CriteriaRegistry::criterion(const std::string& id) const {
    for (const Criterion& c : criteria_) {
        if (c.id == id) return c;
    }
    throw ConfigError("unknown criterion id: " + id);
}

const Criterion& CriteriaRegistry::aspect_criterion(AspectId aspect) const {
    return criterion(std::string(aspect_name(aspect)));
}

const Criterion& CriteriaRegistry::oap_criterion(OapId oap) const {
    return criterion(std::string(oap_name(oap)));
}

const Criterion& CriteriaRegistry::overall_criterion() const {
    for (const Criterion& c : criteria_) {
        if (c.kind == Criterion::Kind::Overall) return c;
    }
    throw ConfigError("registry has no overall criterion");
}

const std::vector<OapId>& CriteriaRegistry::aspect_oaps(AspectId aspect) const {
    return groups_[static_cast<int>(aspect)];
}

} // namespace formeval
