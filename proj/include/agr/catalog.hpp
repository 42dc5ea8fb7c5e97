#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "model.hpp"

namespace agr {

/// The threat-attribute families a catalog entry can belong to.
enum class Dimension { threat_actor, attack_vector, attack_location, vulnerability, consequence };

inline std::string_view to_string(Dimension d) noexcept {
    switch (d) {
        case Dimension::threat_actor: return "threat_actor";
        case Dimension::attack_vector: return "attack_vector";
        case Dimension::attack_location: return "attack_location";
        case Dimension::vulnerability: return "vulnerability";
        case Dimension::consequence: return "consequence";
    }
    return "unknown";
}

inline std::optional<Dimension> parse_dimension(std::string_view text) noexcept {
    if (text == "threat_actor") return Dimension::threat_actor;
    if (text == "attack_vector") return Dimension::attack_vector;
    if (text == "attack_location") return Dimension::attack_location;
    if (text == "vulnerability") return Dimension::vulnerability;
    if (text == "consequence") return Dimension::consequence;
    return std::nullopt;
}

struct CatalogEntry {
    std::string id;
    Dimension dimension = Dimension::attack_vector;
    std::string name;
    std::optional<std::string> parent;
    std::string description;

    friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

/// Immutable, id-indexed set of taxonomy entries. Construct through
/// builtin_catalog() or load_catalog(), which validate the hierarchy.
class ThreatCatalog {
public:
    ThreatCatalog() = default;

    const CatalogEntry* find(std::string_view id) const {
        auto it = entries_.find(std::string(id));
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::optional<CatalogEntry> lookup(std::string_view id) const {
        if (const auto* e = find(id)) return *e;
        return std::nullopt;
    }

    const std::map<std::string, CatalogEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    std::vector<std::string> children(std::string_view id) const {
        std::vector<std::string> out;
        for (const auto& [key, e] : entries_) {
            if (e.parent && *e.parent == id) out.push_back(key);
        }
        return out;
    }

    /// Parent chain from the entry's parent up to its root.
    std::vector<std::string> ancestors(std::string_view id) const {
        std::vector<std::string> out;
        const CatalogEntry* e = find(id);
        while (e && e->parent && out.size() <= entries_.size()) {
            out.push_back(*e->parent);
            e = find(*e->parent);
        }
        return out;
    }

    friend bool operator==(const ThreatCatalog&, const ThreatCatalog&) = default;

private:
    std::map<std::string, CatalogEntry> entries_;

    friend ThreatCatalog make_catalog(std::vector<CatalogEntry> entries);
    friend ThreatCatalog merge_catalog(const ThreatCatalog& base, std::vector<CatalogEntry> overlay);
};

namespace detail {

inline std::vector<Violation> check_hierarchy(const std::map<std::string, CatalogEntry>& entries) {
    std::vector<Violation> out;
    for (const auto& [id, e] : entries) {
        if (!e.parent) continue;
        auto it = entries.find(*e.parent);
        if (it == entries.end()) {
            out.push_back({"unknown_parent", id, "parent '" + *e.parent + "' is not in the catalog"});
        } else if (it->second.dimension != e.dimension) {
            out.push_back({"cross_dimension_parent", id,
                           "parent '" + *e.parent + "' has dimension " +
                               std::string(to_string(it->second.dimension)) + ", entry has " +
                               std::string(to_string(e.dimension))});
        }
    }
    // Walk each parent chain; revisiting a node on the current walk means a cycle.
    std::set<std::string> reported;
    for (const auto& [id, e] : entries) {
        std::set<std::string> seen{id};
        const CatalogEntry* cur = &e;
        while (cur->parent) {
            auto it = entries.find(*cur->parent);
            if (it == entries.end()) break;
            if (!seen.insert(it->first).second) {
                if (reported.insert(it->first).second) {
                    out.push_back({"catalog_cycle", it->first, "parent chain starting at '" + id + "' loops"});
                }
                break;
            }
            cur = &it->second;
        }
    }
    return out;
}

}  // namespace detail

inline ThreatCatalog make_catalog(std::vector<CatalogEntry> entries) {
    ThreatCatalog cat;
    std::vector<Violation> violations;
    for (auto& e : entries) {
        if (e.id.empty()) {
            violations.push_back({"empty_id", "", "catalog entry id must be non-empty"});
            continue;
        }
        std::string id = e.id;
        if (!cat.entries_.emplace(id, std::move(e)).second) {
            violations.push_back({"duplicate_entry", id, "catalog entry id declared twice"});
        }
    }
    auto h = detail::check_hierarchy(cat.entries_);
    violations.insert(violations.end(), h.begin(), h.end());
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return cat;
}

/// Overlay entries win on id collision; the merged hierarchy is re-validated.
inline ThreatCatalog merge_catalog(const ThreatCatalog& base, std::vector<CatalogEntry> overlay) {
    ThreatCatalog cat = base;
    for (auto& e : overlay) {
        std::string id = e.id;
        cat.entries_.insert_or_assign(id, std::move(e));
    }
    auto violations = detail::check_hierarchy(cat.entries_);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return cat;
}

namespace detail {

struct EntrySeed {
    const char* id;
    Dimension dimension;
    const char* name;
    const char* parent;
    const char* description;
};

// Only attributes named explicitly in the risk model are seeded here;
// organizations extend the catalog with load_catalog().
inline const std::vector<EntrySeed>& builtin_seeds() {
    using D = Dimension;
    static const std::vector<EntrySeed> seeds = {
        // threat actors (metadata only, never graph vertices)
        {"nation_state", D::threat_actor, "Nation-state actor", nullptr, "State-sponsored adversary"},
        {"terrorist_group", D::threat_actor, "Terrorist group", nullptr, ""},
        {"rival_organization", D::threat_actor, "Rival organization", nullptr, "Competitor pursuing industrial espionage"},
        {"cybercriminal", D::threat_actor, "Cybercriminal", nullptr, "Financially motivated adversary"},
        {"thrill_seeker", D::threat_actor, "Thrill seeker", nullptr, ""},
        {"hacktivist", D::threat_actor, "Hacktivist", nullptr, ""},
        {"insider_threat", D::threat_actor, "Insider threat", nullptr, "Malicious or manipulated insider"},
        {"advanced_persistent_threat", D::threat_actor, "Advanced persistent threat group", nullptr,
         "Activity group with deep ICS knowledge"},

        // attack vectors
        {"cyber", D::attack_vector, "Cyber domain attack vector", nullptr, "Launched over the network communication system"},
        {"physical", D::attack_vector, "Physical attack vector", nullptr, "Requires physical access to equipment"},
        {"cyber_physical", D::attack_vector, "Cyber-physical attack vector", nullptr,
         "Executed through both cyber and physical actions"},
        {"denial_of_service", D::attack_vector, "Denial of service", "cyber", ""},
        {"malware", D::attack_vector, "Malware", "cyber", ""},
        {"eavesdropping", D::attack_vector, "Eavesdropping", "cyber", ""},
        {"web_attack", D::attack_vector, "Web attack", "cyber", ""},
        {"buffer_overflow", D::attack_vector, "Buffer overflow", "cyber", ""},
        {"man_in_the_middle", D::attack_vector, "Man-in-the-middle attack", "cyber",
         "Intercepts network traffic to eavesdrop on or manipulate transmitted data"},
        {"replay", D::attack_vector, "Replay attack", "cyber", ""},
        {"zero_day", D::attack_vector, "Zero-day attack", "cyber", ""},
        {"false_data_injection", D::attack_vector, "False data injection attack", "cyber", ""},
        {"hardware_backdoor", D::attack_vector, "Hardware backdoor", "physical", ""},
        {"physical_tampering", D::attack_vector, "Physical tampering", "physical",
         "e.g. de-calibrating a sensor or tampering with machine hardware"},
        {"social_engineering", D::attack_vector, "Social engineering", "cyber_physical", ""},

        // attack locations
        {"os_software", D::attack_location, "Operating systems and software", nullptr, ""},
        {"firmware", D::attack_location, "Firmware", nullptr, ""},
        {"network_communication", D::attack_location, "Network communication system", nullptr, ""},
        {"cloud_storage", D::attack_location, "Cloud storage", nullptr, ""},
        {"sensors", D::attack_location, "Sensors", nullptr, ""},
        {"machines", D::attack_location, "Machines", nullptr, ""},
        {"products", D::attack_location, "Products", nullptr, ""},
        {"production_process", D::attack_location, "Production process", nullptr, ""},
        {"inspection_system", D::attack_location, "Inspection system", nullptr, ""},
        {"human_operator", D::attack_location, "Human operator", nullptr, ""},
        {"supply_chain_entity", D::attack_location, "Supply chain entity", nullptr, ""},
        {"machining", D::attack_location, "Machining (subtractive manufacturing)", "production_process", ""},
        {"additive_manufacturing", D::attack_location, "Additive manufacturing", "production_process", ""},
        {"joining", D::attack_location, "Joining", "production_process", ""},
        {"assembly", D::attack_location, "Assembly", "production_process", ""},
        {"turning", D::attack_location, "Turning", "machining", ""},
        {"drilling", D::attack_location, "Drilling", "machining", ""},
        {"milling", D::attack_location, "Milling", "machining", ""},
        {"boring", D::attack_location, "Boring", "machining", ""},

        // vulnerabilities
        {"software_network_vulnerability", D::vulnerability, "Software and network vulnerability", nullptr, ""},
        {"production_process_vulnerability", D::vulnerability, "Production process vulnerability", nullptr, ""},
        {"inspection_system_vulnerability", D::vulnerability, "Inspection system vulnerability", nullptr, ""},
        {"human_element_vulnerability", D::vulnerability, "Human element vulnerability", nullptr, ""},
        {"improper_qc_tool_implementation", D::vulnerability, "Improper implementation of QC tools",
         "inspection_system_vulnerability", ""},
        {"violated_qc_statistical_assumptions", D::vulnerability, "Violation of statistical assumptions of QC tools",
         "inspection_system_vulnerability", "e.g. control chart assumptions"},
        {"inadequate_inspection_data", D::vulnerability, "Inadequate data collection for inspection",
         "inspection_system_vulnerability", ""},
        {"partial_feature_inspection", D::vulnerability, "Inspection of a subset of product features",
         "inspection_system_vulnerability", ""},
        {"improper_authentication", D::vulnerability, "Improper authentication", "production_process_vulnerability",
         "e.g. programmable logic controllers lacking integrated security"},
        {"cleartext_transmission", D::vulnerability, "Cleartext transmission of sensitive information",
         "production_process_vulnerability", ""},
        {"phishing_susceptibility", D::vulnerability, "Susceptibility to phishing", "human_element_vulnerability", ""},
        {"security_awareness_gap", D::vulnerability, "Lack of security awareness and training",
         "human_element_vulnerability", ""},

        // consequences
        {"confidential_information_theft", D::consequence, "Theft of confidential information", nullptr, ""},
        {"system_integrity_compromise", D::consequence, "Compromised system integrity", nullptr, ""},
        {"system_unavailability", D::consequence, "System unavailability", nullptr, ""},
        {"extortion", D::consequence, "Extortion", nullptr, ""},
        {"intellectual_property_theft", D::consequence, "Intellectual property theft", nullptr, ""},
        {"lost_sales", D::consequence, "Lost sales", nullptr, ""},
        {"production_waste", D::consequence, "Increased production waste", nullptr, ""},
        {"sabotage_recovery_cost", D::consequence, "Recovery costs from sabotage or system damage", nullptr, ""},
        {"operational_downtime", D::consequence, "Cost of operational downtime", nullptr, ""},
        {"machine_breakdown_repair", D::consequence, "Repair costs from machine breakdown", nullptr, ""},
        {"personnel_safety_hazard", D::consequence, "Safety hazard to personnel", nullptr, ""},
        {"product_related_damage", D::consequence, "Product-related damages", nullptr,
         "Including reputation damage from degraded product quality and reliability"},
        {"degraded_product_quality", D::consequence, "Degraded product quality and reliability",
         "product_related_damage", ""},
    };
    return seeds;
}

}  // namespace detail

inline ThreatCatalog builtin_catalog() {
    static const ThreatCatalog catalog = [] {
        std::vector<CatalogEntry> entries;
        for (const auto& s : detail::builtin_seeds()) {
            entries.push_back({s.id, s.dimension, s.name,
                               s.parent ? std::optional<std::string>(s.parent) : std::nullopt, s.description});
        }
        return make_catalog(std::move(entries));
    }();
    return catalog;
}

/// Parse a catalog document and merge it over `base`.
/// Throws ParseError on structural problems and ValidationError on
/// hierarchy problems (unknown_parent, cross_dimension_parent, catalog_cycle).
inline ThreatCatalog load_catalog(const nlohmann::json& doc, const ThreatCatalog& base = builtin_catalog()) {
    if (doc.is_null()) return base;
    if (!doc.is_object()) throw ParseError("catalog document must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "entries") throw ParseError("unknown catalog key '" + key + "'");
    }
    if (!doc.contains("entries")) return base;
    const auto& list = doc.at("entries");
    if (!list.is_array()) throw ParseError("'entries' must be an array");

    std::vector<CatalogEntry> overlay;
    std::set<std::string> ids;
    for (const auto& item : list) {
        if (!item.is_object()) throw ParseError("catalog entry must be an object");
        for (const auto& [key, _] : item.items()) {
            if (key != "id" && key != "dimension" && key != "name" && key != "parent" && key != "description") {
                throw ParseError("unknown catalog entry key '" + key + "'");
            }
        }
        auto str = [&](const char* key, bool required) -> std::optional<std::string> {
            if (!item.contains(key) || (!required && item.at(key).is_null())) {
                if (required) throw ParseError(std::string("catalog entry missing '") + key + "'");
                return std::nullopt;
            }
            if (!item.at(key).is_string()) throw ParseError(std::string("catalog entry '") + key + "' must be a string");
            return item.at(key).get<std::string>();
        };
        CatalogEntry e;
        e.id = *str("id", true);
        if (e.id.empty()) throw ParseError("catalog entry id must be non-empty");
        auto dim = parse_dimension(*str("dimension", true));
        if (!dim) throw ParseError("catalog entry '" + e.id + "' has unknown dimension");
        e.dimension = *dim;
        e.name = str("name", false).value_or(e.id);
        e.parent = str("parent", false);
        e.description = str("description", false).value_or("");
        if (!ids.insert(e.id).second) throw ParseError("catalog entry '" + e.id + "' declared twice in document");
        overlay.push_back(std::move(e));
    }
    return merge_catalog(base, std::move(overlay));
}

inline ThreatCatalog load_catalog_text(std::string_view text, const ThreatCatalog& base = builtin_catalog()) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return base;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("catalog is not valid JSON: ") + e.what());
    }
    return load_catalog(doc, base);
}

inline nlohmann::json to_json(const ThreatCatalog& catalog) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [id, e] : catalog.entries()) {
        nlohmann::json item = {{"id", e.id},
                               {"dimension", std::string(to_string(e.dimension))},
                               {"name", e.name},
                               {"description", e.description}};
        if (e.parent) item["parent"] = *e.parent;
        list.push_back(std::move(item));
    }
    return {{"entries", std::move(list)}};
}

/// Catalog dimensions a vertex of the given kind may be tagged with.
/// Locations also accept vulnerability tags, which are informational only.
inline bool tag_dimension_allowed(VertexKind kind, Dimension dim) noexcept {
    switch (kind) {
        case VertexKind::attack_vector: return dim == Dimension::attack_vector;
        case VertexKind::location: return dim == Dimension::attack_location || dim == Dimension::vulnerability;
        case VertexKind::consequence: return dim == Dimension::consequence;
    }
    return false;
}

inline std::vector<Violation> validate_tags(std::span<const Vertex> vertices, const ThreatCatalog& catalog) {
    std::vector<Violation> out;
    for (const auto& v : vertices) {
        for (const auto& tag : v.taxonomy_tags) {
            const CatalogEntry* e = catalog.find(tag);
            if (!e) {
                out.push_back({"unresolved_tag", v.id, "tag '" + tag + "' is not in the catalog"});
            } else if (!tag_dimension_allowed(v.kind, e->dimension)) {
                out.push_back({"tag_dimension_mismatch", v.id,
                               "tag '" + tag + "' has dimension " + std::string(to_string(e->dimension)) +
                                   ", not valid on " + with_article(v.kind) + " vertex"});
            }
        }
    }
    return out;
}

}  // namespace agr
