#pragma once

#include <string>

#include <json.hpp>

#include "dicat/cocycle.hpp"
#include "dicat/engine.hpp"
#include "dicat/fincat.hpp"
#include "dicat/fincat_oracle.hpp"
#include "dicat/morita.hpp"

namespace dicat {

using ordered_json = nlohmann::ordered_json;

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& m) : std::runtime_error(m) {}
};

// report/v1
ordered_json report_to_json(const CheckReport& rep);
std::string report_to_text(const CheckReport& rep);

// fincat/v1: categories, functors and transformations as explicit tables
struct FinCatBundle {
    std::vector<FinCategory> categories;
    struct FunctorEntry {
        std::string name, source, target;
        std::map<std::string, std::string> objects;
        std::map<std::string, std::string> morphisms;
    };
    std::vector<FunctorEntry> functors;
    struct TransformEntry {
        std::string name, source_functor, target_functor;
        std::map<std::string, std::string> components;
    };
    std::vector<TransformEntry> transformations;
};

ordered_json fincat_to_json(const FinCatBundle& b);
FinCatBundle fincat_from_json(const ordered_json& j);

// dicat/v1: a full table-driven instance
ordered_json dicat_to_json(const FinCatInstanceData& d);
FinCatInstanceData dicat_from_json(const ordered_json& j);

// cocycle/v1
ordered_json cocycle_to_json(const CocycleInstance& c);
CocycleInstance cocycle_from_json(const ordered_json& j);

// morita/v1: user-supplied algebras and bimodules
DicatData morita_from_json(const ordered_json& j, const MoritaConfig& cfg);

}  // namespace dicat
