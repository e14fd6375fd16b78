#pragma once

#include <map>
#include <memory>
#include <string>

#include "dicat/expr.hpp"
#include "dicat/oracle.hpp"

namespace dicat {

// Declared endpoints of one D2 entry, as surface functor expressions over
// the entry's chain domain. Instances carry these declarations explicitly;
// validation checks them against the canonical schema before any axiom runs,
// so a numbering drift shows up as an endpoint failure naming the entry.
struct D2Declaration {
    Dom dom;
    FExprPtr src;
    FExprPtr dst;
};

D2Declaration canonical_declaration(D2Key k);

// A complete dicategory instance: the oracle holding the cells and all
// structure, plus the declared endpoint table for the 18 transformations.
struct DicatData {
    std::shared_ptr<InstanceOracle> oracle;
    std::map<D2Key, D2Declaration> d2;
    // When true, probe sets enumerate the whole instance.
    bool exhaustive = false;

    static DicatData wrap(std::shared_ptr<InstanceOracle> oracle);
};

struct StructureItem {
    std::string item;
    bool ok = true;
    double max_residual = 0.0;
    std::string detail;
};

struct StructureReport {
    bool ok = true;
    std::vector<StructureItem> items;
    void add(StructureItem it) {
        ok = ok && it.ok;
        items.push_back(std::move(it));
    }
};

// Source/target compatibility of the [D1-x] functors, endpoint declarations
// and componentwise endpoints of the [D2-x] entries, isomorphy of all
// components, functoriality and naturality on the probe sets, and the
// invertibility witnesses for the directional identities.
StructureReport validate_structure(const DicatData& d, double tol, std::size_t probe_cap);

enum class FibrationStatus { Pass, Fail, Unverifiable };

struct FibrationReport {
    FibrationStatus level1 = FibrationStatus::Unverifiable;
    FibrationStatus level2 = FibrationStatus::Unverifiable;
    std::vector<std::string> failures;
    bool ok() const {
        return level1 != FibrationStatus::Fail && level2 != FibrationStatus::Fail;
    }
};

// s x t must be a fibration at both levels: exhaustive backends get a full
// lift search, oracle backends are checked through their transport
// operation; a backend with neither reports Unverifiable rather than
// silently passing.
FibrationReport check_fibrations(const DicatData& d, double tol);

}  // namespace dicat
