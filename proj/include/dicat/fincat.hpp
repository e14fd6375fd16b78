#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dicat {

// Finite category presented by a total composition table. Objects and
// morphisms are referenced by their string ids; exhaustive validity checks
// are cheap at this scale and run before anything trusts the data.
struct FinCategory {
    std::string name;
    std::vector<std::string> objects;
    struct Mor {
        std::string id;
        std::string src;
        std::string dst;
    };
    std::vector<Mor> morphisms;
    // compose[(f,g)] = g after f, defined exactly on composable pairs
    std::map<std::pair<std::string, std::string>, std::string> compose;
    std::map<std::string, std::string> identities;  // object -> morphism id

    const Mor* find_mor(const std::string& id) const;
    bool has_object(const std::string& id) const;
    std::optional<std::string> compose2(const std::string& f, const std::string& g) const;
    std::string identity_of(const std::string& obj) const;
    bool is_iso(const std::string& f) const;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
    void fail(std::string msg) {
        ok = false;
        violations.push_back(std::move(msg));
    }
};

ValidationReport validate_category(const FinCategory& c);

struct FunctorData {
    std::string name;
    const FinCategory* source = nullptr;
    const FinCategory* target = nullptr;
    std::map<std::string, std::string> object_map;
    std::map<std::string, std::string> morphism_map;

    std::string on_object(const std::string& o) const;
    std::string on_morphism(const std::string& f) const;
};

ValidationReport validate_functor(const FunctorData& f);

struct NatTransformData {
    std::string name;
    const FunctorData* source_functor = nullptr;
    const FunctorData* target_functor = nullptr;
    std::map<std::string, std::string> components;  // object of source cat -> morphism of target cat

    // Calculus operations (whiskering, composition) produce fresh functors;
    // they live here so the raw pointers above stay valid.
    std::shared_ptr<FunctorData> owned_source;
    std::shared_ptr<FunctorData> owned_target;
};

ValidationReport validate_naturality(const NatTransformData& n);

// Fiber product of categories along two functors with common target.
// Object/morphism ids are "(a|b)" pairs of the factor ids.
struct FiberProductResult {
    FinCategory category;
    FunctorData proj1;
    FunctorData proj2;
};

FiberProductResult fiber_product(const FunctorData& f, const FunctorData& g);

std::string pair_id(const std::string& a, const std::string& b);

FunctorData compose_functors(const FunctorData& f, const FunctorData& g);  // f after g
FunctorData identity_functor(const FinCategory& c);

NatTransformData whisker_left(const FunctorData& f, const NatTransformData& eta);   // f . eta
NatTransformData whisker_right(const NatTransformData& eta, const FunctorData& f);  // eta . f
NatTransformData vcompose(const NatTransformData& eta, const NatTransformData& theta);  // theta after eta
NatTransformData hcompose(const NatTransformData& eta, const NatTransformData& theta);

// Isofibration: every target isomorphism from the image of an object lifts.
struct IsofibrationReport {
    bool ok = true;
    // (iso id in target, object id upstairs) pairs without a lift
    std::vector<std::pair<std::string, std::string>> unliftable;
};

IsofibrationReport isofibration_check(const FunctorData& f);

}  // namespace dicat
