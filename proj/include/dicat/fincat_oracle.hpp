#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dicat/dicat_data.hpp"
#include "dicat/fincat.hpp"
#include "dicat/oracle.hpp"

namespace dicat {

// Table-driven instance over explicit finite categories. Objects and
// morphisms are addressed by string ids; every structure functor and every
// transformation component is an explicit table. The backend is exhaustive:
// probe sets enumerate everything and the fibration check can do a full lift
// search.
struct FinCatInstanceData {
    std::string label = "fincat";
    FinCategory c0, c1, c2;
    // source/target object and morphism maps
    std::map<std::string, std::string> src1, tgt1, src2, tgt2;          // objects
    std::map<std::string, std::string> src1m, tgt1m, src2m, tgt2m;      // morphisms
    struct FunctorTable {
        std::map<std::vector<std::string>, std::string> objects;
        std::map<std::vector<std::string>, std::string> morphisms;
    };
    std::map<D1Key, FunctorTable> d1;
    std::map<D2Key, std::map<std::vector<std::string>, std::string>> d2;
    std::map<WitnessKey, std::map<std::string, std::string>> witnesses;
};

class FinCatOracle : public InstanceOracle {
public:
    explicit FinCatOracle(FinCatInstanceData data);

    std::string name() const override { return data_.label; }
    bool exhaustive() const override { return true; }

    std::vector<ObjHandle> probe_objects(int level) const override;
    std::vector<MorHandle> probe_morphisms(int level) const override;
    ObjHandle src(ObjHandle x) const override;
    ObjHandle tgt(ObjHandle x) const override;
    MorHandle src_mor(MorHandle f) const override;
    MorHandle tgt_mor(MorHandle f) const override;
    ObjHandle mor_source(MorHandle f) const override;
    ObjHandle mor_target(MorHandle f) const override;
    ObjHandle apply_d1(D1Key k, std::span<const ObjHandle> args) const override;
    MorHandle apply_d1_mor(D1Key k, std::span<const MorHandle> args) const override;
    MorHandle d2_component(D2Key k, std::span<const ObjHandle> args) const override;
    MorHandle witness_component(WitnessKey k, ObjHandle arg) const override;
    MorHandle identity(ObjHandle x) const override;
    MorHandle compose(MorHandle f, MorHandle g) const override;
    MorHandle invert(MorHandle f) const override;
    bool is_invertible(MorHandle f) const override;
    double equal_residual(MorHandle f, MorHandle g) const override;
    std::string describe_obj(ObjHandle x) const override;
    std::string describe_mor(MorHandle f) const override;
    std::optional<MorHandle> transport1(ObjHandle d, MorHandle a, MorHandle b) const override;
    std::optional<MorHandle> transport2(ObjHandle h, MorHandle delta,
                                        MorHandle eps) const override;
    MorHandle mutate_scale(MorHandle f, std::uint64_t seed) const override;

    const FinCategory& category(int level) const;
    const FinCatInstanceData& data() const { return data_; }

    // id <-> handle translation (handles index the id tables)
    ObjHandle obj_handle(int level, const std::string& id) const;
    MorHandle mor_handle(int level, const std::string& id) const;
    const std::string& obj_id(ObjHandle h) const;
    const std::string& mor_id(MorHandle h) const;

private:
    FinCatInstanceData data_;
    std::vector<std::string> obj_ids_[3];
    std::vector<std::string> mor_ids_[3];
    std::map<std::string, std::int64_t> obj_index_[3];
    std::map<std::string, std::int64_t> mor_index_[3];
};

// The strict one-cell instance: terminal categories at every level, every
// functor constant, every transformation an identity.
DicatData build_trivial_instance();

FinCatInstanceData trivial_instance_data();

}  // namespace dicat
