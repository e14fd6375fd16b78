#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dicat {

// The eight structure functors plus the two lower identities supplied with
// the invertibility data.
enum class D1Key {
    I,    // 1-cell identity        C0 -> C1
    M,    // horizontal composition C1 x_0 C1 -> C1
    IV,   // 2-cell identity        C1 -> C2
    MV,   // vertical composition   C2 x_1 C2 -> C2
    WR,   // right whisker          C2 x_0 C1 -> C2
    WL,   // left whisker           C1 x_0 C2 -> C2
    IL,   // upper left identity    C1 -> C2
    IR,   // upper right identity   C1 -> C2
    ILL,  // lower left identity    C1 -> C2
    IRL,  // lower right identity   C1 -> C2
};

enum class D2Key {
    TopIdentity = 1,     // D2-1
    BottomIdentity,      // D2-2
    VerticalAssociator,  // D2-3
    RightVertExpansion,  // D2-4
    LeftVertExpansion,   // D2-5
    RightDewhisker,      // D2-6
    LeftDewhisker,       // D2-7
    Switch,              // D2-8
    WhiskerAssocRR,      // D2-9
    WhiskerAssocM,       // D2-10
    WhiskerAssocLL,      // D2-11
    HorizAssociator,     // D2-12
    LeftIdentityPass,    // D2-13
    RightIdentityPass,   // D2-14
    Swap,                // D2-15
    LeftIdExpansion,     // D2-16
    RightIdExpansion,    // D2-17
    Flip,                // D2-18
};

std::string d1_name(D1Key k);
std::string d2_name(D2Key k);  // "D2-1" .. "D2-18"
std::optional<D2Key> d2_from_name(const std::string& s);
std::optional<D1Key> d1_from_name(const std::string& s);

// Witness transformations packaged with the lower identities.
enum class WitnessKey {
    CancelUpL,    // m_v(il-, il)  => i_v
    CancelDownL,  // m_v(il, il-)  => i_v . m(i.s, id)
    CancelUpR,    // m_v(ir-, ir)  => i_v
    CancelDownR,  // m_v(ir, ir-)  => i_v . m(id, i.t)
};

struct ObjHandle {
    int level = -1;  // 0, 1, 2
    std::int64_t id = -1;
    bool valid() const { return level >= 0 && id >= 0; }
    friend bool operator==(const ObjHandle&, const ObjHandle&) = default;
    friend auto operator<=>(const ObjHandle&, const ObjHandle&) = default;
};

struct MorHandle {
    int level = -1;
    std::int64_t id = -1;
    bool valid() const { return level >= 0 && id >= 0; }
    friend bool operator==(const MorHandle&, const MorHandle&) = default;
    friend auto operator<=>(const MorHandle&, const MorHandle&) = default;
};

struct OracleError : std::runtime_error {
    explicit OracleError(const std::string& m) : std::runtime_error(m) {}
};

// The single abstraction boundary between instances and the axiom engine.
// An oracle owns three categories worth of objects and morphisms, all of
// the [D1-x] structure, components of the [D2-x] transformations and the
// invertibility witnesses, plus a tolerance-based morphism equality.
//
// Implementations must be safe for concurrent read-only use; lazy
// construction caches must be internally synchronized.
class InstanceOracle {
public:
    virtual ~InstanceOracle() = default;

    virtual std::string name() const = 0;
    // Exhaustive backends can enumerate all objects/morphisms; probe-based
    // backends return curated finite probe sets.
    virtual bool exhaustive() const = 0;

    virtual std::vector<ObjHandle> probe_objects(int level) const = 0;
    virtual std::vector<MorHandle> probe_morphisms(int level) const = 0;

    virtual ObjHandle src(ObjHandle x) const = 0;  // level k -> k-1
    virtual ObjHandle tgt(ObjHandle x) const = 0;
    virtual MorHandle src_mor(MorHandle f) const = 0;
    virtual MorHandle tgt_mor(MorHandle f) const = 0;

    virtual ObjHandle mor_source(MorHandle f) const = 0;  // endpoints within its category
    virtual ObjHandle mor_target(MorHandle f) const = 0;

    virtual ObjHandle apply_d1(D1Key k, std::span<const ObjHandle> args) const = 0;
    virtual MorHandle apply_d1_mor(D1Key k, std::span<const MorHandle> args) const = 0;

    virtual MorHandle d2_component(D2Key k, std::span<const ObjHandle> args) const = 0;
    virtual MorHandle witness_component(WitnessKey k, ObjHandle arg) const = 0;

    virtual MorHandle identity(ObjHandle x) const = 0;
    virtual MorHandle compose(MorHandle f, MorHandle g) const = 0;  // g after f
    virtual MorHandle invert(MorHandle f) const = 0;
    virtual bool is_invertible(MorHandle f) const = 0;

    virtual double equal_residual(MorHandle f, MorHandle g) const = 0;
    virtual std::string describe_obj(ObjHandle x) const = 0;
    virtual std::string describe_mor(MorHandle f) const = 0;

    // Cleavage for the fibration checks: lift the C0-iso pair (a, b) against
    // a 1-cell over its target, i.e. produce a C1-iso ending at `d` whose
    // source/target images are (a, b). Returns nullopt when the backend has
    // no transport; exhaustive backends fall back to search.
    virtual std::optional<MorHandle> transport1(ObjHandle d, MorHandle a, MorHandle b) const = 0;
    // Same one level up: lift a pair of C1-isos against a 2-cell.
    virtual std::optional<MorHandle> transport2(ObjHandle h, MorHandle delta, MorHandle eps) const = 0;

    // Seeded nontrivial rescaling of a morphism, keeping its endpoints; the
    // negative-control harness swaps this in for one transformation family.
    // Exact backends scale by a root of unity, numeric ones by a unit
    // complex. seed == 0 requests the identity scaling.
    virtual MorHandle mutate_scale(MorHandle f, std::uint64_t seed) const = 0;
};

}  // namespace dicat
