#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dicat/dicat_data.hpp"
#include "dicat/linalg.hpp"
#include "dicat/oracle.hpp"

namespace dicat {

// Finite-dimensional semisimple algebra with an explicit block witness.
// mult maps A (x) A -> A under the row-major Kronecker convention; the block
// data (sizes plus an algebra isomorphism onto the block algebra) is supplied
// at construction and validated, never detected.
struct Algebra {
    std::string label;
    LinearSpace space;
    CMatrix mult;             // dim x dim^2
    CMatrix unit;             // dim x 1
    std::vector<std::size_t> block_sizes;
    CMatrix block_iso;        // dim x dim, algebra iso onto the block algebra

    std::size_t dim() const { return space.dim; }
};

// Finite-dimensional bimodule: a space carrying commuting left/right actions.
struct Bimodule {
    std::string label;
    std::int64_t left_algebra = -1;   // C0 object ids
    std::int64_t right_algebra = -1;
    LinearSpace space;
    CMatrix left_action;   // M_dim x (A_dim * M_dim)
    CMatrix right_action;  // M_dim x (M_dim * B_dim)

    std::size_t dim() const { return space.dim; }
};

struct BimoduleMap {
    std::int64_t source = -1;  // C1 object ids
    std::int64_t target = -1;
    CMatrix matrix;
};

struct FusionResult {
    Bimodule bimodule;
    QuotientPresentation presentation;  // over the ambient M (x) N
};

struct ValidationReportLite {
    bool ok = true;
    double max_residual = 0.0;
    std::vector<std::string> violations;
};

// Free-standing helpers exercised directly by tests; the oracle routes
// through the same code.
Algebra make_block_algebra(const std::vector<std::size_t>& sizes, const std::string& label);
ValidationReportLite validate_algebra(const Algebra& a, double tol);
ValidationReportLite validate_bimodule(const Bimodule& b, const Algebra& left,
                                       const Algebra& right, double tol);

struct MoritaConfig {
    double tol = 1e-9;
    bool scramble = false;
    std::uint64_t seed = 0;
    std::size_t dim_cap = 64;
    std::string probe_preset = "default";  // "default" | "small"
};

class MoritaOracle;

// Assembles the default Morita instance: algebras {C, C+C, M2, C+M2},
// bimodules {regular, column, row, graded and seeded spaces, zero}, maps
// {identities, projections, seeded intertwiners}. Scrambled mode conjugates
// every fusion basis by a seeded invertible matrix.
DicatData build_morita_instance(const MoritaConfig& cfg);

std::shared_ptr<MoritaOracle> build_morita_oracle(const MoritaConfig& cfg);

struct TensorSmokeReport {
    bool ok = true;
    double max_residual = 0.0;
    std::vector<std::string> failures;
};

// Instance-level monoidal sanity: tensoring algebras/bimodules commutes with
// the relative tensor product up to the canonical reshuffling isomorphism.
TensorSmokeReport tensor_smoke(MoritaOracle& o, double tol);

// The Morita backend. All construction is memoized behind a mutex so the
// instance can be queried from many threads; handles are stable per instance.
class MoritaOracle : public InstanceOracle {
public:
    explicit MoritaOracle(MoritaConfig cfg);
    ~MoritaOracle() override;

    std::string name() const override;
    bool exhaustive() const override { return false; }

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

    // registration (construction-time; also used by tests to add probes)
    ObjHandle add_algebra(Algebra a);
    ObjHandle add_bimodule(Bimodule b);
    ObjHandle add_map(BimoduleMap m, bool probe = true);
    MorHandle add_alg_iso(std::int64_t src, std::int64_t tgt, CMatrix m, bool probe = true);
    MorHandle add_bim_iso(std::int64_t src, std::int64_t tgt, MorHandle a, MorHandle b, CMatrix m,
                          bool probe = true);

    const Algebra& algebra(std::int64_t id) const;
    const Bimodule& bimodule(std::int64_t id) const;
    const BimoduleMap& bim_map(std::int64_t id) const;
    const FusionResult& fusion(ObjHandle left, ObjHandle right) const;

    // direct operation entry points, shared with the tests
    FusionResult rel_tensor(const Bimodule& m, const Bimodule& n, std::uint64_t scramble_key) const;
    // horizontal fusion of two cells: the induced map on fused bimodules
    ObjHandle map_tensor(ObjHandle f, ObjHandle g) const;
    void add_probe_morphism(MorHandle h);
    double tol() const { return cfg_.tol; }
    const MoritaConfig& config() const { return cfg_; }

    std::vector<ObjHandle> algebra_handles() const;

    // morphism records (exposed for the implementation; treat as internal)
    struct AlgIsoRec {
        std::int64_t src = -1, tgt = -1;
        CMatrix matrix;
    };
    struct BimIsoRec {
        std::int64_t src = -1, tgt = -1;
        std::int64_t a = -1, b = -1;
        CMatrix matrix;
    };
    struct SectorMorRec {
        std::int64_t src = -1, tgt = -1;
        std::int64_t d = -1, e = -1;
    };

private:
    ObjHandle intern_map(const std::vector<std::int64_t>& key, BimoduleMap m,
                         const std::string& label) const;
    MorHandle intern_alg_iso(const std::vector<std::int64_t>& key, AlgIsoRec a) const;
    MorHandle intern_bim_iso(const std::vector<std::int64_t>& key, BimIsoRec b) const;
    MorHandle intern_sector(const std::vector<std::int64_t>& key, SectorMorRec s) const;
    MorHandle assoc_iso(ObjHandle d, ObjHandle e, ObjHandle f) const;

    struct Impl;
    std::unique_ptr<Impl> impl_;
    MoritaConfig cfg_;
};

}  // namespace dicat
