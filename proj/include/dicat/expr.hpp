#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dicat/oracle.hpp"

namespace dicat {

// Domain of an axiom or generator: a composable chain. levels[i] is the
// cell level of component i; links[i] is the level over which components
// i and i+1 are fibered (t^(la-l) of the left equals s^(lb-l) of the right).
struct Dom {
    std::vector<int> levels;
    std::vector<int> links;
    std::size_t arity() const { return levels.size(); }
    bool operator==(const Dom&) const = default;
    std::string str() const;
};

struct TypeError : std::runtime_error {
    explicit TypeError(const std::string& m) : std::runtime_error(m) {}
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& m, std::size_t pos)
        : std::runtime_error(m + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
    std::size_t position;
};

// Normal form of a functor expression with a fixed chain domain: a tree whose
// leaves are projections and whose nodes apply structure functors or
// source/target maps. Equality of normal forms is the engine's notion of
// "same functor" (strict equations like s.m_v = s.p1 are rewritten away).
struct NF {
    enum class Kind { Proj, S, T, D1 };
    Kind kind = Kind::Proj;
    int proj = 0;     // 1-based when kind == Proj
    D1Key d1 = D1Key::I;
    std::vector<NF> args;

    bool operator==(const NF&) const = default;
    std::string str() const;
    int level(const Dom& dom) const;
};

// --- surface expression trees -------------------------------------------

struct FExpr;
using FExprPtr = std::shared_ptr<const FExpr>;

struct FExpr {
    enum class Kind { Id, S, T, D1, Proj, Comp, Tuple };
    Kind kind = Kind::Id;
    D1Key d1 = D1Key::I;
    int proj = 0;
    std::vector<FExprPtr> children;  // Comp: left-to-right = outermost first
};

FExprPtr f_id();
FExprPtr f_s();
FExprPtr f_t();
FExprPtr f_d1(D1Key k);
FExprPtr f_proj(int k);
FExprPtr f_of(std::vector<FExprPtr> fs);
FExprPtr f_tup(std::vector<FExprPtr> fs);

struct TExpr;
using TExprPtr = std::shared_ptr<const TExpr>;

struct TExpr {
    enum class Kind { Gen, Inv, Vc, Wl, Wr, IdT, Pair };
    Kind kind = Kind::Gen;
    D2Key gen = D2Key::TopIdentity;
    FExprPtr fun;                    // Wl / Wr / IdT
    std::vector<TExprPtr> children;  // Inv: 1; Vc/Pair: n
};

TExprPtr t_gen(D2Key k);
TExprPtr t_inv(TExprPtr e);
TExprPtr t_vc(std::vector<TExprPtr> es);
TExprPtr t_wl(FExprPtr f, TExprPtr e);
TExprPtr t_wr(TExprPtr e, FExprPtr f);
TExprPtr t_id(FExprPtr f);
TExprPtr t_pair(std::vector<TExprPtr> es);

// --- generator schema ------------------------------------------------------

struct GenSchema {
    D2Key key;
    Dom dom;
    // endpoints as normal forms over `dom`; level is 1 for D2-12, else 2
    NF src;
    NF dst;
    int cell_level;
};

const GenSchema& gen_schema(D2Key k);

// Functor normalization: a functor expression with domain `dom` mapping to a
// tuple of normal forms (singleton unless the expression is a tuple).
std::vector<NF> normalize_functor(const FExprPtr& f, const Dom& dom);

// Endpoints of a transformation expression over `dom`: both are functor
// tuples; for well-formed axiom sides they are singletons.
struct TType {
    std::vector<NF> src;
    std::vector<NF> dst;
};
TType type_texpr(const TExprPtr& e, const Dom& dom);

// Structural simplification: double inversions cancel, unary composites
// collapse. Evaluation semantics are unchanged.
TExprPtr normalize_texpr(const TExprPtr& e);

// --- axioms ---------------------------------------------------------------

struct AxiomDef {
    std::string id;       // e.g. "D3-17", "D3-23L"
    Dom dom;
    TExprPtr lhs;
    TExprPtr rhs;
    std::string cite;
    // filled in by the type checker:
    NF src;
    NF dst;
    int cell_level = 2;
};

std::vector<AxiomDef> parse_axioms(const std::string& text);

// The transcribed coherence axioms shipped with the engine.
const std::string& default_axiom_text();
const std::vector<AxiomDef>& default_axioms();

// --- evaluation -------------------------------------------------------------

struct ObjVal {
    bool is_tuple = false;
    ObjHandle h;
    std::vector<ObjVal> parts;
    static ObjVal one(ObjHandle x) { return ObjVal{false, x, {}}; }
    static ObjVal tup(std::vector<ObjVal> xs) { return ObjVal{true, {}, std::move(xs)}; }
};

struct MorVal {
    bool is_tuple = false;
    MorHandle h;
    std::vector<MorVal> parts;
    static MorVal one(MorHandle x) { return MorVal{false, x, {}}; }
    static MorVal tup(std::vector<MorVal> xs) { return MorVal{true, {}, std::move(xs)}; }
};

ObjVal apply_functor_obj(const InstanceOracle& o, const FExprPtr& f, const ObjVal& x);
MorVal apply_functor_mor(const InstanceOracle& o, const FExprPtr& f, const MorVal& x);
MorHandle evaluate(const InstanceOracle& o, const TExprPtr& e, const ObjVal& probe);

// Enumerate probe tuples for a chain domain from the oracle probe sets.
std::vector<ObjVal> enumerate_probes(const InstanceOracle& o, const Dom& dom, std::size_t cap);

std::string texpr_str(const TExprPtr& e);
std::string fexpr_str(const FExprPtr& f);

}  // namespace dicat
