#include "dicat/expr.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace dicat {

std::string d1_name(D1Key k) {
    switch (k) {
        case D1Key::I: return "i";
        case D1Key::M: return "m";
        case D1Key::IV: return "iv";
        case D1Key::MV: return "mv";
        case D1Key::WR: return "wr";
        case D1Key::WL: return "wl";
        case D1Key::IL: return "il";
        case D1Key::IR: return "ir";
        case D1Key::ILL: return "il-";
        case D1Key::IRL: return "ir-";
    }
    return "?";
}

std::optional<D1Key> d1_from_name(const std::string& s) {
    static const std::map<std::string, D1Key> table = {
        {"i", D1Key::I},   {"m", D1Key::M},   {"iv", D1Key::IV},  {"mv", D1Key::MV},
        {"wr", D1Key::WR}, {"wl", D1Key::WL}, {"il", D1Key::IL},  {"ir", D1Key::IR},
        {"il-", D1Key::ILL}, {"ir-", D1Key::IRL},
    };
    auto it = table.find(s);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

std::string d2_name(D2Key k) { return "D2-" + std::to_string(static_cast<int>(k)); }

std::optional<D2Key> d2_from_name(const std::string& s) {
    if (s.rfind("D2-", 0) != 0) return std::nullopt;
    int n = 0;
    try {
        n = std::stoi(s.substr(3));
    } catch (...) {
        return std::nullopt;
    }
    if (n < 1 || n > 18) return std::nullopt;
    return static_cast<D2Key>(n);
}

std::string Dom::str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) s += links[i - 1] == 1 ? " *1 " : " *0 ";
        s += std::to_string(levels[i]);
    }
    return s + "]";
}

std::string NF::str() const {
    switch (kind) {
        case Kind::Proj: return "p" + std::to_string(proj);
        case Kind::S: return "s(" + args[0].str() + ")";
        case Kind::T: return "t(" + args[0].str() + ")";
        case Kind::D1: {
            std::string s = d1_name(d1) + "(";
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (i) s += ",";
                s += args[i].str();
            }
            return s + ")";
        }
    }
    return "?";
}

int NF::level(const Dom& dom) const {
    switch (kind) {
        case Kind::Proj: return dom.levels.at(proj - 1);
        case Kind::S:
        case Kind::T: return args[0].level(dom) - 1;
        case Kind::D1:
            switch (d1) {
                case D1Key::I:
                case D1Key::M: return 1;
                default: return 2;
            }
    }
    return -1;
}

namespace {

FExprPtr make_f(FExpr::Kind kind) {
    auto e = std::make_shared<FExpr>();
    e->kind = kind;
    return e;
}

std::shared_ptr<TExpr> make_t(TExpr::Kind kind) {
    auto e = std::make_shared<TExpr>();
    e->kind = kind;
    return e;
}

}  // namespace

FExprPtr f_id() { return make_f(FExpr::Kind::Id); }
FExprPtr f_s() { return make_f(FExpr::Kind::S); }
FExprPtr f_t() { return make_f(FExpr::Kind::T); }
FExprPtr f_d1(D1Key k) {
    auto e = std::make_shared<FExpr>();
    e->kind = FExpr::Kind::D1;
    e->d1 = k;
    return e;
}
FExprPtr f_proj(int k) {
    auto e = std::make_shared<FExpr>();
    e->kind = FExpr::Kind::Proj;
    e->proj = k;
    return e;
}
FExprPtr f_of(std::vector<FExprPtr> fs) {
    auto e = std::make_shared<FExpr>();
    e->kind = FExpr::Kind::Comp;
    e->children = std::move(fs);
    return e;
}
FExprPtr f_tup(std::vector<FExprPtr> fs) {
    auto e = std::make_shared<FExpr>();
    e->kind = FExpr::Kind::Tuple;
    e->children = std::move(fs);
    return e;
}

TExprPtr t_gen(D2Key k) {
    auto e = make_t(TExpr::Kind::Gen);
    e->gen = k;
    return e;
}
TExprPtr t_inv(TExprPtr x) {
    auto e = make_t(TExpr::Kind::Inv);
    e->children = {std::move(x)};
    return e;
}
TExprPtr t_vc(std::vector<TExprPtr> es) {
    auto e = make_t(TExpr::Kind::Vc);
    e->children = std::move(es);
    return e;
}
TExprPtr t_wl(FExprPtr f, TExprPtr x) {
    auto e = make_t(TExpr::Kind::Wl);
    e->fun = std::move(f);
    e->children = {std::move(x)};
    return e;
}
TExprPtr t_wr(TExprPtr x, FExprPtr f) {
    auto e = make_t(TExpr::Kind::Wr);
    e->fun = std::move(f);
    e->children = {std::move(x)};
    return e;
}
TExprPtr t_id(FExprPtr f) {
    auto e = make_t(TExpr::Kind::IdT);
    e->fun = std::move(f);
    return e;
}
TExprPtr t_pair(std::vector<TExprPtr> es) {
    auto e = make_t(TExpr::Kind::Pair);
    e->children = std::move(es);
    return e;
}

// --- normalization -----------------------------------------------------------

namespace {

NF nf_proj(int k) {
    NF n;
    n.kind = NF::Kind::Proj;
    n.proj = k;
    return n;
}

NF nf_d1(D1Key k, std::vector<NF> args) {
    NF n;
    n.kind = NF::Kind::D1;
    n.d1 = k;
    n.args = std::move(args);
    return n;
}

NF canon_t(NF x, const Dom& dom);

// Depth of a pure s-chain over a projection, or -1 if not one.
int s_chain_depth(const NF& x, int* proj) {
    if (x.kind == NF::Kind::Proj) {
        *proj = x.proj;
        return 0;
    }
    if (x.kind == NF::Kind::S) {
        int d = s_chain_depth(x.args[0], proj);
        return d < 0 ? -1 : d + 1;
    }
    return -1;
}

NF canon_s(NF x, const Dom& dom);

// If `cand` is the s-chain that a chain link equates with a t-chain of the
// previous component, rewrite it. Canonical direction: later component's
// s-chain becomes the earlier component's t-chain; the replacement is built
// through canon_s/canon_t so nested link equalities keep firing.
NF apply_links(NF cand, const Dom& dom) {
    int proj = 0;
    int depth = s_chain_depth(cand, &proj);
    if (depth <= 0 || proj < 2) return cand;
    const std::size_t j = static_cast<std::size_t>(proj);  // 1-based component
    if (j - 2 >= dom.links.size()) return cand;
    int link = dom.links[j - 2];
    if (depth != dom.levels[j - 1] - link) return cand;
    int tdepth = dom.levels[j - 2] - link;
    NF left = nf_proj(proj - 1);
    for (int i = 0; i + 1 < tdepth; ++i) left = canon_s(std::move(left), dom);
    if (tdepth > 0) left = canon_t(std::move(left), dom);
    return left;
}

// Canonical s of an already-canonical x: push through structure functors
// (strict compatibility equations of the 1-data), normalize globularity
// (s.t = s.s, t.t = t.s) and rewrite chain-link equalities.
NF canon_s(NF x, const Dom& dom) {
    if (x.kind == NF::Kind::D1) {
        switch (x.d1) {
            case D1Key::I: return x.args[0];
            case D1Key::IV: return x.args[0];
            case D1Key::M: return canon_s(x.args[0], dom);
            case D1Key::MV: return canon_s(x.args[0], dom);
            case D1Key::WR: return nf_d1(D1Key::M, {canon_s(x.args[0], dom), x.args[1]});
            case D1Key::WL: return nf_d1(D1Key::M, {x.args[0], canon_s(x.args[1], dom)});
            case D1Key::IL:
                return nf_d1(D1Key::M, {nf_d1(D1Key::I, {canon_s(x.args[0], dom)}), x.args[0]});
            case D1Key::IR:
                return nf_d1(D1Key::M, {x.args[0], nf_d1(D1Key::I, {canon_t(x.args[0], dom)})});
            case D1Key::ILL: return x.args[0];
            case D1Key::IRL: return x.args[0];
        }
    }
    if (x.kind == NF::Kind::T) {
        // s.t = s.s
        return canon_s(canon_s(x.args[0], dom), dom);
    }
    NF n;
    n.kind = NF::Kind::S;
    n.args = {std::move(x)};
    return apply_links(std::move(n), dom);
}

NF canon_t(NF x, const Dom& dom) {
    if (x.kind == NF::Kind::D1) {
        switch (x.d1) {
            case D1Key::I: return x.args[0];
            case D1Key::IV: return x.args[0];
            case D1Key::M: return canon_t(x.args[1], dom);
            case D1Key::MV: return canon_t(x.args[1], dom);
            case D1Key::WR: return nf_d1(D1Key::M, {canon_t(x.args[0], dom), x.args[1]});
            case D1Key::WL: return nf_d1(D1Key::M, {x.args[0], canon_t(x.args[1], dom)});
            case D1Key::IL: return x.args[0];
            case D1Key::IR: return x.args[0];
            case D1Key::ILL:
                return nf_d1(D1Key::M, {nf_d1(D1Key::I, {canon_s(x.args[0], dom)}), x.args[0]});
            case D1Key::IRL:
                return nf_d1(D1Key::M, {x.args[0], nf_d1(D1Key::I, {canon_t(x.args[0], dom)})});
        }
    }
    if (x.kind == NF::Kind::T) {
        // t.t = t.s
        return canon_t(canon_s(x.args[0], dom), dom);
    }
    NF n;
    n.kind = NF::Kind::T;
    n.args = {std::move(x)};
    return n;
}

struct D1Sig {
    Dom dom;
    int out_level;
};

D1Sig d1_sig(D1Key k) {
    switch (k) {
        case D1Key::I: return {{{0}, {}}, 1};
        case D1Key::M: return {{{1, 1}, {0}}, 1};
        case D1Key::IV: return {{{1}, {}}, 2};
        case D1Key::MV: return {{{2, 2}, {1}}, 2};
        case D1Key::WR: return {{{2, 1}, {0}}, 2};
        case D1Key::WL: return {{{1, 2}, {0}}, 2};
        case D1Key::IL:
        case D1Key::IR:
        case D1Key::ILL:
        case D1Key::IRL: return {{{1}, {}}, 2};
    }
    return {{{0}, {}}, 0};
}

// Evaluate a functor expression to normal form components, with `env`
// giving the normal forms substituted for projections.
std::vector<NF> norm_rec(const FExprPtr& f, const Dom& dom, const std::vector<NF>& env) {
    switch (f->kind) {
        case FExpr::Kind::Id: return env;
        case FExpr::Kind::S: {
            if (env.size() != 1) throw TypeError("s applied to a tuple");
            return {canon_s(env[0], dom)};
        }
        case FExpr::Kind::T: {
            if (env.size() != 1) throw TypeError("t applied to a tuple");
            return {canon_t(env[0], dom)};
        }
        case FExpr::Kind::Proj: {
            if (f->proj < 1 || static_cast<std::size_t>(f->proj) > env.size())
                throw TypeError("projection index " + std::to_string(f->proj) + " out of range");
            return {env[f->proj - 1]};
        }
        case FExpr::Kind::D1: {
            D1Sig sig = d1_sig(f->d1);
            if (env.size() != sig.dom.arity())
                throw TypeError("functor " + d1_name(f->d1) + " expects arity " +
                                std::to_string(sig.dom.arity()) + ", got " +
                                std::to_string(env.size()));
            for (std::size_t i = 0; i < env.size(); ++i) {
                if (env[i].level(dom) != sig.dom.levels[i])
                    throw TypeError("functor " + d1_name(f->d1) + " argument " +
                                    std::to_string(i + 1) + " has cell level " +
                                    std::to_string(env[i].level(dom)) + ", wants " +
                                    std::to_string(sig.dom.levels[i]));
            }
            return {nf_d1(f->d1, env)};
        }
        case FExpr::Kind::Comp: {
            std::vector<NF> cur = env;
            for (auto it = f->children.rbegin(); it != f->children.rend(); ++it)
                cur = norm_rec(*it, dom, cur);
            return cur;
        }
        case FExpr::Kind::Tuple: {
            std::vector<NF> out;
            for (const auto& c : f->children) {
                auto part = norm_rec(c, dom, env);
                if (part.size() != 1) throw TypeError("nested tuples are not supported");
                out.push_back(part[0]);
            }
            return out;
        }
    }
    throw TypeError("bad functor expression");
}

std::vector<NF> identity_env(const Dom& dom) {
    std::vector<NF> env;
    for (std::size_t i = 0; i < dom.arity(); ++i) env.push_back(nf_proj(static_cast<int>(i + 1)));
    return env;
}

NF subst(const NF& body, const std::vector<NF>& env, const Dom& dom) {
    switch (body.kind) {
        case NF::Kind::Proj:
            if (body.proj < 1 || static_cast<std::size_t>(body.proj) > env.size())
                throw TypeError("projection out of range in substitution");
            return env[body.proj - 1];
        case NF::Kind::S: return canon_s(subst(body.args[0], env, dom), dom);
        case NF::Kind::T: return canon_t(subst(body.args[0], env, dom), dom);
        case NF::Kind::D1: {
            std::vector<NF> args;
            args.reserve(body.args.size());
            for (const auto& a : body.args) args.push_back(subst(a, env, dom));
            return nf_d1(body.d1, std::move(args));
        }
    }
    throw TypeError("bad normal form");
}

}  // namespace

std::vector<NF> normalize_functor(const FExprPtr& f, const Dom& dom) {
    return norm_rec(f, dom, identity_env(dom));
}

// --- generator schemas -------------------------------------------------------

namespace {

GenSchema make_schema(D2Key k) {
    GenSchema g;
    g.key = k;
    g.cell_level = 2;
    switch (k) {
        case D2Key::TopIdentity:
        case D2Key::BottomIdentity:
        case D2Key::LeftIdentityPass:
        case D2Key::RightIdentityPass: g.dom = {{2}, {}}; break;
        case D2Key::VerticalAssociator: g.dom = {{2, 2, 2}, {1, 1}}; break;
        case D2Key::RightVertExpansion:
        case D2Key::LeftVertExpansion:
        case D2Key::LeftIdExpansion:
        case D2Key::RightIdExpansion:
        case D2Key::Flip: g.dom = {{1, 1}, {0}}; break;
        case D2Key::RightDewhisker: g.dom = {{2, 2, 1}, {1, 0}}; break;
        case D2Key::LeftDewhisker: g.dom = {{1, 2, 2}, {0, 1}}; break;
        case D2Key::Switch: g.dom = {{2, 2}, {0}}; break;
        case D2Key::WhiskerAssocRR: g.dom = {{2, 1, 1}, {0, 0}}; break;
        case D2Key::WhiskerAssocM: g.dom = {{1, 2, 1}, {0, 0}}; break;
        case D2Key::WhiskerAssocLL: g.dom = {{1, 1, 2}, {0, 0}}; break;
        case D2Key::HorizAssociator: g.dom = {{1, 1, 1}, {0, 0}}; break;
        case D2Key::Swap: g.dom = {{0}, {}}; break;
    }
    auto P = [](int i) { return nf_proj(i); };
    auto D = [](D1Key d, std::vector<NF> a) { return nf_d1(d, std::move(a)); };
    auto S = [&g](NF x) { return canon_s(std::move(x), g.dom); };
    auto T = [&g](NF x) { return canon_t(std::move(x), g.dom); };
    switch (k) {
        case D2Key::TopIdentity:
            g.src = D(D1Key::MV, {D(D1Key::IV, {S(P(1))}), P(1)});
            g.dst = P(1);
            break;
        case D2Key::BottomIdentity:
            g.src = D(D1Key::MV, {P(1), D(D1Key::IV, {T(P(1))})});
            g.dst = P(1);
            break;
        case D2Key::VerticalAssociator:
            g.src = D(D1Key::MV, {D(D1Key::MV, {P(1), P(2)}), P(3)});
            g.dst = D(D1Key::MV, {P(1), D(D1Key::MV, {P(2), P(3)})});
            break;
        case D2Key::RightVertExpansion:
            g.src = D(D1Key::IV, {D(D1Key::M, {P(1), P(2)})});
            g.dst = D(D1Key::WR, {D(D1Key::IV, {P(1)}), P(2)});
            break;
        case D2Key::LeftVertExpansion:
            g.src = D(D1Key::IV, {D(D1Key::M, {P(1), P(2)})});
            g.dst = D(D1Key::WL, {P(1), D(D1Key::IV, {P(2)})});
            break;
        case D2Key::RightDewhisker:
            g.src = D(D1Key::WR, {D(D1Key::MV, {P(1), P(2)}), P(3)});
            g.dst = D(D1Key::MV, {D(D1Key::WR, {P(1), P(3)}), D(D1Key::WR, {P(2), P(3)})});
            break;
        case D2Key::LeftDewhisker:
            g.src = D(D1Key::WL, {P(1), D(D1Key::MV, {P(2), P(3)})});
            g.dst = D(D1Key::MV, {D(D1Key::WL, {P(1), P(2)}), D(D1Key::WL, {P(1), P(3)})});
            break;
        case D2Key::Switch:
            g.src = D(D1Key::MV, {D(D1Key::WR, {P(1), S(P(2))}), D(D1Key::WL, {T(P(1)), P(2)})});
            g.dst = D(D1Key::MV, {D(D1Key::WL, {S(P(1)), P(2)}), D(D1Key::WR, {P(1), T(P(2))})});
            break;
        case D2Key::WhiskerAssocRR:
            g.src = D(D1Key::WR, {D(D1Key::WR, {P(1), P(2)}), P(3)});
            g.dst = D(D1Key::WR, {P(1), D(D1Key::M, {P(2), P(3)})});
            break;
        case D2Key::WhiskerAssocM:
            g.src = D(D1Key::WR, {D(D1Key::WL, {P(1), P(2)}), P(3)});
            g.dst = D(D1Key::WL, {P(1), D(D1Key::WR, {P(2), P(3)})});
            break;
        case D2Key::WhiskerAssocLL:
            g.src = D(D1Key::WL, {D(D1Key::M, {P(1), P(2)}), P(3)});
            g.dst = D(D1Key::WL, {P(1), D(D1Key::WL, {P(2), P(3)})});
            break;
        case D2Key::HorizAssociator:
            g.src = D(D1Key::M, {D(D1Key::M, {P(1), P(2)}), P(3)});
            g.dst = D(D1Key::M, {P(1), D(D1Key::M, {P(2), P(3)})});
            g.cell_level = 1;
            break;
        case D2Key::LeftIdentityPass:
            g.src = D(D1Key::MV,
                      {D(D1Key::WL, {D(D1Key::I, {S(S(P(1)))}), P(1)}), D(D1Key::IL, {T(P(1))})});
            g.dst = D(D1Key::MV, {D(D1Key::IL, {S(P(1))}), P(1)});
            break;
        case D2Key::RightIdentityPass:
            g.src = D(D1Key::MV,
                      {D(D1Key::WR, {P(1), D(D1Key::I, {T(T(P(1)))})}), D(D1Key::IR, {T(P(1))})});
            g.dst = D(D1Key::MV, {D(D1Key::IR, {S(P(1))}), P(1)});
            break;
        case D2Key::Swap:
            g.src = D(D1Key::IL, {D(D1Key::I, {P(1)})});
            g.dst = D(D1Key::IR, {D(D1Key::I, {P(1)})});
            break;
        case D2Key::LeftIdExpansion:
            g.src = D(D1Key::WR, {D(D1Key::IL, {P(1)}), P(2)});
            g.dst = D(D1Key::IL, {D(D1Key::M, {P(1), P(2)})});
            break;
        case D2Key::RightIdExpansion:
            g.src = D(D1Key::WL, {P(1), D(D1Key::IR, {P(2)})});
            g.dst = D(D1Key::IR, {D(D1Key::M, {P(1), P(2)})});
            break;
        case D2Key::Flip:
            g.src = D(D1Key::WR, {D(D1Key::IR, {P(1)}), P(2)});
            g.dst = D(D1Key::WL, {P(1), D(D1Key::IL, {P(2)})});
            break;
    }
    return g;
}

}  // namespace

const GenSchema& gen_schema(D2Key k) {
    static const std::map<D2Key, GenSchema>* table = [] {
        auto* t = new std::map<D2Key, GenSchema>();
        for (int i = 1; i <= 18; ++i) {
            D2Key key = static_cast<D2Key>(i);
            t->emplace(key, make_schema(key));
        }
        return t;
    }();
    return table->at(k);
}

// --- transformation typing ---------------------------------------------------

namespace {

TType type_rec(const TExprPtr& e, const Dom& dom, const std::vector<NF>& env) {
    switch (e->kind) {
        case TExpr::Kind::Gen: {
            const GenSchema& g = gen_schema(e->gen);
            if (env.size() != g.dom.arity())
                throw TypeError(d2_name(e->gen) + " applied at arity " + std::to_string(env.size()) +
                                ", expects " + g.dom.str());
            for (std::size_t i = 0; i < env.size(); ++i)
                if (env[i].level(dom) != g.dom.levels[i])
                    throw TypeError(d2_name(e->gen) + " argument " + std::to_string(i + 1) +
                                    " has wrong cell level");
            return {{subst(g.src, env, dom)}, {subst(g.dst, env, dom)}};
        }
        case TExpr::Kind::Inv: {
            TType t = type_rec(e->children[0], dom, env);
            return {t.dst, t.src};
        }
        case TExpr::Kind::Vc: {
            if (e->children.empty()) throw TypeError("empty vertical composite");
            TType acc = type_rec(e->children[0], dom, env);
            for (std::size_t i = 1; i < e->children.size(); ++i) {
                TType next = type_rec(e->children[i], dom, env);
                if (!(acc.dst == next.src)) {
                    std::string msg = "composite endpoint mismatch between steps " +
                                      std::to_string(i) + " and " + std::to_string(i + 1) + ":";
                    for (const auto& n : acc.dst) msg += " " + n.str();
                    msg += "  vs ";
                    for (const auto& n : next.src) msg += " " + n.str();
                    throw TypeError(msg);
                }
                acc.dst = next.dst;
            }
            return acc;
        }
        case TExpr::Kind::Wl: {
            TType inner = type_rec(e->children[0], dom, env);
            return {norm_rec(e->fun, dom, inner.src), norm_rec(e->fun, dom, inner.dst)};
        }
        case TExpr::Kind::Wr: {
            std::vector<NF> nenv = norm_rec(e->fun, dom, env);
            return type_rec(e->children[0], dom, nenv);
        }
        case TExpr::Kind::IdT: {
            std::vector<NF> n = norm_rec(e->fun, dom, env);
            return {n, n};
        }
        case TExpr::Kind::Pair: {
            TType out;
            for (const auto& c : e->children) {
                TType t = type_rec(c, dom, env);
                if (t.src.size() != 1 || t.dst.size() != 1)
                    throw TypeError("pair components must have singleton endpoints");
                out.src.push_back(t.src[0]);
                out.dst.push_back(t.dst[0]);
            }
            return out;
        }
    }
    throw TypeError("bad transformation expression");
}

}  // namespace

TType type_texpr(const TExprPtr& e, const Dom& dom) {
    return type_rec(e, dom, identity_env(dom));
}

TExprPtr normalize_texpr(const TExprPtr& e) {
    switch (e->kind) {
        case TExpr::Kind::Gen:
        case TExpr::Kind::IdT: return e;
        case TExpr::Kind::Inv: {
            TExprPtr inner = normalize_texpr(e->children[0]);
            if (inner->kind == TExpr::Kind::Inv) return inner->children[0];
            return t_inv(inner);
        }
        case TExpr::Kind::Vc: {
            std::vector<TExprPtr> parts;
            for (const auto& c : e->children) parts.push_back(normalize_texpr(c));
            if (parts.size() == 1) return parts[0];
            return t_vc(std::move(parts));
        }
        case TExpr::Kind::Wl: return t_wl(e->fun, normalize_texpr(e->children[0]));
        case TExpr::Kind::Wr: return t_wr(normalize_texpr(e->children[0]), e->fun);
        case TExpr::Kind::Pair: {
            std::vector<TExprPtr> parts;
            for (const auto& c : e->children) parts.push_back(normalize_texpr(c));
            return t_pair(std::move(parts));
        }
    }
    return e;
}

// --- evaluation ----------------------------------------------------------------

namespace {

ObjVal apply_obj_env(const InstanceOracle& o, const FExprPtr& f, const ObjVal& x);

std::vector<ObjVal> as_parts(const ObjVal& x) {
    if (x.is_tuple) return x.parts;
    return {x};
}

std::vector<MorVal> as_parts_m(const MorVal& x) {
    if (x.is_tuple) return x.parts;
    return {x};
}

ObjVal apply_obj_env(const InstanceOracle& o, const FExprPtr& f, const ObjVal& x) {
    switch (f->kind) {
        case FExpr::Kind::Id: return x;
        case FExpr::Kind::S: return ObjVal::one(o.src(x.h));
        case FExpr::Kind::T: return ObjVal::one(o.tgt(x.h));
        case FExpr::Kind::Proj: {
            auto parts = as_parts(x);
            return parts.at(f->proj - 1);
        }
        case FExpr::Kind::D1: {
            std::vector<ObjHandle> args;
            for (const auto& p : as_parts(x)) args.push_back(p.h);
            return ObjVal::one(o.apply_d1(f->d1, args));
        }
        case FExpr::Kind::Comp: {
            ObjVal cur = x;
            for (auto it = f->children.rbegin(); it != f->children.rend(); ++it)
                cur = apply_obj_env(o, *it, cur);
            return cur;
        }
        case FExpr::Kind::Tuple: {
            std::vector<ObjVal> parts;
            for (const auto& c : f->children) parts.push_back(apply_obj_env(o, c, x));
            return ObjVal::tup(std::move(parts));
        }
    }
    throw OracleError("bad functor expression in object application");
}

MorVal apply_mor_env(const InstanceOracle& o, const FExprPtr& f, const MorVal& x) {
    switch (f->kind) {
        case FExpr::Kind::Id: return x;
        case FExpr::Kind::S: return MorVal::one(o.src_mor(x.h));
        case FExpr::Kind::T: return MorVal::one(o.tgt_mor(x.h));
        case FExpr::Kind::Proj: {
            auto parts = as_parts_m(x);
            return parts.at(f->proj - 1);
        }
        case FExpr::Kind::D1: {
            std::vector<MorHandle> args;
            for (const auto& p : as_parts_m(x)) args.push_back(p.h);
            return MorVal::one(o.apply_d1_mor(f->d1, args));
        }
        case FExpr::Kind::Comp: {
            MorVal cur = x;
            for (auto it = f->children.rbegin(); it != f->children.rend(); ++it)
                cur = apply_mor_env(o, *it, cur);
            return cur;
        }
        case FExpr::Kind::Tuple: {
            std::vector<MorVal> parts;
            for (const auto& c : f->children) parts.push_back(apply_mor_env(o, c, x));
            return MorVal::tup(std::move(parts));
        }
    }
    throw OracleError("bad functor expression in morphism application");
}

MorVal eval_rec(const InstanceOracle& o, const TExprPtr& e, const ObjVal& x) {
    switch (e->kind) {
        case TExpr::Kind::Gen: {
            std::vector<ObjHandle> args;
            for (const auto& p : as_parts(x)) args.push_back(p.h);
            return MorVal::one(o.d2_component(e->gen, args));
        }
        case TExpr::Kind::Inv: {
            MorVal m = eval_rec(o, e->children[0], x);
            if (m.is_tuple) throw OracleError("cannot invert a tuple morphism");
            return MorVal::one(o.invert(m.h));
        }
        case TExpr::Kind::Vc: {
            MorVal acc = eval_rec(o, e->children[0], x);
            for (std::size_t i = 1; i < e->children.size(); ++i) {
                MorVal next = eval_rec(o, e->children[i], x);
                if (acc.is_tuple || next.is_tuple)
                    throw OracleError("vertical composite of tuple morphisms");
                acc = MorVal::one(o.compose(acc.h, next.h));
            }
            return acc;
        }
        case TExpr::Kind::Wl: {
            MorVal inner = eval_rec(o, e->children[0], x);
            return apply_mor_env(o, e->fun, inner);
        }
        case TExpr::Kind::Wr: {
            ObjVal y = apply_obj_env(o, e->fun, x);
            return eval_rec(o, e->children[0], y);
        }
        case TExpr::Kind::IdT: {
            ObjVal y = apply_obj_env(o, e->fun, x);
            if (y.is_tuple) throw OracleError("identity of a tuple object");
            return MorVal::one(o.identity(y.h));
        }
        case TExpr::Kind::Pair: {
            std::vector<MorVal> parts;
            for (const auto& c : e->children) parts.push_back(eval_rec(o, c, x));
            return MorVal::tup(std::move(parts));
        }
    }
    throw OracleError("bad transformation expression");
}

}  // namespace

ObjVal apply_functor_obj(const InstanceOracle& o, const FExprPtr& f, const ObjVal& x) {
    return apply_obj_env(o, f, x);
}

MorVal apply_functor_mor(const InstanceOracle& o, const FExprPtr& f, const MorVal& x) {
    return apply_mor_env(o, f, x);
}

MorHandle evaluate(const InstanceOracle& o, const TExprPtr& e, const ObjVal& probe) {
    MorVal v = eval_rec(o, e, probe);
    if (v.is_tuple) throw OracleError("expression evaluates to a tuple, not a morphism");
    return v.h;
}

std::vector<ObjVal> enumerate_probes(const InstanceOracle& o, const Dom& dom, std::size_t cap) {
    std::vector<ObjVal> out;
    if (dom.arity() == 0) return out;
    // anchor of x at level la down to level l: apply t (la - l) times / s likewise
    auto down_t = [&](ObjHandle x, int steps) {
        for (int i = 0; i < steps; ++i) x = o.tgt(x);
        return x;
    };
    auto down_s = [&](ObjHandle x, int steps) {
        for (int i = 0; i < steps; ++i) x = o.src(x);
        return x;
    };
    std::vector<std::vector<ObjHandle>> pools;
    for (int lv : dom.levels) pools.push_back(o.probe_objects(lv));
    std::vector<ObjHandle> cur(dom.arity());
    std::vector<ObjVal> result;
    // depth-first product with link filtering; deterministic order
    std::vector<std::size_t> idx(dom.arity(), 0);
    std::size_t depth = 0;
    while (true) {
        if (result.size() >= cap) break;
        if (idx[depth] >= pools[depth].size()) {
            if (depth == 0) break;
            idx[depth] = 0;
            --depth;
            ++idx[depth];
            continue;
        }
        cur[depth] = pools[depth][idx[depth]];
        bool ok = true;
        if (depth > 0) {
            int link = dom.links[depth - 1];
            ObjHandle left = down_t(cur[depth - 1], dom.levels[depth - 1] - link);
            ObjHandle right = down_s(cur[depth], dom.levels[depth] - link);
            ok = left == right;
        }
        if (!ok) {
            ++idx[depth];
            continue;
        }
        if (depth + 1 == dom.arity()) {
            std::vector<ObjVal> parts;
            for (auto& h : cur) parts.push_back(ObjVal::one(h));
            result.push_back(dom.arity() == 1 ? parts[0] : ObjVal::tup(std::move(parts)));
            ++idx[depth];
        } else {
            ++depth;
            idx[depth] = 0;
        }
    }
    return result;
}

// --- printers ------------------------------------------------------------------

std::string fexpr_str(const FExprPtr& f) {
    switch (f->kind) {
        case FExpr::Kind::Id: return "id";
        case FExpr::Kind::S: return "s";
        case FExpr::Kind::T: return "t";
        case FExpr::Kind::D1: return "(d1 " + d1_name(f->d1) + ")";
        case FExpr::Kind::Proj: return "(p " + std::to_string(f->proj) + ")";
        case FExpr::Kind::Comp: {
            std::string s = "(of";
            for (const auto& c : f->children) s += " " + fexpr_str(c);
            return s + ")";
        }
        case FExpr::Kind::Tuple: {
            std::string s = "(tup";
            for (const auto& c : f->children) s += " " + fexpr_str(c);
            return s + ")";
        }
    }
    return "?";
}

std::string texpr_str(const TExprPtr& e) {
    switch (e->kind) {
        case TExpr::Kind::Gen: return "(gen " + d2_name(e->gen) + ")";
        case TExpr::Kind::Inv: return "(inv " + texpr_str(e->children[0]) + ")";
        case TExpr::Kind::Vc: {
            std::string s = "(vc";
            for (const auto& c : e->children) s += " " + texpr_str(c);
            return s + ")";
        }
        case TExpr::Kind::Wl: return "(wl " + fexpr_str(e->fun) + " " + texpr_str(e->children[0]) + ")";
        case TExpr::Kind::Wr: return "(wr " + texpr_str(e->children[0]) + " " + fexpr_str(e->fun) + ")";
        case TExpr::Kind::IdT: return "(id " + fexpr_str(e->fun) + ")";
        case TExpr::Kind::Pair: {
            std::string s = "(pair";
            for (const auto& c : e->children) s += " " + texpr_str(c);
            return s + ")";
        }
    }
    return "?";
}

// --- s-expression parsing --------------------------------------------------------

namespace {

struct SNode {
    bool atom = false;
    std::string text;
    std::vector<SNode> children;
    std::size_t pos = 0;
};

struct SReader {
    const std::string& src;
    std::size_t i = 0;

    void skip() {
        while (i < src.size()) {
            if (std::isspace(static_cast<unsigned char>(src[i]))) {
                ++i;
            } else if (src[i] == ';') {
                while (i < src.size() && src[i] != '\n') ++i;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip();
        return i >= src.size();
    }

    SNode read() {
        skip();
        if (i >= src.size()) throw ParseError("unexpected end of input", i);
        SNode n;
        n.pos = i;
        if (src[i] == '(') {
            ++i;
            while (true) {
                skip();
                if (i >= src.size()) throw ParseError("unclosed parenthesis", n.pos);
                if (src[i] == ')') {
                    ++i;
                    break;
                }
                n.children.push_back(read());
            }
            return n;
        }
        if (src[i] == ')') throw ParseError("unexpected ')'", i);
        if (src[i] == '"') {
            ++i;
            n.atom = true;
            while (i < src.size() && src[i] != '"') n.text += src[i++];
            if (i >= src.size()) throw ParseError("unclosed string", n.pos);
            ++i;
            return n;
        }
        n.atom = true;
        while (i < src.size() && !std::isspace(static_cast<unsigned char>(src[i])) &&
               src[i] != '(' && src[i] != ')')
            n.text += src[i++];
        return n;
    }
};

[[noreturn]] void bad(const SNode& n, const std::string& msg) { throw ParseError(msg, n.pos); }

FExprPtr parse_fexpr(const SNode& n) {
    if (n.atom) {
        if (n.text == "id") return f_id();
        if (n.text == "s") return f_s();
        if (n.text == "t") return f_t();
        bad(n, "unknown functor atom '" + n.text + "'");
    }
    if (n.children.empty() || !n.children[0].atom) bad(n, "expected functor form");
    const std::string& head = n.children[0].text;
    if (head == "d1") {
        if (n.children.size() != 2 || !n.children[1].atom) bad(n, "(d1 NAME)");
        auto k = d1_from_name(n.children[1].text);
        if (!k) bad(n, "unknown structure functor '" + n.children[1].text + "'");
        return f_d1(*k);
    }
    if (head == "p") {
        if (n.children.size() != 2 || !n.children[1].atom) bad(n, "(p K)");
        return f_proj(std::stoi(n.children[1].text));
    }
    if (head == "of") {
        std::vector<FExprPtr> fs;
        for (std::size_t i = 1; i < n.children.size(); ++i) fs.push_back(parse_fexpr(n.children[i]));
        if (fs.empty()) bad(n, "(of ...) needs arguments");
        return f_of(std::move(fs));
    }
    if (head == "tup") {
        std::vector<FExprPtr> fs;
        for (std::size_t i = 1; i < n.children.size(); ++i) fs.push_back(parse_fexpr(n.children[i]));
        if (fs.empty()) bad(n, "(tup ...) needs arguments");
        return f_tup(std::move(fs));
    }
    bad(n, "unknown functor form '" + head + "'");
}

TExprPtr parse_texpr(const SNode& n) {
    if (n.atom || n.children.empty() || !n.children[0].atom) bad(n, "expected transformation form");
    const std::string& head = n.children[0].text;
    if (head == "gen") {
        if (n.children.size() != 2 || !n.children[1].atom) bad(n, "(gen D2-k)");
        auto k = d2_from_name(n.children[1].text);
        if (!k) bad(n, "unknown generator '" + n.children[1].text + "'");
        return t_gen(*k);
    }
    if (head == "inv") {
        if (n.children.size() != 2) bad(n, "(inv e)");
        return t_inv(parse_texpr(n.children[1]));
    }
    if (head == "vc") {
        std::vector<TExprPtr> es;
        for (std::size_t i = 1; i < n.children.size(); ++i) es.push_back(parse_texpr(n.children[i]));
        if (es.size() < 2) bad(n, "(vc e e ...) needs at least two arguments");
        return t_vc(std::move(es));
    }
    if (head == "wl") {
        if (n.children.size() != 3) bad(n, "(wl f e)");
        return t_wl(parse_fexpr(n.children[1]), parse_texpr(n.children[2]));
    }
    if (head == "wr") {
        if (n.children.size() != 3) bad(n, "(wr e f)");
        return t_wr(parse_texpr(n.children[1]), parse_fexpr(n.children[2]));
    }
    if (head == "id") {
        if (n.children.size() != 2) bad(n, "(id f)");
        return t_id(parse_fexpr(n.children[1]));
    }
    if (head == "pair") {
        std::vector<TExprPtr> es;
        for (std::size_t i = 1; i < n.children.size(); ++i) es.push_back(parse_texpr(n.children[i]));
        if (es.size() < 2) bad(n, "(pair e e ...) needs at least two arguments");
        return t_pair(std::move(es));
    }
    bad(n, "unknown transformation form '" + head + "'");
}

Dom parse_dom(const SNode& n) {
    if (n.atom || n.children.size() != 3 || n.children[0].text != "dom")
        bad(n, "(dom (levels...) (links...))");
    Dom d;
    for (const auto& c : n.children[1].children) {
        if (!c.atom) bad(c, "level must be an integer");
        d.levels.push_back(std::stoi(c.text));
    }
    for (const auto& c : n.children[2].children) {
        if (!c.atom) bad(c, "link must be an integer");
        d.links.push_back(std::stoi(c.text));
    }
    if (d.levels.empty()) bad(n, "domain needs at least one component");
    if (d.links.size() + 1 != d.levels.size()) bad(n, "domain needs one link per adjacent pair");
    return d;
}

}  // namespace

std::vector<AxiomDef> parse_axioms(const std::string& text) {
    SReader reader{text};
    std::vector<AxiomDef> out;
    while (!reader.eof()) {
        SNode n = reader.read();
        if (n.atom || n.children.empty() || n.children[0].text != "eq")
            throw ParseError("expected (eq ID (dom ...) LHS RHS :cite \"...\")", n.pos);
        if (n.children.size() < 5) throw ParseError("eq form too short", n.pos);
        AxiomDef ax;
        if (!n.children[1].atom) throw ParseError("axiom id must be an atom", n.pos);
        ax.id = n.children[1].text;
        ax.dom = parse_dom(n.children[2]);
        ax.lhs = parse_texpr(n.children[3]);
        ax.rhs = parse_texpr(n.children[4]);
        for (std::size_t i = 5; i + 1 < n.children.size(); i += 2) {
            if (n.children[i].atom && n.children[i].text == ":cite" && n.children[i + 1].atom)
                ax.cite = n.children[i + 1].text;
        }
        // type check: both sides singleton with identical endpoints
        TType lt = type_texpr(ax.lhs, ax.dom);
        TType rt = type_texpr(ax.rhs, ax.dom);
        if (lt.src.size() != 1 || lt.dst.size() != 1)
            throw ParseError("axiom " + ax.id + ": lhs endpoints are not a single functor", n.pos);
        if (rt.src.size() != 1 || rt.dst.size() != 1)
            throw ParseError("axiom " + ax.id + ": rhs endpoints are not a single functor", n.pos);
        if (!(lt.src[0] == rt.src[0]))
            throw ParseError("axiom " + ax.id + ": source mismatch: " + lt.src[0].str() + " vs " +
                                 rt.src[0].str(),
                             n.pos);
        if (!(lt.dst[0] == rt.dst[0]))
            throw ParseError("axiom " + ax.id + ": target mismatch: " + lt.dst[0].str() + " vs " +
                                 rt.dst[0].str(),
                             n.pos);
        ax.src = lt.src[0];
        ax.dst = lt.dst[0];
        ax.cell_level = ax.src.level(ax.dom);
        out.push_back(std::move(ax));
    }
    return out;
}

const std::vector<AxiomDef>& default_axioms() {
    static const std::vector<AxiomDef>* axs =
        new std::vector<AxiomDef>(parse_axioms(default_axiom_text()));
    return *axs;
}

}  // namespace dicat
