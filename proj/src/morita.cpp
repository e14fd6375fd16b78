#include "dicat/morita.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace dicat {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9E3779B97f4A7C15ull + (a << 6) + (a >> 2);
    return a;
}

}  // namespace

Algebra make_block_algebra(const std::vector<std::size_t>& sizes, const std::string& label) {
    Algebra a;
    a.label = label;
    a.block_sizes = sizes;
    std::size_t dim = 0;
    for (auto n : sizes) dim += n * n;
    a.space = {dim, label};
    a.mult = CMatrix(dim, dim * dim);
    a.unit = CMatrix(dim, 1);
    // basis e_{b,i,j}; e_{bij} e_{b'kl} = delta_{bb'} delta_{jk} e_{bil}
    std::vector<std::size_t> offset(sizes.size() + 1, 0);
    for (std::size_t b = 0; b < sizes.size(); ++b) offset[b + 1] = offset[b] + sizes[b] * sizes[b];
    auto idx = [&](std::size_t b, std::size_t i, std::size_t j) {
        return offset[b] + i * sizes[b] + j;
    };
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        const std::size_t n = sizes[b];
        for (std::size_t i = 0; i < n; ++i) {
            a.unit.at(idx(b, i, i), 0) = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t l = 0; l < n; ++l)
                    a.mult.at(idx(b, i, l), idx(b, i, j) * dim + idx(b, j, l)) = 1.0;
        }
    }
    a.block_iso = CMatrix::identity(dim);
    return a;
}

ValidationReportLite validate_algebra(const Algebra& a, double tol) {
    ValidationReportLite rep;
    const std::size_t d = a.dim();
    auto note = [&](const std::string& what, double res) {
        rep.max_residual = std::max(rep.max_residual, res);
        if (res > tol) {
            rep.ok = false;
            rep.violations.push_back(what + " residual " + std::to_string(res));
        }
    };
    if (!a.mult.finite() || !a.unit.finite()) {
        rep.ok = false;
        rep.violations.push_back("non-finite entries");
        return rep;
    }
    CMatrix id = CMatrix::identity(d);
    note("associativity",
         approx_eq(a.mult * kron(a.mult, id), a.mult * kron(id, a.mult), tol).residual);
    note("left unit", approx_eq(a.mult * kron(a.unit, id), id, tol).residual);
    note("right unit", approx_eq(a.mult * kron(id, a.unit), id, tol).residual);
    std::size_t bd = 0;
    for (auto n : a.block_sizes) bd += n * n;
    if (bd != d) {
        rep.ok = false;
        rep.violations.push_back("block sizes do not match dimension");
        return rep;
    }
    Algebra blocks = make_block_algebra(a.block_sizes, a.label + "#blocks");
    note("block iso multiplicativity",
         approx_eq(a.block_iso * a.mult, blocks.mult * kron(a.block_iso, a.block_iso), tol)
             .residual);
    note("block iso unit", approx_eq(a.block_iso * a.unit, blocks.unit, tol).residual);
    try {
        inverse(a.block_iso, tol);
    } catch (const LinalgError&) {
        rep.ok = false;
        rep.violations.push_back("block iso not invertible");
    }
    return rep;
}

ValidationReportLite validate_bimodule(const Bimodule& b, const Algebra& left,
                                       const Algebra& right, double tol) {
    ValidationReportLite rep;
    const std::size_t m = b.dim(), da = left.dim(), db = right.dim();
    auto note = [&](const std::string& what, double res) {
        rep.max_residual = std::max(rep.max_residual, res);
        if (res > tol) {
            rep.ok = false;
            rep.violations.push_back(what + " residual " + std::to_string(res));
        }
    };
    if (m == 0) return rep;  // the zero bimodule is vacuously fine
    CMatrix im = CMatrix::identity(m);
    note("left action associativity",
         approx_eq(b.left_action * kron(left.mult, im),
                   b.left_action * kron(CMatrix::identity(da), b.left_action), tol)
             .residual);
    note("left unit action", approx_eq(b.left_action * kron(left.unit, im), im, tol).residual);
    note("right action associativity",
         approx_eq(b.right_action * kron(im, right.mult),
                   b.right_action * kron(b.right_action, CMatrix::identity(db)), tol)
             .residual);
    note("right unit action", approx_eq(b.right_action * kron(im, right.unit), im, tol).residual);
    note("actions commute",
         approx_eq(b.right_action * kron(b.left_action, CMatrix::identity(db)),
                   b.left_action * kron(CMatrix::identity(da), b.right_action), tol)
             .residual);
    return rep;
}

// --- oracle internals ---------------------------------------------------------

namespace {

using AlgIso = MoritaOracle::AlgIsoRec;
using BimIso = MoritaOracle::BimIsoRec;
using SectorMor = MoritaOracle::SectorMorRec;
using Key = std::vector<std::int64_t>;

enum Tag : std::int64_t {
    TAG_I = 1,
    TAG_M,
    TAG_IV,
    TAG_MV,
    TAG_WR,
    TAG_WL,
    TAG_IL,
    TAG_IR,
    TAG_ILL,
    TAG_IRL,
    TAG_ID_MOR,
    TAG_COMPOSE,
    TAG_INVERT,
    TAG_D2,
    TAG_WITNESS,
    TAG_D1MOR,
    TAG_TRANSPORT1,
    TAG_TRANSPORT2,
    TAG_MUTATE,
    TAG_USER,
};

std::int64_t tag_of(D1Key k) {
    switch (k) {
        case D1Key::I: return TAG_I;
        case D1Key::M: return TAG_M;
        case D1Key::IV: return TAG_IV;
        case D1Key::MV: return TAG_MV;
        case D1Key::WR: return TAG_WR;
        case D1Key::WL: return TAG_WL;
        case D1Key::IL: return TAG_IL;
        case D1Key::IR: return TAG_IR;
        case D1Key::ILL: return TAG_ILL;
        case D1Key::IRL: return TAG_IRL;
    }
    return 0;
}

}  // namespace

struct MoritaOracle::Impl {
    std::deque<Algebra> algebras;
    std::deque<Bimodule> bimodules;
    std::deque<BimoduleMap> maps;
    std::deque<std::string> map_labels;
    std::deque<AlgIso> alg_isos;
    std::deque<BimIso> bim_isos;
    std::deque<SectorMor> sector_mors;
    std::vector<ObjHandle> probes[3];
    std::vector<MorHandle> probe_mors[3];
    std::map<Key, std::int64_t> obj_memo;
    std::map<Key, std::int64_t> mor_memo;
    std::map<std::pair<std::int64_t, std::int64_t>, FusionResult> fusions;
    mutable std::recursive_mutex mu;
};

#define MORITA_LOCK std::lock_guard<std::recursive_mutex> lock(impl_->mu)

MoritaOracle::MoritaOracle(MoritaConfig cfg) : impl_(new Impl), cfg_(cfg) {}

MoritaOracle::~MoritaOracle() = default;

std::string MoritaOracle::name() const {
    return cfg_.scramble ? "morita(scrambled,seed=" + std::to_string(cfg_.seed) + ")" : "morita";
}

const Algebra& MoritaOracle::algebra(std::int64_t id) const {
    MORITA_LOCK;
    return impl_->algebras.at(id);
}
const Bimodule& MoritaOracle::bimodule(std::int64_t id) const {
    MORITA_LOCK;
    return impl_->bimodules.at(id);
}
const BimoduleMap& MoritaOracle::bim_map(std::int64_t id) const {
    MORITA_LOCK;
    return impl_->maps.at(id);
}

ObjHandle MoritaOracle::add_algebra(Algebra a) {
    auto rep = validate_algebra(a, cfg_.tol);
    if (!rep.ok) throw OracleError("invalid algebra " + a.label + ": " + rep.violations.front());
    MORITA_LOCK;
    impl_->algebras.push_back(std::move(a));
    ObjHandle h{0, static_cast<std::int64_t>(impl_->algebras.size() - 1)};
    impl_->probes[0].push_back(h);
    return h;
}

ObjHandle MoritaOracle::add_bimodule(Bimodule b) {
    MORITA_LOCK;
    auto rep = validate_bimodule(b, impl_->algebras.at(b.left_algebra),
                                 impl_->algebras.at(b.right_algebra), cfg_.tol);
    if (!rep.ok) throw OracleError("invalid bimodule " + b.label + ": " + rep.violations.front());
    impl_->bimodules.push_back(std::move(b));
    ObjHandle h{1, static_cast<std::int64_t>(impl_->bimodules.size() - 1)};
    impl_->probes[1].push_back(h);
    return h;
}

namespace {

double intertwiner_residual(const Bimodule& src, const Bimodule& tgt, const CMatrix& f) {
    if (src.dim() == 0 || tgt.dim() == 0) return 0.0;
    const std::size_t da = src.left_action.cols() / src.dim();
    const std::size_t db = src.right_action.cols() / src.dim();
    double r = approx_eq(f * src.left_action,
                         tgt.left_action * kron(CMatrix::identity(da), f), 1.0)
                   .residual;
    r = std::max(r, approx_eq(f * src.right_action,
                              tgt.right_action * kron(f, CMatrix::identity(db)), 1.0)
                        .residual);
    return r;
}

}  // namespace

ObjHandle MoritaOracle::add_map(BimoduleMap m, bool probe) {
    MORITA_LOCK;
    const Bimodule& src = impl_->bimodules.at(m.source);
    const Bimodule& tgt = impl_->bimodules.at(m.target);
    if (src.left_algebra != tgt.left_algebra || src.right_algebra != tgt.right_algebra)
        throw OracleError("intertwiner endpoints over different algebras");
    if (m.matrix.rows() != tgt.dim() || m.matrix.cols() != src.dim())
        throw OracleError("intertwiner matrix shape mismatch");
    double res = intertwiner_residual(src, tgt, m.matrix);
    if (res > cfg_.tol)
        throw OracleError("matrix is not an intertwiner, residual " + std::to_string(res));
    impl_->maps.push_back(std::move(m));
    impl_->map_labels.push_back("cell" + std::to_string(impl_->maps.size() - 1));
    ObjHandle h{2, static_cast<std::int64_t>(impl_->maps.size() - 1)};
    if (probe) impl_->probes[2].push_back(h);
    return h;
}

MorHandle MoritaOracle::add_alg_iso(std::int64_t src, std::int64_t tgt, CMatrix m, bool probe) {
    MORITA_LOCK;
    const Algebra& A = impl_->algebras.at(src);
    const Algebra& B = impl_->algebras.at(tgt);
    double r1 = approx_eq(m * A.mult, B.mult * kron(m, m), cfg_.tol).residual;
    double r2 = approx_eq(m * A.unit, B.unit, cfg_.tol).residual;
    if (r1 > cfg_.tol || r2 > cfg_.tol) throw OracleError("not an algebra homomorphism");
    inverse(m, cfg_.tol);  // throws when singular
    impl_->alg_isos.push_back({src, tgt, std::move(m)});
    MorHandle h{0, static_cast<std::int64_t>(impl_->alg_isos.size() - 1)};
    if (probe) impl_->probe_mors[0].push_back(h);
    return h;
}

MorHandle MoritaOracle::add_bim_iso(std::int64_t src, std::int64_t tgt, MorHandle a, MorHandle b,
                                    CMatrix m, bool probe) {
    MORITA_LOCK;
    const Bimodule& S = impl_->bimodules.at(src);
    const Bimodule& T = impl_->bimodules.at(tgt);
    const AlgIso& am = impl_->alg_isos.at(a.id);
    const AlgIso& bm = impl_->alg_isos.at(b.id);
    if (am.src != S.left_algebra || am.tgt != T.left_algebra)
        throw OracleError("bim iso: left algebra morphism endpoints");
    if (bm.src != S.right_algebra || bm.tgt != T.right_algebra)
        throw OracleError("bim iso: right algebra morphism endpoints");
    if (S.dim() > 0 && T.dim() > 0) {
        double rl =
            approx_eq(m * S.left_action, T.left_action * kron(am.matrix, m), cfg_.tol).residual;
        double rr =
            approx_eq(m * S.right_action, T.right_action * kron(m, bm.matrix), cfg_.tol).residual;
        if (rl > cfg_.tol || rr > cfg_.tol) throw OracleError("not an equivariant map");
    }
    impl_->bim_isos.push_back({src, tgt, a.id, b.id, std::move(m)});
    MorHandle h{1, static_cast<std::int64_t>(impl_->bim_isos.size() - 1)};
    if (probe) impl_->probe_mors[1].push_back(h);
    return h;
}

std::vector<ObjHandle> MoritaOracle::probe_objects(int level) const {
    MORITA_LOCK;
    return impl_->probes[level];
}

std::vector<MorHandle> MoritaOracle::probe_morphisms(int level) const {
    MORITA_LOCK;
    return impl_->probe_mors[level];
}

std::vector<ObjHandle> MoritaOracle::algebra_handles() const {
    MORITA_LOCK;
    return impl_->probes[0];
}

ObjHandle MoritaOracle::src(ObjHandle x) const {
    MORITA_LOCK;
    if (x.level == 1) return {0, impl_->bimodules.at(x.id).left_algebra};
    if (x.level == 2) return {1, impl_->maps.at(x.id).source};
    throw OracleError("src on a 0-cell");
}

ObjHandle MoritaOracle::tgt(ObjHandle x) const {
    MORITA_LOCK;
    if (x.level == 1) return {0, impl_->bimodules.at(x.id).right_algebra};
    if (x.level == 2) return {1, impl_->maps.at(x.id).target};
    throw OracleError("tgt on a 0-cell");
}

MorHandle MoritaOracle::src_mor(MorHandle f) const {
    MORITA_LOCK;
    if (f.level == 1) return {0, impl_->bim_isos.at(f.id).a};
    if (f.level == 2) return {1, impl_->sector_mors.at(f.id).d};
    throw OracleError("src_mor on a 0-level morphism");
}

MorHandle MoritaOracle::tgt_mor(MorHandle f) const {
    MORITA_LOCK;
    if (f.level == 1) return {0, impl_->bim_isos.at(f.id).b};
    if (f.level == 2) return {1, impl_->sector_mors.at(f.id).e};
    throw OracleError("tgt_mor on a 0-level morphism");
}

ObjHandle MoritaOracle::mor_source(MorHandle f) const {
    MORITA_LOCK;
    if (f.level == 0) return {0, impl_->alg_isos.at(f.id).src};
    if (f.level == 1) return {1, impl_->bim_isos.at(f.id).src};
    return {2, impl_->sector_mors.at(f.id).src};
}

ObjHandle MoritaOracle::mor_target(MorHandle f) const {
    MORITA_LOCK;
    if (f.level == 0) return {0, impl_->alg_isos.at(f.id).tgt};
    if (f.level == 1) return {1, impl_->bim_isos.at(f.id).tgt};
    return {2, impl_->sector_mors.at(f.id).tgt};
}

FusionResult MoritaOracle::rel_tensor(const Bimodule& m, const Bimodule& n,
                                      std::uint64_t scramble_key) const {
    if (m.right_algebra != n.left_algebra)
        throw OracleError("rel_tensor: middle algebras differ");
    MORITA_LOCK;
    const Algebra& B = impl_->algebras.at(m.right_algebra);
    const std::size_t dm = m.dim(), dn = n.dim(), db = B.dim();
    const std::size_t amb = dm * dn;
    if (amb > cfg_.dim_cap * cfg_.dim_cap)
        throw OracleError("dimension cap exceeded fusing " + m.label + " with " + n.label);
    CMatrix rel(amb, dm * db * dn);
    for (std::size_t i = 0; i < dm; ++i)
        for (std::size_t k = 0; k < db; ++k)
            for (std::size_t j = 0; j < dn; ++j) {
                const std::size_t col = (i * db + k) * dn + j;
                for (std::size_t r = 0; r < dm; ++r) {
                    cplx c = m.right_action.at(r, i * db + k);
                    if (c != cplx(0.0, 0.0)) rel.at(r * dn + j, col) += c;
                }
                for (std::size_t r = 0; r < dn; ++r) {
                    cplx c = n.left_action.at(r, k * dn + j);
                    if (c != cplx(0.0, 0.0)) rel.at(i * dn + r, col) -= c;
                }
            }
    QuotientPresentation q = quotient(amb, rel, cfg_.tol);
    if (cfg_.scramble && q.quotient_dim() > 0) {
        Rng rng(mix(mix(cfg_.seed, scramble_key), 0xD1CA7ull));
        CMatrix g = random_invertible(rng, q.quotient_dim());
        q.projection = g * q.projection;
        q.section = q.section * inverse(g, cfg_.tol);
    }
    FusionResult out;
    out.presentation = q;
    Bimodule& f = out.bimodule;
    f.left_algebra = m.left_algebra;
    f.right_algebra = n.right_algebra;
    f.space = {q.quotient_dim(), ""};
    const Algebra& A = impl_->algebras.at(m.left_algebra);
    const Algebra& C = impl_->algebras.at(n.right_algebra);
    if (q.quotient_dim() == 0 || amb == 0) {
        f.left_action = CMatrix(q.quotient_dim(), A.dim() * q.quotient_dim());
        f.right_action = CMatrix(q.quotient_dim(), q.quotient_dim() * C.dim());
        return out;
    }
    f.left_action = q.projection * kron(m.left_action, CMatrix::identity(dn)) *
                    kron(CMatrix::identity(A.dim()), q.section);
    f.right_action = q.projection * kron(CMatrix::identity(dm), n.right_action) *
                     kron(q.section, CMatrix::identity(C.dim()));
    return out;
}

const FusionResult& MoritaOracle::fusion(ObjHandle left, ObjHandle right) const {
    MORITA_LOCK;
    auto key = std::make_pair(left.id, right.id);
    auto it = impl_->fusions.find(key);
    if (it != impl_->fusions.end()) return it->second;
    const Bimodule& m = impl_->bimodules.at(left.id);
    const Bimodule& n = impl_->bimodules.at(right.id);
    FusionResult fr = rel_tensor(
        m, n,
        mix(static_cast<std::uint64_t>(left.id) + 1, static_cast<std::uint64_t>(right.id) + 0x51ull));
    fr.bimodule.label = "m(" + m.label + "," + n.label + ")";
    fr.bimodule.space.label = fr.bimodule.label;
    return impl_->fusions.emplace(key, std::move(fr)).first->second;
}

ObjHandle MoritaOracle::intern_map(const std::vector<std::int64_t>& key, BimoduleMap m,
                                   const std::string& label) const {
    MORITA_LOCK;
    auto it = impl_->obj_memo.find(key);
    if (it != impl_->obj_memo.end()) return {2, it->second};
    impl_->maps.push_back(std::move(m));
    impl_->map_labels.push_back(label);
    std::int64_t id = static_cast<std::int64_t>(impl_->maps.size() - 1);
    impl_->obj_memo[key] = id;
    return {2, id};
}

ObjHandle MoritaOracle::apply_d1(D1Key k, std::span<const ObjHandle> args) const {
    MORITA_LOCK;
    Key key;
    key.push_back(tag_of(k));
    for (auto& a : args) key.push_back(a.id);
    {
        auto it = impl_->obj_memo.find(key);
        if (it != impl_->obj_memo.end())
            return {(k == D1Key::I || k == D1Key::M) ? 1 : 2, it->second};
    }
    switch (k) {
        case D1Key::I: {
            const Algebra& A = impl_->algebras.at(args[0].id);
            Bimodule b;
            b.label = "i(" + A.label + ")";
            b.left_algebra = args[0].id;
            b.right_algebra = args[0].id;
            b.space = {A.dim(), b.label};
            b.left_action = A.mult;
            b.right_action = A.mult;
            impl_->bimodules.push_back(std::move(b));
            std::int64_t id = static_cast<std::int64_t>(impl_->bimodules.size() - 1);
            impl_->obj_memo[key] = id;
            return {1, id};
        }
        case D1Key::M: {
            const FusionResult& fr = fusion(args[0], args[1]);
            impl_->bimodules.push_back(fr.bimodule);
            std::int64_t id = static_cast<std::int64_t>(impl_->bimodules.size() - 1);
            impl_->obj_memo[key] = id;
            return {1, id};
        }
        case D1Key::IV: {
            const Bimodule& d = impl_->bimodules.at(args[0].id);
            BimoduleMap m{args[0].id, args[0].id, CMatrix::identity(d.dim())};
            return intern_map(key, std::move(m), "iv(" + d.label + ")");
        }
        case D1Key::MV: {
            const BimoduleMap& f = impl_->maps.at(args[0].id);
            const BimoduleMap& g = impl_->maps.at(args[1].id);
            if (f.target != g.source) throw OracleError("m_v: cells not composable");
            BimoduleMap m{f.source, g.target, g.matrix * f.matrix};
            return intern_map(key, std::move(m), "mv");
        }
        case D1Key::WR: {
            const BimoduleMap f = impl_->maps.at(args[0].id);
            ObjHandle sb{1, f.source}, tb{1, f.target};
            ObjHandle so = apply_d1(D1Key::M, std::vector<ObjHandle>{sb, args[1]});
            ObjHandle to = apply_d1(D1Key::M, std::vector<ObjHandle>{tb, args[1]});
            const FusionResult& fs = fusion(sb, args[1]);
            const FusionResult& ft = fusion(tb, args[1]);
            const std::size_t de = impl_->bimodules.at(args[1].id).dim();
            CMatrix mat = ft.presentation.projection * kron(f.matrix, CMatrix::identity(de)) *
                          fs.presentation.section;
            BimoduleMap m{so.id, to.id, std::move(mat)};
            return intern_map(key, std::move(m), "wr");
        }
        case D1Key::WL: {
            const BimoduleMap f = impl_->maps.at(args[1].id);
            ObjHandle sb{1, f.source}, tb{1, f.target};
            ObjHandle so = apply_d1(D1Key::M, std::vector<ObjHandle>{args[0], sb});
            ObjHandle to = apply_d1(D1Key::M, std::vector<ObjHandle>{args[0], tb});
            const FusionResult& fs = fusion(args[0], sb);
            const FusionResult& ft = fusion(args[0], tb);
            const std::size_t dd = impl_->bimodules.at(args[0].id).dim();
            CMatrix mat = ft.presentation.projection * kron(CMatrix::identity(dd), f.matrix) *
                          fs.presentation.section;
            BimoduleMap m{so.id, to.id, std::move(mat)};
            return intern_map(key, std::move(m), "wl");
        }
        case D1Key::IL: {
            const Bimodule d = impl_->bimodules.at(args[0].id);
            ObjHandle ia = apply_d1(D1Key::I, std::vector<ObjHandle>{ObjHandle{0, d.left_algebra}});
            ObjHandle so = apply_d1(D1Key::M, std::vector<ObjHandle>{ia, args[0]});
            const FusionResult& fr = fusion(ia, args[0]);
            CMatrix mat = d.dim() == 0
                              ? CMatrix(0, fr.presentation.quotient_dim())
                              : d.left_action * fr.presentation.section;
            BimoduleMap m{so.id, args[0].id, std::move(mat)};
            return intern_map(key, std::move(m), "il(" + d.label + ")");
        }
        case D1Key::IR: {
            const Bimodule d = impl_->bimodules.at(args[0].id);
            ObjHandle ib =
                apply_d1(D1Key::I, std::vector<ObjHandle>{ObjHandle{0, d.right_algebra}});
            ObjHandle so = apply_d1(D1Key::M, std::vector<ObjHandle>{args[0], ib});
            const FusionResult& fr = fusion(args[0], ib);
            CMatrix mat = d.dim() == 0
                              ? CMatrix(0, fr.presentation.quotient_dim())
                              : d.right_action * fr.presentation.section;
            BimoduleMap m{so.id, args[0].id, std::move(mat)};
            return intern_map(key, std::move(m), "ir(" + d.label + ")");
        }
        case D1Key::ILL: {
            ObjHandle up = apply_d1(D1Key::IL, args);
            const BimoduleMap u = impl_->maps.at(up.id);
            CMatrix inv_m = u.matrix.rows() == 0 ? CMatrix(u.matrix.cols(), u.matrix.rows())
                                                 : inverse(u.matrix, cfg_.tol);
            BimoduleMap m{u.target, u.source, std::move(inv_m)};
            return intern_map(key, std::move(m), "il-");
        }
        case D1Key::IRL: {
            ObjHandle up = apply_d1(D1Key::IR, args);
            const BimoduleMap u = impl_->maps.at(up.id);
            CMatrix inv_m = u.matrix.rows() == 0 ? CMatrix(u.matrix.cols(), u.matrix.rows())
                                                 : inverse(u.matrix, cfg_.tol);
            BimoduleMap m{u.target, u.source, std::move(inv_m)};
            return intern_map(key, std::move(m), "ir-");
        }
    }
    throw OracleError("apply_d1: bad functor");
}

MorHandle MoritaOracle::intern_bim_iso(const std::vector<std::int64_t>& key, BimIsoRec b) const {
    MORITA_LOCK;
    auto it = impl_->mor_memo.find(key);
    if (it != impl_->mor_memo.end()) return {1, it->second};
    impl_->bim_isos.push_back(std::move(b));
    std::int64_t id = static_cast<std::int64_t>(impl_->bim_isos.size() - 1);
    impl_->mor_memo[key] = id;
    return {1, id};
}

MorHandle MoritaOracle::intern_sector(const std::vector<std::int64_t>& key, SectorMorRec s) const {
    MORITA_LOCK;
    auto it = impl_->mor_memo.find(key);
    if (it != impl_->mor_memo.end()) return {2, it->second};
    // commuting square: target cell . delta == eps . source cell
    const BimoduleMap& X = impl_->maps.at(s.src);
    const BimoduleMap& Y = impl_->maps.at(s.tgt);
    const BimIso& delta = impl_->bim_isos.at(s.d);
    const BimIso& eps = impl_->bim_isos.at(s.e);
    if (X.matrix.rows() * delta.matrix.cols() > 0 || Y.matrix.rows() * X.matrix.cols() > 0) {
        CMatrix lhs = Y.matrix * delta.matrix;
        CMatrix rhs = eps.matrix * X.matrix;
        double res = approx_eq(lhs, rhs, 1.0).residual;
        if (res > std::max(1e-7, 100.0 * cfg_.tol))
            throw OracleError("sector morphism square does not commute, residual " +
                              std::to_string(res));
    }
    impl_->sector_mors.push_back({s.src, s.tgt, s.d, s.e});
    std::int64_t id = static_cast<std::int64_t>(impl_->sector_mors.size() - 1);
    impl_->mor_memo[key] = id;
    return {2, id};
}

MorHandle MoritaOracle::intern_alg_iso(const std::vector<std::int64_t>& key, AlgIsoRec a) const {
    MORITA_LOCK;
    auto it = impl_->mor_memo.find(key);
    if (it != impl_->mor_memo.end()) return {0, it->second};
    impl_->alg_isos.push_back({a.src, a.tgt, std::move(a.matrix)});
    std::int64_t id = static_cast<std::int64_t>(impl_->alg_isos.size() - 1);
    impl_->mor_memo[key] = id;
    return {0, id};
}

MorHandle MoritaOracle::identity(ObjHandle x) const {
    MORITA_LOCK;
    Key key{TAG_ID_MOR, x.level, x.id};
    if (x.level == 0) {
        const Algebra& A = impl_->algebras.at(x.id);
        return intern_alg_iso(key, {x.id, x.id, CMatrix::identity(A.dim())});
    }
    if (x.level == 1) {
        const Bimodule& d = impl_->bimodules.at(x.id);
        MorHandle a = identity(ObjHandle{0, d.left_algebra});
        MorHandle b = identity(ObjHandle{0, d.right_algebra});
        return intern_bim_iso(key, {x.id, x.id, a.id, b.id, CMatrix::identity(d.dim())});
    }
    const BimoduleMap& f = impl_->maps.at(x.id);
    MorHandle dmor = identity(ObjHandle{1, f.source});
    MorHandle emor = identity(ObjHandle{1, f.target});
    return intern_sector(key, {x.id, x.id, dmor.id, emor.id});
}

MorHandle MoritaOracle::compose(MorHandle f, MorHandle g) const {
    MORITA_LOCK;
    if (f.level != g.level) throw OracleError("compose: level mismatch");
    Key key{TAG_COMPOSE, f.level, f.id, g.id};
    if (f.level == 0) {
        const AlgIso& a = impl_->alg_isos.at(f.id);
        const AlgIso& b = impl_->alg_isos.at(g.id);
        if (a.tgt != b.src) throw OracleError("compose: algebra iso endpoints");
        return intern_alg_iso(key, {a.src, b.tgt, b.matrix * a.matrix});
    }
    if (f.level == 1) {
        const BimIso& a = impl_->bim_isos.at(f.id);
        const BimIso& b = impl_->bim_isos.at(g.id);
        if (a.tgt != b.src) throw OracleError("compose: bimodule iso endpoints");
        MorHandle ca = compose(MorHandle{0, a.a}, MorHandle{0, b.a});
        MorHandle cb = compose(MorHandle{0, a.b}, MorHandle{0, b.b});
        return intern_bim_iso(key, {a.src, b.tgt, ca.id, cb.id, b.matrix * a.matrix});
    }
    const SectorMor& a = impl_->sector_mors.at(f.id);
    const SectorMor& b = impl_->sector_mors.at(g.id);
    if (a.tgt != b.src) throw OracleError("compose: sector morphism endpoints");
    MorHandle cd = compose(MorHandle{1, a.d}, MorHandle{1, b.d});
    MorHandle ce = compose(MorHandle{1, a.e}, MorHandle{1, b.e});
    return intern_sector(key, {a.src, b.tgt, cd.id, ce.id});
}

MorHandle MoritaOracle::invert(MorHandle f) const {
    MORITA_LOCK;
    Key key{TAG_INVERT, f.level, f.id};
    if (f.level == 0) {
        const AlgIso& a = impl_->alg_isos.at(f.id);
        return intern_alg_iso(key, {a.tgt, a.src, inverse(a.matrix, cfg_.tol)});
    }
    if (f.level == 1) {
        const BimIso& a = impl_->bim_isos.at(f.id);
        MorHandle ia = invert(MorHandle{0, a.a});
        MorHandle ib = invert(MorHandle{0, a.b});
        CMatrix im = a.matrix.rows() == 0 && a.matrix.cols() == 0 ? CMatrix(0, 0)
                                                                  : inverse(a.matrix, cfg_.tol);
        return intern_bim_iso(key, {a.tgt, a.src, ia.id, ib.id, std::move(im)});
    }
    const SectorMor& a = impl_->sector_mors.at(f.id);
    MorHandle id_ = invert(MorHandle{1, a.d});
    MorHandle ie = invert(MorHandle{1, a.e});
    return intern_sector(key, {a.tgt, a.src, id_.id, ie.id});
}

bool MoritaOracle::is_invertible(MorHandle f) const {
    try {
        invert(f);
        return true;
    } catch (const LinalgError&) {
        return false;
    } catch (const OracleError&) {
        return false;
    }
}

double MoritaOracle::equal_residual(MorHandle f, MorHandle g) const {
    MORITA_LOCK;
    if (f.level != g.level) throw OracleError("equal_residual: level mismatch");
    if (f.level == 0) {
        const AlgIso& a = impl_->alg_isos.at(f.id);
        const AlgIso& b = impl_->alg_isos.at(g.id);
        if (a.src != b.src || a.tgt != b.tgt)
            throw OracleError("equal_residual: incomparable algebra isos");
        return approx_eq(a.matrix, b.matrix, 1.0).residual;
    }
    if (f.level == 1) {
        const BimIso& a = impl_->bim_isos.at(f.id);
        const BimIso& b = impl_->bim_isos.at(g.id);
        if (a.src != b.src || a.tgt != b.tgt)
            throw OracleError("equal_residual: incomparable bimodule isos");
        double r = approx_eq(a.matrix, b.matrix, 1.0).residual;
        r = std::max(r, equal_residual(MorHandle{0, a.a}, MorHandle{0, b.a}));
        r = std::max(r, equal_residual(MorHandle{0, a.b}, MorHandle{0, b.b}));
        return r;
    }
    const SectorMor& a = impl_->sector_mors.at(f.id);
    const SectorMor& b = impl_->sector_mors.at(g.id);
    if (a.src != b.src || a.tgt != b.tgt)
        throw OracleError("equal_residual: incomparable sector morphisms");
    return std::max(equal_residual(MorHandle{1, a.d}, MorHandle{1, b.d}),
                    equal_residual(MorHandle{1, a.e}, MorHandle{1, b.e}));
}

std::string MoritaOracle::describe_obj(ObjHandle x) const {
    MORITA_LOCK;
    if (x.level == 0) return impl_->algebras.at(x.id).label;
    if (x.level == 1) return impl_->bimodules.at(x.id).label;
    const BimoduleMap& f = impl_->maps.at(x.id);
    std::string lbl = impl_->map_labels.at(x.id);
    if (!lbl.empty()) return lbl;
    return "map(" + impl_->bimodules.at(f.source).label + "->" +
           impl_->bimodules.at(f.target).label + ")";
}

std::string MoritaOracle::describe_mor(MorHandle f) const {
    MORITA_LOCK;
    std::ostringstream os;
    os << "mor[level " << f.level << " #" << f.id << "]";
    return os.str();
}

MorHandle MoritaOracle::d2_component(D2Key k, std::span<const ObjHandle> args) const {
    MORITA_LOCK;
    Key key{TAG_D2, static_cast<std::int64_t>(k)};
    for (auto& a : args) key.push_back(a.id);
    {
        auto it = impl_->mor_memo.find(key);
        if (it != impl_->mor_memo.end())
            return {k == D2Key::HorizAssociator ? 1 : 2, it->second};
    }
    auto d1 = [&](D1Key dk, std::vector<ObjHandle> a) { return apply_d1(dk, a); };
    auto identity_pair = [&](ObjHandle from, ObjHandle to) {
        // a sector morphism with identity defect isos; valid when the two
        // cells have equal matrices
        const BimoduleMap& a = impl_->maps.at(from.id);
        MorHandle dm = identity(ObjHandle{1, a.source});
        MorHandle em = identity(ObjHandle{1, a.target});
        return intern_sector(key, {from.id, to.id, dm.id, em.id});
    };
    switch (k) {
        case D2Key::TopIdentity: {
            ObjHandle h = args[0];
            ObjHandle comp = d1(D1Key::MV, {d1(D1Key::IV, {src(h)}), h});
            return identity_pair(comp, h);
        }
        case D2Key::BottomIdentity: {
            ObjHandle h = args[0];
            ObjHandle comp = d1(D1Key::MV, {h, d1(D1Key::IV, {tgt(h)})});
            return identity_pair(comp, h);
        }
        case D2Key::VerticalAssociator: {
            ObjHandle lhs = d1(D1Key::MV, {d1(D1Key::MV, {args[0], args[1]}), args[2]});
            ObjHandle rhs = d1(D1Key::MV, {args[0], d1(D1Key::MV, {args[1], args[2]})});
            return identity_pair(lhs, rhs);
        }
        case D2Key::RightVertExpansion: {
            ObjHandle lhs = d1(D1Key::IV, {d1(D1Key::M, {args[0], args[1]})});
            ObjHandle rhs = d1(D1Key::WR, {d1(D1Key::IV, {args[0]}), args[1]});
            return identity_pair(lhs, rhs);
        }
        case D2Key::LeftVertExpansion: {
            ObjHandle lhs = d1(D1Key::IV, {d1(D1Key::M, {args[0], args[1]})});
            ObjHandle rhs = d1(D1Key::WL, {args[0], d1(D1Key::IV, {args[1]})});
            return identity_pair(lhs, rhs);
        }
        case D2Key::RightDewhisker: {
            ObjHandle lhs = d1(D1Key::WR, {d1(D1Key::MV, {args[0], args[1]}), args[2]});
            ObjHandle rhs = d1(D1Key::MV, {d1(D1Key::WR, {args[0], args[2]}),
                                           d1(D1Key::WR, {args[1], args[2]})});
            return identity_pair(lhs, rhs);
        }
        case D2Key::LeftDewhisker: {
            ObjHandle lhs = d1(D1Key::WL, {args[0], d1(D1Key::MV, {args[1], args[2]})});
            ObjHandle rhs = d1(D1Key::MV, {d1(D1Key::WL, {args[0], args[1]}),
                                           d1(D1Key::WL, {args[0], args[2]})});
            return identity_pair(lhs, rhs);
        }
        case D2Key::Switch: {
            ObjHandle h = args[0], kk = args[1];
            ObjHandle lhs = d1(D1Key::MV, {d1(D1Key::WR, {h, src(kk)}), d1(D1Key::WL, {tgt(h), kk})});
            ObjHandle rhs = d1(D1Key::MV, {d1(D1Key::WL, {src(h), kk}), d1(D1Key::WR, {h, tgt(kk)})});
            return identity_pair(lhs, rhs);
        }
        case D2Key::WhiskerAssocRR: {
            ObjHandle h = args[0];
            MorHandle da = assoc_iso(src(h), args[1], args[2]);
            MorHandle ea = assoc_iso(tgt(h), args[1], args[2]);
            ObjHandle lhs = d1(D1Key::WR, {d1(D1Key::WR, {h, args[1]}), args[2]});
            ObjHandle rhs = d1(D1Key::WR, {h, d1(D1Key::M, {args[1], args[2]})});
            return intern_sector(key, {lhs.id, rhs.id, da.id, ea.id});
        }
        case D2Key::WhiskerAssocM: {
            ObjHandle kk = args[1];
            MorHandle da = assoc_iso(args[0], src(kk), args[2]);
            MorHandle ea = assoc_iso(args[0], tgt(kk), args[2]);
            ObjHandle lhs = d1(D1Key::WR, {d1(D1Key::WL, {args[0], kk}), args[2]});
            ObjHandle rhs = d1(D1Key::WL, {args[0], d1(D1Key::WR, {kk, args[2]})});
            return intern_sector(key, {lhs.id, rhs.id, da.id, ea.id});
        }
        case D2Key::WhiskerAssocLL: {
            ObjHandle kk = args[2];
            MorHandle da = assoc_iso(args[0], args[1], src(kk));
            MorHandle ea = assoc_iso(args[0], args[1], tgt(kk));
            ObjHandle lhs = d1(D1Key::WL, {d1(D1Key::M, {args[0], args[1]}), kk});
            ObjHandle rhs = d1(D1Key::WL, {args[0], d1(D1Key::WL, {args[1], kk})});
            return intern_sector(key, {lhs.id, rhs.id, da.id, ea.id});
        }
        case D2Key::HorizAssociator: {
            MorHandle a = assoc_iso(args[0], args[1], args[2]);
            impl_->mor_memo[key] = a.id;
            return a;
        }
        case D2Key::LeftIdentityPass: {
            ObjHandle h = args[0];
            ObjHandle ia = d1(D1Key::I, {src(src(h))});
            ObjHandle lhs = d1(D1Key::MV, {d1(D1Key::WL, {ia, h}), d1(D1Key::IL, {tgt(h)})});
            ObjHandle rhs = d1(D1Key::MV, {d1(D1Key::IL, {src(h)}), h});
            return identity_pair(lhs, rhs);
        }
        case D2Key::RightIdentityPass: {
            ObjHandle h = args[0];
            ObjHandle ib = d1(D1Key::I, {tgt(tgt(h))});
            ObjHandle lhs = d1(D1Key::MV, {d1(D1Key::WR, {h, ib}), d1(D1Key::IR, {tgt(h)})});
            ObjHandle rhs = d1(D1Key::MV, {d1(D1Key::IR, {src(h)}), h});
            return identity_pair(lhs, rhs);
        }
        case D2Key::Swap: {
            ObjHandle ia = d1(D1Key::I, {args[0]});
            ObjHandle lhs = d1(D1Key::IL, {ia});
            ObjHandle rhs = d1(D1Key::IR, {ia});
            return identity_pair(lhs, rhs);
        }
        case D2Key::LeftIdExpansion: {
            ObjHandle d = args[0], e = args[1];
            ObjHandle ia = d1(D1Key::I, {src(d)});
            MorHandle da = assoc_iso(ia, d, e);
            ObjHandle lhs = d1(D1Key::WR, {d1(D1Key::IL, {d}), e});
            ObjHandle rhs = d1(D1Key::IL, {d1(D1Key::M, {d, e})});
            MorHandle ea = identity(d1(D1Key::M, {d, e}));
            return intern_sector(key, {lhs.id, rhs.id, da.id, ea.id});
        }
        case D2Key::RightIdExpansion: {
            ObjHandle d = args[0], e = args[1];
            ObjHandle ib = d1(D1Key::I, {tgt(e)});
            MorHandle da = invert(assoc_iso(d, e, ib));
            ObjHandle lhs = d1(D1Key::WL, {d, d1(D1Key::IR, {e})});
            ObjHandle rhs = d1(D1Key::IR, {d1(D1Key::M, {d, e})});
            MorHandle ea = identity(d1(D1Key::M, {d, e}));
            return intern_sector(key, {lhs.id, rhs.id, da.id, ea.id});
        }
        case D2Key::Flip: {
            ObjHandle d = args[0], e = args[1];
            ObjHandle ib = d1(D1Key::I, {tgt(d)});
            MorHandle da = assoc_iso(d, ib, e);
            ObjHandle lhs = d1(D1Key::WR, {d1(D1Key::IR, {d}), e});
            ObjHandle rhs = d1(D1Key::WL, {d, d1(D1Key::IL, {e})});
            MorHandle ea = identity(d1(D1Key::M, {d, e}));
            return intern_sector(key, {lhs.id, rhs.id, da.id, ea.id});
        }
    }
    throw OracleError("d2_component: bad key");
}

// canonical associator m(m(d,e),f) -> m(d,m(e,f)) as a level-1 morphism
MorHandle MoritaOracle::assoc_iso(ObjHandle d, ObjHandle e, ObjHandle f) const {
    MORITA_LOCK;
    Key key{TAG_D2, 1000, d.id, e.id, f.id};
    auto it = impl_->mor_memo.find(key);
    if (it != impl_->mor_memo.end()) return {1, it->second};
    ObjHandle de = apply_d1(D1Key::M, std::vector<ObjHandle>{d, e});
    ObjHandle ef = apply_d1(D1Key::M, std::vector<ObjHandle>{e, f});
    ObjHandle lhs = apply_d1(D1Key::M, std::vector<ObjHandle>{de, f});
    ObjHandle rhs = apply_d1(D1Key::M, std::vector<ObjHandle>{d, ef});
    const FusionResult& f_de = fusion(d, e);
    const FusionResult& f_ef = fusion(e, f);
    const FusionResult& f_de_f = fusion(de, f);
    const FusionResult& f_d_ef = fusion(d, ef);
    const std::size_t dd = impl_->bimodules.at(d.id).dim();
    const std::size_t df = impl_->bimodules.at(f.id).dim();
    CMatrix mat = f_d_ef.presentation.projection *
                  kron(CMatrix::identity(dd), f_ef.presentation.projection) *
                  kron(f_de.presentation.section, CMatrix::identity(df)) *
                  f_de_f.presentation.section;
    const Bimodule& L = impl_->bimodules.at(lhs.id);
    MorHandle a = identity(ObjHandle{0, L.left_algebra});
    MorHandle b = identity(ObjHandle{0, L.right_algebra});
    MorHandle h = intern_bim_iso(key, {lhs.id, rhs.id, a.id, b.id, std::move(mat)});
    return h;
}

MorHandle MoritaOracle::apply_d1_mor(D1Key k, std::span<const MorHandle> args) const {
    MORITA_LOCK;
    Key key{TAG_D1MOR, tag_of(k)};
    for (auto& a : args) key.push_back(a.id);
    {
        auto it = impl_->mor_memo.find(key);
        if (it != impl_->mor_memo.end())
            return {(k == D1Key::I || k == D1Key::M) ? 1 : 2, it->second};
    }
    switch (k) {
        case D1Key::I: {
            const AlgIso& a = impl_->alg_isos.at(args[0].id);
            ObjHandle si = apply_d1(D1Key::I, std::vector<ObjHandle>{ObjHandle{0, a.src}});
            ObjHandle ti = apply_d1(D1Key::I, std::vector<ObjHandle>{ObjHandle{0, a.tgt}});
            return intern_bim_iso(key, {si.id, ti.id, args[0].id, args[0].id, a.matrix});
        }
        case D1Key::M: {
            const BimIso& a = impl_->bim_isos.at(args[0].id);
            const BimIso& b = impl_->bim_isos.at(args[1].id);
            if (equal_residual(MorHandle{0, a.b}, MorHandle{0, b.a}) > cfg_.tol)
                throw OracleError("m on morphisms: middle algebra isos differ");
            ObjHandle so =
                apply_d1(D1Key::M, std::vector<ObjHandle>{ObjHandle{1, a.src}, ObjHandle{1, b.src}});
            ObjHandle to =
                apply_d1(D1Key::M, std::vector<ObjHandle>{ObjHandle{1, a.tgt}, ObjHandle{1, b.tgt}});
            const FusionResult& fs = fusion(ObjHandle{1, a.src}, ObjHandle{1, b.src});
            const FusionResult& ft = fusion(ObjHandle{1, a.tgt}, ObjHandle{1, b.tgt});
            CMatrix mat =
                ft.presentation.projection * kron(a.matrix, b.matrix) * fs.presentation.section;
            return intern_bim_iso(key, {so.id, to.id, a.a, b.b, std::move(mat)});
        }
        case D1Key::IV: {
            const BimIso& a = impl_->bim_isos.at(args[0].id);
            ObjHandle so = apply_d1(D1Key::IV, std::vector<ObjHandle>{ObjHandle{1, a.src}});
            ObjHandle to = apply_d1(D1Key::IV, std::vector<ObjHandle>{ObjHandle{1, a.tgt}});
            return intern_sector(key, {so.id, to.id, args[0].id, args[0].id});
        }
        case D1Key::MV: {
            const SectorMor& a = impl_->sector_mors.at(args[0].id);
            const SectorMor& b = impl_->sector_mors.at(args[1].id);
            if (equal_residual(MorHandle{1, a.e}, MorHandle{1, b.d}) > cfg_.tol)
                throw OracleError("m_v on morphisms: middle isos differ");
            ObjHandle so = apply_d1(
                D1Key::MV, std::vector<ObjHandle>{ObjHandle{2, a.src}, ObjHandle{2, b.src}});
            ObjHandle to = apply_d1(
                D1Key::MV, std::vector<ObjHandle>{ObjHandle{2, a.tgt}, ObjHandle{2, b.tgt}});
            return intern_sector(key, {so.id, to.id, a.d, b.e});
        }
        case D1Key::WR: {
            const SectorMor& a = impl_->sector_mors.at(args[0].id);
            MorHandle g = args[1];  // level-1 morphism
            ObjHandle so = apply_d1(D1Key::WR, std::vector<ObjHandle>{ObjHandle{2, a.src},
                                                                      mor_source(g)});
            ObjHandle to = apply_d1(D1Key::WR, std::vector<ObjHandle>{ObjHandle{2, a.tgt},
                                                                      mor_target(g)});
            MorHandle dmor = apply_d1_mor(D1Key::M, std::vector<MorHandle>{MorHandle{1, a.d}, g});
            MorHandle emor = apply_d1_mor(D1Key::M, std::vector<MorHandle>{MorHandle{1, a.e}, g});
            return intern_sector(key, {so.id, to.id, dmor.id, emor.id});
        }
        case D1Key::WL: {
            MorHandle g = args[0];
            const SectorMor& a = impl_->sector_mors.at(args[1].id);
            ObjHandle so = apply_d1(D1Key::WL, std::vector<ObjHandle>{mor_source(g),
                                                                      ObjHandle{2, a.src}});
            ObjHandle to = apply_d1(D1Key::WL, std::vector<ObjHandle>{mor_target(g),
                                                                      ObjHandle{2, a.tgt}});
            MorHandle dmor = apply_d1_mor(D1Key::M, std::vector<MorHandle>{g, MorHandle{1, a.d}});
            MorHandle emor = apply_d1_mor(D1Key::M, std::vector<MorHandle>{g, MorHandle{1, a.e}});
            return intern_sector(key, {so.id, to.id, dmor.id, emor.id});
        }
        case D1Key::IL: {
            const BimIso& f = impl_->bim_isos.at(args[0].id);
            ObjHandle so = apply_d1(D1Key::IL, std::vector<ObjHandle>{ObjHandle{1, f.src}});
            ObjHandle to = apply_d1(D1Key::IL, std::vector<ObjHandle>{ObjHandle{1, f.tgt}});
            MorHandle ia = apply_d1_mor(D1Key::I, std::vector<MorHandle>{MorHandle{0, f.a}});
            MorHandle dmor = apply_d1_mor(D1Key::M, std::vector<MorHandle>{ia, args[0]});
            return intern_sector(key, {so.id, to.id, dmor.id, args[0].id});
        }
        case D1Key::IR: {
            const BimIso& f = impl_->bim_isos.at(args[0].id);
            ObjHandle so = apply_d1(D1Key::IR, std::vector<ObjHandle>{ObjHandle{1, f.src}});
            ObjHandle to = apply_d1(D1Key::IR, std::vector<ObjHandle>{ObjHandle{1, f.tgt}});
            MorHandle ib = apply_d1_mor(D1Key::I, std::vector<MorHandle>{MorHandle{0, f.b}});
            MorHandle dmor = apply_d1_mor(D1Key::M, std::vector<MorHandle>{args[0], ib});
            return intern_sector(key, {so.id, to.id, dmor.id, args[0].id});
        }
        case D1Key::ILL: {
            const BimIso& f = impl_->bim_isos.at(args[0].id);
            ObjHandle so = apply_d1(D1Key::ILL, std::vector<ObjHandle>{ObjHandle{1, f.src}});
            ObjHandle to = apply_d1(D1Key::ILL, std::vector<ObjHandle>{ObjHandle{1, f.tgt}});
            MorHandle ia = apply_d1_mor(D1Key::I, std::vector<MorHandle>{MorHandle{0, f.a}});
            MorHandle emor = apply_d1_mor(D1Key::M, std::vector<MorHandle>{ia, args[0]});
            return intern_sector(key, {so.id, to.id, args[0].id, emor.id});
        }
        case D1Key::IRL: {
            const BimIso& f = impl_->bim_isos.at(args[0].id);
            ObjHandle so = apply_d1(D1Key::IRL, std::vector<ObjHandle>{ObjHandle{1, f.src}});
            ObjHandle to = apply_d1(D1Key::IRL, std::vector<ObjHandle>{ObjHandle{1, f.tgt}});
            MorHandle ib = apply_d1_mor(D1Key::I, std::vector<MorHandle>{MorHandle{0, f.b}});
            MorHandle emor = apply_d1_mor(D1Key::M, std::vector<MorHandle>{args[0], ib});
            return intern_sector(key, {so.id, to.id, args[0].id, emor.id});
        }
    }
    throw OracleError("apply_d1_mor: bad functor");
}

MorHandle MoritaOracle::witness_component(WitnessKey k, ObjHandle arg) const {
    MORITA_LOCK;
    Key key{TAG_WITNESS, static_cast<std::int64_t>(k), arg.id};
    auto it = impl_->mor_memo.find(key);
    if (it != impl_->mor_memo.end()) return {2, it->second};
    auto d1 = [&](D1Key dk, std::vector<ObjHandle> a) { return apply_d1(dk, a); };
    ObjHandle lhs, rhs;
    switch (k) {
        case WitnessKey::CancelUpL:
            lhs = d1(D1Key::MV, {d1(D1Key::ILL, {arg}), d1(D1Key::IL, {arg})});
            rhs = d1(D1Key::IV, {arg});
            break;
        case WitnessKey::CancelDownL:
            lhs = d1(D1Key::MV, {d1(D1Key::IL, {arg}), d1(D1Key::ILL, {arg})});
            rhs = d1(D1Key::IV, {src(d1(D1Key::IL, {arg}))});
            break;
        case WitnessKey::CancelUpR:
            lhs = d1(D1Key::MV, {d1(D1Key::IRL, {arg}), d1(D1Key::IR, {arg})});
            rhs = d1(D1Key::IV, {arg});
            break;
        case WitnessKey::CancelDownR:
            lhs = d1(D1Key::MV, {d1(D1Key::IR, {arg}), d1(D1Key::IRL, {arg})});
            rhs = d1(D1Key::IV, {src(d1(D1Key::IR, {arg}))});
            break;
    }
    const BimoduleMap& a = impl_->maps.at(lhs.id);
    MorHandle dm = identity(ObjHandle{1, a.source});
    MorHandle em = identity(ObjHandle{1, a.target});
    return intern_sector(key, {lhs.id, rhs.id, dm.id, em.id});
}

std::optional<MorHandle> MoritaOracle::transport1(ObjHandle d, MorHandle a, MorHandle b) const {
    MORITA_LOCK;
    const Bimodule& m = impl_->bimodules.at(d.id);
    const AlgIso& am = impl_->alg_isos.at(a.id);
    const AlgIso& bm = impl_->alg_isos.at(b.id);
    if (am.tgt != m.left_algebra || bm.tgt != m.right_algebra)
        throw OracleError("transport1: iso targets must match the bimodule algebras");
    Key key{TAG_TRANSPORT1, d.id, a.id, b.id};
    auto it = impl_->mor_memo.find(key);
    if (it != impl_->mor_memo.end()) return MorHandle{1, it->second};
    Bimodule pulled;
    pulled.label = "transport(" + m.label + ")";
    pulled.left_algebra = am.src;
    pulled.right_algebra = bm.src;
    pulled.space = {m.dim(), pulled.label};
    if (m.dim() > 0) {
        pulled.left_action = m.left_action * kron(am.matrix, CMatrix::identity(m.dim()));
        pulled.right_action = m.right_action * kron(CMatrix::identity(m.dim()), bm.matrix);
    } else {
        pulled.left_action = CMatrix(0, 0);
        pulled.right_action = CMatrix(0, 0);
    }
    Key okey{TAG_TRANSPORT1, -1, d.id, a.id, b.id};
    std::int64_t pid;
    auto oit = impl_->obj_memo.find(okey);
    if (oit != impl_->obj_memo.end()) {
        pid = oit->second;
    } else {
        impl_->bimodules.push_back(std::move(pulled));
        pid = static_cast<std::int64_t>(impl_->bimodules.size() - 1);
        impl_->obj_memo[okey] = pid;
    }
    return intern_bim_iso(key, {pid, d.id, a.id, b.id, CMatrix::identity(m.dim())});
}

std::optional<MorHandle> MoritaOracle::transport2(ObjHandle h, MorHandle delta,
                                                  MorHandle eps) const {
    MORITA_LOCK;
    const BimoduleMap& phi = impl_->maps.at(h.id);
    const BimIso& dm = impl_->bim_isos.at(delta.id);
    const BimIso& em = impl_->bim_isos.at(eps.id);
    if (dm.tgt != phi.source || em.tgt != phi.target)
        throw OracleError("transport2: iso targets must match the cell endpoints");
    if (dm.a != em.a || dm.b != em.b)
        throw OracleError("transport2: the isos must cover the same algebra isos");
    Key key{TAG_TRANSPORT2, h.id, delta.id, eps.id};
    auto it = impl_->mor_memo.find(key);
    if (it != impl_->mor_memo.end()) return MorHandle{2, it->second};
    const Bimodule& tgt_b = impl_->bimodules.at(em.src);
    CMatrix em_inv = tgt_b.dim() == 0 ? CMatrix(0, 0) : inverse(em.matrix, cfg_.tol);
    CMatrix mat = em_inv * phi.matrix * dm.matrix;
    BimoduleMap pulled{dm.src, em.src, std::move(mat)};
    Key okey{TAG_TRANSPORT2, h.id, delta.id, eps.id, -1};
    ObjHandle pulled_h = intern_map(okey, std::move(pulled), "transport2");
    return intern_sector(key, {pulled_h.id, h.id, delta.id, eps.id});
}

MorHandle MoritaOracle::mutate_scale(MorHandle f, std::uint64_t seed) const {
    MORITA_LOCK;
    if (seed == 0) return f;
    Key key{TAG_MUTATE, f.level, f.id, static_cast<std::int64_t>(seed)};
    Rng rng(mix(seed, 0xBADBEEFull));
    double angle = 3.141592653589793 * (0.5 + rng.next_unit());  // away from 1
    cplx c = std::polar(1.0, angle);
    if (f.level == 1) {
        const BimIso& a = impl_->bim_isos.at(f.id);
        return intern_bim_iso(key, {a.src, a.tgt, a.a, a.b, a.matrix.scaled(c)});
    }
    if (f.level == 2) {
        const SectorMor& a = impl_->sector_mors.at(f.id);
        MorHandle dmor = mutate_scale(MorHandle{1, a.d}, mix(seed, 1));
        MorHandle emor = mutate_scale(MorHandle{1, a.e}, mix(seed, 1));
        return intern_sector(key, {a.src, a.tgt, dmor.id, emor.id});
    }
    const AlgIso& a = impl_->alg_isos.at(f.id);
    return intern_alg_iso(key, {a.src, a.tgt, a.matrix.scaled(c)});
}


// --- instance construction -----------------------------------------------------

ObjHandle MoritaOracle::map_tensor(ObjHandle f, ObjHandle g) const {
    MORITA_LOCK;
    const BimoduleMap& a = impl_->maps.at(f.id);
    const BimoduleMap& b = impl_->maps.at(g.id);
    ObjHandle so = apply_d1(D1Key::M,
                            std::vector<ObjHandle>{ObjHandle{1, a.source}, ObjHandle{1, b.source}});
    ObjHandle to = apply_d1(D1Key::M,
                            std::vector<ObjHandle>{ObjHandle{1, a.target}, ObjHandle{1, b.target}});
    const FusionResult& fs = fusion(ObjHandle{1, a.source}, ObjHandle{1, b.source});
    const FusionResult& ft = fusion(ObjHandle{1, a.target}, ObjHandle{1, b.target});
    CMatrix mat = ft.presentation.projection * kron(a.matrix, b.matrix) * fs.presentation.section;
    Key key{TAG_USER, 77, f.id, g.id};
    return intern_map(key, BimoduleMap{so.id, to.id, std::move(mat)}, "hfuse");
}

void MoritaOracle::add_probe_morphism(MorHandle h) {
    MORITA_LOCK;
    impl_->probe_mors[h.level].push_back(h);
}

namespace {

Bimodule scalar_bimodule(std::int64_t c_id, std::size_t dim, const std::string& label) {
    Bimodule b;
    b.label = label;
    b.left_algebra = c_id;
    b.right_algebra = c_id;
    b.space = {dim, label};
    b.left_action = CMatrix::identity(dim);
    b.right_action = CMatrix::identity(dim);
    return b;
}

}  // namespace

std::shared_ptr<MoritaOracle> build_morita_oracle(const MoritaConfig& cfg) {
    auto o = std::make_shared<MoritaOracle>(cfg);
    const bool small = cfg.probe_preset == "small";

    ObjHandle aC = o->add_algebra(make_block_algebra({1}, "C"));
    ObjHandle aCC = o->add_algebra(make_block_algebra({1, 1}, "C+C"));
    ObjHandle aM2 = o->add_algebra(make_block_algebra({2}, "M2"));
    ObjHandle aCM2;
    if (!small) aCM2 = o->add_algebra(make_block_algebra({1, 2}, "C+M2"));

    auto regular = [&](ObjHandle alg) {
        const Algebra& A = o->algebra(alg.id);
        Bimodule b;
        b.label = "reg(" + A.label + ")";
        b.left_algebra = alg.id;
        b.right_algebra = alg.id;
        b.space = {A.dim(), b.label};
        b.left_action = A.mult;
        b.right_action = A.mult;
        return o->add_bimodule(std::move(b));
    };
    ObjHandle regC = regular(aC);
    ObjHandle regCC = regular(aCC);
    ObjHandle regM2 = regular(aM2);
    if (!small) regular(aCM2);

    // column vectors: M2 acts on the left, scalars on the right
    {
        Bimodule b;
        b.label = "col";
        b.left_algebra = aM2.id;
        b.right_algebra = aC.id;
        b.space = {2, b.label};
        b.left_action = CMatrix(2, 4 * 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t k = 0; k < 2; ++k)
                    if (j == k) b.left_action.at(i, (i * 2 + j) * 2 + k) = 1.0;
        b.right_action = CMatrix::identity(2);
        o->add_bimodule(std::move(b));
    }
    // row vectors: scalars on the left, M2 on the right
    {
        Bimodule b;
        b.label = "row";
        b.left_algebra = aC.id;
        b.right_algebra = aM2.id;
        b.space = {2, b.label};
        b.left_action = CMatrix::identity(2);
        b.right_action = CMatrix(2, 2 * 4);
        for (std::size_t v = 0; v < 2; ++v)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t k = 0; k < 2; ++k)
                    if (v == j) b.right_action.at(k, v * 4 + (j * 2 + k)) = 1.0;
        o->add_bimodule(std::move(b));
    }

    ObjHandle v2 = o->add_bimodule(scalar_bimodule(aC.id, 2, "V2"));
    ObjHandle v3, zero;
    if (!small) v3 = o->add_bimodule(scalar_bimodule(aC.id, 3, "V3"));
    zero = o->add_bimodule(scalar_bimodule(aC.id, 0, "zero"));

    // graded module over (C+C, C): grading (2|1)
    ObjHandle grA;
    {
        Bimodule b;
        b.label = "grA";
        b.left_algebra = aCC.id;
        b.right_algebra = aC.id;
        b.space = {3, b.label};
        b.left_action = CMatrix(3, 2 * 3);
        b.left_action.at(0, 0 * 3 + 0) = 1.0;
        b.left_action.at(1, 0 * 3 + 1) = 1.0;
        b.left_action.at(2, 1 * 3 + 2) = 1.0;
        b.right_action = CMatrix::identity(3);
        grA = o->add_bimodule(std::move(b));
    }
    // graded module over (C, C+C): grading (1|1)
    {
        Bimodule b;
        b.label = "grB";
        b.left_algebra = aC.id;
        b.right_algebra = aCC.id;
        b.space = {2, b.label};
        b.left_action = CMatrix::identity(2);
        b.right_action = CMatrix(2, 2 * 2);
        b.right_action.at(0, 0 * 2 + 0) = 1.0;
        b.right_action.at(1, 1 * 2 + 1) = 1.0;
        o->add_bimodule(std::move(b));
    }

    Rng rng(mix(cfg.seed, 0x5EEDull));
    // seeded 2-cell probes: endomorphism chains over (C, C) plus maps across
    // different spaces and degenerate cases
    auto add_plain_map = [&](ObjHandle sb, ObjHandle tb, CMatrix m) {
        return o->add_map(BimoduleMap{sb.id, tb.id, std::move(m)});
    };
    add_plain_map(v2, v2, random_invertible(rng, 2));
    add_plain_map(v2, v2, [&] {
        CMatrix p(2, 2);
        p.at(0, 0) = 1.0;  // rank-one projection
        return p;
    }());
    if (!small) {
        add_plain_map(v2, v3, random_matrix(rng, 3, 2));
        add_plain_map(v3, v2, random_matrix(rng, 2, 3));
        add_plain_map(v2, zero, CMatrix(0, 2));
    }
    // central endomorphisms of regular bimodules
    {
        CMatrix d(2, 2);
        d.at(0, 0) = cplx(0.7, 0.2);
        d.at(1, 1) = cplx(-1.3, 0.4);
        add_plain_map(regCC, regCC, std::move(d));
        add_plain_map(regM2, regM2, CMatrix::identity(4).scaled(cplx(0.5, -1.0)));
        add_plain_map(regC, regC, CMatrix::identity(1).scaled(cplx(2.0, 1.0)));
    }
    // scalar endomorphisms of the column and row modules (all there are, by
    // Schur), exercising cells over a noncommutative algebra
    {
        ObjHandle col, rowh;
        for (auto h : o->probe_objects(1)) {
            const Bimodule& b = o->bimodule(h.id);
            if (b.label == "col") col = h;
            if (b.label == "row") rowh = h;
        }
        add_plain_map(col, col, CMatrix::identity(2).scaled(cplx(1.5, -0.5)));
        add_plain_map(rowh, rowh, CMatrix::identity(2).scaled(cplx(-0.25, 1.0)));
    }
    // a graded endomorphism of grA (block 2x2 on the first grade, scalar on the
    // second)
    {
        CMatrix g(3, 3);
        CMatrix blk = random_invertible(rng, 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) g.at(i, j) = blk.at(i, j);
        g.at(2, 2) = cplx(0.3, 0.9);
        add_plain_map(grA, grA, std::move(g));
    }

    // C0 probe morphisms: identities, the factor swap of C+C, an inner
    // automorphism of M2
    for (auto alg : o->algebra_handles()) o->add_probe_morphism(o->identity(alg));
    MorHandle swapCC;
    {
        CMatrix sw(2, 2);
        sw.at(0, 1) = 1.0;
        sw.at(1, 0) = 1.0;
        swapCC = o->add_alg_iso(aCC.id, aCC.id, std::move(sw));
    }
    {
        CMatrix g = random_invertible(rng, 2);
        CMatrix gi = inverse(g, cfg.tol);
        // X -> g X g^{-1} on row-major vec is kron(g, (g^{-1})^T)
        o->add_alg_iso(aM2.id, aM2.id, kron(g, gi.transpose()));
    }

    // C1 probe morphisms: identities, a gauge automorphism of V2, a transport
    // of grA along the factor swap
    o->add_probe_morphism(o->identity(v2));
    o->add_probe_morphism(o->identity(regCC));
    {
        MorHandle idc = o->identity(aC);
        o->add_bim_iso(v2.id, v2.id, idc, idc, random_invertible(rng, 2));
    }
    {
        auto lifted = o->transport1(grA, swapCC, o->identity(aC));
        if (lifted) o->add_probe_morphism(*lifted);
    }

    // C2 probe morphisms: identities and a conjugation square on a V2 cell
    {
        auto cells = o->probe_objects(2);
        if (!cells.empty()) {
            o->add_probe_morphism(o->identity(cells.front()));
            MorHandle idc = o->identity(aC);
            MorHandle gauge =
                o->add_bim_iso(v2.id, v2.id, idc, idc, random_invertible(rng, 2), false);
            auto sq = o->transport2(cells.front(), gauge, gauge);
            if (sq) o->add_probe_morphism(*sq);
        }
    }
    return o;
}

DicatData build_morita_instance(const MoritaConfig& cfg) {
    return DicatData::wrap(build_morita_oracle(cfg));
}

// --- tensor smoke ----------------------------------------------------------------

namespace {

// permutation matrix for (X (x) Y) (x) (Z (x) W) -> (X (x) Z) (x) (Y (x) W)
CMatrix middle_shuffle(std::size_t x, std::size_t y, std::size_t z, std::size_t w) {
    CMatrix p(x * z * y * w, x * y * z * w);
    for (std::size_t i = 0; i < x; ++i)
        for (std::size_t j = 0; j < y; ++j)
            for (std::size_t k = 0; k < z; ++k)
                for (std::size_t l = 0; l < w; ++l) {
                    std::size_t from = ((i * y + j) * z + k) * w + l;
                    std::size_t to = ((i * z + k) * y + j) * w + l;
                    p.at(to, from) = 1.0;
                }
    return p;
}

struct RawBimodule {
    std::size_t dim, da, db;
    CMatrix left, right;
};

RawBimodule tensor_raw(const MoritaOracle& o, ObjHandle m, ObjHandle p) {
    const Bimodule& M = o.bimodule(m.id);
    const Bimodule& P = o.bimodule(p.id);
    const std::size_t da1 = o.algebra(M.left_algebra).dim();
    const std::size_t da2 = o.algebra(P.left_algebra).dim();
    const std::size_t db1 = o.algebra(M.right_algebra).dim();
    const std::size_t db2 = o.algebra(P.right_algebra).dim();
    RawBimodule out;
    out.dim = M.dim() * P.dim();
    out.da = da1 * da2;
    out.db = db1 * db2;
    if (out.dim == 0) {
        out.left = CMatrix(0, 0);
        out.right = CMatrix(0, 0);
        return out;
    }
    // (A1 (x) A2) (x) (M (x) P) --shuffle--> (A1 (x) M) (x) (A2 (x) P)
    out.left = kron(M.left_action, P.left_action) * middle_shuffle(da1, da2, M.dim(), P.dim());
    out.right = kron(M.right_action, P.right_action) * middle_shuffle(M.dim(), P.dim(), db1, db2);
    return out;
}

QuotientPresentation raw_rel_tensor(const RawBimodule& m, const RawBimodule& n, std::size_t db,
                                    double tol) {
    const std::size_t amb = m.dim * n.dim;
    CMatrix rel(amb, m.dim * db * n.dim);
    for (std::size_t i = 0; i < m.dim; ++i)
        for (std::size_t k = 0; k < db; ++k)
            for (std::size_t j = 0; j < n.dim; ++j) {
                const std::size_t col = (i * db + k) * n.dim + j;
                for (std::size_t r = 0; r < m.dim; ++r) {
                    cplx c = m.right.at(r, i * db + k);
                    if (c != cplx(0.0, 0.0)) rel.at(r * n.dim + j, col) += c;
                }
                for (std::size_t r = 0; r < n.dim; ++r) {
                    cplx c = n.left.at(r, k * n.dim + j);
                    if (c != cplx(0.0, 0.0)) rel.at(i * n.dim + r, col) -= c;
                }
            }
    return quotient(amb, rel, tol);
}

}  // namespace

TensorSmokeReport tensor_smoke(MoritaOracle& o, double tol) {
    TensorSmokeReport rep;
    auto note = [&](const std::string& what, double res) {
        rep.max_residual = std::max(rep.max_residual, res);
        if (res > tol) {
            rep.ok = false;
            rep.failures.push_back(what + " residual " + std::to_string(res));
        }
    };
    // probe composable pairs among the registered bimodules
    auto c1 = o.probe_objects(1);
    std::vector<std::pair<ObjHandle, ObjHandle>> pairs;
    for (auto m : c1)
        for (auto n : c1)
            if (o.tgt(m) == o.src(n) && o.bimodule(m.id).dim() * o.bimodule(n.id).dim() <= 8)
                pairs.push_back({m, n});
    std::size_t cases = 0;
    for (std::size_t i = 0; i < pairs.size() && cases < 6; ++i)
        for (std::size_t j = i; j < pairs.size() && cases < 6; ++j) {
            auto [m, n] = pairs[i];
            auto [p, q] = pairs[j];
            RawBimodule mp = tensor_raw(o, m, p);
            RawBimodule nq = tensor_raw(o, n, q);
            std::size_t dbm = o.algebra(o.bimodule(m.id).right_algebra).dim();
            std::size_t dbp = o.algebra(o.bimodule(p.id).right_algebra).dim();
            if (mp.dim * nq.dim > 256) continue;
            QuotientPresentation big;
            try {
                big = raw_rel_tensor(mp, nq, dbm * dbp, tol);
            } catch (const IllConditioned&) {
                continue;
            }
            const auto& fmn = o.fusion(m, n);
            const auto& fpq = o.fusion(p, q);
            ++cases;
            std::string label = "tensor(" + o.bimodule(m.id).label + "," + o.bimodule(n.id).label +
                                ";" + o.bimodule(p.id).label + "," + o.bimodule(q.id).label + ")";
            const std::size_t dim_small =
                fmn.presentation.quotient_dim() * fpq.presentation.quotient_dim();
            if (big.quotient_dim() != dim_small) {
                rep.ok = false;
                rep.failures.push_back(label + " dimension mismatch");
                continue;
            }
            if (big.quotient_dim() == 0) continue;
            // canonical reshuffle: Q_big -> Q_mn (x) Q_pq
            const Bimodule& M = o.bimodule(m.id);
            const Bimodule& N = o.bimodule(n.id);
            const Bimodule& P = o.bimodule(p.id);
            const Bimodule& Q = o.bimodule(q.id);
            CMatrix reshuffle = kron(fmn.presentation.projection, fpq.presentation.projection) *
                                middle_shuffle(M.dim(), P.dim(), N.dim(), Q.dim()) * big.section;
            try {
                CMatrix inv_r = inverse(reshuffle, tol);
                note(label + " iso",
                     approx_eq(reshuffle * inv_r, CMatrix::identity(reshuffle.rows()), tol)
                         .residual);
            } catch (const LinalgError&) {
                rep.ok = false;
                rep.failures.push_back(label + " reshuffle not invertible");
            }
        }
    if (cases == 0) {
        rep.ok = false;
        rep.failures.push_back("no tensor smoke cases were runnable");
    }
    return rep;
}

}  // namespace dicat
