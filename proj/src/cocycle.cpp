#include "dicat/cocycle.hpp"

#include <array>
#include <deque>
#include <mutex>

namespace dicat {

GroupCheck validate_group(const CocycleInstance& c) {
    GroupCheck rep;
    const int n = static_cast<int>(c.order());
    auto fail = [&](std::string m) {
        rep.ok = false;
        rep.violations.push_back(std::move(m));
    };
    if (n == 0) {
        fail("empty group");
        return rep;
    }
    for (int g = 0; g < n; ++g) {
        if (static_cast<int>(c.group[g].size()) != n) fail("ragged multiplication table");
        for (int h = 0; h < n; ++h)
            if (c.group[g][h] < 0 || c.group[g][h] >= n) fail("table entry out of range");
    }
    if (!rep.ok) return rep;
    if (c.unit < 0 || c.unit >= n) fail("unit out of range");
    for (int g = 0; g < n && rep.ok; ++g) {
        if (c.mul(c.unit, g) != g || c.mul(g, c.unit) != g)
            fail("unit law fails at " + std::to_string(g));
    }
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
            for (int k = 0; k < n; ++k)
                if (c.mul(c.mul(g, h), k) != c.mul(g, c.mul(h, k))) {
                    fail("associativity fails at (" + std::to_string(g) + "," + std::to_string(h) +
                         "," + std::to_string(k) + ")");
                    return rep;
                }
    for (int g = 0; g < n; ++g) {
        bool has_inverse = false;
        for (int h = 0; h < n; ++h)
            if (c.mul(g, h) == c.unit && c.mul(h, g) == c.unit) has_inverse = true;
        if (!has_inverse) fail("no inverse for " + std::to_string(g));
    }
    if (c.root_order < 1) fail("root order must be positive");
    // omega shape and normalization
    if (static_cast<int>(c.omega.size()) != n) {
        fail("omega table has wrong shape");
        return rep;
    }
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
            for (int k = 0; k < n; ++k) {
                int e = c.omega[g][h][k];
                if (e < 0 || e >= c.root_order) fail("omega exponent out of range");
                bool tampered_entry = false;
                for (const auto& t : c.tampered)
                    if (t[0] == g && t[1] == h && t[2] == k) tampered_entry = true;
                if (tampered_entry) continue;
                if ((g == c.unit || h == c.unit || k == c.unit) && e % c.root_order != 0)
                    fail("omega not normalized at a unit argument");
            }
    return rep;
}

std::vector<std::array<int, 4>> cocycle_condition(const CocycleInstance& c) {
    std::vector<std::array<int, 4>> bad;
    const int n = static_cast<int>(c.order());
    const int ord = c.root_order;
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    int lhs = c.omega[h][k][l] + c.omega[g][c.mul(h, k)][l] + c.omega[g][h][k];
                    int rhs = c.omega[c.mul(g, h)][k][l] + c.omega[g][h][c.mul(k, l)];
                    if (((lhs - rhs) % ord + ord) % ord != 0) bad.push_back({g, h, k, l});
                }
    return bad;
}

CocycleInstance z2_instance(bool nontrivial) {
    CocycleInstance c;
    c.label = nontrivial ? "z2-nontrivial" : "z2-trivial";
    c.group = {{0, 1}, {1, 0}};
    c.unit = 0;
    c.root_order = 2;
    c.omega.assign(2, std::vector<std::vector<int>>(2, std::vector<int>(2, 0)));
    if (nontrivial) c.omega[1][1][1] = 1;  // omega(g,h,k) = (-1)^{ghk}
    return c;
}

CocycleInstance zn_instance(int n, int omega_exponent) {
    CocycleInstance c;
    c.label = "z" + std::to_string(n);
    c.group.assign(n, std::vector<int>(n, 0));
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h) c.group[g][h] = (g + h) % n;
    c.unit = 0;
    c.root_order = n;
    c.omega.assign(n, std::vector<std::vector<int>>(n, std::vector<int>(n, 0)));
    // standard cocycle on Z/n: omega(g,h,k) = zeta^{e. g. ((h+k) div n). }
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
            for (int k = 0; k < n; ++k)
                c.omega[g][h][k] = (omega_exponent * g * ((h + k) / n)) % n;
    return c;
}

void tamper(CocycleInstance& c, const std::vector<std::array<int, 3>>& triples) {
    int delta = c.root_order / 2;
    if (delta == 0) delta = c.root_order > 1 ? 1 : 0;
    for (auto& t : triples) {
        int& e = c.omega.at(t[0]).at(t[1]).at(t[2]);
        e = (e + delta) % c.root_order;
        c.tampered.push_back(t);
    }
}

// --- the exhaustive oracle ------------------------------------------------------

namespace {

// Handles:
//   level 0: the unique object (id 0); the unique morphism (id 0)
//   level 1: object g; morphism id = g * n + exponent
//   level 2: object g; morphism id = (g * n + e1) * n + e2  covering (e1, e2)
class CocycleOracle : public InstanceOracle {
public:
    explicit CocycleOracle(CocycleInstance c) : c_(std::move(c)) {
        n_ = static_cast<std::int64_t>(c_.order());
        ord_ = c_.root_order;
    }

    std::string name() const override { return c_.label; }
    bool exhaustive() const override { return true; }

    std::vector<ObjHandle> probe_objects(int level) const override {
        std::vector<ObjHandle> out;
        if (level == 0) {
            out.push_back({0, 0});
        } else {
            for (std::int64_t g = 0; g < n_; ++g) out.push_back({level, g});
        }
        return out;
    }

    std::vector<MorHandle> probe_morphisms(int level) const override {
        std::vector<MorHandle> out;
        if (level == 0) {
            out.push_back({0, 0});
        } else if (level == 1) {
            for (std::int64_t g = 0; g < n_; ++g)
                for (int e = 0; e < ord_; ++e) out.push_back({1, g * ord_ + e});
        } else {
            for (std::int64_t g = 0; g < n_; ++g)
                for (int e1 = 0; e1 < ord_; ++e1)
                    for (int e2 = 0; e2 < ord_; ++e2)
                        out.push_back({2, (g * ord_ + e1) * ord_ + e2});
        }
        return out;
    }

    ObjHandle src(ObjHandle x) const override {
        if (x.level == 1) return {0, 0};
        if (x.level == 2) return {1, x.id};
        throw OracleError("src on 0-cell");
    }
    ObjHandle tgt(ObjHandle x) const override { return src(x); }

    MorHandle src_mor(MorHandle f) const override {
        if (f.level == 1) return {0, 0};
        if (f.level == 2) return {1, (f.id / ord_ / ord_) * ord_ + (f.id / ord_) % ord_};
        throw OracleError("src_mor on 0-level");
    }
    MorHandle tgt_mor(MorHandle f) const override {
        if (f.level == 1) return {0, 0};
        if (f.level == 2) return {1, (f.id / ord_ / ord_) * ord_ + f.id % ord_};
        throw OracleError("tgt_mor on 0-level");
    }

    ObjHandle mor_source(MorHandle f) const override {
        if (f.level == 0) return {0, 0};
        if (f.level == 1) return {1, f.id / ord_};
        return {2, f.id / (ord_ * ord_)};
    }
    ObjHandle mor_target(MorHandle f) const override { return mor_source(f); }

    ObjHandle apply_d1(D1Key k, std::span<const ObjHandle> args) const override {
        switch (k) {
            case D1Key::I: return {1, static_cast<std::int64_t>(c_.unit)};
            case D1Key::M:
                return {1, static_cast<std::int64_t>(
                               c_.mul(static_cast<int>(args[0].id), static_cast<int>(args[1].id)))};
            case D1Key::IV: return {2, args[0].id};
            case D1Key::MV:
                if (args[0].id != args[1].id) throw OracleError("m_v: cells not composable");
                return {2, args[0].id};
            case D1Key::WR:
                return {2, static_cast<std::int64_t>(
                               c_.mul(static_cast<int>(args[0].id), static_cast<int>(args[1].id)))};
            case D1Key::WL:
                return {2, static_cast<std::int64_t>(
                               c_.mul(static_cast<int>(args[0].id), static_cast<int>(args[1].id)))};
            case D1Key::IL:
            case D1Key::IR:
            case D1Key::ILL:
            case D1Key::IRL: return {2, args[0].id};
        }
        throw OracleError("apply_d1: bad key");
    }

    MorHandle apply_d1_mor(D1Key k, std::span<const MorHandle> args) const override {
        auto lvl1 = [&](MorHandle f) { return std::pair<std::int64_t, int>{f.id / ord_, static_cast<int>(f.id % ord_)}; };
        switch (k) {
            case D1Key::I: return {1, static_cast<std::int64_t>(c_.unit) * ord_};
            case D1Key::M: {
                auto [g, a] = lvl1(args[0]);
                auto [h, b] = lvl1(args[1]);
                return {1, static_cast<std::int64_t>(c_.mul(static_cast<int>(g), static_cast<int>(h))) * ord_ +
                               (a + b) % ord_};
            }
            case D1Key::IV: {
                auto [g, a] = lvl1(args[0]);
                return {2, (g * ord_ + a) * ord_ + a};
            }
            case D1Key::MV: {
                if (tgt_mor(args[0]) != src_mor(args[1]))
                    throw OracleError("m_v on morphisms: middle mismatch");
                std::int64_t g = args[0].id / (ord_ * ord_);
                int d = static_cast<int>((args[0].id / ord_) % ord_);
                int e = static_cast<int>(args[1].id % ord_);
                return {2, (g * ord_ + d) * ord_ + e};
            }
            case D1Key::WR: {
                std::int64_t g = args[0].id / (ord_ * ord_);
                int d = static_cast<int>((args[0].id / ord_) % ord_);
                int e = static_cast<int>(args[0].id % ord_);
                auto [h, b] = lvl1(args[1]);
                std::int64_t gh = c_.mul(static_cast<int>(g), static_cast<int>(h));
                return {2, (gh * ord_ + (d + b) % ord_) * ord_ + (e + b) % ord_};
            }
            case D1Key::WL: {
                auto [h, b] = lvl1(args[0]);
                std::int64_t g = args[1].id / (ord_ * ord_);
                int d = static_cast<int>((args[1].id / ord_) % ord_);
                int e = static_cast<int>(args[1].id % ord_);
                std::int64_t hg = c_.mul(static_cast<int>(h), static_cast<int>(g));
                return {2, (hg * ord_ + (b + d) % ord_) * ord_ + (b + e) % ord_};
            }
            case D1Key::IL:
            case D1Key::IR:
            case D1Key::ILL:
            case D1Key::IRL: {
                auto [g, a] = lvl1(args[0]);
                return {2, (g * ord_ + a) * ord_ + a};
            }
        }
        throw OracleError("apply_d1_mor: bad key");
    }

    MorHandle d2_component(D2Key k, std::span<const ObjHandle> args) const override {
        if (k == D2Key::HorizAssociator) {
            int g = static_cast<int>(args[0].id);
            int h = static_cast<int>(args[1].id);
            int kk = static_cast<int>(args[2].id);
            std::int64_t ghk = c_.mul(c_.mul(g, h), kk);
            return {1, ghk * ord_ + c_.omega[g][h][kk] % ord_};
        }
        // every other transformation has identity components; compute the
        // common underlying 2-cell of source and target
        ObjHandle cell;
        switch (k) {
            case D2Key::TopIdentity:
            case D2Key::BottomIdentity: cell = args[0]; break;
            case D2Key::VerticalAssociator: cell = args[0]; break;
            case D2Key::RightVertExpansion:
            case D2Key::LeftVertExpansion:
                cell = apply_d1(D1Key::M, std::vector<ObjHandle>{args[0], args[1]});
                cell = {2, cell.id};
                break;
            case D2Key::RightDewhisker:
                cell = apply_d1(D1Key::WR, std::vector<ObjHandle>{args[0], args[2]});
                break;
            case D2Key::LeftDewhisker:
                cell = apply_d1(D1Key::WL, std::vector<ObjHandle>{args[0], args[1]});
                break;
            case D2Key::Switch:
                cell = apply_d1(D1Key::WR, std::vector<ObjHandle>{args[0], ObjHandle{1, args[1].id}});
                break;
            case D2Key::WhiskerAssocRR:
            case D2Key::WhiskerAssocM:
            case D2Key::WhiskerAssocLL: {
                // identity on the triple product cell, covering the associator
                // scalar on both sides
                int g = static_cast<int>(args[0].id);
                int h = static_cast<int>(args[1].id);
                int kk = static_cast<int>(args[2].id);
                std::int64_t ghk = c_.mul(c_.mul(g, h), kk);
                int w = c_.omega[g][h][kk] % ord_;
                return {2, (ghk * ord_ + w) * ord_ + w};
            }
            case D2Key::LeftIdentityPass:
            case D2Key::RightIdentityPass: cell = args[0]; break;
            case D2Key::Swap: cell = {2, static_cast<std::int64_t>(c_.unit)}; break;
            case D2Key::LeftIdExpansion: {
                int d = static_cast<int>(args[0].id);
                int e = static_cast<int>(args[1].id);
                std::int64_t de = c_.mul(d, e);
                int w = c_.omega[c_.unit][d][e] % ord_;  // normalized: zero
                return {2, (de * ord_ + w) * ord_ + 0};
            }
            case D2Key::RightIdExpansion: {
                int d = static_cast<int>(args[0].id);
                int e = static_cast<int>(args[1].id);
                std::int64_t de = c_.mul(d, e);
                int w = (ord_ - c_.omega[d][e][c_.unit] % ord_) % ord_;
                return {2, (de * ord_ + w) * ord_ + 0};
            }
            case D2Key::Flip: {
                int d = static_cast<int>(args[0].id);
                int e = static_cast<int>(args[1].id);
                std::int64_t de = c_.mul(d, e);
                int w = c_.omega[d][c_.unit][e] % ord_;
                return {2, (de * ord_ + w) * ord_ + 0};
            }
            default: throw OracleError("d2_component: bad key");
        }
        return {2, (cell.id * ord_ + 0) * ord_ + 0};
    }

    MorHandle witness_component(WitnessKey, ObjHandle arg) const override {
        return {2, (arg.id * ord_ + 0) * ord_ + 0};
    }

    MorHandle identity(ObjHandle x) const override {
        if (x.level == 0) return {0, 0};
        if (x.level == 1) return {1, x.id * ord_};
        return {2, (x.id * ord_ + 0) * ord_ + 0};
    }

    MorHandle compose(MorHandle f, MorHandle g) const override {
        if (f.level != g.level) throw OracleError("compose: level mismatch");
        if (f.level == 0) return f;
        if (f.level == 1) {
            if (f.id / ord_ != g.id / ord_) throw OracleError("compose: endpoint mismatch");
            return {1, (f.id / ord_) * ord_ + (f.id % ord_ + g.id % ord_) % ord_};
        }
        if (f.id / (ord_ * ord_) != g.id / (ord_ * ord_))
            throw OracleError("compose: endpoint mismatch");
        std::int64_t cell = f.id / (ord_ * ord_);
        int d = static_cast<int>(((f.id / ord_) % ord_ + (g.id / ord_) % ord_) % ord_);
        int e = static_cast<int>((f.id % ord_ + g.id % ord_) % ord_);
        return {2, (cell * ord_ + d) * ord_ + e};
    }

    MorHandle invert(MorHandle f) const override {
        if (f.level == 0) return f;
        if (f.level == 1)
            return {1, (f.id / ord_) * ord_ + (ord_ - f.id % ord_) % ord_};
        std::int64_t cell = f.id / (ord_ * ord_);
        int d = static_cast<int>((ord_ - (f.id / ord_) % ord_) % ord_);
        int e = static_cast<int>((ord_ - f.id % ord_) % ord_);
        return {2, (cell * ord_ + d) * ord_ + e};
    }

    bool is_invertible(MorHandle) const override { return true; }

    double equal_residual(MorHandle f, MorHandle g) const override {
        if (f.level != g.level) throw OracleError("equal_residual: level mismatch");
        return f.id == g.id ? 0.0 : 1.0;
    }

    std::string describe_obj(ObjHandle x) const override {
        if (x.level == 0) return "*";
        return (x.level == 1 ? "g" : "cell g") + std::to_string(x.id);
    }
    std::string describe_mor(MorHandle f) const override {
        return "mor#" + std::to_string(f.id) + "@" + std::to_string(f.level);
    }

    std::optional<MorHandle> transport1(ObjHandle d, MorHandle, MorHandle) const override {
        return identity(d);
    }
    std::optional<MorHandle> transport2(ObjHandle h, MorHandle delta, MorHandle eps) const override {
        std::int64_t cell = h.id;
        int d = static_cast<int>(delta.id % ord_);
        int e = static_cast<int>(eps.id % ord_);
        return MorHandle{2, (cell * ord_ + d) * ord_ + e};
    }

    MorHandle mutate_scale(MorHandle f, std::uint64_t seed) const override {
        if (seed == 0 || ord_ < 2) return f;
        int delta = static_cast<int>(seed % static_cast<std::uint64_t>(ord_));
        if (delta == 0) delta = ord_ / 2 > 0 ? ord_ / 2 : 1;
        if (f.level == 1)
            return {1, (f.id / ord_) * ord_ + (f.id % ord_ + delta) % ord_};
        if (f.level == 2) {
            std::int64_t cell = f.id / (ord_ * ord_);
            int d = static_cast<int>(((f.id / ord_) % ord_ + delta) % ord_);
            int e = static_cast<int>((f.id % ord_ + delta) % ord_);
            return {2, (cell * ord_ + d) * ord_ + e};
        }
        return f;
    }

    const CocycleInstance& instance() const { return c_; }

private:
    CocycleInstance c_;
    std::int64_t n_ = 0;
    int ord_ = 1;
};

}  // namespace

DicatData build_cocycle_instance(const CocycleInstance& c) {
    auto check = validate_group(c);
    if (!check.ok) throw OracleError("invalid cocycle instance: " + check.violations.front());
    return DicatData::wrap(std::make_shared<CocycleOracle>(c));
}

}  // namespace dicat
