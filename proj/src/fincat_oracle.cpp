#include "dicat/fincat_oracle.hpp"

#include <algorithm>

namespace dicat {

FinCatOracle::FinCatOracle(FinCatInstanceData data) : data_(std::move(data)) {
    const FinCategory* cats[3] = {&data_.c0, &data_.c1, &data_.c2};
    for (int l = 0; l < 3; ++l) {
        for (const auto& o : cats[l]->objects) {
            obj_index_[l][o] = static_cast<std::int64_t>(obj_ids_[l].size());
            obj_ids_[l].push_back(o);
        }
        for (const auto& m : cats[l]->morphisms) {
            mor_index_[l][m.id] = static_cast<std::int64_t>(mor_ids_[l].size());
            mor_ids_[l].push_back(m.id);
        }
    }
}

const FinCategory& FinCatOracle::category(int level) const {
    return level == 0 ? data_.c0 : level == 1 ? data_.c1 : data_.c2;
}

ObjHandle FinCatOracle::obj_handle(int level, const std::string& id) const {
    auto it = obj_index_[level].find(id);
    if (it == obj_index_[level].end())
        throw OracleError("unknown level-" + std::to_string(level) + " object " + id);
    return {level, it->second};
}

MorHandle FinCatOracle::mor_handle(int level, const std::string& id) const {
    auto it = mor_index_[level].find(id);
    if (it == mor_index_[level].end())
        throw OracleError("unknown level-" + std::to_string(level) + " morphism " + id);
    return {level, it->second};
}

const std::string& FinCatOracle::obj_id(ObjHandle h) const { return obj_ids_[h.level].at(h.id); }
const std::string& FinCatOracle::mor_id(MorHandle h) const { return mor_ids_[h.level].at(h.id); }

std::vector<ObjHandle> FinCatOracle::probe_objects(int level) const {
    std::vector<ObjHandle> out;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(obj_ids_[level].size()); ++i)
        out.push_back({level, i});
    return out;
}

std::vector<MorHandle> FinCatOracle::probe_morphisms(int level) const {
    std::vector<MorHandle> out;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(mor_ids_[level].size()); ++i)
        out.push_back({level, i});
    return out;
}

namespace {

const std::string& lookup(const std::map<std::string, std::string>& table, const std::string& key,
                          const char* what) {
    auto it = table.find(key);
    if (it == table.end()) throw OracleError(std::string("missing ") + what + " entry for " + key);
    return it->second;
}

}  // namespace

ObjHandle FinCatOracle::src(ObjHandle x) const {
    if (x.level == 1) return obj_handle(0, lookup(data_.src1, obj_id(x), "src1"));
    if (x.level == 2) return obj_handle(1, lookup(data_.src2, obj_id(x), "src2"));
    throw OracleError("src on a 0-cell");
}

ObjHandle FinCatOracle::tgt(ObjHandle x) const {
    if (x.level == 1) return obj_handle(0, lookup(data_.tgt1, obj_id(x), "tgt1"));
    if (x.level == 2) return obj_handle(1, lookup(data_.tgt2, obj_id(x), "tgt2"));
    throw OracleError("tgt on a 0-cell");
}

MorHandle FinCatOracle::src_mor(MorHandle f) const {
    if (f.level == 1) return mor_handle(0, lookup(data_.src1m, mor_id(f), "src1m"));
    if (f.level == 2) return mor_handle(1, lookup(data_.src2m, mor_id(f), "src2m"));
    throw OracleError("src_mor on a 0-level morphism");
}

MorHandle FinCatOracle::tgt_mor(MorHandle f) const {
    if (f.level == 1) return mor_handle(0, lookup(data_.tgt1m, mor_id(f), "tgt1m"));
    if (f.level == 2) return mor_handle(1, lookup(data_.tgt2m, mor_id(f), "tgt2m"));
    throw OracleError("tgt_mor on a 0-level morphism");
}

ObjHandle FinCatOracle::mor_source(MorHandle f) const {
    const auto* m = category(f.level).find_mor(mor_id(f));
    return obj_handle(f.level, m->src);
}

ObjHandle FinCatOracle::mor_target(MorHandle f) const {
    const auto* m = category(f.level).find_mor(mor_id(f));
    return obj_handle(f.level, m->dst);
}

namespace {

int d1_out_level(D1Key k) {
    return (k == D1Key::I || k == D1Key::M) ? 1 : 2;
}

}  // namespace

ObjHandle FinCatOracle::apply_d1(D1Key k, std::span<const ObjHandle> args) const {
    auto it = data_.d1.find(k);
    if (it == data_.d1.end()) throw OracleError("missing structure functor " + d1_name(k));
    std::vector<std::string> key;
    for (auto& a : args) key.push_back(obj_id(a));
    auto jt = it->second.objects.find(key);
    if (jt == it->second.objects.end())
        throw OracleError("structure functor " + d1_name(k) + " undefined at an argument tuple");
    return obj_handle(d1_out_level(k), jt->second);
}

MorHandle FinCatOracle::apply_d1_mor(D1Key k, std::span<const MorHandle> args) const {
    auto it = data_.d1.find(k);
    if (it == data_.d1.end()) throw OracleError("missing structure functor " + d1_name(k));
    std::vector<std::string> key;
    for (auto& a : args) key.push_back(mor_id(a));
    auto jt = it->second.morphisms.find(key);
    if (jt == it->second.morphisms.end())
        throw OracleError("structure functor " + d1_name(k) +
                          " undefined at a morphism tuple");
    return mor_handle(d1_out_level(k), jt->second);
}

MorHandle FinCatOracle::d2_component(D2Key k, std::span<const ObjHandle> args) const {
    auto it = data_.d2.find(k);
    if (it == data_.d2.end()) throw OracleError("missing transformation " + d2_name(k));
    std::vector<std::string> key;
    for (auto& a : args) key.push_back(obj_id(a));
    auto jt = it->second.find(key);
    if (jt == it->second.end())
        throw OracleError("transformation " + d2_name(k) + " undefined at a probe");
    int level = k == D2Key::HorizAssociator ? 1 : 2;
    return mor_handle(level, jt->second);
}

MorHandle FinCatOracle::witness_component(WitnessKey k, ObjHandle arg) const {
    auto it = data_.witnesses.find(k);
    if (it == data_.witnesses.end()) throw OracleError("missing invertibility witness table");
    auto jt = it->second.find(obj_id(arg));
    if (jt == it->second.end()) throw OracleError("witness undefined at a probe");
    return mor_handle(2, jt->second);
}

MorHandle FinCatOracle::identity(ObjHandle x) const {
    return mor_handle(x.level, category(x.level).identity_of(obj_id(x)));
}

MorHandle FinCatOracle::compose(MorHandle f, MorHandle g) const {
    if (f.level != g.level) throw OracleError("compose: level mismatch");
    auto c = category(f.level).compose2(mor_id(f), mor_id(g));
    if (!c) throw OracleError("compose: morphisms not composable");
    return mor_handle(f.level, *c);
}

MorHandle FinCatOracle::invert(MorHandle f) const {
    const FinCategory& c = category(f.level);
    const auto* m = c.find_mor(mor_id(f));
    for (const auto& g : c.morphisms) {
        if (g.src != m->dst || g.dst != m->src) continue;
        auto fg = c.compose2(m->id, g.id);
        auto gf = c.compose2(g.id, m->id);
        if (fg && gf && *fg == c.identity_of(m->src) && *gf == c.identity_of(m->dst))
            return mor_handle(f.level, g.id);
    }
    throw OracleError("invert: morphism " + m->id + " has no inverse");
}

bool FinCatOracle::is_invertible(MorHandle f) const {
    return category(f.level).is_iso(mor_id(f));
}

double FinCatOracle::equal_residual(MorHandle f, MorHandle g) const {
    if (f.level != g.level) throw OracleError("equal_residual: level mismatch");
    return mor_id(f) == mor_id(g) ? 0.0 : 1.0;
}

std::string FinCatOracle::describe_obj(ObjHandle x) const { return obj_id(x); }
std::string FinCatOracle::describe_mor(MorHandle f) const { return mor_id(f); }

std::optional<MorHandle> FinCatOracle::transport1(ObjHandle, MorHandle, MorHandle) const {
    return std::nullopt;  // exhaustive backend: the engine searches instead
}

std::optional<MorHandle> FinCatOracle::transport2(ObjHandle, MorHandle, MorHandle) const {
    return std::nullopt;
}

MorHandle FinCatOracle::mutate_scale(MorHandle f, std::uint64_t seed) const {
    if (seed == 0) return f;
    // pick a different parallel morphism when one exists; otherwise the
    // mutation is undetectable in this discrete backend
    const FinCategory& c = category(f.level);
    const auto* m = c.find_mor(mor_id(f));
    for (const auto& g : c.morphisms)
        if (g.src == m->src && g.dst == m->dst && g.id != m->id) return mor_handle(f.level, g.id);
    return f;
}

// --- trivial instance ------------------------------------------------------------

namespace {

FinCategory terminal_category(const std::string& name, const std::string& obj,
                              const std::string& mor) {
    FinCategory c;
    c.name = name;
    c.objects = {obj};
    c.morphisms = {{mor, obj, obj}};
    c.compose[{mor, mor}] = mor;
    c.identities[obj] = mor;
    return c;
}

}  // namespace

FinCatInstanceData trivial_instance_data() {
    FinCatInstanceData d;
    d.label = "trivial";
    d.c0 = terminal_category("C0", "*", "1");
    d.c1 = terminal_category("C1", "d", "1d");
    d.c2 = terminal_category("C2", "h", "1h");
    d.src1["d"] = "*";
    d.tgt1["d"] = "*";
    d.src2["h"] = "d";
    d.tgt2["h"] = "d";
    d.src1m["1d"] = "1";
    d.tgt1m["1d"] = "1";
    d.src2m["1h"] = "1d";
    d.tgt2m["1h"] = "1d";
    auto& i = d.d1[D1Key::I];
    i.objects[{"*"}] = "d";
    i.morphisms[{"1"}] = "1d";
    auto& m = d.d1[D1Key::M];
    m.objects[{"d", "d"}] = "d";
    m.morphisms[{"1d", "1d"}] = "1d";
    for (D1Key k : {D1Key::IV, D1Key::IL, D1Key::IR, D1Key::ILL, D1Key::IRL}) {
        auto& t = d.d1[k];
        t.objects[{"d"}] = "h";
        t.morphisms[{"1d"}] = "1h";
    }
    auto& mv = d.d1[D1Key::MV];
    mv.objects[{"h", "h"}] = "h";
    mv.morphisms[{"1h", "1h"}] = "1h";
    auto& wr = d.d1[D1Key::WR];
    wr.objects[{"h", "d"}] = "h";
    wr.morphisms[{"1h", "1d"}] = "1h";
    auto& wl = d.d1[D1Key::WL];
    wl.objects[{"d", "h"}] = "h";
    wl.morphisms[{"1d", "1h"}] = "1h";
    for (int n = 1; n <= 18; ++n) {
        D2Key k = static_cast<D2Key>(n);
        const GenSchema& g = gen_schema(k);
        std::vector<std::string> key;
        for (int lv : g.dom.levels) key.push_back(lv == 0 ? "*" : lv == 1 ? "d" : "h");
        d.d2[k][key] = k == D2Key::HorizAssociator ? "1d" : "1h";
    }
    for (WitnessKey k : {WitnessKey::CancelUpL, WitnessKey::CancelDownL, WitnessKey::CancelUpR,
                         WitnessKey::CancelDownR})
        d.witnesses[k]["d"] = "1h";
    return d;
}

DicatData build_trivial_instance() {
    return DicatData::wrap(std::make_shared<FinCatOracle>(trivial_instance_data()));
}

}  // namespace dicat
