#include "dicat/json_io.hpp"

#include <sstream>

namespace dicat {

namespace {

std::string fib_str(FibrationStatus s) {
    switch (s) {
        case FibrationStatus::Pass: return "pass";
        case FibrationStatus::Fail: return "fail";
        case FibrationStatus::Unverifiable: return "unverifiable";
    }
    return "?";
}

}  // namespace

ordered_json report_to_json(const CheckReport& rep) {
    ordered_json j;
    j["schema"] = "report/v1";
    j["instance"] = rep.instance;
    j["seed"] = rep.seed;
    j["tol"] = rep.tol;
    j["structure"] = ordered_json::array();
    for (const auto& it : rep.structure.items) {
        ordered_json row;
        row["item"] = it.item;
        row["ok"] = it.ok;
        row["max_residual"] = it.max_residual;
        if (!it.detail.empty()) row["detail"] = it.detail;
        j["structure"].push_back(row);
    }
    j["structure_ok"] = rep.structure.ok;
    ordered_json fib;
    fib["level1"] = fib_str(rep.fibrations.level1);
    fib["level2"] = fib_str(rep.fibrations.level2);
    fib["failures"] = rep.fibrations.failures;
    j["fibrations"] = fib;
    j["axioms"] = ordered_json::array();
    for (const auto& ax : rep.axioms) {
        ordered_json row;
        row["id"] = ax.id;
        row["probes"] = ax.probes;
        row["failures"] = ax.failures;
        row["max_residual"] = ax.max_residual;
        row["cite"] = ax.cite;
        if (!ax.worst_probe.empty()) row["worst"] = ax.worst_probe;
        if (!ax.failing.empty()) {
            ordered_json fails = ordered_json::array();
            for (const auto& f : ax.failing) {
                ordered_json fr;
                fr["probe_index"] = f.probe_index;
                fr["probe"] = f.probe;
                if (std::isfinite(f.residual)) fr["residual"] = f.residual;
                if (!f.error.empty()) fr["error"] = f.error;
                fails.push_back(fr);
            }
            row["failing"] = fails;
        }
        j["axioms"].push_back(row);
    }
    ordered_json summary;
    std::size_t failed = 0;
    for (const auto& ax : rep.axioms)
        if (!ax.ok()) ++failed;
    summary["axioms_total"] = rep.axioms.size();
    summary["axioms_failed"] = failed;
    summary["max_residual"] = rep.max_axiom_residual();
    summary["pass"] = rep.all_passed();
    j["summary"] = summary;
    return j;
}

std::string report_to_text(const CheckReport& rep) {
    std::ostringstream os;
    os << "instance: " << rep.instance << "  (tol " << rep.tol << ", seed " << rep.seed << ")\n";
    os << "structure: " << (rep.structure.ok ? "ok" : "FAIL") << "\n";
    for (const auto& it : rep.structure.items) {
        if (!it.ok) os << "  FAIL " << it.item << ": " << it.detail << "\n";
    }
    os << "fibrations: s x t level 1 " << fib_str(rep.fibrations.level1) << ", level 2 "
       << fib_str(rep.fibrations.level2) << "\n";
    for (const auto& f : rep.fibrations.failures) os << "  " << f << "\n";
    for (const auto& ax : rep.axioms) {
        os << (ax.ok() ? "pass " : "FAIL ") << ax.id << "  probes " << ax.probes << "  max residual "
           << ax.max_residual;
        if (ax.failures) os << "  failures " << ax.failures;
        if (!ax.cite.empty()) os << "  [" << ax.cite << "]";
        os << "\n";
        for (const auto& f : ax.failing) {
            os << "    at " << f.probe;
            if (!f.error.empty())
                os << "  error: " << f.error;
            else
                os << "  residual " << f.residual;
            os << "\n";
        }
    }
    os << (rep.all_passed() ? "RESULT: pass" : "RESULT: fail") << "\n";
    return os.str();
}

// --- fincat/v1 ---------------------------------------------------------------

namespace {

ordered_json category_to_json(const FinCategory& c) {
    ordered_json j;
    j["name"] = c.name;
    j["objects"] = c.objects;
    j["morphisms"] = ordered_json::array();
    for (const auto& m : c.morphisms)
        j["morphisms"].push_back({{"id", m.id}, {"src", m.src}, {"dst", m.dst}});
    j["composition"] = ordered_json::array();
    for (const auto& [pair, comp] : c.compose)
        j["composition"].push_back({pair.first, pair.second, comp});
    j["identities"] = ordered_json::object();
    for (const auto& [o, m] : c.identities) j["identities"][o] = m;
    return j;
}

FinCategory category_from_json(const ordered_json& j) {
    FinCategory c;
    c.name = j.value("name", "");
    for (const auto& o : j.at("objects")) c.objects.push_back(o.get<std::string>());
    for (const auto& m : j.at("morphisms"))
        c.morphisms.push_back({m.at("id").get<std::string>(), m.at("src").get<std::string>(),
                               m.at("dst").get<std::string>()});
    for (const auto& t : j.at("composition")) {
        if (!t.is_array() || t.size() != 3) throw SchemaError("composition entries must be triples");
        c.compose[{t[0].get<std::string>(), t[1].get<std::string>()}] = t[2].get<std::string>();
    }
    for (auto it = j.at("identities").begin(); it != j.at("identities").end(); ++it)
        c.identities[it.key()] = it.value().get<std::string>();
    return c;
}

}  // namespace

ordered_json fincat_to_json(const FinCatBundle& b) {
    ordered_json j;
    j["schema"] = "fincat/v1";
    j["categories"] = ordered_json::array();
    for (const auto& c : b.categories) j["categories"].push_back(category_to_json(c));
    j["functors"] = ordered_json::array();
    for (const auto& f : b.functors) {
        ordered_json e;
        e["name"] = f.name;
        e["source"] = f.source;
        e["target"] = f.target;
        e["objects"] = f.objects;
        e["morphisms"] = f.morphisms;
        j["functors"].push_back(e);
    }
    j["transformations"] = ordered_json::array();
    for (const auto& t : b.transformations) {
        ordered_json e;
        e["name"] = t.name;
        e["source_functor"] = t.source_functor;
        e["target_functor"] = t.target_functor;
        e["components"] = t.components;
        j["transformations"].push_back(e);
    }
    return j;
}

FinCatBundle fincat_from_json(const ordered_json& j) {
    if (j.value("schema", "") != "fincat/v1") throw SchemaError("expected schema fincat/v1");
    FinCatBundle b;
    for (const auto& c : j.at("categories")) b.categories.push_back(category_from_json(c));
    if (j.contains("functors"))
        for (const auto& f : j.at("functors")) {
            FinCatBundle::FunctorEntry e;
            e.name = f.value("name", "");
            e.source = f.at("source").get<std::string>();
            e.target = f.at("target").get<std::string>();
            for (auto it = f.at("objects").begin(); it != f.at("objects").end(); ++it)
                e.objects[it.key()] = it.value().get<std::string>();
            for (auto it = f.at("morphisms").begin(); it != f.at("morphisms").end(); ++it)
                e.morphisms[it.key()] = it.value().get<std::string>();
            b.functors.push_back(std::move(e));
        }
    if (j.contains("transformations"))
        for (const auto& t : j.at("transformations")) {
            FinCatBundle::TransformEntry e;
            e.name = t.value("name", "");
            e.source_functor = t.at("source_functor").get<std::string>();
            e.target_functor = t.at("target_functor").get<std::string>();
            for (auto it = t.at("components").begin(); it != t.at("components").end(); ++it)
                e.components[it.key()] = it.value().get<std::string>();
            b.transformations.push_back(std::move(e));
        }
    return b;
}

// --- dicat/v1 ---------------------------------------------------------------

namespace {

ordered_json table_to_json(const std::map<std::vector<std::string>, std::string>& t) {
    ordered_json rows = ordered_json::array();
    for (const auto& [args, result] : t) {
        ordered_json row = ordered_json::array();
        for (const auto& a : args) row.push_back(a);
        row.push_back(result);
        rows.push_back(row);
    }
    return rows;
}

std::map<std::vector<std::string>, std::string> table_from_json(const ordered_json& rows) {
    std::map<std::vector<std::string>, std::string> t;
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() < 2) throw SchemaError("table rows need args + result");
        std::vector<std::string> args;
        for (std::size_t i = 0; i + 1 < row.size(); ++i) args.push_back(row[i].get<std::string>());
        t[args] = row.back().get<std::string>();
    }
    return t;
}

const char* witness_name(WitnessKey k) {
    switch (k) {
        case WitnessKey::CancelUpL: return "cancel-up-l";
        case WitnessKey::CancelDownL: return "cancel-down-l";
        case WitnessKey::CancelUpR: return "cancel-up-r";
        case WitnessKey::CancelDownR: return "cancel-down-r";
    }
    return "?";
}

}  // namespace

ordered_json dicat_to_json(const FinCatInstanceData& d) {
    ordered_json j;
    j["schema"] = "dicat/v1";
    j["label"] = d.label;
    j["c0"] = category_to_json(d.c0);
    j["c1"] = category_to_json(d.c1);
    j["c2"] = category_to_json(d.c2);
    j["src1"] = d.src1;
    j["tgt1"] = d.tgt1;
    j["src2"] = d.src2;
    j["tgt2"] = d.tgt2;
    j["src1m"] = d.src1m;
    j["tgt1m"] = d.tgt1m;
    j["src2m"] = d.src2m;
    j["tgt2m"] = d.tgt2m;
    ordered_json d1 = ordered_json::object();
    for (const auto& [k, t] : d.d1) {
        ordered_json e;
        e["objects"] = table_to_json(t.objects);
        e["morphisms"] = table_to_json(t.morphisms);
        d1[d1_name(k)] = e;
    }
    j["d1"] = d1;
    ordered_json d2 = ordered_json::object();
    for (const auto& [k, t] : d.d2) d2[d2_name(k)] = table_to_json(t);
    j["d2"] = d2;
    ordered_json w = ordered_json::object();
    for (const auto& [k, t] : d.witnesses) {
        ordered_json e = ordered_json::object();
        for (const auto& [a, r] : t) e[a] = r;
        w[witness_name(k)] = e;
    }
    j["witnesses"] = w;
    return j;
}

FinCatInstanceData dicat_from_json(const ordered_json& j) {
    if (j.value("schema", "") != "dicat/v1") throw SchemaError("expected schema dicat/v1");
    FinCatInstanceData d;
    d.label = j.value("label", "dicat");
    d.c0 = category_from_json(j.at("c0"));
    d.c1 = category_from_json(j.at("c1"));
    d.c2 = category_from_json(j.at("c2"));
    auto load_map = [&](const char* key, std::map<std::string, std::string>& out) {
        if (!j.contains(key)) return;
        for (auto it = j.at(key).begin(); it != j.at(key).end(); ++it)
            out[it.key()] = it.value().get<std::string>();
    };
    load_map("src1", d.src1);
    load_map("tgt1", d.tgt1);
    load_map("src2", d.src2);
    load_map("tgt2", d.tgt2);
    load_map("src1m", d.src1m);
    load_map("tgt1m", d.tgt1m);
    load_map("src2m", d.src2m);
    load_map("tgt2m", d.tgt2m);
    if (j.contains("d1"))
        for (auto it = j.at("d1").begin(); it != j.at("d1").end(); ++it) {
            auto k = d1_from_name(it.key());
            if (!k) throw SchemaError("unknown structure functor key " + it.key());
            FinCatInstanceData::FunctorTable t;
            t.objects = table_from_json(it.value().at("objects"));
            t.morphisms = table_from_json(it.value().at("morphisms"));
            d.d1[*k] = std::move(t);
        }
    if (j.contains("d2"))
        for (auto it = j.at("d2").begin(); it != j.at("d2").end(); ++it) {
            auto k = d2_from_name(it.key());
            if (!k) throw SchemaError("unknown transformation key " + it.key());
            d.d2[*k] = table_from_json(it.value());
        }
    if (j.contains("witnesses"))
        for (auto it = j.at("witnesses").begin(); it != j.at("witnesses").end(); ++it) {
            WitnessKey k;
            std::string name = it.key();
            if (name == "cancel-up-l") k = WitnessKey::CancelUpL;
            else if (name == "cancel-down-l") k = WitnessKey::CancelDownL;
            else if (name == "cancel-up-r") k = WitnessKey::CancelUpR;
            else if (name == "cancel-down-r") k = WitnessKey::CancelDownR;
            else throw SchemaError("unknown witness key " + name);
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
                d.witnesses[k][jt.key()] = jt.value().get<std::string>();
        }
    return d;
}

// --- cocycle/v1 ---------------------------------------------------------------

ordered_json cocycle_to_json(const CocycleInstance& c) {
    ordered_json j;
    j["schema"] = "cocycle/v1";
    j["label"] = c.label;
    j["group"] = c.group;
    j["unit"] = c.unit;
    j["root_order"] = c.root_order;
    j["omega"] = c.omega;
    return j;
}

CocycleInstance cocycle_from_json(const ordered_json& j) {
    if (j.value("schema", "") != "cocycle/v1") throw SchemaError("expected schema cocycle/v1");
    CocycleInstance c;
    c.label = j.value("label", "cocycle");
    c.group = j.at("group").get<std::vector<std::vector<int>>>();
    c.unit = j.value("unit", 0);
    c.root_order = j.at("root_order").get<int>();
    c.omega = j.at("omega").get<std::vector<std::vector<std::vector<int>>>>();
    return c;
}

// --- morita/v1 ---------------------------------------------------------------

namespace {

CMatrix matrix_from_json(const ordered_json& j, std::size_t rows, std::size_t cols,
                         const std::string& what) {
    CMatrix m(rows, cols);
    if (j.size() != rows) throw SchemaError(what + ": wrong row count");
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& row = j[i];
        if (row.size() != cols) throw SchemaError(what + ": wrong column count");
        for (std::size_t k = 0; k < cols; ++k) {
            const auto& e = row[k];
            if (e.is_number()) {
                m.at(i, k) = e.get<double>();
            } else if (e.is_array() && e.size() == 2) {
                m.at(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
            } else {
                throw SchemaError(what + ": entries are numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

}  // namespace

DicatData morita_from_json(const ordered_json& j, const MoritaConfig& cfg) {
    if (j.value("schema", "") != "morita/v1") throw SchemaError("expected schema morita/v1");
    auto oracle = std::make_shared<MoritaOracle>(cfg);
    std::map<std::string, ObjHandle> algebras;
    std::map<std::string, ObjHandle> bimodules;
    for (const auto& a : j.at("algebras")) {
        std::string label = a.at("label").get<std::string>();
        std::vector<std::size_t> blocks;
        for (const auto& b : a.at("blocks")) blocks.push_back(b.get<std::size_t>());
        algebras[label] = oracle->add_algebra(make_block_algebra(blocks, label));
    }
    if (j.contains("bimodules"))
        for (const auto& b : j.at("bimodules")) {
            Bimodule bim;
            bim.label = b.at("label").get<std::string>();
            std::string left = b.at("left").get<std::string>();
            std::string right = b.at("right").get<std::string>();
            if (!algebras.count(left) || !algebras.count(right))
                throw SchemaError("bimodule " + bim.label + " references unknown algebras");
            bim.left_algebra = algebras[left].id;
            bim.right_algebra = algebras[right].id;
            std::size_t dim = b.at("dim").get<std::size_t>();
            bim.space = {dim, bim.label};
            std::size_t da = oracle->algebra(bim.left_algebra).dim();
            std::size_t db = oracle->algebra(bim.right_algebra).dim();
            if (dim > 0) {
                bim.left_action =
                    matrix_from_json(b.at("left_action"), dim, da * dim, bim.label + ".left");
                bim.right_action =
                    matrix_from_json(b.at("right_action"), dim, dim * db, bim.label + ".right");
            } else {
                bim.left_action = CMatrix(0, 0);
                bim.right_action = CMatrix(0, 0);
            }
            std::string label = bim.label;
            bimodules[label] = oracle->add_bimodule(std::move(bim));
        }
    if (j.contains("maps"))
        for (const auto& mj : j.at("maps")) {
            std::string src = mj.at("source").get<std::string>();
            std::string tgt = mj.at("target").get<std::string>();
            if (!bimodules.count(src) || !bimodules.count(tgt))
                throw SchemaError("map references unknown bimodules");
            const Bimodule& sb = oracle->bimodule(bimodules[src].id);
            const Bimodule& tb = oracle->bimodule(bimodules[tgt].id);
            BimoduleMap m;
            m.source = bimodules[src].id;
            m.target = bimodules[tgt].id;
            m.matrix = matrix_from_json(mj.at("matrix"), tb.dim(), sb.dim(), "map matrix");
            oracle->add_map(std::move(m));
        }
    for (auto a : oracle->algebra_handles()) oracle->add_probe_morphism(oracle->identity(a));
    return DicatData::wrap(oracle);
}

}  // namespace dicat
